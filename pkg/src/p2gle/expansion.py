"""Exact digit codec for the power-2-decaying Gauss-like expansion.

Every x in (0, 1] has a unique expansion

    x = sum_{i>=1} 2^-(d_1 + ... + d_i),   d_i >= 1,

generated by the map T(x) = 2^n x - 1 on the branch 2^-n < x <= 2^-(n-1).
All arithmetic here is exact (``fractions.Fraction``); the branch test is
discontinuous, so floats are never used.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Iterable, Sequence, Union

__all__ = [
    "DomainError",
    "Tail",
    "DigitSequence",
    "CylinderInterval",
    "parse_rational",
    "format_rational",
    "first_digit",
    "apply_T",
    "encode",
    "decode",
    "cylinder",
    "periodic_point",
    "parse_digits",
    "format_digits",
]

RationalLike = Union[Fraction, int, str]


class DomainError(ValueError):
    """Argument outside the domain of an operation."""


class Tail(enum.Enum):
    ALL_ONES = "all_ones"
    UNSPECIFIED = "unspecified"


@dataclass(frozen=True)
class DigitSequence:
    """Finite digit prefix d_1..d_n plus a convention for what follows."""

    digits: tuple[int, ...]
    tail: Tail = Tail.UNSPECIFIED

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))
        for d in self.digits:
            if d < 1:
                raise DomainError(f"digits must be positive integers, got {d}")

    def __len__(self) -> int:
        return len(self.digits)

    def __iter__(self):
        return iter(self.digits)

    def __str__(self) -> str:
        return format_digits(self.digits)


@dataclass(frozen=True)
class CylinderInterval:
    """Half-open interval (left, right] of points sharing a digit prefix."""

    left: Fraction
    right: Fraction
    depth: int

    @property
    def length(self) -> Fraction:
        return self.right - self.left

    def __contains__(self, x) -> bool:
        x = Fraction(x)
        return self.left < x <= self.right


def parse_rational(value: RationalLike) -> Fraction:
    """Parse ``"p/q"``, an integer, or a finite decimal string exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        raise TypeError("floats are not accepted; pass a 'p/q' or decimal string")
    text = str(value).strip()
    if "/" in text:
        num, _, den = text.partition("/")
        try:
            return Fraction(int(num), int(den))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse rational {value!r}") from exc
    try:
        dec = Decimal(text)
    except InvalidOperation as exc:
        raise ValueError(f"cannot parse rational {value!r}") from exc
    if not dec.is_finite():
        raise ValueError(f"cannot parse rational {value!r}")
    return Fraction(dec)


def format_rational(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _check_unit(x: Fraction) -> Fraction:
    x = parse_rational(x)
    if not 0 < x <= 1:
        raise DomainError(f"x must lie in (0, 1], got {format_rational(x)}")
    return x


def first_digit(x: RationalLike) -> int:
    """Return the n with 2^-n < x <= 2^-(n-1).

    Dyadic points 2^-k fall in the branch with n = k + 1 (upper endpoint
    inclusive), so their expansion ends in an all-ones tail.
    """
    x = _check_unit(x)
    p, q = x.numerator, x.denominator
    # initial guess from bit lengths, then exact correction
    n = max(1, q.bit_length() - p.bit_length())
    while n > 1 and (p << (n - 1)) > q:
        n -= 1
    while (p << n) <= q:
        n += 1
    return n


def apply_T(x: RationalLike) -> Fraction:
    x = _check_unit(x)
    return x * (1 << first_digit(x)) - 1


def encode(x: RationalLike, n: int) -> DigitSequence:
    """First ``n`` digits of ``x`` by exact orbit iteration."""
    if n < 0:
        raise ValueError("depth must be non-negative")
    x = _check_unit(x)
    digits = []
    for _ in range(n):
        d = first_digit(x)
        digits.append(d)
        x = x * (1 << d) - 1
    return DigitSequence(tuple(digits), Tail.UNSPECIFIED)


def cylinder(digits: Iterable[int]) -> CylinderInterval:
    """Cylinder I_n(d_1, ..., d_n) = (s, s + 2^-(d_1+...+d_n)]."""
    digits = tuple(digits)
    total = 0
    left = Fraction(0)
    for d in digits:
        if d < 1:
            raise DomainError(f"digits must be positive integers, got {d}")
        total += d
        left += Fraction(1, 1 << total)
    return CylinderInterval(left, left + Fraction(1, 1 << total), len(digits))


def decode(seq: DigitSequence | Sequence[int], tail: Tail | None = None):
    """Decode a digit prefix.

    With an all-ones tail the exact point is returned (the right endpoint
    of the cylinder); otherwise the cylinder itself, since a finite prefix
    only pins down an interval.
    """
    if isinstance(seq, DigitSequence):
        digits = seq.digits
        tail = seq.tail if tail is None else tail
    else:
        digits = tuple(seq)
        tail = Tail.UNSPECIFIED if tail is None else tail
    if not digits:
        raise ValueError("cannot decode an empty digit sequence")
    interval = cylinder(digits)
    if tail is Tail.ALL_ONES:
        return interval.right
    return interval


def periodic_point(period: Sequence[int]) -> Fraction:
    """Exact value of the point whose digits repeat ``period`` forever.

    y = A + 2^-S y, with A the decoded partial sum of one period and S the
    period's digit total.
    """
    period = tuple(period)
    if not period:
        raise ValueError("period must be non-empty")
    head = cylinder(period)
    total = sum(period)
    return head.left / (1 - Fraction(1, 1 << total))


def parse_digits(text: str) -> tuple[int, ...]:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    try:
        digits = tuple(int(p) for p in parts)
    except ValueError as exc:
        raise ValueError(f"cannot parse digit list {text!r}") from exc
    if any(d < 1 for d in digits):
        raise DomainError("digits must be positive integers")
    return digits


def format_digits(digits: Iterable[int]) -> str:
    return ",".join(str(d) for d in digits)
