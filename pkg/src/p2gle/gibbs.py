"""Gibbs measures as i.i.d. digit laws, sampling, and empirical checks.

For potentials that depend only on the first digit the equilibrium measure
of (t, q) is Bernoulli: digits are independent with

    p_n = exp(-n t log2 + q f(n) - P(t, q)).

Under the measure at the solved (t(xi), q(xi)) the Birkhoff average of f is
xi almost surely and the cylinder local dimension log mu(I_n) / log|I_n|
tends to t(xi).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .expansion import DigitSequence, DomainError, Tail
from .pressure import LOG2, PotentialKind, digit_functional, in_domain, pressure
from .spectrum import khintchine_spectrum, lyapunov_spectrum, solve_system

__all__ = [
    "SupportError",
    "DigitDistribution",
    "SampleReport",
    "digit_distribution",
    "make_generator",
    "sample_digits",
    "sample_digit_matrix",
    "birkhoff_average",
    "local_dimension",
    "solved_parameters",
    "empirical_level_set_check",
]

TAIL_MASS = 1e-15
MAX_SUPPORT = 10_000_000
_ROWS_PER_BLOCK = 64


class SupportError(ValueError):
    """A digit outside the support of a truncated distribution."""


@dataclass(frozen=True, eq=False)
class DigitDistribution:
    kind: PotentialKind
    t: float
    q: float
    pmf: np.ndarray
    tail_mass_bound: float
    raw_mass: float  # sum of exp(a_n - P) before renormalization

    @property
    def support_cap(self) -> int:
        return len(self.pmf)

    @property
    def digits(self) -> np.ndarray:
        return np.arange(1, self.support_cap + 1)

    @property
    def cdf(self) -> np.ndarray:
        c = np.cumsum(self.pmf)
        c[-1] = 1.0
        return c

    @property
    def log_pmf(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.pmf)

    def mean(self, values=None) -> float:
        if values is None:
            values = digit_functional(self.kind, self.digits.astype(float))
        return float(np.dot(self.pmf, values))

    def variance(self, values=None) -> float:
        if values is None:
            values = digit_functional(self.kind, self.digits.astype(float))
        m = float(np.dot(self.pmf, values))
        return float(np.dot(self.pmf, (values - m) ** 2))


def _geometric(kind, t, q, x):
    # p_n = (1 - r) r^(n-1), r = e^x; tail beyond N is r^N
    n_cap = max(1, math.ceil(math.log(TAIL_MASS) / x))
    n = np.arange(n_cap, dtype=float)
    pmf = -math.expm1(x) * np.exp(x * n)
    tail = math.exp(x * n_cap)
    raw = float(pmf.sum())
    return pmf / raw, tail, raw


def digit_distribution(kind, t: float, q: float) -> DigitDistribution:
    """Digit law of the Gibbs measure mu_{t,q}, truncated where the
    certified tail mass drops below 1e-15, then renormalized."""
    kind = PotentialKind.parse(kind)
    if not in_domain(kind, t, q):
        raise DomainError(f"(t={t}, q={q}) outside the {kind.value} pressure domain")
    if kind is PotentialKind.KHINTCHINE:
        pmf, tail, raw = _geometric(kind, t, q, q - t * LOG2)
        return DigitDistribution(kind, t, q, pmf, tail, raw)
    if kind is PotentialKind.LYAPUNOV:
        pmf, tail, raw = _geometric(kind, t, q, (q - t) * LOG2)
        return DigitDistribution(kind, t, q, pmf, tail, raw)

    big_p = pressure(kind, t, q).value
    n_cap = 64
    while True:
        n = np.arange(1, n_cap + 1, dtype=float)
        a = -n * t * LOG2 + q * digit_functional(kind, n)
        logp = a - big_p
        # ratio bound of consecutive weights beyond n_cap
        if kind is PotentialKind.LOG_DIGIT:
            log_rho = -t * LOG2 + max(0.0, q) * math.log1p(1.0 / n_cap)
        else:
            log_rho = -t * LOG2 + q * 2.0 ** min(n_cap, 1000)
        if log_rho < 0:
            rho = math.exp(log_rho)
            tail = math.exp(float(logp[-1])) * rho / (1 - rho)
            if tail < TAIL_MASS:
                break
        n_cap *= 2
        if n_cap > MAX_SUPPORT:
            raise SupportError(
                f"{kind.value} digit law at (t={t}, q={q}) needs more than "
                f"{MAX_SUPPORT} digits"
            )
    # drop the far tail that underflows; it is inside the certified bound
    pmf = np.exp(logp)
    nz = np.nonzero(pmf)[0]
    pmf = pmf[: nz[-1] + 1]
    raw = float(pmf.sum())
    return DigitDistribution(kind, t, q, pmf / raw, tail, raw)


def make_generator(seed: int) -> np.random.Generator:
    """Counter-based Philox stream; reproducible across platforms."""
    return np.random.Generator(np.random.Philox(seed))


def _draw(dist: DigitDistribution, rng: np.random.Generator, shape) -> np.ndarray:
    u = rng.random(shape)
    idx = np.searchsorted(dist.cdf, u, side="right")
    np.minimum(idx, dist.support_cap - 1, out=idx)
    return idx + 1


def sample_digits(dist: DigitDistribution, depth: int, seed: int) -> DigitSequence:
    if depth < 1:
        raise ValueError("depth must be at least 1")
    digits = _draw(dist, make_generator(seed), depth)
    return DigitSequence(tuple(int(d) for d in digits), Tail.UNSPECIFIED)


def sample_digit_matrix(dist: DigitDistribution, n_points: int, depth: int, seed: int):
    """Yield blocks of i.i.d. digit rows; row 0 matches ``sample_digits``."""
    if depth < 1 or n_points < 1:
        raise ValueError("depth and n_points must be at least 1")
    rng = make_generator(seed)
    done = 0
    while done < n_points:
        rows = min(_ROWS_PER_BLOCK, n_points - done)
        yield _draw(dist, rng, (rows, depth))
        done += rows


def _as_array(d) -> np.ndarray:
    if isinstance(d, DigitSequence):
        d = d.digits
    arr = np.asarray(d, dtype=np.int64)
    if arr.size == 0:
        raise ValueError("empty digit sequence")
    return arr


def birkhoff_average(d, kind) -> float:
    """(1/n) sum f(d_j); f(d) = d log 2 for the Lyapunov exponent."""
    kind = PotentialKind.parse(kind)
    arr = _as_array(d)
    vals = digit_functional(kind, arr.astype(float))
    if kind is PotentialKind.EXP_DIGIT:
        return math.fsum(vals) / arr.size
    return float(vals.sum()) / arr.size


def local_dimension(d, dist: DigitDistribution) -> float:
    """log mu(I_n) / log |I_n| for the cylinder of the digit prefix."""
    arr = _as_array(d)
    if arr.max() > dist.support_cap or arr.min() < 1:
        raise SupportError(
            f"digit {int(arr.max())} outside the support 1..{dist.support_cap}"
        )
    log_mu = float(dist.log_pmf[arr - 1].sum())
    return log_mu / (-LOG2 * float(arr.sum()))


def _row_stats(block: np.ndarray, dist: DigitDistribution):
    kind = dist.kind
    if kind is PotentialKind.EXP_DIGIT:
        vals = np.exp2(block.astype(float))
        birk = np.array([math.fsum(row) for row in vals]) / block.shape[1]
    else:
        birk = digit_functional(kind, block.astype(float)).mean(axis=1)
    log_mu = dist.log_pmf[block - 1].sum(axis=1)
    loc = log_mu / (-LOG2 * block.sum(axis=1))
    return birk, loc


@dataclass(frozen=True)
class SampleReport:
    kind: str
    xi: float
    t: float
    q: float
    n_points: int
    depth: int
    seed: int
    birkhoff_mean: float
    birkhoff_stderr: float
    local_dimension_mean: float
    local_dimension_stderr: float

    def as_dict(self) -> dict:
        return asdict(self)


def solved_parameters(kind, xi: float, tol: float = 1e-12, max_iter: int = 100):
    kind = PotentialKind.parse(kind)
    if kind is PotentialKind.KHINTCHINE:
        sol = khintchine_spectrum(xi)
    elif kind is PotentialKind.LYAPUNOV:
        sol = lyapunov_spectrum(xi)
    else:
        sol = solve_system(kind, xi, tol=tol, max_iter=max_iter)
    if not math.isfinite(sol.q):
        raise DomainError(f"xi={xi} is a boundary level; no Gibbs measure concentrates there")
    return sol


def _stderr(x: np.ndarray) -> float:
    if x.size < 2:
        return 0.0
    return float(x.std(ddof=1) / math.sqrt(x.size))


def empirical_level_set_check(
    kind, xi: float, n_points: int, depth: int, seed: int, tol: float = 1e-12,
    max_iter: int = 100,
) -> SampleReport:
    """Sample mu_{t(xi), q(xi)} and average Birkhoff sums and local dimensions."""
    kind = PotentialKind.parse(kind)
    sol = solved_parameters(kind, xi, tol, max_iter)
    dist = digit_distribution(kind, sol.t, sol.q)
    birk, loc = [], []
    for block in sample_digit_matrix(dist, n_points, depth, seed):
        b, l = _row_stats(block, dist)
        birk.append(b)
        loc.append(l)
    birk = np.concatenate(birk)
    loc = np.concatenate(loc)
    return SampleReport(
        kind=kind.value,
        xi=float(xi),
        t=float(sol.t),
        q=float(sol.q),
        n_points=n_points,
        depth=depth,
        seed=seed,
        birkhoff_mean=float(birk.mean()),
        birkhoff_stderr=_stderr(birk),
        local_dimension_mean=float(loc.mean()),
        local_dimension_stderr=_stderr(loc),
    )
