"""Birkhoff spectra t(xi): closed forms and the Newton-solved pressure system.

The level set {Birkhoff average of f = xi} has Hausdorff dimension t, where
(t, q) solves

    P(t, q) = q xi,    dP/dq (t, q) = xi.

For the digit itself (Khintchine) and for log|T'| (Lyapunov) the solution is
explicit; for log d and 2^d it is found by damped Newton iteration.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .expansion import DomainError
from .pressure import (
    LOG2,
    PotentialKind,
    PressurePoint,
    SeriesConvergenceError,
    in_domain,
    pressure,
    xi0,
)

__all__ = [
    "Method",
    "SpectrumSolution",
    "SpectrumCurve",
    "NonConvergenceError",
    "khintchine_spectrum",
    "khintchine_second_derivative",
    "inflection_function",
    "khintchine_inflection",
    "count_sign_changes",
    "lyapunov_spectrum",
    "solve_system",
    "spectrum_curve",
    "boundary_dimension",
    "admissible",
    "level_solution",
]

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 100
MAX_HALVINGS = 60


class Method(enum.Enum):
    CLOSED_FORM = "closed_form"
    NEWTON = "newton"
    BOUNDARY = "boundary"


class NonConvergenceError(ArithmeticError):
    def __init__(self, message, xi=None, residual=None, iterations=None):
        super().__init__(message)
        self.xi = xi
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class SpectrumSolution:
    xi: float
    t: float
    q: float
    t_prime: float
    residual_P: float = 0.0
    residual_dPdq: float = 0.0
    iterations: int = 0
    method: Method = Method.CLOSED_FORM

    def as_dict(self) -> dict:
        return {
            "xi": self.xi,
            "t": self.t,
            "q": self.q,
            "t_prime": self.t_prime,
            "residual_P": self.residual_P,
            "residual_dPdq": self.residual_dPdq,
            "iterations": self.iterations,
            "method": self.method.value,
        }


@dataclass(frozen=True)
class SpectrumCurve:
    kind: PotentialKind
    rows: list[SpectrumSolution] = field(default_factory=list)

    @property
    def xi(self) -> np.ndarray:
        return np.array([r.xi for r in self.rows])

    @property
    def t(self) -> np.ndarray:
        return np.array([r.t for r in self.rows])

    @property
    def q(self) -> np.ndarray:
        return np.array([r.q for r in self.rows])

    @property
    def t_prime(self) -> np.ndarray:
        return np.array([r.t_prime for r in self.rows])


# --- closed forms --------------------------------------------------------------

def khintchine_spectrum(xi: float) -> SpectrumSolution:
    """Dimension of {mean digit = xi}; xi = 1 is the boundary value 0."""
    if not xi >= 1:
        raise DomainError(f"Khintchine spectrum requires xi >= 1, got {xi}")
    if xi == 1:
        return SpectrumSolution(1.0, 0.0, -math.inf, math.inf, method=Method.BOUNDARY)
    if math.isinf(xi):
        return SpectrumSolution(xi, 0.0, 0.0, 0.0, method=Method.BOUNDARY)
    lm = math.log(xi - 1)
    q = lm / xi
    # log(xi/(xi-1)) + log(xi-1)/xi, arranged to avoid cancellation near xi = 1
    t = (math.log1p(1.0 / (xi - 1)) + q) / LOG2
    t_prime = -lm / (xi * xi * LOG2)
    return SpectrumSolution(xi, t, q, t_prime)


def khintchine_second_derivative(xi: float) -> float:
    if not xi > 1:
        raise DomainError(f"t'' requires xi > 1, got {xi}")
    return inflection_function(xi) / (xi**3 * (xi - 1) * LOG2)


def inflection_function(xi):
    """Numerator of t'': 2 (xi-1) log(xi-1) - xi."""
    return 2 * (xi - 1) * np.log(xi - 1) - xi


def khintchine_inflection(tol: float = 1e-13) -> float:
    """Unique zero of t'' by bisection on [3, 1 + e]."""
    lo, hi = 3.0, 1.0 + math.e
    f_lo = inflection_function(lo)
    if not (f_lo < 0 < inflection_function(hi)):
        raise ArithmeticError("inflection bracket lost its sign change")
    mid = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = inflection_function(mid)
        if abs(f_mid) < tol or hi - lo <= 4 * np.spacing(mid):
            break
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return float(mid)


def count_sign_changes(lo: float = 1.01, hi: float = 50.0, points: int = 10_000) -> int:
    """Sign changes of the closed-form t'' on an evenly spaced grid."""
    xi = np.linspace(lo, hi, points)
    s = np.sign(inflection_function(xi))
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def lyapunov_spectrum(beta: float) -> SpectrumSolution:
    """Dimension of {Lyapunov exponent = beta}.

    Since log|T'| = d_1 log 2, this is the Khintchine spectrum at
    beta / log 2, with q rescaled by 1/log 2 and t' by 1/log 2.
    """
    if not beta >= LOG2:
        raise DomainError(f"Lyapunov spectrum requires beta >= log 2, got {beta}")
    if beta == LOG2:
        return SpectrumSolution(beta, 0.0, -math.inf, math.inf, method=Method.BOUNDARY)
    t = (1.0 / beta) * math.log(beta / LOG2 - 1) - math.log1p(-LOG2 / beta) / LOG2
    k = khintchine_spectrum(beta / LOG2)
    return SpectrumSolution(beta, t, k.q / LOG2, k.t_prime / LOG2)


# --- Newton solver -------------------------------------------------------------

_LOWER = {
    PotentialKind.KHINTCHINE: 1.0,
    PotentialKind.LYAPUNOV: LOG2,
    PotentialKind.LOG_DIGIT: 0.0,
    PotentialKind.EXP_DIGIT: 2.0,
}


def admissible(kind: PotentialKind, xi: float) -> bool:
    return math.isfinite(xi) and xi > _LOWER[kind]


def _anchor(kind: PotentialKind) -> tuple[float, tuple[float, float]]:
    """A level value with a known (or easily reached) solution."""
    if kind is PotentialKind.KHINTCHINE:
        return 2.0, (1.0, 0.0)
    if kind is PotentialKind.LYAPUNOV:
        return 2.0 * LOG2, (1.0, 0.0)
    if kind is PotentialKind.LOG_DIGIT:
        return xi0(), (1.0, 0.0)
    return 3.0, (0.5, -1.0)


def _default_start(kind: PotentialKind, xi: float) -> tuple[float, float]:
    if kind is PotentialKind.LOG_DIGIT:
        return (1.0, 0.0)
    if kind is PotentialKind.EXP_DIGIT:
        return (0.5, -1.0)
    # deliberately not the closed form, so the solver is checked against it
    return (0.5, 0.0)


def _residual(kind, t, q, xi):
    ev = pressure(kind, t, q)
    f = np.array([ev.value - q * xi, ev.dP_dq - xi])
    return ev, f


# exp-digit solutions have q ~ -2^-xi; iterate in s = log(-q) there
def _to_internal(kind, t, q):
    if kind is PotentialKind.EXP_DIGIT:
        return t, math.log(-q)
    return t, q


def _from_internal(kind, t, s):
    if kind is PotentialKind.EXP_DIGIT:
        return t, -math.exp(s)
    return t, s


def _newton(kind, xi, t, q, tol, max_iter):
    ev, f = _residual(kind, t, q, xi)
    norm = float(np.max(np.abs(f)))
    u, v = _to_internal(kind, t, q)
    for it in range(1, max_iter + 1):
        if norm < tol:
            return t, q, ev, f, it - 1
        dq_dv = q if kind is PotentialKind.EXP_DIGIT else 1.0
        jac = np.array(
            [[ev.dP_dt, (ev.dP_dq - xi) * dq_dv], [ev.d2P_dtdq, ev.d2P_dq2 * dq_dv]]
        )
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError as exc:
            raise NonConvergenceError(f"singular Jacobian at xi={xi}", xi, norm, it) from exc
        if not np.all(np.isfinite(step)):
            raise NonConvergenceError(f"non-finite Newton step at xi={xi}", xi, norm, it)
        lam = 1.0
        for _ in range(MAX_HALVINGS):
            u_new, v_new = u + lam * step[0], v + lam * step[1]
            try:
                t_new, q_new = _from_internal(kind, u_new, v_new)
            except OverflowError:
                t_new = q_new = math.nan
            if in_domain(kind, t_new, q_new):
                try:
                    ev_new, f_new = _residual(kind, t_new, q_new, xi)
                except (SeriesConvergenceError, OverflowError):
                    ev_new = None
                if ev_new is not None and np.all(np.isfinite(f_new)):
                    new_norm = float(np.max(np.abs(f_new)))
                    if new_norm < norm:
                        break
            lam *= 0.5
        else:
            if norm < tol:
                return t, q, ev, f, it
            raise NonConvergenceError(
                f"damping failed at xi={xi} (residual {norm:.3e})", xi, norm, it
            )
        u, v = u_new, v_new
        t, q, ev, f, norm = t_new, q_new, ev_new, f_new, new_norm
    if norm < tol:
        return t, q, ev, f, max_iter
    raise NonConvergenceError(
        f"no convergence at xi={xi} after {max_iter} iterations (residual {norm:.3e})",
        xi,
        norm,
        max_iter,
    )


def _solution(kind, xi, t, q, ev, f, iterations) -> SpectrumSolution:
    if t > 1.0:
        # 1 - t can be below double resolution (exp-digit, large xi); Newton
        # then lands an ulp above 1.  Project back if the residual still holds.
        ev1, f1 = _residual(kind, 1.0, q, xi)
        if np.max(np.abs(f1)) <= np.max(np.abs(f)):
            t, ev, f = 1.0, ev1, f1
    return SpectrumSolution(
        xi=xi,
        t=t,
        q=q,
        t_prime=q / ev.dP_dt + 0.0,
        residual_P=float(abs(f[0])),
        residual_dPdq=float(abs(f[1])),
        iterations=iterations,
        method=Method.NEWTON,
    )


def _continuation(kind, xi, tol, max_iter):
    """March from the anchor level to xi, warm-starting each solve."""
    xi_a, (t, q) = _anchor(kind)
    total_iter = 0
    cur = xi_a
    # geometric steps in the distance to the lower boundary of admissible xi
    lower = _LOWER[kind]
    frac = 0.1
    while cur != xi:
        if xi > cur:
            nxt = min(xi, lower + (cur - lower) * (1 + frac))
        else:
            nxt = max(xi, lower + (cur - lower) / (1 + frac))
        try:
            t_n, q_n, ev, f, its = _newton(kind, nxt, t, q, tol, max_iter)
        except NonConvergenceError:
            frac *= 0.5
            if frac < 1e-6:
                raise
            continue
        total_iter += its
        t, q, cur = t_n, q_n, nxt
        frac = min(frac * 1.5, 0.5)
    return t, q, ev, f, total_iter


def solve_system(
    kind,
    xi: float,
    initial: Optional[PressurePoint] = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SpectrumSolution:
    """Solve P(t,q) = q xi, dP/dq = xi for (t, q) by damped Newton.

    Steps are halved until the iterate stays in the pressure domain and the
    max-norm residual decreases.  Without an explicit ``initial`` point a
    failed direct solve falls back to continuation from a known level.
    """
    kind = PotentialKind.parse(kind)
    if not admissible(kind, xi):
        raise DomainError(f"xi={xi} is not admissible for {kind.value}")
    if initial is not None:
        t0, q0 = initial.t, initial.q
        if not in_domain(kind, t0, q0):
            raise DomainError(f"initial point ({t0}, {q0}) outside the domain")
        return _solution(kind, xi, *_newton(kind, xi, t0, q0, tol, max_iter))
    t0, q0 = _default_start(kind, xi)
    try:
        return _solution(kind, xi, *_newton(kind, xi, t0, q0, tol, max_iter))
    except NonConvergenceError as exc:
        log.debug("direct Newton failed (%s); using continuation", exc)
    return _solution(kind, xi, *_continuation(kind, xi, tol, max_iter))


def spectrum_curve(
    kind,
    xi_min: float,
    xi_max: float,
    steps: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    newton: Optional[bool] = None,
) -> SpectrumCurve:
    """Spectrum on an evenly spaced grid of ``steps`` points.

    Khintchine and Lyapunov use their closed forms unless ``newton`` is set;
    the other potentials are solved with continuation from row to row.
    """
    kind = PotentialKind.parse(kind)
    if steps < 2:
        raise ValueError("steps must be at least 2")
    if not xi_max > xi_min:
        raise ValueError("xi_max must exceed xi_min")
    grid = np.linspace(xi_min, xi_max, steps)
    closed = kind in (PotentialKind.KHINTCHINE, PotentialKind.LYAPUNOV)
    if newton is None:
        newton = not closed
    rows: list[SpectrumSolution] = []
    if not newton:
        fn = khintchine_spectrum if kind is PotentialKind.KHINTCHINE else lyapunov_spectrum
        return SpectrumCurve(kind, [fn(float(x)) for x in grid])
    for x in grid:
        x = float(x)
        if not admissible(kind, x):
            raise DomainError(f"xi={x} is not admissible for {kind.value}")
        prev = rows[-1] if rows else None
        try:
            if prev is None:
                sol = solve_system(kind, x, tol=tol, max_iter=max_iter)
            else:
                start = PressurePoint(prev.t, prev.q, kind)
                try:
                    sol = solve_system(kind, x, start, tol=tol, max_iter=max_iter)
                except NonConvergenceError:
                    sol = solve_system(kind, x, tol=tol, max_iter=max_iter)
        except NonConvergenceError as exc:
            raise NonConvergenceError(
                f"spectrum curve failed at xi={x}: {exc}", x, exc.residual, exc.iterations
            ) from exc
        rows.append(sol)
    return SpectrumCurve(kind, rows)


_BOUNDARY = {
    (PotentialKind.KHINTCHINE, "lower"): 0.0,
    (PotentialKind.LYAPUNOV, "lower"): 0.0,
    (PotentialKind.LOG_DIGIT, "lower"): 0.0,
    (PotentialKind.EXP_DIGIT, "lower"): 0.0,
    (PotentialKind.EXP_DIGIT, "infinity"): 1.0,
}


def boundary_dimension(kind, where: str = "lower") -> float:
    """Dimension at a boundary level where the system has no solution.

    ``"lower"`` is xi = 1 (Khintchine), log 2 (Lyapunov), 0 (log-digit) or
    2 (exp-digit); ``"infinity"`` is only defined for the exp-digit potential.
    """
    kind = PotentialKind.parse(kind)
    try:
        return _BOUNDARY[(kind, where)]
    except KeyError:
        raise DomainError(f"no boundary dimension for {kind.value} at {where!r}") from None


def level_solution(
    kind,
    xi: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    newton: bool = False,
) -> SpectrumSolution:
    """Spectrum at one level, including boundary levels.

    Boundary levels carry the stored dimension with the limiting values of
    q and t' (q -> -inf and t' -> inf at the lower end; q -> 0 and t' -> 0
    as xi -> inf for the exp-digit potential).
    """
    kind = PotentialKind.parse(kind)
    if math.isinf(xi) and xi > 0:
        t = boundary_dimension(kind, "infinity")
        return SpectrumSolution(xi, t, 0.0, 0.0, method=Method.BOUNDARY)
    if xi == _LOWER[kind]:
        t = boundary_dimension(kind, "lower")
        return SpectrumSolution(xi, t, -math.inf, math.inf, method=Method.BOUNDARY)
    if not newton:
        if kind is PotentialKind.KHINTCHINE:
            return khintchine_spectrum(xi)
        if kind is PotentialKind.LYAPUNOV:
            return lyapunov_spectrum(xi)
    return solve_system(kind, xi, tol=tol, max_iter=max_iter)
