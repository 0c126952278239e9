"""Pressure functions P(t, q) for the digit potentials and their partials.

For a potential depending only on the first digit, the pressure reduces to

    P(t, q) = log sum_{n>=1} exp(a_n),   a_n = -n t log 2 + q f(n),

and the normalized weights exp(a_n - P) form a probability vector on the
digits.  Every partial derivative is then a moment of that vector:

    dP/dq = E[f],  dP/dt = -log2 E[n],  d2P/dq2 = Var f,
    d2P/dt2 = log2^2 Var n,  d2P/dtdq = -log2 Cov(n, f).
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np

from . import _series
from ._series import BERNOULLI_EVEN, SeriesConvergenceError
from .expansion import DomainError

__all__ = [
    "LOG2",
    "PotentialKind",
    "PressurePoint",
    "PressureEval",
    "SeriesConvergenceError",
    "in_domain",
    "digit_functional",
    "pressure",
    "pressure_khintchine",
    "pressure_lyapunov",
    "pressure_logdigit",
    "pressure_expdigit",
    "zeta",
    "xi0",
]

LOG2 = math.log(2.0)


class PotentialKind(enum.Enum):
    KHINTCHINE = "khintchine"
    LOG_DIGIT = "logdigit"
    EXP_DIGIT = "expdigit"
    LYAPUNOV = "lyapunov"

    @classmethod
    def parse(cls, value) -> "PotentialKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        for kind in cls:
            if kind.value == key:
                return kind
        raise ValueError(f"unknown potential {value!r}")


def digit_functional(kind: PotentialKind, n):
    """f(n) for the potential; works elementwise on numpy arrays."""
    if kind is PotentialKind.KHINTCHINE:
        return n
    if kind is PotentialKind.LYAPUNOV:
        return n * LOG2
    if kind is PotentialKind.LOG_DIGIT:
        return np.log(n)
    if kind is PotentialKind.EXP_DIGIT:
        return np.exp2(n)
    raise ValueError(kind)


def in_domain(kind: PotentialKind, t: float, q: float) -> bool:
    if kind is PotentialKind.KHINTCHINE:
        return q - t * LOG2 < 0
    if kind is PotentialKind.LYAPUNOV:
        return q * LOG2 - t * LOG2 < 0
    if kind is PotentialKind.LOG_DIGIT:
        return t > 0 or (t == 0 and q < -1)
    if kind is PotentialKind.EXP_DIGIT:
        return (t > 0 and q <= 0) or (t >= 0 and q < 0)
    raise ValueError(kind)


@dataclass(frozen=True)
class PressurePoint:
    t: float
    q: float
    kind: PotentialKind

    @property
    def in_domain(self) -> bool:
        return in_domain(self.kind, self.t, self.q)


@dataclass(frozen=True)
class PressureEval:
    value: float
    dP_dt: float
    dP_dq: float
    d2P_dq2: float
    d2P_dtdq: float
    d2P_dt2: float
    truncation_N: int = 0
    tail_bound: float = 0.0

    @property
    def hessian_det(self) -> float:
        return self.d2P_dt2 * self.d2P_dq2 - self.d2P_dtdq**2


def _require(kind: PotentialKind, t: float, q: float) -> None:
    if not (math.isfinite(t) and math.isfinite(q)) or not in_domain(kind, t, q):
        raise DomainError(f"(t={t}, q={q}) outside the {kind.value} pressure domain")


def pressure_khintchine(t: float, q: float) -> PressureEval:
    """Closed form: with r = e^(q - t log2), P = log(r / (1 - r))."""
    _require(PotentialKind.KHINTCHINE, t, q)
    x = q - t * LOG2
    r = math.exp(x)
    one_m_r = -math.expm1(x)
    var = r / one_m_r**2
    return PressureEval(
        value=x - math.log(one_m_r),
        dP_dt=-LOG2 / one_m_r,
        dP_dq=1.0 / one_m_r,
        d2P_dq2=var,
        d2P_dtdq=-LOG2 * var,
        d2P_dt2=LOG2**2 * var,
    )


def pressure_lyapunov(t: float, q: float) -> PressureEval:
    """Khintchine pressure with q scaled by log 2 (f(n) = n log 2)."""
    _require(PotentialKind.LYAPUNOV, t, q)
    k = pressure_khintchine(t, q * LOG2)
    return PressureEval(
        value=k.value,
        dP_dt=k.dP_dt,
        dP_dq=LOG2 * k.dP_dq,
        d2P_dq2=LOG2**2 * k.d2P_dq2,
        d2P_dtdq=LOG2 * k.d2P_dtdq,
        d2P_dt2=k.d2P_dt2,
    )


def pressure_logdigit(t: float, q: float) -> PressureEval:
    """P(t, q) = log sum 2^(-nt) n^q with a certified truncation.

    At t = 0 the value is log zeta(-q).
    """
    _require(PotentialKind.LOG_DIGIT, t, q)
    m = _series.logdigit_moments(t, q)
    value = math.log(zeta(-q)) if t == 0 else m.log_z
    mean_n = m.mean_n
    return PressureEval(
        value=value,
        dP_dt=-LOG2 * mean_n,
        dP_dq=m.mean_log,
        d2P_dq2=m.var_log,
        d2P_dtdq=-LOG2 * m.cov,
        d2P_dt2=LOG2**2 * m.var_n,
        truncation_N=m.n_terms,
        tail_bound=m.tail_bound,
    )


_EXP_MAX_TERMS = 1008


def _expdigit_q0(t: float) -> PressureEval:
    # geometric weights 2^-nt; moments of 2^n, 4^n diverge once t <= 1, 2
    rho = 2.0**-t
    mean_n = 1.0 / (1.0 - rho)
    var_n = rho / (1.0 - rho) ** 2
    if t > 1:
        r1 = 2.0 * rho
        mean_f = (1 - rho) / (1 - r1) * 2
        # E[n 2^n] for weights (1-rho) rho^(n-1)
        e_nf = 2 * (1 - rho) / (1 - r1) ** 2
        cov = e_nf - mean_n * mean_f
    else:
        mean_f = math.inf
        cov = math.inf
    if t > 2:
        r2 = 4.0 * rho
        var_f = 4 * (1 - rho) / (1 - r2) - mean_f**2
    else:
        var_f = math.inf
    return PressureEval(
        value=-math.log(2.0**t - 1.0) + 0.0,
        dP_dt=-LOG2 * mean_n,
        dP_dq=mean_f,
        d2P_dq2=var_f,
        d2P_dtdq=-LOG2 * cov,
        d2P_dt2=LOG2**2 * var_n,
    )


def _log_abs(x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.abs(x))


def pressure_expdigit(t: float, q: float) -> PressureEval:
    """P(t, q) = log sum 2^(-nt) exp(2^n q), accumulated in log space."""
    _require(PotentialKind.EXP_DIGIT, t, q)
    if q == 0:
        return _expdigit_q0(t)
    # log of the ratio of consecutive terms of w(n) * 4^n is
    # log 4 - t log 2 + 2^n q, decreasing in n
    log_eps = math.log(_series.EPS_TERM)
    n_max = 16
    while True:
        n = np.arange(1, n_max + 1, dtype=float)
        lw = -n * t * LOG2 + np.exp2(n) * q
        shift = float(lw.max())
        w = np.exp(lw - shift)
        total = float(w.sum())
        log_rho = 2 * LOG2 - t * LOG2 + math.ldexp(q, n_max)
        log_last = float(lw[-1]) - shift + n_max * 2 * LOG2
        if log_rho < 0 and log_last < log_eps + math.log(total):
            rho = math.exp(log_rho)
            tail = math.exp(log_last) * rho / (1 - rho) / total
            break
        n_max += 16
        if n_max > _EXP_MAX_TERMS:
            raise SeriesConvergenceError(f"expdigit series not certified at t={t}, q={q}")
    logp = lw - shift - math.log(total)
    p = np.exp(logp)
    f = np.exp2(n)
    mean_f = float(np.dot(p, f))
    mean_n = float(np.dot(p, n))
    df = f - mean_f
    dn = n - mean_n
    # (2^n)^2 overflows for n > 511, so second moments go through logs
    lf = _log_abs(df)
    var_f = float(np.exp(logp + 2 * lf).sum())
    cov = float((np.sign(dn * df) * np.exp(logp + _log_abs(dn) + lf)).sum())
    return PressureEval(
        value=shift + math.log(total) + 0.0,
        dP_dt=-LOG2 * mean_n,
        dP_dq=mean_f,
        d2P_dq2=var_f,
        d2P_dtdq=-LOG2 * cov,
        d2P_dt2=LOG2**2 * float(np.dot(p, dn * dn)),
        truncation_N=n_max,
        tail_bound=float(tail),
    )


_DISPATCH = {
    PotentialKind.KHINTCHINE: pressure_khintchine,
    PotentialKind.LYAPUNOV: pressure_lyapunov,
    PotentialKind.LOG_DIGIT: pressure_logdigit,
    PotentialKind.EXP_DIGIT: pressure_expdigit,
}


def pressure(kind: PotentialKind, t: float, q: float) -> PressureEval:
    return _DISPATCH[PotentialKind.parse(kind)](t, q)


def zeta(s: float) -> float:
    """Riemann zeta for real s > 1 by Euler-Maclaurin from N = 16."""
    if not s > 1:
        raise DomainError(f"zeta requires s > 1, got {s}")
    big_n = 16
    head = math.fsum(k**-s for k in range(1, big_n))
    tail = big_n ** (1 - s) / (s - 1) + 0.5 * big_n**-s
    # B_2k/(2k)! * s(s+1)...(s+2k-2) N^(-s-2k+1)
    rising = s
    fact = 2.0
    for k in range(1, len(BERNOULLI_EVEN) + 1):
        term = BERNOULLI_EVEN[k - 1] / fact * rising * big_n ** (-s - 2 * k + 1)
        tail += term
        rising *= (s + 2 * k - 1) * (s + 2 * k)
        fact *= (2 * k + 1) * (2 * k + 2)
    return head + tail


@functools.lru_cache(maxsize=None)
def xi0() -> float:
    """Lebesgue-typical log-digit average: sum_n 2^-n log n."""
    return pressure_logdigit(1.0, 0.0).dP_dq
