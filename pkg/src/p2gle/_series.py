"""Certified sums of the weights w(n) = exp(-c n + q log n), n >= 1.

Explicit log-space summation is used while it can be certified within a
bounded number of terms.  Otherwise the remainder n >= a is taken from the
Euler-Maclaurin formula

    sum_{n>=a} G(n) = int_a^inf G + G(a)/2 - sum_k B_2k/(2k) g_{2k-1},

where g_j are Taylor coefficients of G at a, built with truncated power
series arithmetic.  Needed when c is small and the mass sits at huge n.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate

EPS_TERM = 1e-17
CHUNK = 256
MAX_EXPLICIT = 4096
EM_ORDER = 10  # Bernoulli terms B_2 .. B_20

_BERNOULLI_EVEN = [
    Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30),
    Fraction(5, 66), Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510),
    Fraction(43867, 798), Fraction(-174611, 330),
]
BERNOULLI_EVEN = [float(b) for b in _BERNOULLI_EVEN]


class SeriesConvergenceError(ArithmeticError):
    """The truncation certificate could not be met."""


@dataclass(frozen=True)
class LogDigitMoments:
    log_z: float
    mean_n: float
    mean_log: float
    var_n: float
    cov: float
    var_log: float
    n_terms: int
    tail_bound: float
    used_em: bool


# --- truncated power series in eps around a point ----------------------------

def _ps_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)[: len(a)]


def _ps_exp(phi: np.ndarray) -> np.ndarray:
    m = len(phi)
    out = np.zeros(m)
    out[0] = math.exp(phi[0])
    for k in range(1, m):
        j = np.arange(1, k + 1)
        out[k] = np.dot(j * phi[1 : k + 1], out[k - j]) / k
    return out


def _ps_log(a: float, m: int) -> np.ndarray:
    k = np.arange(1, m)
    out = np.empty(m)
    out[0] = math.log(a)
    out[1:] = (-1.0) ** (k + 1) / (k * a**k)
    return out


def _ps_linear(a: float, m: int, mu: float = 0.0) -> np.ndarray:
    out = np.zeros(m)
    out[0] = a - mu
    if m > 1:
        out[1] = 1.0
    return out


# --- explicit part -------------------------------------------------------------

def _explicit(c: float, q: float, t_rate: float, allow_em: bool):
    """Sum n = 1..N in log space; return arrays and certification status."""
    logs_all, ns_all = [], []
    start = 1
    certified = False
    tail_rel = math.inf
    log_max = -math.inf
    total = 0.0
    while start <= MAX_EXPLICIT:
        n = np.arange(start, start + CHUNK, dtype=float)
        lw = -c * n + q * np.log(n)
        logs_all.append(lw)
        ns_all.append(n)
        new_max = max(log_max, float(lw.max()))
        total = total * math.exp(log_max - new_max) if total else 0.0
        total += float(np.exp(lw - new_max).sum())
        log_max = new_max
        big_n = float(n[-1])
        # ratio of consecutive terms of w(n) * n^2, bounds every moment tail
        rho = math.exp(-t_rate) * max(1.0, ((big_n + 1) / big_n) ** (q + 2))
        last = math.exp(float(lw[-1]) - log_max) * big_n**2
        if rho < 1 and last < EPS_TERM * total:
            certified = True
            tail_rel = last * rho / (1 - rho) / total
            break
        start += CHUNK
    n = np.concatenate(ns_all)
    lw = np.concatenate(logs_all)
    if not certified and not allow_em:
        raise SeriesConvergenceError(
            f"series for (c={c}, q={q}) not certified within {MAX_EXPLICIT} terms"
        )
    return n, lw, certified, tail_rel


# --- Euler-Maclaurin remainder -------------------------------------------------

def _log_weight_series(a: float, c: float, q: float, shift: float, m: int) -> np.ndarray:
    phi = q * _ps_log(a, m)
    phi[0] += -c * a - shift
    phi[1] += -c
    return _ps_exp(phi)


def _em_correction(g: np.ndarray) -> tuple[float, float]:
    """G(a)/2 - sum_k B_2k/(2k) g_{2k-1}; also the size of the last term."""
    s = 0.5 * g[0]
    last = 0.0
    for k in range(1, EM_ORDER + 1):
        last = BERNOULLI_EVEN[k - 1] / (2 * k) * g[2 * k - 1]
        s -= last
    return s, abs(last)


def _u_bounds(a: float, c: float, q: float, shift: float):
    """Integration range in u = log x and the location of the peak."""
    u0 = math.log(a)
    psi = lambda u: -c * math.exp(u) + (q + 1) * u - shift  # noqa: E731
    if c > 0 and q + 1 > 0:
        u_peak = max(u0, math.log((q + 1) / c))
    else:
        u_peak = u0
    top = psi(u_peak)
    # psi is concave; step right until it has dropped far enough,
    # leaving room for moment factors up to x^2
    step = 1.0
    u_hi = u_peak + step
    while psi(u_hi) + 2 * u_hi > top + 2 * u_peak - 760:
        step *= 2
        u_hi = u_peak + step
        if step > 1e6:
            raise SeriesConvergenceError("integration range did not close")
    return u0, u_peak, u_hi


def _tail_integral(h, a, c, q, shift) -> float:
    u0, u_peak, u_hi = _u_bounds(a, c, q, shift)

    def integrand(u):
        x = math.exp(u)
        return math.exp(-c * x + (q + 1) * u - shift) * h(x)

    pieces = [u0, u_peak, u_hi] if u_peak > u0 else [u0, u_hi]
    if c > 0 and q + 1 > 0:
        width = 1.0 / math.sqrt(q + 1)
        extra = [u_peak + k * width for k in (-8, -3, 3, 8)]
        pieces = sorted({p for p in pieces + extra if u0 <= p <= u_hi})
    total = 0.0
    for lo, hi in zip(pieces[:-1], pieces[1:]):
        if hi <= lo:
            continue
        with warnings.catch_warnings():
            # the requested precision sits at roundoff level; the estimate is still sound
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=2e-14, limit=400)
        total += val
    return total


def _power_log_integral(a: float, sigma: float, k: int) -> float:
    """int_a^inf x^-sigma log(x)^k dx for sigma > 1."""
    d = sigma - 1
    la = math.log(a)
    acc = 0.0
    for i in range(k + 1):
        acc += math.factorial(k) / math.factorial(k - i) * la ** (k - i) / d ** (i + 1)
    return a ** (-d) * acc


def _em_tail_sums(a, c, q, shift, mu_n=None, mu_log=None):
    """Remainder sums for n >= a (scaled by exp(-shift)).

    First pass (mu_* None): (1, n, log n).  Second pass: central moments
    ((n-mu)^2, (n-mu)(log n - mu'), (log n - mu')^2).
    """
    m = 2 * EM_ORDER + 1
    base = _log_weight_series(a, c, q, shift, m)
    lg = _ps_log(a, m)
    if mu_n is None:
        series = [np.eye(1, m, 0).ravel(), _ps_linear(a, m), lg]
        funcs = [lambda x: 1.0, lambda x: x, math.log]
        c0_basis = [[(0, 0, 1.0)], [(1, 0, 1.0)], [(0, 1, 1.0)]]
    else:
        dn = _ps_linear(a, m, mu_n)
        dl = lg.copy()
        dl[0] -= mu_log
        series = [_ps_mul(dn, dn), _ps_mul(dn, dl), _ps_mul(dl, dl)]
        funcs = [
            lambda x: (x - mu_n) ** 2,
            lambda x: (x - mu_n) * (math.log(x) - mu_log),
            lambda x: (math.log(x) - mu_log) ** 2,
        ]
        c0_basis = [
            [(2, 0, 1.0), (1, 0, -2 * mu_n), (0, 0, mu_n**2)],
            [(1, 1, 1.0), (1, 0, -mu_log), (0, 1, -mu_n), (0, 0, mu_n * mu_log)],
            [(0, 2, 1.0), (0, 1, -2 * mu_log), (0, 0, mu_log**2)],
        ]
    out, bounds = [], []
    for s, f, basis in zip(series, funcs, c0_basis):
        g = _ps_mul(base, s)
        corr, last = _em_correction(g)
        if c == 0.0:
            integral = 0.0
            for j, k, coef in basis:
                sigma = -(q + j)
                if sigma <= 1:
                    integral = math.inf
                    break
                integral += coef * _power_log_integral(a, sigma, k) * math.exp(-shift)
        else:
            integral = _tail_integral(f, a, c, q, shift)
        out.append(integral + corr)
        bounds.append(last)
    return out, bounds


def _peak_log_weight(c: float, q: float) -> float:
    if c > 0 and q > 0:
        x = q / c
        return -c * x + q * math.log(x)
    return -math.inf


def logdigit_moments(t: float, q: float) -> LogDigitMoments:
    """Normalizer and first/second moments of (n, log n) under 2^-nt n^q."""
    c = t * math.log(2)
    t_rate = c
    n, lw, certified, tail_rel = _explicit(c, q, t_rate, allow_em=True)
    shift = max(float(lw.max()), _peak_log_weight(c, q))
    w = np.exp(lw - shift)
    logn = np.log(n)
    s0, s1, s2 = w.sum(), (w * n).sum(), (w * logn).sum()
    used_em = not certified
    tails = bounds = None
    if used_em:
        a = float(n[-1]) + 1
        tails, bounds = _em_tail_sums(a, c, q, shift)
        s0 += tails[0]
        s1 += tails[1]
        s2 += tails[2]
    mu_n = s1 / s0
    mu_l = s2 / s0
    dn = n - mu_n if math.isfinite(mu_n) else None
    dl = logn - mu_l
    v_nn = (w * dn * dn).sum() if dn is not None else math.inf
    v_nl = (w * dn * dl).sum() if dn is not None else math.inf
    v_ll = (w * dl * dl).sum()
    if used_em:
        if math.isfinite(mu_n):
            ctail, cb = _em_tail_sums(a, c, q, shift, mu_n, mu_l)
            v_nn += ctail[0]
            v_nl += ctail[1]
            v_ll += ctail[2]
            bounds = bounds + cb
        else:
            # E[n] diverges (c = 0, q >= -2); only the log variance survives
            lg_only = _em_tail_sums(a, c, q, shift, 0.0, mu_l)[0][2]
            v_ll += lg_only
        finite = [abs(b) for b in bounds if math.isfinite(b)]
        tail_rel = max(finite) / s0 if finite else 0.0
        if not math.isfinite(s0) or tail_rel > 1e-9:
            raise SeriesConvergenceError(
                f"Euler-Maclaurin remainder not certified at t={t}, q={q}"
            )
    return LogDigitMoments(
        log_z=shift + math.log(s0),
        mean_n=mu_n,
        mean_log=mu_l,
        var_n=v_nn / s0,
        cov=v_nl / s0,
        var_log=v_ll / s0,
        n_terms=len(n),
        tail_bound=tail_rel,
        used_em=used_em,
    )
