"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line (printed in the terminal summary) and
then asserts, so a failing criterion also fails the run.
"""

import math
from fractions import Fraction

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from p2gle.expansion import apply_T, decode, encode
from p2gle.gibbs import empirical_level_set_check
from p2gle.pressure import LOG2, PotentialKind, pressure, pressure_expdigit, pressure_khintchine, xi0
from p2gle.spectrum import (
    count_sign_changes,
    inflection_function,
    khintchine_inflection,
    khintchine_spectrum,
    lyapunov_spectrum,
    solve_system,
)

K = PotentialKind


def test_criterion_1_closed_form_values(acceptance):
    s = khintchine_spectrum(2)
    b = lyapunov_spectrum(2 * LOG2)
    errs = [abs(s.t - 1), abs(s.q), abs(s.t_prime), abs(b.t - 1)]
    ok = max(errs) < 1e-12
    acceptance(1, ok, f"t(2), q(2), t'(2), lyapunov t(2 log2): max error {max(errs):.1e}")
    assert ok


def test_criterion_2_solver_matches_formula(acceptance):
    dt = dq = res = 0.0
    for xi in np.linspace(1.05, 50, 50):
        xi = float(xi)
        n = solve_system(K.KHINTCHINE, xi)
        c = khintchine_spectrum(xi)
        dt = max(dt, abs(n.t - c.t))
        dq = max(dq, abs(n.q - c.q))
        # residuals recomputed from the pressure, not read from the solution
        ev = pressure(K.KHINTCHINE, n.t, n.q)
        res = max(res, abs(ev.value - n.q * xi), abs(ev.dP_dq - xi))
    ok = dt < 1e-9 and dq < 1e-9 and res < 1e-12
    acceptance(2, ok, f"50 levels: max |dt| {dt:.1e}, max |dq| {dq:.1e}, max residual {res:.1e}")
    assert ok


def test_criterion_3_logdigit_anchor(acceptance):
    x0 = xi0()
    s = solve_system(K.LOG_DIGIT, x0)
    ok = abs(x0 - 0.507834) < 5e-6 and abs(s.t - 1) < 1e-8 and abs(s.q) < 1e-8
    acceptance(3, ok, f"xi0 = {x0:.10f}, solution (t, q) = ({s.t:.12g}, {s.q:.3g})")
    assert ok


def test_criterion_4_inflection(acceptance):
    root = khintchine_inflection()
    f = float(inflection_function(root))
    changes = count_sign_changes(1.01, 50.0, 10_000)
    ok = 3 < root < 1 + math.e and abs(f) < 1e-13 and changes == 1
    acceptance(4, ok, f"xi~ = {root:.15g}, |f| = {abs(f):.1e}, {changes} sign change(s)")
    assert ok


FD_GRIDS = {
    K.KHINTCHINE: [(t, t * LOG2 - c) for t in (0.2, 0.5, 1.0, 1.5, 2.0)
                   for c in (0.1, 0.3, 0.7, 1.5, 3.0)],
    K.LOG_DIGIT: [(t, q) for t in (0.05, 0.2, 0.5, 1.0, 2.0) for q in (-3.0, -1.0, 0.0, 1.0, 3.0)],
    K.EXP_DIGIT: [(t, q) for t in (0.25, 0.5, 1.0, 2.0, 3.0) for q in (-3.0, -1.0, -0.3, -0.1, -0.01)],
}


def test_criterion_5_derivative_certification(acceptance):
    h = 1e-6
    fd_err = {}
    det_min = {}
    for kind, grid in FD_GRIDS.items():
        worst = 0.0
        dets = []
        for t, q in grid:
            ev = pressure(kind, t, q)
            fq = (pressure(kind, t, q + h).value - pressure(kind, t, q - h).value) / (2 * h)
            ft = (pressure(kind, t + h, q).value - pressure(kind, t - h, q).value) / (2 * h)
            worst = max(worst, abs(fq - ev.dP_dq) / abs(ev.dP_dq),
                        abs(ft - ev.dP_dt) / abs(ev.dP_dt))
            dets.append(ev.hessian_det)
        fd_err[kind] = worst
        det_min[kind] = min(dets)
    fd_ok = all(e < 1e-6 for e in fd_err.values())
    det_ok = all(d > 0 for d in det_min.values())
    detail = "; ".join(
        f"{k.value}: fd {fd_err[k]:.1e}, min det {det_min[k]:.2e}" for k in FD_GRIDS
    )
    acceptance(5, fd_ok and det_ok, detail)
    assert fd_ok, fd_err
    assert det_ok, det_min


def test_criterion_6_limits(acceptance):
    g = pressure_expdigit(1, -30).dP_dq
    s = solve_system(K.EXP_DIGIT, 500)
    t_big = khintchine_spectrum(1e6).t
    t_small = khintchine_spectrum(1 + 1e-8).t
    ok = (abs(g - 2) < 1e-6 and s.t > 0.95 and -1e-3 < s.q < 0
          and t_big < 1e-3 and t_small < 1e-3)
    acceptance(
        6, ok,
        f"|dP/dq(1,-30) - 2| = {abs(g - 2):.1e}; expdigit xi=500: t = {s.t:.6g}, q = {s.q:.3g}; "
        f"t(1e6) = {t_big:.2e}, t(1+1e-8) = {t_small:.2e}",
    )
    assert ok


def test_criterion_7_gibbs(acceptance):
    cases = [(K.KHINTCHINE, xi, 0.02) for xi in (1.5, 2.0, 3.0, 5.0)]
    cases += [(K.LOG_DIGIT, xi, 0.03) for xi in (0.3, xi0(), 1.0)]
    ok = True
    worst_z = worst_dim = 0.0
    for kind, xi, tol in cases:
        r = empirical_level_set_check(kind, xi, 1000, 10_000, seed=1)
        z = abs(r.birkhoff_mean - xi) / r.birkhoff_stderr
        dim = abs(r.local_dimension_mean - r.t)
        worst_z = max(worst_z, z)
        worst_dim = max(worst_dim, dim)
        ok = ok and z < 5 and dim < tol
    acceptance(7, ok, f"7 levels: max Birkhoff deviation {worst_z:.2f} stderr, "
                      f"max local-dimension deviation {worst_dim:.1e}")
    assert ok


def test_criterion_8_codec(acceptance):
    rationals = st.builds(
        lambda den, num: Fraction(num % den + 1, den),
        st.integers(1, 10**6), st.integers(0, 10**6),
    )

    @settings(max_examples=1000, derandomize=True, deadline=None,
              suppress_health_check=[HealthCheck.too_slow])
    @given(rationals)
    def check(x):
        seq = encode(x, 30)
        iv = decode(seq)
        assert iv.left < x <= iv.right
        assert iv.right - iv.left == Fraction(1, 2 ** sum(seq.digits))
        assert encode(apply_T(x), 29).digits == seq.digits[1:]

    try:
        check()
        prop_ok = True
    except AssertionError:
        prop_ok = False
    d1 = encode(Fraction(1), 30).digits
    dh = encode(Fraction(1, 2), 30).digits
    d3 = encode(Fraction(1, 3), 30).digits
    bound_ok = d1 == (1,) * 30 and dh == (2,) + (1,) * 29 and d3 == (2,) * 30
    ok = prop_ok and bound_ok
    acceptance(8, ok, f"1000 rationals at depth 30: {'ok' if prop_ok else 'violated'}; "
                      f"boundary cases 1, 1/2, 1/3: {'ok' if bound_ok else 'wrong'}")
    assert ok


def test_criterion_9_ifs_pressure(acceptance):
    errs = [abs(pressure_khintchine(t, 0).value + math.log(2**t - 1)) for t in (0.5, 1.0, 2.0)]
    p10 = pressure_khintchine(1, 0).value
    ok = max(errs) < 1e-14 and p10 == 0
    acceptance(9, ok, f"max |P(t,0) + log(2^t - 1)| = {max(errs):.1e}, P(1,0) = {p10}")
    assert ok
