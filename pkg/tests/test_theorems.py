import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lohesim.integrate import History
from lohesim.model import ModelParams
from lohesim.sphere import ring_with_chords, rotation_generator
from lohesim.theorems import (
    COMPLETE,
    NO_GUARANTEE,
    PRACTICAL,
    TheoremReport,
    c1_constant,
    c2_constant,
    c3_constant,
    check_prop21,
    check_prop22,
    check_thm31,
    check_thm32,
    check_thm41,
    check_thm42,
    evaluate_gate,
    lyapunov_rates,
    network_coefficients,
    network_threshold,
    practical_polynomial,
    quadratic_roots,
)


def P(N=4, d=2, k0=1.0, k1=0.0, tau=0.0, **kw):
    return ModelParams.build(N, d, k0, k1, tau=tau, **kw)


def check(rep, name):
    return next(c for c in rep.checks if c.name == name)


def test_quadratic_roots_oracle():
    assert quadratic_roots(1.0, -3.0, 2.0) == pytest.approx((1.0, 2.0))
    assert quadratic_roots(1.0, 0.0, 1.0) is None
    assert quadratic_roots(1.0, 2.0, 1.0) is None
    lo, hi = quadratic_roots(2.0, -2.0, 1e-12)
    assert lo == pytest.approx(5e-13, rel=1e-9) and hi == pytest.approx(1.0)


def test_thm31_tau_threshold():
    rep = check_thm31(P(N=5, k0=1.0, k1=-0.5, tau=0.05), 0.1)
    assert rep.constants["tau_threshold"] == 0.0625
    assert rep.prediction == COMPLETE


def test_thm31_needs_three_particles():
    rep = check_thm31(P(N=2, k0=1.0, k1=-0.5, tau=0.01), 0.05)
    assert not check(rep, "N_at_least_3").passed
    assert rep.prediction == NO_GUARANTEE


def test_thm31_reference_pass():
    rep = check_thm31(P(N=5, k0=2.0, k1=-1.0, tau=0.03), 0.1)
    assert rep.passed and rep.prediction == COMPLETE


def test_thm31_strict_inequalities():
    assert check_thm31(P(N=5, k0=1.0, k1=-0.5, tau=0.0625), 0.1).prediction == NO_GUARANTEE
    assert check_thm31(P(N=5, k0=1.0, k1=-0.5, tau=0.01), 0.125).prediction == NO_GUARANTEE
    assert check_thm31(P(N=5, k0=1.0, k1=-0.4, tau=0.01), 0.1).prediction == NO_GUARANTEE
    omega = P(N=5, k0=1.0, k1=-0.5, omegas=rotation_generator(1.0))
    assert check_thm31(omega, 0.1).prediction == NO_GUARANTEE


def test_thm32_constants():
    rep = check_thm32(P(N=4, k0=1.0, k1=-0.47, tau=0.05), 0.1)
    assert rep.constants["kappa_tilde_threshold"] == 9 / 256
    assert rep.constants["C1"] == pytest.approx(1.545)
    assert rep.constants["tau_threshold"] == pytest.approx(1 / (8 * 1.545))
    assert rep.prediction == COMPLETE
    assert check_thm32(P(N=4, k0=1.0, k1=-0.47, tau=0.081), 0.1).prediction == NO_GUARANTEE


def test_thm32_sl_endpoint():
    for N in (3, 4, 10):
        p = P(N=N, k0=1.0, k1=-0.5, tau=0.01)
        beta, gamma = lyapunov_rates(p)
        assert beta == pytest.approx((7 / 4 - 4 / N))
        assert beta > 0
        assert gamma == pytest.approx(1 / N)
        r31, r32 = check_thm31(p, 0.1), check_thm32(p, 0.1)
        assert check(r32, "kappa_tilde_small").passed
        assert check(r31, "N_at_least_3").passed == check(r32, "N_at_least_3").passed


def test_c1_constant_uses_min():
    assert c1_constant(P(N=4, k0=1.0, k1=-0.47)) == pytest.approx(1.545)
    assert c1_constant(P(N=4, k0=1.0, k1=0.1)) == pytest.approx(1.5 * 1.1)


def test_thm41_reference_roots():
    p = P(N=4, k0=1.0, k1=0.3, tau=0.01)
    assert c2_constant(p) == pytest.approx(1.95)
    a, b, c = practical_polynomial(p)
    disc = b * b - 4 * a * c
    lo = (-b - math.sqrt(disc)) / (2 * a)
    hi = (-b + math.sqrt(disc)) / (2 * a)
    rep = check_thm41(p, 0.2)
    assert rep.constants["x_minus"] == pytest.approx(lo, rel=1e-12)
    assert rep.constants["x_plus"] == pytest.approx(hi, rel=1e-12)
    assert lo == pytest.approx(0.099, abs=1e-3)
    assert hi == pytest.approx(0.277, abs=1e-3)
    assert rep.prediction == PRACTICAL and rep.bound == rep.constants["x_minus"]


def test_thm41_zero_delay_limit():
    rep = check_thm41(P(N=4, k0=1.0, k1=0.3, tau=0.0), 0.1)
    assert rep.constants["x_plus"] == pytest.approx(0.4, abs=1e-15)
    assert rep.constants["x_minus"] == 0.0
    assert rep.constants["limit_threshold"] == pytest.approx(0.4)
    assert any("limit is 1 - 2|kappa1|/kappa0" in n for n in rep.notes)


def test_thm41_negative_discriminant():
    rep = check_thm41(P(N=4, k0=1.0, k1=0.3, tau=0.1), 0.1)
    assert rep.prediction == NO_GUARANTEE
    assert any("tau too large" in n for n in rep.notes)


def test_thm41_initial_condition_against_x_plus():
    assert check_thm41(P(N=4, k0=1.0, k1=0.3, tau=0.01), 0.3).prediction == NO_GUARANTEE
    assert check_thm41(P(N=4, k0=1.0, k1=0.6, tau=0.0), 0.01).prediction == NO_GUARANTEE


@given(st.floats(0.0, 0.8), st.floats(0.5, 3.0), st.integers(3, 10))
def test_thm41_root_monotonicity(k1_ratio, k0, N):
    k1 = k1_ratio * k0 / 2
    prev = None
    for tau in np.linspace(0.0, 0.004, 9):
        rep = check_thm41(P(N=N, k0=k0, k1=k1, tau=float(tau)), 0.0)
        if "x_minus" not in rep.constants:
            break
        cur = (rep.constants["x_minus"], rep.constants["x_plus"])
        if prev is not None:
            assert cur[0] >= prev[0] - 1e-15
            assert cur[1] <= prev[1] + 1e-15
        prev = cur


def test_c3_reference_value():
    assert c3_constant(P(N=4, k0=1.0, k1=0.0)) == pytest.approx(1.5)


def test_thm42_complete_graph_threshold_is_one():
    A = np.ones((4, 4))
    assert network_threshold(A, 0, 1) == 1.0
    rep = check_thm42(P(N=4, k0=1.0, k1=0.3, tau=0.0), 0.2)
    assert rep.constants["network_threshold"] == 1.0
    # tau = 0, Omega = 0 reduces the roots to x_- = 0 and x_+ = 1 - 2|kappa1|/kappa0, as in the complete-graph gate
    assert rep.constants["x_plus"] == pytest.approx(check_thm41(P(N=4, k0=1.0, k1=0.3), 0.2).constants["x_plus"])
    assert rep.constants["x_minus"] == pytest.approx(0.0, abs=1e-15)


def test_thm42_limit_coefficients():
    A = ring_with_chords(6)
    s_dif = np.abs(A[0] - A[1]).sum()
    a1, a2, a3 = network_coefficients(P(N=6, k0=1e8, k1=0.0, tau=0.0, adjacency=A), 0, 1)
    assert a2 == pytest.approx(2 * s_dif / 6, rel=1e-12)
    assert a3 == 0.0
    assert a1 == pytest.approx((A[0] + A[1]).sum() / 6)


def test_thm42_reports_both_c3_variants_and_worst_pair():
    A = ring_with_chords(6)
    oms = [rotation_generator(0.1 * j) for j in range(6)]
    rep = check_thm42(P(N=6, k0=10.0, k1=0.0, tau=0.001, adjacency=A, omegas=oms), 0.3)
    thresholds = [network_threshold(A, i, j) for i in range(6) for j in range(i + 1, 6)]
    assert rep.constants["network_threshold"] == min(thresholds)
    assert rep.constants["C3"] != rep.constants["C3_with_adjacency_spread"]
    assert rep.constants["omega_diameter"] == pytest.approx(0.5)
    assert rep.prediction == PRACTICAL
    assert rep.constants["x_minus_max_over_pairs"] >= rep.constants["x_minus"]


def test_thm42_fails_above_threshold():
    rep = check_thm42(P(N=6, k0=10.0, tau=0.001, adjacency=ring_with_chords(6)), 0.9)
    assert rep.prediction == NO_GUARANTEE


def test_prop21_examples():
    assert check_prop21(P(N=3, k0=1.0, k1=0.2), 0.5).constants["rho_threshold"] == pytest.approx(1 / 3)
    assert check_prop21(P(N=3, k0=1.0, k1=0.0), 0.9).prediction == NO_GUARANTEE
    assert check_prop21(P(N=10, k0=1.0, k1=0.2), 0.9).prediction == COMPLETE
    assert check_prop21(P(N=10, k0=1.0, k1=0.2, tau=0.1), 0.9).prediction == NO_GUARANTEE


def test_prop22_examples():
    assert check_prop22(P(N=3, k0=1.0), 0.1).constants["tau_threshold"] == pytest.approx(1 / 16)
    om = np.array([[0, -2, 0], [2, 0, 0], [0, 0, 0]], dtype=complex)
    rep = check_prop22(P(N=3, d=3, k0=1.0, omegas=om), 0.1)
    assert rep.constants["tau_threshold"] == pytest.approx(1 / 64)
    assert check_prop22(P(N=3, k0=1.0, tau=0.01), 0.2).prediction == NO_GUARANTEE


def test_reports_are_pure_and_serializable():
    p = P(N=4, k0=1.0, k1=0.3, tau=0.01)
    a, b = check_thm41(p, 0.2), check_thm41(p, 0.2)
    assert a.to_json() == b.to_json()
    back = TheoremReport.from_dict(a.to_dict())
    assert back.to_text() == a.to_text()
    text = a.to_text()
    assert "prediction=practical_bound" in text and "const.x_minus=" in text


def test_evaluate_gate_uses_history():
    hist = History.generator(1, 5, 2, 0.12)
    rep = evaluate_gate("thm31", P(N=5, k0=1.0, k1=-0.5, tau=0.05), hist)
    assert rep.prediction == COMPLETE
    with pytest.raises(ValueError):
        evaluate_gate("thm99", P(), hist)
