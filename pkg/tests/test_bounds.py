import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaussk.bounds import (
    BROWNIAN_KAPPA,
    BoundReport,
    DriftParams,
    EnergyConstraint,
    bounded_lindblad_difference,
    brownian_alpha_beta,
    closed_drift_bound,
    closed_speed_limit_time,
    closed_vector_drift,
    displacement_bounds,
    dominance_feasible,
    eigenphase_spread,
    multi_copy_queries,
    open_drift_bound,
    open_speed_limit_time,
    optimal_p_variance,
    origin_in_hull_interior,
    pfeifer_bound,
    photon_energy_factor,
    quadratic_alpha_beta,
    qubit_example_energy_lower,
    sk_prefactors,
    sk_theorem_bound,
    symplectic_pair_bound,
    universal_phi_lower,
)
from gaussk.errors import IdenticalChannelsError, NoFiniteBoundError, ParameterError
from gaussk.symplectic import random_symplectic, squeezer

# reference values computed independently at 30 digits
F_E0 = 0.707106781186547524400844362105
F_E1 = 1.7071067811865475244008443621
DISP_LOWER_E0_D1 = 0.627271345023321288011057306096
DISP_UPPER_E0_D1 = 0.649636939080062444129478616044
PAIR_RAW_SQ01 = 10.2741140470646483831323533815
F_1 = 8.47023909228950490075547131877
G_0 = 6.50662827463100050241576528481
SK_M1_R1_E1_D1EM4 = 1.24799760562144074965156210883
VAR_E1 = 2.91421356237309504880168872421
VAR_E025 = 1.30901699437494742410229341718
QUBIT_HALF_PI = 0.256599289163039135090192900061
QUBIT_PI = 0.169966311248186234211763116697
PHI_01_FIRST = 0.345363758021027639545617786539
PHI_01_SECOND = 0.351099853500144254556562797541
QAB_ALPHA_Y01 = 0.222474487139158904909864203735
QAB_BETA_Y01 = 0.254950975679639241501411205451
CLOSED_T = 0.0516491482767820267316160705193  # alpha=1, beta=.5, gamma=1, delta=.2, E=2, d=.7
OPEN_T = 0.0330378390140832673016160988925  # alpha=.3, beta=.2, E=1, d=.5


def test_photon_energy_factor():
    assert photon_energy_factor(0) == pytest.approx(F_E0, rel=1e-14)
    assert photon_energy_factor(1) == pytest.approx(F_E1, rel=1e-14)
    assert photon_energy_factor(2) > photon_energy_factor(1)
    with pytest.raises(ParameterError):
        photon_energy_factor(-1)


def test_displacement_examples():
    b = displacement_bounds([0, 0], [0, 0], 1)
    assert b.lower == 0 and b.upper == 0
    b = displacement_bounds([1, 0], [0, 0], 0)
    assert b.lower == pytest.approx(DISP_LOWER_E0_D1, rel=1e-13)
    assert b.upper == pytest.approx(DISP_UPPER_E0_D1, rel=1e-13)
    assert b.scale == "halved"
    assert displacement_bounds([20, 0], [0, 0], 1).upper == 1.0
    with pytest.raises(ParameterError):
        displacement_bounds([1, 0, 0], [0, 0, 0], 1)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4), st.floats(0, 10))
def test_displacement_lower_below_upper(v, E):
    b = displacement_bounds(v[:2], v[2:], E)
    assert 0 <= b.lower <= b.upper + 1e-12 <= 1 + 1e-12


def test_symplectic_pair_examples():
    S = squeezer(0.7)
    assert symplectic_pair_bound(S, S, 1).upper == 0
    b = symplectic_pair_bound(np.diag([math.exp(0.1), math.exp(-0.1)]), np.eye(2), 1)
    assert b.extra["raw"] == pytest.approx(PAIR_RAW_SQ01, rel=1e-12)
    assert b.upper == 2.0
    S1 = squeezer(1e-5)
    r0 = symplectic_pair_bound(S1, np.eye(2), 0).extra["raw"]
    r3 = symplectic_pair_bound(S1, np.eye(2), 3).extra["raw"]
    assert r3 / r0 == pytest.approx(2)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 5))
def test_symplectic_pair_range(seed, E):
    rng = np.random.default_rng(seed)
    b = symplectic_pair_bound(random_symplectic(2, rng), random_symplectic(2, rng), E)
    assert 0 <= b.upper <= 2


def test_sk_prefactors_and_bound():
    F, G = sk_prefactors(1, 0)
    assert F == pytest.approx(F_1, rel=1e-13)
    assert G == pytest.approx(G_0, rel=1e-13)
    assert sk_theorem_bound(1, 1, 0, 0).upper == 0
    b = sk_theorem_bound(1, 1, 1, 1e-4)
    assert b.upper == pytest.approx(SK_M1_R1_E1_D1EM4, rel=1e-12)
    assert b.formula_ref


def test_closed_drift_examples():
    dp = DriftParams(1, 0, 1, 0)
    assert closed_drift_bound(dp, 2, 0) == 0
    assert closed_drift_bound(dp, 2.5, 0.3) == pytest.approx(2 * math.sqrt(2 * 2.5 * 0.3))
    assert closed_speed_limit_time(DriftParams(1, 0.5), 1, 0) == 0
    t = closed_speed_limit_time(DriftParams(1, 0.5, 1, 0.2), 2, 0.7)
    assert t == pytest.approx(CLOSED_T, rel=1e-12)
    with pytest.raises(NoFiniteBoundError):
        closed_speed_limit_time(DriftParams(0, 0), 1, 0.5)
    with pytest.raises(ParameterError):
        closed_speed_limit_time(dp, 1, 3)


def test_open_drift_examples():
    assert open_drift_bound(0.3, 0.2, 1, 0) == 0
    assert open_drift_bound(0, 0.2, 1, 0.5) == pytest.approx(4 * 0.2 * 0.5)
    assert open_speed_limit_time(0, 0.2, 1, 0.4) == pytest.approx(0.4 / (4 * 0.2))
    assert open_speed_limit_time(0.3, 0.2, 1, 0.5) == pytest.approx(OPEN_T, rel=1e-12)
    a, E, t = 0.4, 1.7, 0.3
    assert 2**0.25 * math.sqrt(a * E * t) == pytest.approx(math.sqrt(math.sqrt(2) * a * E * t))
    with pytest.raises(ParameterError):
        open_drift_bound(1.0, 0.1, 1, 1)


@settings(max_examples=200, deadline=None)
@given(
    st.floats(0, 3), st.floats(0, 2), st.floats(0, 2), st.floats(0, 1), st.floats(0, 5), st.floats(1e-6, 2)
)
def test_closed_roundtrip(alpha, beta, gamma, delta, E, d):
    dp = DriftParams(alpha, beta, gamma, delta)
    try:
        t = closed_speed_limit_time(dp, E, d)
    except NoFiniteBoundError:
        assert beta == 0 and alpha * (gamma * E + delta) == 0
        return
    if math.isinf(t):
        assert beta * d < 1e-300
        return
    assert closed_vector_drift(dp, E, t) == pytest.approx(d, rel=1e-9, abs=1e-12)
    assert closed_drift_bound(dp, E, t) >= d - 1e-9


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 0.999), st.floats(0, 2), st.floats(0, 5), st.floats(1e-6, 2))
def test_open_roundtrip(alpha, beta, E, d):
    try:
        t = open_speed_limit_time(alpha, beta, E, d)
    except NoFiniteBoundError:
        assert beta == 0 and alpha * E == 0
        return
    if math.isinf(t):
        assert beta * d < 1e-300
        return
    assert open_drift_bound(alpha, beta, E, t) == pytest.approx(d, rel=1e-9, abs=1e-12)


def test_quadratic_alpha_beta():
    dp = quadratic_alpha_beta([1, 2], np.diag([1, 2]), np.zeros((2, 2)))
    assert dp.alpha == 0 and dp.beta == 0
    dp = quadratic_alpha_beta([1], [[1]], [[0.1]])
    assert dp.alpha == pytest.approx(QAB_ALPHA_Y01, rel=1e-13)
    assert dp.beta == pytest.approx(QAB_BETA_Y01, rel=1e-13)
    dp2 = quadratic_alpha_beta([1], [[1]], [[0.2]])
    assert dp2.alpha == pytest.approx(2 * dp.alpha) and dp2.beta == pytest.approx(2 * dp.beta)
    with pytest.raises(ParameterError):
        quadratic_alpha_beta([1, 1], [[1, 1j], [1j, 1]], np.zeros((2, 2)))


def test_lindblad_difference():
    assert bounded_lindblad_difference([(0, 0, 1, 1)], 3) == 0
    assert bounded_lindblad_difference([(0.1, 0.05, 1, 1)], 2) == pytest.approx(0.4)
    assert bounded_lindblad_difference([(0.1, 0.05, 1, 1)], 4) == pytest.approx(0.8)


def test_brownian():
    dp = brownian_alpha_beta(0, 0, 0, 0)
    assert dp.alpha == 0 and dp.beta == BROWNIAN_KAPPA == 0.2047
    dp = brownian_alpha_beta(0.1, 0.1, 0, 0)
    assert dp.alpha == pytest.approx(0.04) and dp.beta == pytest.approx(0.2147)
    dp2 = brownian_alpha_beta(0.2, 0.2, 0, 0)
    assert dp2.alpha == pytest.approx(4 * dp.alpha)
    assert brownian_alpha_beta(0.1j, -0.1, 0, 0).alpha == pytest.approx(0.04)


def test_pfeifer():
    assert pfeifer_bound(2, 1, 0, 0) == 0
    assert pfeifer_bound(2, 1, 0, 1e6) == 1
    assert pfeifer_bound(2, 1, 0, 1) == pytest.approx(math.sin(1))


def test_variance_and_dominance():
    assert optimal_p_variance(0) == 0.5
    assert optimal_p_variance(1) == pytest.approx(VAR_E1, rel=1e-14)
    assert optimal_p_variance(0.25) == pytest.approx(VAR_E025, rel=1e-14)
    assert dominance_feasible(2, 1)
    assert not dominance_feasible(2, 0.9)
    assert not dominance_feasible(1.5, 10)


def test_universal_phi():
    assert universal_phi_lower(0) == 0
    assert universal_phi_lower(math.pi / 2) == pytest.approx(1)
    assert universal_phi_lower(0.1) == pytest.approx(PHI_01_SECOND, rel=1e-13)
    assert universal_phi_lower(0.1) > PHI_01_FIRST
    s = 1e-6
    assert universal_phi_lower(s) == pytest.approx(2 * math.sqrt(s / math.pi), rel=1e-3)
    # past pi/2 only the first branch applies
    s = 2.0
    assert universal_phi_lower(s) == pytest.approx(2 * math.sqrt(s * (math.pi + 2 * s) / (math.pi**2 + 4 * math.pi * s + 8 * s * s)))


def test_qubit_lower():
    assert qubit_example_energy_lower(math.pi / 2) == pytest.approx(QUBIT_HALF_PI, rel=1e-14)
    assert qubit_example_energy_lower(math.pi - 1e-12) == pytest.approx(QUBIT_PI, rel=1e-10)
    assert qubit_example_energy_lower(1.0) > qubit_example_energy_lower(2.0)
    with pytest.raises(ParameterError):
        qubit_example_energy_lower(math.pi)


def test_multicopy_examples():
    res = multi_copy_queries(np.eye(2), np.diag([1, 1j]))
    assert res.n == 3 and res.theta == pytest.approx(math.pi / 2) and res.interior
    res = multi_copy_queries(np.eye(2), np.diag([1, -1]))
    assert res.n == 2 and res.theta == pytest.approx(math.pi)
    # 0 is on the hull boundary for every copy number
    assert not res.interior and res.n_interior is None
    with pytest.raises(IdenticalChannelsError):
        multi_copy_queries(np.eye(2), -np.eye(2))


def test_multicopy_phase_invariance():
    U = np.diag([1, np.exp(0.4j), np.exp(1.0j)])
    V = np.eye(3)
    a = multi_copy_queries(U, V)
    b = multi_copy_queries(U * np.exp(0.7j), V)
    assert (a.n, a.interior) == (b.n, b.interior)
    assert a.theta == pytest.approx(b.theta)
    assert eigenphase_spread(U, V)[0] == pytest.approx(1.0)


def test_hull_interior():
    pts = np.exp(1j * np.array([0, 2, 4]))
    assert origin_in_hull_interior(pts)
    assert not origin_in_hull_interior(np.array([1, -1]))
    assert not origin_in_hull_interior(np.exp(1j * np.array([0, 0.5, 1.0])))


def test_reports_and_validation():
    with pytest.raises(ValueError):
        BoundReport("x", 1.0, 0.5)
    with pytest.raises(ParameterError):
        EnergyConstraint(-1)
    with pytest.raises(ParameterError):
        DriftParams(-1, 0)
    d = displacement_bounds([0.1, 0], [0, 0], 1).to_dict()
    assert set(d) == {"name", "lower", "upper", "params", "formula_ref", "scale", "extra"}
