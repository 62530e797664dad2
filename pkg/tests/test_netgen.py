import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaussk.errors import NumericError, ParameterError
from gaussk.netgen import (
    EulerGridNet,
    GateSet,
    Net,
    batch_op_norm,
    build_net,
    eta,
    expand_generators,
    load_net,
    net_cardinality_bound,
    net_lookup,
    probe_coverage,
    sample_region,
    save_net,
    singular_value_realizer,
    solve_eta,
)
from gaussk.symplectic import is_symplectic, op_norm, random_symplectic, rotation, squeezer


@pytest.fixture(scope="module")
def small_net():
    return build_net(1, 1.0, 0.5, sample_budget=200_000, rng_seed=3)


def test_cardinality_bound_value():
    assert net_cardinality_bound(1, 1, 0.25) == pytest.approx(20736)


def test_batch_op_norm_matches_numpy():
    rng = np.random.default_rng(0)
    M = rng.normal(size=(200, 2, 2))
    assert np.allclose(batch_op_norm(M), np.linalg.norm(M, 2, axis=(1, 2)))
    M4 = rng.normal(size=(20, 4, 4))
    assert np.allclose(batch_op_norm(M4), np.linalg.norm(M4, 2, axis=(1, 2)))


@pytest.mark.parametrize("m", [1, 2])
def test_sample_region_inside_and_symplectic(m):
    S = sample_region(m, 0.7, 500, np.random.default_rng(1))
    assert np.all(batch_op_norm(S - np.eye(2 * m)) <= 0.7 * (1 + 1e-9))
    assert all(is_symplectic(X, 1e-9) for X in S)


def test_epsilon_equal_r_contains_identity():
    net = build_net(1, 0.3, 0.3, sample_budget=2000, rng_seed=0)
    assert len(net) >= 1
    assert np.allclose(net.element(0), np.eye(2))


def test_packing_separation(small_net):
    E = small_net.elements
    D = batch_op_norm(E[:, None] - E[None])
    np.fill_diagonal(D, np.inf)
    assert D.min() >= small_net.epsilon
    assert len(small_net) <= net_cardinality_bound(1, 1.0, 0.5)


def test_packing_covers(small_net):
    rep = probe_coverage(small_net, 20000, rng_seed=9)
    assert rep.covered, rep


def test_lookup_identity_and_ties(small_net):
    idx, dist = net_lookup(small_net, np.eye(2))
    assert idx == 0 and dist == 0
    twin = Net(np.stack([squeezer(0.4), squeezer(-0.4), np.eye(2) * 5]), 1.0, 1.0, 1)
    assert twin.lookup(np.eye(2))[0] == 0
    twin = Net(np.stack([np.eye(2) * 5, squeezer(-0.4), squeezer(0.4)]), 1.0, 1.0, 1)
    assert twin.lookup(np.eye(2))[0] == 1


def test_build_net_deterministic():
    a = build_net(1, 1.0, 0.5, sample_budget=3000, rng_seed=11)
    b = build_net(1, 1.0, 0.5, sample_budget=3000, rng_seed=11)
    assert np.array_equal(a.elements, b.elements)


def test_build_net_rejects_bad_params():
    with pytest.raises(ParameterError):
        build_net(1, 1.0, 2.0)
    with pytest.raises(ParameterError):
        build_net(1, 1.0, 0.5, sample_budget=0)


def test_expand_identity_generator():
    gs = GateSet.with_inverses({"I": np.eye(2)})
    net = expand_generators(gs, 0.1, 10)
    assert len(net) == 1 and np.allclose(net.element(0), np.eye(2))
    assert net.info["saturated"]


def _angle_gaps(net):
    angles = np.sort(np.mod([math.atan2(E[0, 1], E[0, 0]) for E in net.elements], 2 * math.pi))
    return np.diff(np.concatenate([angles, [angles[0] + 2 * math.pi]]))


def test_expand_rotations_cover_circle():
    gs = GateSet.with_inverses({"r": rotation(1.0)})
    net = expand_generators(gs, 0.1, 200)
    assert net.info["saturated"]
    # every rotation lies within epsilon0 of the net: half the largest gap, in chordal distance
    assert 2 * math.sin(_angle_gaps(net).max() / 4) <= 0.1
    for word, E in zip(net.words, net.elements):
        assert np.max(np.abs(word.resolve(gs.generators) - E)) <= 1e-10


def test_expand_pi_over_8_rotations_is_a_finite_subgroup():
    # R(pi/8) generates only 16 rotations, so the gap stays pi/8
    gs = GateSet.with_inverses({"r": rotation(math.pi / 8)})
    net = expand_generators(gs, 0.1, 50)
    assert len(net) == 16
    assert _angle_gaps(net).max() == pytest.approx(math.pi / 8)


def test_gate_set_requires_inverses():
    with pytest.raises(Exception):
        GateSet({"r": rotation(0.3)}, closed_under_inverse=True)
    with pytest.raises(ParameterError):
        expand_generators(GateSet({"r": rotation(0.3)}), 0.1, 3)


def test_grid_net_covering():
    g = EulerGridNet(1.0, 0.01)
    S = sample_region(1, 1.0, 20000, np.random.default_rng(4))
    idx, dist = g.lookup_many(S)
    assert dist.max() <= 0.01
    assert np.allclose(batch_op_norm(g.elements_at(idx) - S), dist)
    assert g.covering_radius <= 0.01


def test_grid_net_identity_is_exact():
    g = EulerGridNet(1.0, 1e-3)
    idx, dist = g.lookup(np.eye(2))
    assert dist < 1e-12


def test_grid_net_size_at_working_resolution():
    g = EulerGridNet(1.0, 1e-3)
    assert len(g) == g.n_a * g.n_s * g.n_b
    assert g.n_a % 2 == 0


def test_net_json_roundtrip(tmp_path, small_net):
    p = tmp_path / "net.json"
    save_net(small_net, p)
    back = load_net(p)
    assert np.array_equal(back.elements, small_net.elements)
    g = EulerGridNet(1.0, 0.05)
    save_net(g, tmp_path / "g.json")
    g2 = load_net(tmp_path / "g.json")
    assert (g2.n_a, g2.n_s, g2.n_b) == (g.n_a, g.n_s, g.n_b)
    json.loads((tmp_path / "g.json").read_text())


def test_eta_endpoints():
    assert eta(3.0, math.pi / 2) == pytest.approx(1.0)
    assert eta(3.0, 0.0) == pytest.approx(3.0)
    th = solve_eta(5.0, 2.0)
    assert eta(5.0, th) == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(NumericError):
        solve_eta(2.0, 3.0)


def test_realizer_examples():
    w = singular_value_realizer([3.0], np.diag([2, 0.5]))
    sv = np.linalg.svd(w.resolve(), compute_uv=False)
    assert np.allclose(sv, [3, 1 / 3], atol=1e-8)
    w = singular_value_realizer([1.0], np.diag([2, 0.5]))
    assert np.allclose(w.info["thetas"], [math.pi / 2])
    T = w.resolve()
    assert np.allclose(T @ T.T, np.eye(2), atol=1e-10)
    w = singular_value_realizer([16.0], np.diag([2, 0.5]))
    assert np.allclose(w.info["thetas"], [0.0], atol=1e-8)
    with pytest.raises(ParameterError):
        singular_value_realizer([2.0], rotation(0.3))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_realizer_random(seed, m):
    rng = np.random.default_rng(seed)
    S = random_symplectic(m, rng, max_log=0.8)
    mu = np.sort(rng.uniform(1, 6, size=m))[::-1]
    w = singular_value_realizer(mu, S)
    sv = np.linalg.svd(w.resolve(), compute_uv=False)
    assert np.allclose(np.sort(sv[sv >= 1 - 1e-9])[::-1], mu, rtol=1e-8)
    assert op_norm(w.resolve()) == pytest.approx(mu.max(), rel=1e-8)
