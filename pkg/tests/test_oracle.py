import numpy as np
import pytest
from scipy.stats import unitary_group

from qdisentangle.circuit import (
    CircuitArchitecture,
    WindowSpec,
    action_space,
    run_circuit,
    window_density,
)
from qdisentangle.oracle import (
    apply_disentangler,
    brute_force_min_entropy,
    grouped_spectrum,
    min_window_entropy,
    optimal_disentangler,
    region_sites,
    state_min_entropy,
)
from qdisentangle.quantum_state import PureState, apply_matrix, reduced_density, site_entropy, spectrum_entropy
from qdisentangle.spin_models import ModelSpec, ground_state


def random_state(rng, n):
    v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return PureState(v / np.linalg.norm(v), n)


def ghz_x(n):
    plus = np.array([1, 1]) / np.sqrt(2)
    minus = np.array([1, -1]) / np.sqrt(2)
    a, b = np.ones(1), np.ones(1)
    for _ in range(n):
        a, b = np.kron(a, plus), np.kron(b, minus)
    return PureState((a + b) / np.linalg.norm(a + b), n)


BELL = PureState(np.array([1, 0, 0, 1]) / np.sqrt(2), 2)


@pytest.mark.parametrize(
    "spec,q,value",
    [
        ([0.5, 0.5, 0, 0], [1, 0], 0.0),
        ([0.25] * 4, [0.5, 0.5], 1.0),
        ([1, 0, 0, 0], [1, 0], 0.0),
    ],
)
def test_grouped_spectrum_examples(spec, q, value):
    val, g = min_window_entropy(np.diag(spec), 2, 2)
    np.testing.assert_allclose(g.q, q, atol=1e-14)
    assert val == pytest.approx(value, abs=1e-14)


def test_pure_window_any_split():
    rng = np.random.default_rng(0)
    v = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    v /= np.linalg.norm(v)
    for d_P, d_R in ((2, 4), (4, 2), (8, 1)):
        assert min_window_entropy(np.outer(v, v.conj()), d_P, d_R)[0] == pytest.approx(0, abs=1e-12)


def test_grouped_spectrum_invariants():
    rng = np.random.default_rng(1)
    for _ in range(50):
        p = rng.dirichlet(np.ones(8))
        g = grouped_spectrum(p, 2, 4)
        assert g.q.sum() == pytest.approx(1.0, abs=1e-12)
        assert g.q[0] >= g.q[1]
        assert np.all(np.diff(g.p) <= 0)


@pytest.mark.parametrize(
    "mat,d_P,d_R",
    [
        (np.eye(4) / 4, 2, 4),
        (np.array([[0.5, 0.1, 0, 0], [0.2, 0.5, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]), 2, 2),
        (np.eye(4) / 2, 2, 2),
    ],
)
def test_invalid_inputs(mat, d_P, d_R):
    with pytest.raises(ValueError):
        min_window_entropy(mat, d_P, d_R)


def test_bell_pair_disentangled_by_optimal_unitary():
    out = apply_disentangler(BELL, [0, 1])
    assert site_entropy(out, 0) == pytest.approx(0.0, abs=1e-12)


def test_ghz_two_adjacent_sites():
    psi = ghz_x(8)
    assert state_min_entropy(psi, [3, 4]) == pytest.approx(0.0, abs=1e-12)
    assert site_entropy(apply_disentangler(psi, [3, 4]), 3) == pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize("size", [2, 3, 5])
def test_optimal_unitary_attains_minimum(size):
    gs = ground_state(ModelSpec("tfim", 8, 1.0)).state
    sites = region_sites(0, 8, size)
    rho = reduced_density(gs, sites).entries
    d_R = 1 << (size - 1)
    v = optimal_disentangler(rho, 2, d_R)
    np.testing.assert_allclose(v.conj().T @ v, np.eye(2 * d_R), atol=1e-10)
    out = apply_disentangler(gs, sites)
    assert site_entropy(out, 0) == pytest.approx(min_window_entropy(rho, 2, d_R)[0], abs=1e-8)


def test_optimal_unitary_is_reproducible():
    gs = ground_state(ModelSpec("tfim", 8, 0.7)).state
    rho = reduced_density(gs, region_sites(0, 8, 3))
    assert np.array_equal(optimal_disentangler(rho, 2, 4), optimal_disentangler(rho, 2, 4))


def test_region_sites():
    assert region_sites(0, 8, 2) == (0, 1)
    assert region_sites(0, 8, 3) == (0, 7, 1)
    assert region_sites(7, 8, 5) == (7, 5, 6, 0, 1)
    with pytest.raises(ValueError):
        region_sites(0, 8, 4)
    with pytest.raises(ValueError):
        region_sites(0, 4, 5)


def test_brute_force_agrees_on_random_states():
    rng = np.random.default_rng(2)
    for _ in range(5):
        psi = random_state(rng, 4)
        ref = state_min_entropy(psi, [0, 1])
        bf = brute_force_min_entropy(psi, [0, 1], trials=20, seed=1)
        assert bf >= ref - 1e-6
        assert abs(bf - ref) < 1e-4


def test_brute_force_trivial_cases():
    prod = PureState.basis("0110")
    assert brute_force_min_entropy(prod, [1, 2], trials=3) == pytest.approx(0.0, abs=1e-10)
    assert state_min_entropy(prod, [1, 2]) == pytest.approx(0.0, abs=1e-12)
    assert brute_force_min_entropy(BELL, [0, 1], trials=3) < 1e-6
    assert state_min_entropy(BELL, [0, 1]) == pytest.approx(0.0, abs=1e-12)


def test_brute_force_rejects_large_regions():
    with pytest.raises(ValueError):
        brute_force_min_entropy(PureState.basis("00000"), [0, 1, 2, 3])


def test_lower_bound_over_random_circuits():
    rng = np.random.default_rng(3)
    states = [ground_state(ModelSpec("tfim", 8, c)).state for c in (0.5, 1.0, 1.5)]
    for window in (WindowSpec(0, 1), WindowSpec(0, 2)):
        n_act = len(action_space(window))
        for gs in states:
            floor = state_min_entropy(gs, region_sites(0, 8, window.size))
            for _ in range(100):
                arch = CircuitArchitecture.from_actions(window, rng.integers(n_act, size=10))
                th = rng.uniform(-np.pi, np.pi, arch.n_params)
                assert site_entropy(run_circuit(gs, arch, th), 0) >= floor - 1e-8


@pytest.mark.parametrize("kind,c", [("tfim", 0.6), ("tfim", 1.0), ("tfim", 1.4), ("xxz", 0.5), ("xxz", 1.5)])
def test_window_monotonicity(kind, c):
    gs = ground_state(ModelSpec(kind, 8, c)).state
    m2, m3, m5 = (state_min_entropy(gs, region_sites(0, 8, s)) for s in (2, 3, 5))
    assert m5 <= m3 + 1e-10 and m3 <= m2 + 1e-10


def test_majorization_sanity():
    gs = ground_state(ModelSpec("tfim", 8, 1.1)).state
    sites = region_sites(0, 8, 3)
    floor = state_min_entropy(gs, sites)
    for k in range(30):
        u = unitary_group.rvs(8, random_state=k)
        out = PureState(apply_matrix(gs.tensor(), u, sites).reshape(-1), 8)
        assert site_entropy(out, 0) >= floor - 1e-10
