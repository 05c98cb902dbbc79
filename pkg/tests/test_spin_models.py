import numpy as np
import pytest
import scipy.sparse.linalg as sla

from qdisentangle.quantum_state import site_entropy
from qdisentangle.spin_models import (
    GroundStateError,
    ModelSpec,
    build_hamiltonian,
    ground_state,
    lanczos,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def kron_chain(ops):
    out = np.eye(1)
    for op in ops:
        out = np.kron(out, op)
    return out


def site_op(op, j, n):
    return kron_chain([op if k == j else np.eye(2) for k in range(n)])


def brute_tfim(n, lam):
    h = 0
    for j in range(n):
        h = h - lam * site_op(X, j, n) @ site_op(X, (j + 1) % n, n) - site_op(Z, j, n)
    return h


def brute_xxz(n, delta):
    h = 0
    for j in range(n):
        k = (j + 1) % n
        h = h + site_op(X, j, n) @ site_op(X, k, n) + site_op(Y, j, n) @ site_op(Y, k, n)
        h = h + delta * site_op(Z, j, n) @ site_op(Z, k, n)
    return h


def random_vec(rng, dim):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


@pytest.mark.parametrize("kind,n,c", [("tfim", 3, 0.7), ("tfim", 5, 1.3), ("xxz", 4, 0.5), ("xxz", 5, 1.7)])
def test_matches_kronecker_construction(kind, n, c):
    ham = build_hamiltonian(ModelSpec(kind, n, c))
    ref = brute_tfim(n, c) if kind == "tfim" else brute_xxz(n, c)
    np.testing.assert_allclose(ham.dense(), ref.real, atol=1e-12)
    np.testing.assert_allclose(ref.imag, 0, atol=1e-12)


def test_dense_equals_matvec_on_basis():
    ham = build_hamiltonian(ModelSpec("xxz", 6, 0.8))
    dense = ham.dense()
    for i in range(0, 64, 7):
        e = np.zeros(64)
        e[i] = 1
        np.testing.assert_allclose(ham.matvec(e), dense[:, i], atol=1e-14)


def test_two_site_tfim_lambda_zero_is_diagonal():
    ham = build_hamiltonian(ModelSpec("tfim", 2, 0.0), allow_two_site=True)
    np.testing.assert_allclose(ham.dense(), np.diag([-2.0, 0.0, 0.0, 2.0]))


def test_two_site_heisenberg_singlet():
    ham = build_hamiltonian(ModelSpec("xxz", 2, 1.0), allow_two_site=True)
    dense = ham.dense()
    # periodic wrapping visits the single bond twice
    np.testing.assert_allclose(dense, brute_xxz(2, 1.0).real, atol=1e-12)
    w, v = np.linalg.eigh(dense)
    assert w[0] == pytest.approx(-6.0, abs=1e-12)
    singlet = np.array([0, 1, -1, 0]) / np.sqrt(2)
    assert abs(np.vdot(singlet, v[:, 0])) == pytest.approx(1.0, abs=1e-12)
    gs = ground_state(ModelSpec("xxz", 2, 1.0), allow_two_site=True)
    assert gs.energy == pytest.approx(-6.0, abs=1e-12)


def test_tfim_n3_ground_energy_against_independent_eigensolver():
    ref = np.linalg.eigvalsh(brute_tfim(3, 1.0))[0]
    assert ground_state(ModelSpec("tfim", 3, 1.0)).energy == pytest.approx(ref, abs=1e-10)


@pytest.mark.parametrize("bad", [dict(n_sites=2), dict(coupling=np.inf), dict(coupling=np.nan)])
def test_rejects_invalid_models(bad):
    kw = dict(kind="tfim", n_sites=4, coupling=1.0) | bad
    with pytest.raises(ValueError):
        build_hamiltonian(ModelSpec(**kw))


def test_rejects_unknown_kind():
    with pytest.raises(ValueError):
        ModelSpec("heisenberg", 4, 1.0)


@pytest.mark.parametrize("kind,c", [("tfim", 0.6), ("tfim", 1.4), ("xxz", 0.5), ("xxz", 1.5)])
def test_hermiticity_and_symmetry(kind, c):
    rng = np.random.default_rng(3)
    ham = build_hamiltonian(ModelSpec(kind, 7, c))
    sym = ham.symmetry_diagonal()
    for _ in range(20):
        u, v = random_vec(rng, ham.dim), random_vec(rng, ham.dim)
        lhs = np.vdot(u, ham.matvec(v))
        rhs = np.conj(np.vdot(v, ham.matvec(u)))
        assert abs(lhs - rhs) < 1e-12
        np.testing.assert_allclose(ham.matvec(sym * v), sym * ham.matvec(v), atol=1e-12)


@pytest.mark.parametrize("kind,c", [("tfim", 0.9), ("xxz", 1.2)])
def test_variational_bound(kind, c):
    rng = np.random.default_rng(4)
    model = ModelSpec(kind, 8, c)
    ham = build_hamiltonian(model)
    e0 = ground_state(model).energy
    for _ in range(100):
        assert e0 <= ham.expectation(random_vec(rng, ham.dim)) + 1e-10


def test_ground_state_residual_and_norm():
    res = ground_state(ModelSpec("tfim", 8, 1.0), tol=1e-10)
    assert res.residual_norm <= 1e-10
    assert np.linalg.norm(res.state.amplitudes) == pytest.approx(1.0, abs=1e-12)


def test_weak_coupling_limit_is_all_up():
    gs = ground_state(ModelSpec("tfim", 8, 0.01)).state
    assert abs(gs.amplitudes[0]) ** 2 > 0.999


def test_strong_coupling_limit_is_maximally_entangled():
    res = ground_state(ModelSpec("tfim", 8, 50.0))
    assert abs(site_entropy(res.state, 0) - 1.0) < 1e-3
    assert res.sector == pytest.approx(1.0, abs=1e-8)


def test_xxz_energy_matches_dense_oracle():
    ref = np.linalg.eigvalsh(brute_xxz(8, 1.0))[0]
    assert ground_state(ModelSpec("xxz", 8, 1.0)).energy == pytest.approx(ref, abs=1e-9)


@pytest.mark.parametrize("kind,c", [("tfim", 0.7), ("xxz", 1.3)])
def test_translation_invariant_site_entropy(kind, c):
    gs = ground_state(ModelSpec(kind, 8, c)).state
    ents = [site_entropy(gs, i) for i in range(8)]
    np.testing.assert_allclose(ents, ents[0], atol=1e-8)


@pytest.mark.parametrize("kind,c", [("tfim", 1.1), ("xxz", 0.8)])
def test_lanczos_path_matches_dense(kind, c):
    model = ModelSpec(kind, 10, c)
    dense = ground_state(model, tol=1e-9)
    lz = ground_state(model, tol=1e-9, seed=5, dense_max_dim=16)
    assert lz.method == "lanczos"
    assert lz.energy == pytest.approx(dense.energy, abs=1e-9)
    assert lz.residual_norm <= 1e-9
    overlap = abs(np.vdot(lz.state.amplitudes, dense.state.amplitudes))
    assert overlap == pytest.approx(1.0, abs=1e-8)


def test_lanczos_n14_against_scipy():
    model = ModelSpec("tfim", 14, 1.0)
    res = ground_state(model, tol=1e-8, seed=1)
    assert res.method == "lanczos"
    ham = build_hamiltonian(model)
    op = sla.LinearOperator(ham.shape, matvec=ham.matvec, dtype=float)
    ref = sla.eigsh(op, k=1, which="SA", tol=1e-12)[0][0]
    assert res.energy == pytest.approx(ref, abs=1e-9)


def test_lanczos_reports_non_convergence():
    ham = build_hamiltonian(ModelSpec("tfim", 12, 1.0))
    v0 = np.random.default_rng(0).standard_normal(ham.dim)
    with pytest.raises(GroundStateError):
        lanczos(ham.matvec, v0, tol=1e-12, max_krylov=4)


def test_ground_state_is_deterministic():
    a = ground_state(ModelSpec("tfim", 8, 0.9)).state.amplitudes
    b = ground_state(ModelSpec("tfim", 8, 0.9)).state.amplitudes
    assert np.array_equal(a, b)


def test_rejects_nonpositive_tol():
    with pytest.raises(ValueError):
        ground_state(ModelSpec("tfim", 4, 1.0), tol=0)
