"""Periodic 1D spin chains: transverse-field Ising and XXZ.

Basis convention: site ``j`` is tensor axis ``j`` of the reshaped amplitude
vector, i.e. bit ``N - 1 - j`` of the basis index. ``|0>`` is spin up along z.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .quantum_state import PureState

TFIM = "tfim"
XXZ = "xxz"
MODEL_KINDS = (TFIM, XXZ)

DENSE_MAX_DIM = 4096


class GroundStateError(RuntimeError):
    """Raised when the eigensolver cannot reach the requested residual."""


@dataclass(frozen=True)
class ModelSpec:
    """A periodic chain. ``coupling`` is lambda for TFIM and Delta for XXZ."""

    kind: str
    n_sites: int
    coupling: float

    def __post_init__(self):
        kind = str(self.kind).lower()
        if kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "coupling", float(self.coupling))
        if not math.isfinite(self.coupling):
            raise ValueError("coupling must be finite")
        if int(self.n_sites) != self.n_sites or self.n_sites < 2:
            raise ValueError("n_sites must be an integer >= 2")

    @property
    def dim(self) -> int:
        return 1 << self.n_sites

    def with_coupling(self, coupling: float) -> "ModelSpec":
        return ModelSpec(self.kind, self.n_sites, coupling)


def _site_bits(n_sites: int) -> np.ndarray:
    """``bits[j, idx]`` is the occupation (0/1) of site ``j`` in basis state ``idx``."""
    idx = np.arange(1 << n_sites)
    shifts = n_sites - 1 - np.arange(n_sites)
    return (idx[None, :] >> shifts[:, None]) & 1


class Hamiltonian:
    """Matrix-free action of a chain Hamiltonian in the computational basis.

    Every term is either diagonal or flips the two spins of a bond, so
    ``H v = diag * v + sum_b coef_b(idx) * v[idx ^ mask_b]``.
    """

    def __init__(self, model: ModelSpec, *, allow_two_site: bool = False):
        if model.n_sites < 3 and not allow_two_site:
            raise ValueError("n_sites must be >= 3")
        self.model = model
        n = model.n_sites
        self.dim = 1 << n
        idx = np.arange(self.dim)
        bits = _site_bits(n)
        z = 1.0 - 2.0 * bits
        bonds = [(j, (j + 1) % n) for j in range(n)]
        self._perms = []
        self._coefs = []
        if model.kind == TFIM:
            # H = -sum_j (lambda X_j X_{j+1} + Z_j)
            self.diag = -z.sum(axis=0)
            for i, j in bonds:
                mask = (1 << (n - 1 - i)) | (1 << (n - 1 - j))
                self._perms.append(idx ^ mask)
                self._coefs.append(-model.coupling)
        else:
            # H = sum_j (X X + Y Y + Delta Z Z); XX + YY = 2 on anti-aligned pairs
            self.diag = model.coupling * sum(z[i] * z[j] for i, j in bonds)
            for i, j in bonds:
                mask = (1 << (n - 1 - i)) | (1 << (n - 1 - j))
                self._perms.append(idx ^ mask)
                self._coefs.append(2.0 * (bits[i] != bits[j]))
        self.diag = np.asarray(self.diag, dtype=float)

    @property
    def shape(self):
        return (self.dim, self.dim)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        out = self.diag * v
        for perm, coef in zip(self._perms, self._coefs):
            out = out + coef * v[perm]
        return out

    __matmul__ = matvec

    def dense(self) -> np.ndarray:
        if self.dim > DENSE_MAX_DIM:
            raise MemoryError(f"dense form limited to dim <= {DENSE_MAX_DIM}")
        h = np.diag(self.diag).astype(float)
        cols = np.arange(self.dim)
        for perm, coef in zip(self._perms, self._coefs):
            # (H v)[i] += coef[i] v[perm[i]]  =>  H[i, perm[i]] += coef[i]
            np.add.at(h, (cols, perm), np.broadcast_to(coef, (self.dim,)))
        return h

    def symmetry_diagonal(self) -> np.ndarray:
        """Diagonal of the conserved quantity used to pick degenerate representatives.

        Global parity prod_j Z_j for TFIM, total magnetization sum_j Z_j / 2 for XXZ.
        """
        z = 1.0 - 2.0 * _site_bits(self.model.n_sites)
        if self.model.kind == TFIM:
            return np.prod(z, axis=0)
        return z.sum(axis=0) / 2.0

    @property
    def preferred_sector(self) -> float:
        return 1.0 if self.model.kind == TFIM else 0.0

    def expectation(self, psi: np.ndarray) -> float:
        psi = np.asarray(psi)
        return float(np.real(np.vdot(psi, self.matvec(psi))))


def build_hamiltonian(model: ModelSpec, *, allow_two_site: bool = False) -> Hamiltonian:
    """Build the Hamiltonian of ``model``.

    ``allow_two_site`` admits N=2, where periodic wrapping doubles the single
    bond; it exists for small analytic checks only.
    """
    return Hamiltonian(model, allow_two_site=allow_two_site)


@dataclass
class GroundStateResult:
    state: PureState
    energy: float
    residual_norm: float
    degenerate: bool = False
    low_energies: tuple = ()
    method: str = "dense"
    sector: float | None = None
    info: dict = field(default_factory=dict)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v) > 1e-8 * np.abs(v).max()))
    phase = v[k] / abs(v[k])
    return v / phase


def _select_representative(vecs: np.ndarray, sym: np.ndarray, sector: float) -> np.ndarray:
    """Diagonalize the symmetry inside a degenerate subspace and return the
    vector closest to ``sector``."""
    if vecs.shape[1] == 1:
        return vecs[:, 0]
    s = vecs.conj().T @ (sym[:, None] * vecs)
    w, u = np.linalg.eigh((s + s.conj().T) / 2)
    k = int(np.argmin(np.abs(w - sector)))
    return vecs @ u[:, k]


def _dense_ground_state(ham: Hamiltonian, degeneracy_tol: float) -> GroundStateResult:
    evals, evecs = np.linalg.eigh(ham.dense())
    near = evals - evals[0] < degeneracy_tol
    degenerate = bool(near.sum() > 1)
    if degenerate:
        vec = _select_representative(evecs[:, near], ham.symmetry_diagonal(), ham.preferred_sector)
    else:
        vec = evecs[:, 0]
    vec = vec / np.linalg.norm(vec)
    return GroundStateResult(
        state=None, energy=float(evals[0]), residual_norm=0.0,
        degenerate=degenerate, low_energies=tuple(float(e) for e in evals[:2]),
        method="dense", sector=float(np.vdot(vec, ham.symmetry_diagonal() * vec).real),
        info={"vector": vec},
    )


def lanczos(matvec, v0: np.ndarray, tol: float, max_krylov: int = 300, check_every: int = 5):
    """Lowest eigenpair by Lanczos with full reorthogonalization.

    Returns ``(energy, vector, residual_norm, n_krylov)``. Raises
    :class:`GroundStateError` if the residual is above ``tol`` once the
    Krylov space reaches ``max_krylov`` vectors.
    """
    dim = v0.shape[0]
    m_max = min(max_krylov, dim)
    basis = np.zeros((m_max, dim), dtype=v0.dtype)
    alphas, betas = [], []
    q = v0 / np.linalg.norm(v0)
    basis[0] = q
    for k in range(m_max):
        w = matvec(basis[k])
        alpha = float(np.real(np.vdot(basis[k], w)))
        alphas.append(alpha)
        # two passes of classical Gram-Schmidt against the whole basis
        for _ in range(2):
            w = w - basis[: k + 1].T @ (basis[: k + 1].conj() @ w)
        beta = float(np.linalg.norm(w))
        done = k + 1 == m_max or beta < 1e-14
        if done or (k + 1) % check_every == 0:
            t = np.diag(alphas) + np.diag(betas, 1) + np.diag(betas, -1)
            theta, s = np.linalg.eigh(t)
            est = abs(beta * s[-1, 0])
            if est <= 0.1 * tol or done:
                vec = basis[: k + 1].T @ s[:, 0]
                vec = vec / np.linalg.norm(vec)
                energy = float(np.real(np.vdot(vec, matvec(vec))))
                res = float(np.linalg.norm(matvec(vec) - energy * vec))
                if res <= tol:
                    return energy, vec, res, k + 1
                if done:
                    raise GroundStateError(
                        f"Lanczos residual {res:.3e} > tol {tol:.1e} after {k + 1} Krylov vectors"
                    )
        betas.append(beta)
        basis[k + 1] = w / beta
    raise GroundStateError("Lanczos did not converge")  # pragma: no cover


def ground_state(
    model: ModelSpec,
    tol: float = 1e-9,
    seed: int = 0,
    *,
    max_krylov: int = 300,
    degeneracy_tol: float = 1e-10,
    dense_max_dim: int = DENSE_MAX_DIM,
    allow_two_site: bool = False,
) -> GroundStateResult:
    """Ground state of ``model``.

    Dense eigendecomposition up to ``dense_max_dim``; above that, Lanczos from
    a seeded random vector projected onto the even-parity (TFIM) or zero
    magnetization (XXZ) sector, which is where the dense path's degeneracy
    rule lands as well.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    ham = build_hamiltonian(model, allow_two_site=allow_two_site)
    if ham.dim <= dense_max_dim:
        res = _dense_ground_state(ham, degeneracy_tol)
        vec = res.info.pop("vector")
    else:
        rng = np.random.default_rng(seed)
        sym = ham.symmetry_diagonal()
        v0 = rng.standard_normal(ham.dim) * (np.abs(sym - ham.preferred_sector) < 1e-12)
        energy, vec, _, n_krylov = lanczos(ham.matvec, v0, tol, max_krylov)
        res = GroundStateResult(
            state=None, energy=energy, residual_norm=0.0, method="lanczos",
            sector=ham.preferred_sector, info={"krylov_dim": n_krylov},
        )
    vec = _fix_phase(np.asarray(vec, dtype=complex))
    vec = vec / np.linalg.norm(vec)
    res.residual_norm = float(np.linalg.norm(ham.matvec(vec) - res.energy * vec))
    if res.residual_norm > tol:
        raise GroundStateError(f"residual {res.residual_norm:.3e} exceeds tol {tol:.1e}")
    res.state = PureState(vec, model.n_sites)
    return res
