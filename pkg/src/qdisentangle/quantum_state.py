"""Statevectors, gates, partial traces and von Neumann entropy."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-10
MAX_REDUCED_SITES = 5

FIXED_GATES = ("H", "CNOT")
ROTATIONS = ("RX", "RY", "RZ")
GATE_KINDS = ROTATIONS + FIXED_GATES

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized amplitudes of an ``n_sites`` spin-1/2 chain."""

    amplitudes: np.ndarray
    n_sites: int

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 1 << self.n_sites:
            raise ValueError(f"expected {1 << self.n_sites} amplitudes, got {amps.size}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized (norm={norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_vector(cls, vec, normalize: bool = False) -> "PureState":
        vec = np.asarray(vec, dtype=complex).reshape(-1)
        n = int(round(np.log2(vec.size)))
        if 1 << n != vec.size:
            raise ValueError("length is not a power of two")
        if normalize:
            vec = vec / np.linalg.norm(vec)
        return cls(vec, n)

    @classmethod
    def basis(cls, bits: str) -> "PureState":
        vec = np.zeros(1 << len(bits), dtype=complex)
        vec[int(bits, 2)] = 1.0
        return cls(vec, len(bits))

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n_sites)

    def __len__(self):
        return self.amplitudes.size


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    entries: np.ndarray
    sites: tuple

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)


def rotation(kind: str, angle: float) -> np.ndarray:
    """exp(-i angle/2 sigma) for ``kind`` in RX, RY, RZ."""
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return c * PAULI["I"] - 1j * s * PAULI[kind[1]]


def gate_matrix(kind: str, angle: float | None = None) -> np.ndarray:
    if kind in ROTATIONS:
        if angle is None:
            raise ValueError(f"{kind} requires an angle")
        return rotation(kind, angle)
    if angle is not None:
        raise ValueError(f"{kind} takes no angle")
    if kind == "H":
        return HADAMARD
    if kind == "CNOT":
        return CNOT
    raise ValueError(f"unknown gate kind {kind!r}")


def apply_matrix(tensor: np.ndarray, mat: np.ndarray, axes) -> np.ndarray:
    """Apply ``mat`` (acting on ``len(axes)`` qubits, first axis most significant)."""
    k = len(axes)
    moved = np.moveaxis(tensor, axes, range(k))
    shape = moved.shape
    out = (mat @ moved.reshape(1 << k, -1)).reshape(shape)
    return np.moveaxis(out, range(k), axes)


def _check_sites(sites, n_sites: int):
    sites = tuple(int(s) for s in sites)
    for s in sites:
        if not 0 <= s < n_sites:
            raise ValueError(f"site {s} out of range for {n_sites} sites")
    if len(set(sites)) != len(sites):
        raise ValueError(f"duplicate sites in {sites}")
    return sites


def apply_gate(state: PureState, kind: str, qubits, angle: float | None = None) -> PureState:
    """Apply a gate from {RX, RY, RZ, H, CNOT}; CNOT takes ``(control, target)``."""
    qubits = (qubits,) if np.isscalar(qubits) else tuple(qubits)
    nq = 2 if kind == "CNOT" else 1
    if len(qubits) != nq:
        raise ValueError(f"{kind} acts on {nq} qubit(s), got {qubits}")
    qubits = _check_sites(qubits, state.n_sites)
    mat = gate_matrix(kind, angle)
    out = apply_matrix(state.tensor(), mat, qubits)
    return PureState(out.reshape(-1), state.n_sites)


def reduced_density(state: PureState, sites) -> DensityMatrix:
    """Reduced density matrix on ``sites``; the first listed site is the most
    significant factor of the returned matrix."""
    sites = _check_sites(sites, state.n_sites)
    if not 1 <= len(sites) <= MAX_REDUCED_SITES:
        raise ValueError(f"between 1 and {MAX_REDUCED_SITES} sites supported")
    m = np.moveaxis(state.tensor(), sites, range(len(sites))).reshape(1 << len(sites), -1)
    rho = m @ m.conj().T
    return DensityMatrix(rho, sites)


def spectrum_entropy(p) -> float:
    """Shannon entropy (bits) of a probability vector; entries below 1e-12 count as zero."""
    p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
    p = p[p > 1e-12]
    return float(max(0.0, -np.sum(p * np.log2(p))))


def entropy(rho, herm_tol: float = 1e-10) -> float:
    """Von Neumann entropy -Tr(rho log2 rho)."""
    mat = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if np.max(np.abs(mat - mat.conj().T), initial=0.0) > herm_tol:
        raise ValueError("density matrix is not Hermitian")
    return spectrum_entropy(np.linalg.eigvalsh(mat))


def qubit_entropy(rho2: np.ndarray) -> np.ndarray:
    """Entropy of a stack of 2x2 density matrices, closed form (last two axes)."""
    a = rho2[..., 0, 0].real
    d = rho2[..., 1, 1].real
    b = rho2[..., 0, 1]
    tr = a + d
    disc = np.sqrt(np.maximum((a - d) ** 2 + 4 * np.abs(b) ** 2, 0.0))
    out = np.zeros(np.shape(a))
    for lam in ((tr + disc) / 2, (tr - disc) / 2):
        lam = np.clip(lam, 0.0, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            term = np.where(lam > 1e-12, -lam * np.log2(np.where(lam > 1e-12, lam, 1.0)), 0.0)
        out = out + term
    return np.maximum(out, 0.0)


def site_entropy(state: PureState, site: int = 0) -> float:
    return entropy(reduced_density(state, [site]))
