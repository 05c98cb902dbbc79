"""Exact minimal single-qubit entropy reachable by a unitary on a local region.

Sort the spectrum of the region's reduced state in non-increasing order and
sum it in consecutive blocks of ``d_R``; the Shannon entropy of the block sums
is the minimum, and the unitary mapping the ``k``-th eigenvector to basis
state ``k`` attains it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .circuit import WindowSpec
from .quantum_state import (
    DensityMatrix,
    PureState,
    apply_matrix,
    reduced_density,
    spectrum_entropy,
)


@dataclass(frozen=True)
class GroupedSpectrum:
    p: np.ndarray
    q: np.ndarray
    d_P: int
    d_R: int

    @property
    def entropy(self) -> float:
        return spectrum_entropy(self.q)


def _matrix(rho) -> np.ndarray:
    return rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)


def _check_rho(mat: np.ndarray, d_P: int, d_R: int, tol: float = 1e-10):
    if mat.shape != (d_P * d_R, d_P * d_R):
        raise ValueError(f"expected a {d_P * d_R}x{d_P * d_R} matrix, got {mat.shape}")
    if np.max(np.abs(mat - mat.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(mat).real - 1.0) > tol:
        raise ValueError("density matrix does not have unit trace")


def _sorted_eigh(mat: np.ndarray):
    w, v = np.linalg.eigh((mat + mat.conj().T) / 2)
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]
    for k in range(v.shape[1]):
        col = v[:, k]
        j = int(np.argmax(np.abs(col) > 1e-12))
        v[:, k] = col * (abs(col[j]) / col[j])
    return w, v


def grouped_spectrum(p, d_P: int, d_R: int) -> GroupedSpectrum:
    p = np.sort(np.clip(np.asarray(p, dtype=float), 0.0, None))[::-1]
    q = p.reshape(d_P, d_R).sum(axis=1)
    return GroupedSpectrum(p, q, d_P, d_R)


def min_window_entropy(rho_RP, d_P: int = 2, d_R: int = 2):
    """Minimum over unitaries on RP of the entropy of P; returns ``(value, grouped)``.

    ``rho_RP`` must list P as the most significant factor.
    """
    mat = _matrix(rho_RP)
    _check_rho(mat, d_P, d_R)
    w = np.linalg.eigvalsh((mat + mat.conj().T) / 2)
    g = grouped_spectrum(w, d_P, d_R)
    return g.entropy, g


def optimal_disentangler(rho_RP, d_P: int = 2, d_R: int = 2) -> np.ndarray:
    """Unitary sending the k-th eigenvector (descending eigenvalue) to basis state k."""
    mat = _matrix(rho_RP)
    _check_rho(mat, d_P, d_R)
    _, v = _sorted_eigh(mat)
    return v.conj().T


def region_sites(target: int, n_sites: int, size: int) -> tuple:
    """Target first, then the remaining region sites.

    ``size`` 2 is the pair {target, target+1}; 3 and 5 are the radius-1 and
    radius-2 windows.
    """
    if size == 2:
        sites = (target, (target + 1) % n_sites)
    elif size in (3, 5):
        sites = WindowSpec(target, (size - 1) // 2).sites(n_sites)
    else:
        raise ValueError("region size must be 2, 3 or 5")
    if len(set(sites)) != len(sites):
        raise ValueError("region does not fit the chain")
    return (target,) + tuple(s for s in sites if s != target)


def state_min_entropy(state: PureState, sites) -> float:
    """Minimum for ``state`` with P = ``sites[0]`` and R = the other sites."""
    rho = reduced_density(state, sites)
    return min_window_entropy(rho, 2, 1 << (len(sites) - 1))[0]


def apply_disentangler(state: PureState, sites) -> PureState:
    rho = reduced_density(state, sites)
    v = optimal_disentangler(rho, 2, 1 << (len(sites) - 1))
    out = apply_matrix(state.tensor(), v, tuple(sites))
    return PureState(out.reshape(-1), state.n_sites)


def _hermitian(x: np.ndarray, d: int) -> np.ndarray:
    a = x[: d * d].reshape(d, d)
    sym = np.triu(a) + np.triu(a, 1).T
    anti = np.tril(a, -1) - np.tril(a, -1).T
    return sym + 1j * anti


def _unitary(x: np.ndarray, d: int) -> np.ndarray:
    w, v = np.linalg.eigh(_hermitian(x, d))
    return (v * np.exp(1j * w)) @ v.conj().T


def _region_entropy_and_grad(x: np.ndarray, rho: np.ndarray):
    """Entropy of P after ``exp(iG(x))`` on RP, and its gradient in ``x``.

    The derivative of the matrix exponential uses the divided differences of
    ``exp(iw)`` over the generator's eigenvalues.
    """
    d = rho.shape[0]
    d_R = d // 2
    w, v = np.linalg.eigh(_hermitian(x, d))
    ew = np.exp(1j * w)
    u = (v * ew) @ v.conj().T
    r_p = np.trace((u @ rho @ u.conj().T).reshape(2, d_R, 2, d_R), axis1=1, axis2=3)
    lam, vec = np.linalg.eigh(r_p)
    lam = np.clip(lam, 1e-300, None)
    s = spectrum_entropy(lam)
    log_p = (vec * (np.log2(lam) + 1 / np.log(2))) @ vec.conj().T
    m = rho @ u.conj().T @ np.kron(log_p, np.eye(d_R))
    dw = w[:, None] - w[None, :]
    close = np.abs(dw) < 1e-9
    phi = np.where(close, 1j * ew[:, None], (ew[:, None] - ew[None, :]) / np.where(close, 1.0, dw))
    a = v.conj().T @ m @ v
    g = v @ (a.T * phi).T @ v.conj().T
    # dS = -Re tr(g dG) * 2, mapped onto the real parameters of ``_hermitian``
    iu, ju = np.triu_indices(d)
    il, jl = np.tril_indices(d, -1)
    grad = np.zeros(d * d)
    sym = np.where(iu == ju, g[iu, ju], g[iu, ju] + g[ju, iu])
    grad[iu * d + ju] = -2 * sym.real
    grad[il * d + jl] = -2 * (1j * (g[jl, il] - g[il, jl])).real
    return s, grad


def brute_force_min_entropy(state: PureState, sites, trials: int = 50, seed: int = 0) -> float:
    """Random-restart quasi-Newton search over all unitaries on ``sites``.

    The unitary is ``exp(iG)`` with ``G`` a general Hermitian matrix (d**2 real
    parameters). Independent of the spectral construction above.
    """
    sites = tuple(sites)
    if len(sites) > 3:
        raise ValueError("brute force supports regions of at most 3 sites")
    rho = reduced_density(state, sites).entries
    d = rho.shape[0]
    rng = np.random.default_rng(seed)
    best = _region_entropy_and_grad(np.zeros(d * d), rho)[0]
    for _ in range(trials):
        x0 = rng.uniform(-np.pi, np.pi, d * d)
        res = optimize.minimize(_region_entropy_and_grad, x0, args=(rho,), jac=True,
                                method="BFGS", options={"gtol": 1e-8})
        best = min(best, float(res.fun))
    return best
