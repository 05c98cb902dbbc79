"""BFGS minimization of the target qubit's entropy over rotation angles."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import CircuitArchitecture, WindowCircuit, window_density
from .quantum_state import PureState, qubit_entropy

ALL_PI = "all_pi"
UNIFORM = "uniform"
INIT_SCHEMES = (ALL_PI, UNIFORM)


@dataclass(frozen=True)
class OptimizeConfig:
    init_scheme: str = ALL_PI
    mean: float = math.pi
    half_width: float = math.pi / 4
    gradient_step: float = 1e-5
    grad_tol: float = 1e-8
    max_iters: int = 200
    restarts: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.init_scheme not in INIT_SCHEMES:
            raise ValueError(f"init_scheme must be one of {INIT_SCHEMES}")
        if not self.gradient_step > 0 or not self.grad_tol > 0:
            raise ValueError("gradient_step and grad_tol must be positive")
        if self.restarts is not None and self.restarts < 1:
            raise ValueError("restarts must be >= 1")

    @classmethod
    def uniform_around(cls, mean: float, **kw) -> "OptimizeConfig":
        return cls(init_scheme=UNIFORM, mean=mean, **kw)

    @property
    def n_restarts(self) -> int:
        if self.restarts is not None:
            return self.restarts
        return 1 if self.init_scheme == ALL_PI else 5

    def initial_points(self, n_params: int) -> list:
        if self.init_scheme == ALL_PI:
            return [np.full(n_params, math.pi)] * self.n_restarts
        rng = np.random.default_rng(self.seed)
        lo, hi = self.mean - self.half_width, self.mean + self.half_width
        return [rng.uniform(lo, hi, n_params) for _ in range(self.n_restarts)]


@dataclass
class OptimizeResult:
    params: np.ndarray
    entropy: float
    iterations: int
    converged: bool
    initial_entropy: float = float("nan")


def central_gradient(fun_batch, x: np.ndarray, h: float) -> np.ndarray:
    """Central differences; ``fun_batch`` maps (B, n) points to (B,) values."""
    n = x.size
    steps = np.eye(n) * h
    vals = fun_batch(np.vstack([x + steps, x - steps]))
    return (vals[:n] - vals[n:]) / (2 * h)


def five_point_gradient(fun_batch, x: np.ndarray, h: float) -> np.ndarray:
    n = x.size
    e = np.eye(n) * h
    vals = fun_batch(np.vstack([x + 2 * e, x + e, x - e, x - 2 * e]))
    f2, f1, m1, m2 = vals.reshape(4, n)
    return (-f2 + 8 * f1 - 8 * m1 + m2) / (12 * h)


def bfgs(fun, grad, x0, *, grad_tol=1e-8, max_iters=200, c1=1e-4, shrink=0.5, min_step=1e-12):
    """BFGS on the inverse Hessian with backtracking Armijo line search.

    Returns ``(x, f, iterations, converged)``. A failed line search ends the
    run with ``converged=False`` at the best point seen.
    """
    x = np.array(x0, dtype=float)
    f = fun(x)
    g = grad(x)
    n = x.size
    h_inv = np.eye(n)
    for it in range(max_iters):
        if np.max(np.abs(g), initial=0.0) < grad_tol:
            return x, f, it, True
        d = -h_inv @ g
        slope = g @ d
        if slope >= 0:
            h_inv = np.eye(n)
            d = -g
            slope = g @ d
        t = 1.0
        while True:
            x_new = x + t * d
            f_new = fun(x_new)
            if np.isfinite(f_new) and f_new <= f + c1 * t * slope:
                break
            t *= shrink
            if t < min_step:
                return x, f, it, False
        g_new = grad(x_new)
        s, y = x_new - x, g_new - g
        sy = s @ y
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            rho = 1.0 / sy
            v = np.eye(n) - rho * np.outer(s, y)
            h_inv = v @ h_inv @ v.T + rho * np.outer(s, s)
        x, f, g = x_new, f_new, g_new
    return x, f, max_iters, np.max(np.abs(g), initial=0.0) < grad_tol


class EntropyObjective:
    """Target-qubit entropy as a function of the rotation angles of ``arch``.

    Only the window's reduced state enters, so the circuit is evaluated as a
    window unitary acting on that reduced state.
    """

    def __init__(self, ground: PureState, arch: CircuitArchitecture):
        self.arch = arch
        self.rho = window_density(ground, arch.window)
        self.circuit = WindowCircuit(arch)

    def batch(self, thetas) -> np.ndarray:
        thetas = np.asarray(thetas, dtype=float)
        if thetas.ndim == 1:
            thetas = thetas[None, :]
        return qubit_entropy(self.circuit.target_rho(self.rho, thetas))

    def __call__(self, theta) -> float:
        return float(self.batch(theta)[0])


def minimize_entropy(
    ground: PureState, arch: CircuitArchitecture, cfg: OptimizeConfig = OptimizeConfig(), x0=None
) -> OptimizeResult:
    """Minimize the target qubit's entropy over ``arch``'s rotation angles.

    ``x0`` (if given) replaces the configured initialization with a single
    warm start. The best result over restarts is returned.
    """
    obj = EntropyObjective(ground, arch)
    n = arch.n_params
    if n == 0:
        s = obj(np.zeros(0))
        return OptimizeResult(np.zeros(0), s, 0, True, s)
    starts = [np.asarray(x0, dtype=float)] if x0 is not None else cfg.initial_points(n)
    h = cfg.gradient_step

    def grad(x):
        return central_gradient(obj.batch, x, h)

    best = None
    for start in starts:
        f0 = obj(start)
        if not np.isfinite(f0):
            continue
        x, f, its, conv = bfgs(obj, grad, start, grad_tol=cfg.grad_tol, max_iters=cfg.max_iters)
        if not np.isfinite(f):
            continue
        res = OptimizeResult(x, float(f), its, bool(conv), float(f0))
        if best is None or res.entropy < best.entropy:
            best = res
    if best is None:
        raise FloatingPointError("objective was non-finite at every start")
    return best
