"""Train a pair of circuits on both sides of a suspected transition, scan
them across the coupling range and locate where their entropy curves cross.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .agent import TrainConfig, TrainResult, train_agent
from .circuit import CircuitArchitecture, WindowSpec, layer_budget, load_circuit, save_circuit
from .optimizer import EntropyObjective, OptimizeConfig, minimize_entropy
from .oracle import region_sites, state_min_entropy
from .quantum_state import site_entropy
from .spin_models import GroundStateError, ModelSpec, ground_state

log = logging.getLogger(__name__)

DEFAULT_GRID = np.round(np.arange(0.5, 1.5 + 1e-9, 0.1), 10)
FAST, SLOW = "fast", "slow"


def parse_grid(spec: str) -> np.ndarray:
    """``start:step:stop`` (inclusive stop) to a rounded array."""
    try:
        start, step, stop = (float(x) for x in spec.split(":"))
    except ValueError:
        raise ValueError(f"grid must look like start:step:stop, got {spec!r}") from None
    if step <= 0 or stop < start:
        raise ValueError(f"empty or invalid grid {spec!r}")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(n), 10)


@dataclass
class TrainedCircuit:
    arch: CircuitArchitecture
    params: np.ndarray
    n_sites: int
    coupling: float
    entropy: float
    reward: float = float("nan")
    seed: int | None = None
    log: list = field(default_factory=list, repr=False)

    @classmethod
    def from_result(cls, res: TrainResult, seed=None) -> "TrainedCircuit":
        return cls(res.best_arch, np.asarray(res.best_params), res.n_sites, res.coupling,
                   res.best_entropy, res.best_reward, seed, res.log)

    def save(self, path):
        save_circuit(path, self.arch, self.params, self.n_sites)

    @classmethod
    def load(cls, path, cnot_pairs: str = "adjacent") -> "TrainedCircuit":
        arch, params, n = load_circuit(path, cnot_pairs)
        return cls(arch, params, n, float("nan"), float("nan"))


def train_runs(kind, n_sites, coupling, layers, window, cfg, opt_cfg, seeds,
               on_result=None) -> list:
    """One trained circuit per seed. ``on_result(seed, log_rows)`` is called after every run."""
    out = []
    for seed in seeds:
        res = train_agent(ModelSpec(kind, n_sites, coupling), window=window, layers=layers,
                          cfg=_with_seed(cfg, seed), opt_cfg=opt_cfg)
        if on_result is not None:
            on_result(seed, res.log)
        log.info("trained %s N=%d at %.3f seed %d: S_RL=%.6f", kind, n_sites, coupling, seed,
                 res.best_entropy)
        out.append(TrainedCircuit.from_result(res, seed))
    return out


def train_side(kind, n_sites, coupling, layers, window, cfg, opt_cfg, seeds,
               on_result=None) -> TrainedCircuit:
    """Best (highest-reward) circuit over independent runs with ``seeds``."""
    runs = train_runs(kind, n_sites, coupling, layers, window, cfg, opt_cfg, seeds, on_result)
    return max(runs, key=lambda c: c.reward)  # first seed wins ties


def _with_seed(cfg: TrainConfig, seed: int) -> TrainConfig:
    from dataclasses import replace

    return replace(cfg, seed=int(seed))


def train_pair(kind, n_sites, a, b, layers, window=WindowSpec(), cfg=TrainConfig(),
               opt_cfg=OptimizeConfig(), seeds=None):
    """Independently trained circuits at couplings ``a < b``."""
    if not a < b:
        raise ValueError("need a < b")
    seeds = (cfg.seed,) if seeds is None else tuple(seeds)
    return (train_side(kind, n_sites, a, layers, window, cfg, opt_cfg, seeds),
            train_side(kind, n_sites, b, layers, window, cfg, opt_cfg, seeds))


@dataclass
class ScanResult:
    kind: str
    n_sites: int
    grid: np.ndarray
    s_raw: np.ndarray
    s_a: np.ndarray
    s_b: np.ndarray
    crossing: float | None = None
    flags: list = field(default_factory=list)
    direct_ref: np.ndarray | None = None
    dual_ref: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.grid)


def find_crossing(grid, s_a, s_b, tol: float = 1e-6):
    """Linear-interpolated root of ``s_a - s_b``; returns ``(root, flags)``.

    Differences within ``tol`` count as zero. With several roots the one
    nearest the grid midpoint is returned and ``"multiple_crossings"`` is
    flagged; curves equal everywhere give ``(None, ["identical_curves"])``.
    """
    grid = np.asarray(grid, dtype=float)
    d = np.asarray(s_a, dtype=float) - np.asarray(s_b, dtype=float)
    ok = np.isfinite(d)
    grid, d = grid[ok], d[ok]
    d = np.where(np.abs(d) <= tol, 0.0, d)
    if d.size == 0:
        return None, ["no_data"]
    if np.all(d == 0):
        return None, ["identical_curves"]
    roots = []
    for i in range(d.size):
        if d[i] == 0:
            if i == 0 or d[i - 1] != 0:  # one root per run of zeros
                roots.append(grid[i])
        elif i + 1 < d.size and d[i] * d[i + 1] < 0:
            roots.append(grid[i] + d[i] * (grid[i + 1] - grid[i]) / (d[i] - d[i + 1]))
    if not roots:
        return None, []
    flags = []
    mid = (grid[0] + grid[-1]) / 2
    if len(roots) > 1:
        flags.append("multiple_crossings")
    best = min(roots, key=lambda r: (abs(r - mid), r))
    return float(best), flags


def crossing(result: ScanResult, tol: float = 1e-6):
    root, flags = find_crossing(result.grid, result.s_a, result.s_b, tol)
    result.crossing = root
    result.flags = sorted(set(result.flags) | set(flags))
    return root


def evaluate_circuit(ground, circuit: TrainedCircuit, reopt: OptimizeConfig | None,
                     warm_start: bool = True) -> float:
    """Target entropy of ``circuit`` on ``ground``.

    ``reopt=None`` keeps the trained angles. Otherwise angles are refreshed
    by BFGS, starting from the trained angles when ``warm_start`` is set and
    from ``reopt``'s initialization scheme when it is not.
    """
    if reopt is None:
        return EntropyObjective(ground, circuit.arch)(circuit.params)
    x0 = circuit.params if warm_start else None
    return minimize_entropy(ground, circuit.arch, reopt, x0=x0).entropy


def scan_curves(kind, n_sites, grid, circuit_a: TrainedCircuit, circuit_b: TrainedCircuit,
                reopt: OptimizeConfig | None = OptimizeConfig(), warm_start: bool = True,
                references: bool = False, target: int = 0) -> ScanResult:
    """Raw and post-circuit target entropies across ``grid``."""
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly ascending")
    for c in (circuit_a, circuit_b):
        c.arch.window.check(n_sites)
    n = len(grid)
    s_raw, s_a, s_b = np.full(n, np.nan), np.full(n, np.nan), np.full(n, np.nan)
    failures = []
    for i, g in enumerate(grid):
        try:
            gs = ground_state(ModelSpec(kind, n_sites, g)).state
        except GroundStateError as exc:
            log.warning("ground state failed at %s: %s", g, exc)
            failures.append(float(g))
            continue
        s_raw[i] = site_entropy(gs, circuit_a.arch.window.target)
        s_a[i] = evaluate_circuit(gs, circuit_a, reopt, warm_start)
        s_b[i] = evaluate_circuit(gs, circuit_b, reopt, warm_start)
    res = ScanResult(kind, n_sites, grid, s_raw, s_a, s_b)
    if failures:
        res.flags.append("missing_points")
    res.metadata.update(
        model=kind, N=n_sites,
        horizon=f"{circuit_a.arch.horizon},{circuit_b.arch.horizon}",
        layers=f"{_layers(circuit_a.arch)},{_layers(circuit_b.arch)}",
        seeds=f"{circuit_a.seed},{circuit_b.seed}",
        init_scheme="fixed_angles" if reopt is None else
        ("warm_start" if warm_start else reopt.init_scheme),
        half_width=None if reopt is None else reopt.half_width,
        mean=None if reopt is None else reopt.mean,
        ground_state_sector="even_parity" if kind == "tfim" else "zero_magnetization",
        failed_points=failures,
    )
    if references:
        res.direct_ref, res.dual_ref = reference_curves(kind, n_sites, grid, target)
    crossing(res)
    return res


def _layers(arch: CircuitArchitecture):
    budget = layer_budget(arch.window)
    return arch.horizon // budget if arch.horizon % budget == 0 else arch.horizon / budget


def reference_curves(kind, n_sites, grid, target: int = 0):
    """Pair-region optimum on the ground state at each coupling, and the same
    quantity at the inverse coupling (the Ising self-duality map)."""
    if kind != "tfim":
        raise ValueError("reference curves are defined for the transverse-field Ising chain")
    grid = np.asarray(grid, dtype=float)
    if np.any(grid <= 0):
        raise ValueError("couplings must be positive")
    sites = region_sites(target, n_sites, 2)

    def direct(c):
        return state_min_entropy(ground_state(ModelSpec(kind, n_sites, c)).state, sites)

    return np.array([direct(c) for c in grid]), np.array([direct(1.0 / c) for c in grid])


@dataclass(frozen=True)
class Segment:
    label: str
    start: int
    stop: int  # inclusive index
    lo: float
    hi: float


def region_slopes(grid, curve) -> list:
    """Split a curve into at most three fast/slow segments by slope magnitude.

    A point is slow when its centred slope is below half the median slope
    magnitude over the outer thirds of the grid.
    """
    grid = np.asarray(grid, dtype=float)
    curve = np.asarray(curve, dtype=float)
    n = len(grid)
    if n < 5:
        raise ValueError("need at least 5 grid points")
    slopes = np.abs(np.gradient(curve, grid))
    k = max(1, n // 3)
    thr = 0.5 * np.median(np.concatenate([slopes[:k], slopes[-k:]]))
    noise = 1e-12 * (np.max(np.abs(curve)) + 1.0) / (grid[-1] - grid[0])
    slow = (slopes < thr) | (slopes <= noise)
    runs = []
    start = 0
    for i in range(1, n + 1):
        if i == n or slow[i] != slow[start]:
            runs.append((bool(slow[start]), start, i - 1))
            start = i
    if len(runs) > 3:
        slow_runs = [r for r in runs if r[0]]
        centre = (n - 1) / 2
        keep = max(slow_runs, key=lambda r: (r[2] - r[1], -abs((r[1] + r[2]) / 2 - centre)))
        runs = [r for r in [(False, 0, keep[1] - 1), keep, (False, keep[2] + 1, n - 1)] if r[1] <= r[2]]
    return [Segment(SLOW if s else FAST, a, b, float(grid[a]), float(grid[b])) for s, a, b in runs]


def transfer_scan(circuit_a: TrainedCircuit, circuit_b: TrainedCircuit, kind, sizes, grid,
                  reopt: OptimizeConfig | None = OptimizeConfig(), warm_start: bool = True) -> dict:
    """Scan circuits trained on a small chain on larger chains.

    Circuits are stored relative to their window, so they re-anchor on the
    target site of each new chain.
    """
    out = {}
    for n in sizes:
        out[int(n)] = scan_curves(kind, int(n), grid, circuit_a, circuit_b, reopt, warm_start)
    return out


@dataclass
class SeedRun:
    """Both sides trained with one seed, plus their scan."""
    seed: int
    circuit_a: TrainedCircuit
    circuit_b: TrainedCircuit
    scan: ScanResult

    @property
    def clean(self) -> bool:
        return self.scan.crossing is not None and not {"multiple_crossings", "identical_curves"} & set(self.scan.flags)

    @property
    def reward(self) -> float:
        return self.circuit_a.reward + self.circuit_b.reward


def best_seed_run(kind, n_sites, a, b, layers, window=WindowSpec(), cfg=TrainConfig(),
                  opt_cfg=OptimizeConfig(), seeds=(0,), grid=DEFAULT_GRID,
                  reopt: OptimizeConfig | None = OptimizeConfig(), warm_start: bool = True,
                  on_result=None):
    """Run the train-and-scan pipeline once per seed and keep the best run
    (see :func:`select_run`). Returns ``(best, runs)``. ``on_result(side, seed, log_rows)`` sees every training log.
    """
    if not a < b:
        raise ValueError("need a < b")
    sides = []
    for label, coupling in (("a", a), ("b", b)):
        hook = None if on_result is None else (lambda seed, rows, _l=label: on_result(_l, seed, rows))
        sides.append(train_runs(kind, n_sites, coupling, layers, window, cfg, opt_cfg, seeds, hook))
    runs = []
    for ca, cb in zip(*sides):
        res = scan_curves(kind, n_sites, grid, ca, cb, reopt, warm_start)
        log.info("seed %d: crossing %s %s", ca.seed, res.crossing, res.flags)
        runs.append(SeedRun(ca.seed, ca, cb, res))
    return select_run(runs), runs


def select_run(runs):
    """Clean crossing first, then combined reward, then the earlier run."""
    return max(runs, key=lambda r: (r.clean, r.reward))


def layers_converged(crossing_p, crossing_next, spacing: float) -> bool:
    if crossing_p is None or crossing_next is None:
        return False
    return abs(crossing_p - crossing_next) <= spacing + 1e-12
