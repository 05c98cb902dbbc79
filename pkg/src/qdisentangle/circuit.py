"""Windowed gate set, circuit architectures and their evaluation.

Gates are stored with window-relative qubit indices. Window index ``w`` maps
to lattice site ``(target - radius + w) mod N``, so the target is window
index ``radius``.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .quantum_state import (
    CNOT,
    HADAMARD,
    PAULI,
    ROTATIONS,
    PureState,
    apply_gate,
    reduced_density,
)

SINGLE_KINDS = ("RX", "RY", "RZ", "H")
CNOT_PAIRS = ("adjacent", "all")
FORMAT_VERSION = 1


@dataclass(frozen=True)
class WindowSpec:
    target: int = 0
    radius: int = 1
    cnot_pairs: str = "adjacent"

    def __post_init__(self):
        if self.radius not in (1, 2):
            raise ValueError("radius must be 1 or 2")
        if self.cnot_pairs not in CNOT_PAIRS:
            raise ValueError(f"cnot_pairs must be one of {CNOT_PAIRS}")

    @property
    def size(self) -> int:
        return 2 * self.radius + 1

    @property
    def target_index(self) -> int:
        return self.radius

    def check(self, n_sites: int):
        if self.size > n_sites:
            raise ValueError(f"window of {self.size} sites does not fit {n_sites} sites")
        if not 0 <= self.target < n_sites:
            raise ValueError("target site out of range")

    def sites(self, n_sites: int) -> tuple:
        """Lattice sites of the window, in window order."""
        self.check(n_sites)
        return tuple((self.target - self.radius + w) % n_sites for w in range(self.size))

    def window_index(self, site: int, n_sites: int) -> int:
        sites = self.sites(n_sites)
        if site not in sites:
            raise ValueError(f"site {site} is outside the window {sites}")
        return sites.index(site)


@dataclass(frozen=True)
class GateTemplate:
    kind: str
    qubits: tuple

    @property
    def parameterized(self) -> bool:
        return self.kind in ROTATIONS

    def __str__(self):
        return f"{self.kind}({','.join(map(str, self.qubits))})"


@functools.lru_cache(maxsize=None)
def _action_space(window: WindowSpec) -> tuple:
    acts = [GateTemplate(k, (w,)) for w in range(window.size) for k in SINGLE_KINDS]
    if window.cnot_pairs == "adjacent":
        pairs = [(w, w + 1) for w in range(window.size - 1)]
    else:
        pairs = [(a, b) for a in range(window.size) for b in range(a + 1, window.size)]
    for a, b in pairs:
        acts.append(GateTemplate("CNOT", (a, b)))
        acts.append(GateTemplate("CNOT", (b, a)))
    return tuple(acts)


def action_space(window: WindowSpec, n_sites: int | None = None) -> tuple:
    """Deterministically ordered gate templates available inside ``window``."""
    if n_sites is not None:
        window.check(n_sites)
    return _action_space(window)


@functools.lru_cache(maxsize=None)
def _action_index(window: WindowSpec) -> dict:
    return {g: i for i, g in enumerate(_action_space(window))}


def layer_budget(window: WindowSpec) -> int:
    """Default number of agent-chosen gates per layer."""
    return 2 * window.size


@dataclass(frozen=True)
class CircuitArchitecture:
    window: WindowSpec
    gates: tuple = ()
    horizon: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.horizon is None:
            object.__setattr__(self, "horizon", len(self.gates))
        if len(self.gates) > self.horizon:
            raise ValueError("more gates than the horizon allows")
        table = _action_index(self.window)
        for g in self.gates:
            if g not in table:
                raise ValueError(f"gate {g} not in the action space of {self.window}")

    @classmethod
    def from_actions(cls, window: WindowSpec, actions, horizon: int | None = None):
        space = _action_space(window)
        return cls(window, tuple(space[int(a)] for a in actions), horizon)

    @property
    def actions(self) -> tuple:
        table = _action_index(self.window)
        return tuple(table[g] for g in self.gates)

    @property
    def n_params(self) -> int:
        return sum(g.parameterized for g in self.gates)

    def append(self, action: int) -> "CircuitArchitecture":
        return replace(self, gates=self.gates + (_action_space(self.window)[int(action)],))

    def __str__(self):
        return " ".join(map(str, self.gates)) or "<identity>"


def encoding_size(window: WindowSpec, horizon: int) -> int:
    return horizon * (len(_action_space(window)) + 1)


def encode(arch: CircuitArchitecture) -> np.ndarray:
    """One-hot per slot over (actions..., empty)."""
    n_act = len(_action_space(arch.window))
    out = np.zeros((arch.horizon, n_act + 1))
    acts = arch.actions
    out[np.arange(len(acts)), list(acts)] = 1.0
    out[len(acts):, n_act] = 1.0
    return out.reshape(-1)


def decode(vec, window: WindowSpec, horizon: int) -> CircuitArchitecture:
    n_act = len(_action_space(window))
    slots = np.asarray(vec).reshape(horizon, n_act + 1)
    ids = np.argmax(slots, axis=1)
    if not np.allclose(slots.sum(axis=1), 1.0):
        raise ValueError("each slot must be one-hot")
    n = int(np.argmax(ids == n_act)) if np.any(ids == n_act) else horizon
    if np.any(ids[n:] != n_act):
        raise ValueError("occupied slot after an empty slot")
    return CircuitArchitecture.from_actions(window, ids[:n], horizon)


def run_circuit(state: PureState, arch: CircuitArchitecture, params) -> PureState:
    """Apply ``arch`` with rotation angles ``params`` (in gate order) to ``state``."""
    params = np.asarray(params, dtype=float).reshape(-1)
    if params.size != arch.n_params:
        raise ValueError(f"expected {arch.n_params} parameters, got {params.size}")
    sites = arch.window.sites(state.n_sites)
    k = 0
    for g in arch.gates:
        qubits = [sites[w] for w in g.qubits]
        if g.parameterized:
            state = apply_gate(state, g.kind, qubits, params[k])
            k += 1
        else:
            state = apply_gate(state, g.kind, qubits)
    return state


def _embed(op: np.ndarray, qubits, size: int) -> np.ndarray:
    """Full ``2**size`` matrix of ``op`` acting on window qubits ``qubits``."""
    d = 1 << size
    eye = np.eye(d, dtype=complex).reshape((2,) * size + (d,))
    k = len(qubits)
    moved = np.moveaxis(eye, qubits, range(k))
    shape = moved.shape
    out = (op @ moved.reshape(1 << k, -1)).reshape(shape)
    return np.moveaxis(out, range(k), qubits).reshape(d, d)


@dataclass
class WindowCircuit:
    """Precompiled window matrices of an architecture.

    Rotations are ``cos(t/2) I - i sin(t/2) P`` with ``P`` the embedded Pauli;
    fixed gates are stored as full window matrices. Evaluation batches over
    parameter vectors.
    """

    arch: CircuitArchitecture
    ops: list = field(default_factory=list)

    def __post_init__(self):
        size = self.arch.window.size
        for g in self.arch.gates:
            if g.parameterized:
                self.ops.append(("rot", _embed(PAULI[g.kind[1]], g.qubits, size)))
            elif g.kind == "H":
                self.ops.append(("fixed", _embed(HADAMARD, g.qubits, size)))
            else:
                self.ops.append(("fixed", _embed(CNOT, g.qubits, size)))

    def unitaries(self, thetas) -> np.ndarray:
        """Window unitaries for a batch ``thetas`` of shape (B, n_params)."""
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        b = thetas.shape[0]
        d = 1 << self.arch.window.size
        u = np.broadcast_to(np.eye(d, dtype=complex), (b, d, d))
        eye = np.eye(d, dtype=complex)
        k = 0
        for kind, mat in self.ops:
            if kind == "rot":
                c = np.cos(thetas[:, k] / 2)[:, None, None]
                s = np.sin(thetas[:, k] / 2)[:, None, None]
                u = (c * eye - 1j * s * mat) @ u
                k += 1
            else:
                u = mat @ u
        return u

    def target_rho(self, rho_window: np.ndarray, thetas) -> np.ndarray:
        """Reduced 2x2 state of the target after the circuit, batched."""
        u = self.unitaries(thetas)
        out = u @ rho_window @ np.conj(np.swapaxes(u, -1, -2))
        size = self.arch.window.size
        r = self.arch.window.target_index
        b = out.shape[0]
        t = out.reshape((b,) + (2,) * (2 * size))
        t = np.moveaxis(t, (1 + r, 1 + size + r), (1, 2))
        t = t.reshape(b, 2, 2, 1 << (size - 1), 1 << (size - 1))
        return np.trace(t, axis1=3, axis2=4)


def window_density(state: PureState, window: WindowSpec) -> np.ndarray:
    return reduced_density(state, window.sites(state.n_sites)).entries


# --- persistence -----------------------------------------------------------


class CircuitFormatError(ValueError):
    pass


def format_angle(x: float) -> str:
    return f"{float(x):.17g}"


def dumps_circuit(arch: CircuitArchitecture, params, n_sites: int) -> str:
    params = np.asarray(params, dtype=float).reshape(-1)
    if params.size != arch.n_params:
        raise ValueError("parameter count mismatch")
    sites = arch.window.sites(n_sites)
    lines = [
        f"version {FORMAT_VERSION}",
        f"n_sites {n_sites}",
        f"target {arch.window.target}",
        f"radius {arch.window.radius}",
    ]
    k = 0
    for g in arch.gates:
        qs = " ".join(str(sites[w]) for w in g.qubits)
        if g.parameterized:
            lines.append(f"{g.kind} {qs} {format_angle(params[k])}")
            k += 1
        else:
            lines.append(f"{g.kind} {qs}")
    return "\n".join(lines) + "\n"


def loads_circuit(text: str, cnot_pairs: str = "adjacent"):
    """Parse the text format; returns ``(arch, params, n_sites)``."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    header = {}
    for key in ("version", "n_sites", "target", "radius"):
        if not lines or lines[0].split()[0] != key:
            raise CircuitFormatError(f"missing header line {key!r}")
        parts = lines.pop(0).split()
        if len(parts) != 2:
            raise CircuitFormatError(f"malformed header line {' '.join(parts)!r}")
        try:
            header[key] = int(parts[1])
        except ValueError as exc:
            raise CircuitFormatError(str(exc)) from None
    if header["version"] != FORMAT_VERSION:
        raise CircuitFormatError(f"unsupported version {header['version']}")
    n = header["n_sites"]
    try:
        window = WindowSpec(header["target"], header["radius"], cnot_pairs)
        window.check(n)
    except ValueError as exc:
        raise CircuitFormatError(str(exc)) from None
    gates, params = [], []
    for ln in lines:
        parts = ln.split()
        kind = parts[0]
        try:
            if kind in ROTATIONS:
                if len(parts) != 3:
                    raise CircuitFormatError(f"malformed line {ln!r}")
                qubits = (window.window_index(int(parts[1]), n),)
                params.append(float(parts[2]))
            elif kind == "H":
                if len(parts) != 2:
                    raise CircuitFormatError(f"malformed line {ln!r}")
                qubits = (window.window_index(int(parts[1]), n),)
            elif kind == "CNOT":
                if len(parts) != 3:
                    raise CircuitFormatError(f"malformed line {ln!r}")
                qubits = tuple(window.window_index(int(p), n) for p in parts[1:])
            else:
                raise CircuitFormatError(f"unknown gate kind {kind!r}")
        except CircuitFormatError:
            raise
        except ValueError as exc:
            raise CircuitFormatError(f"{ln!r}: {exc}") from None
        gates.append(GateTemplate(kind, qubits))
    try:
        arch = CircuitArchitecture(window, tuple(gates))
    except ValueError as exc:
        raise CircuitFormatError(str(exc)) from None
    return arch, np.array(params, dtype=float), n


def save_circuit(path, arch: CircuitArchitecture, params, n_sites: int):
    Path(path).write_text(dumps_circuit(arch, params, n_sites))


def load_circuit(path, cnot_pairs: str = "adjacent"):
    return loads_circuit(Path(path).read_text(), cnot_pairs)


def reanchor(arch: CircuitArchitecture, target: int = 0) -> CircuitArchitecture:
    """Same window-relative circuit centred on another target site."""
    return replace(arch, window=replace(arch.window, target=target))
