"""Deep Q-learning search over disentangling circuit architectures.

An episode starts from the identity circuit and appends one gate per step.
Only the final step is rewarded: the rotation angles are optimized and the
relative entropy reduction of the target qubit is returned.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .circuit import CircuitArchitecture, WindowSpec, action_space, encoding_size, layer_budget
from .optimizer import OptimizeConfig, minimize_entropy
from .qnetwork import Adam, QNetwork, q_forward, train_step
from .quantum_state import PureState, site_entropy
from .replay import ReplayBuffer, per_sample, per_update
from .seeding import stream
from .spin_models import ModelSpec, ground_state

log = logging.getLogger(__name__)


def reward_from_entropy(s_rl: float, s0: float) -> float:
    if s_rl >= s0:
        return 0.0
    return (s0 - s_rl) / s0


@dataclass(frozen=True)
class EnvState:
    arch: CircuitArchitecture
    ground: PureState
    s0: float

    @property
    def t(self) -> int:
        return len(self.arch.gates)

    @property
    def horizon(self) -> int:
        return self.arch.horizon

    @property
    def done(self) -> bool:
        return self.t >= self.horizon


def env_reset(ground: PureState, window: WindowSpec, horizon: int) -> EnvState:
    window.check(ground.n_sites)
    s0 = site_entropy(ground, window.target)
    return EnvState(CircuitArchitecture(window, (), horizon), ground, s0)


def env_step(env: EnvState, action: int, opt_cfg: OptimizeConfig = OptimizeConfig(), cache=None):
    """Append ``action``; returns ``(env, reward, done, info)``.

    ``info`` carries the optimization result on the terminal step. ``cache``
    (a dict keyed by action tuples) memoizes terminal evaluations.
    """
    if env.done:
        raise RuntimeError("episode already finished")
    new = replace(env, arch=env.arch.append(action))
    if not new.done:
        return new, 0.0, False, {}
    key = new.arch.actions
    if cache is not None and key in cache:
        res = cache[key]
    else:
        res = minimize_entropy(new.ground, new.arch, opt_cfg)
        if cache is not None:
            cache[key] = res
    return new, reward_from_entropy(res.entropy, new.s0), True, {"result": res}


@dataclass(frozen=True)
class TrainConfig:
    episodes: int = 2000
    patience: int = 200
    minibatch: int = 120
    learning_rate: float = 1e-4
    target_update: int = 100
    gamma: float = 0.99
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay_fraction: float = 0.5
    replay_capacity: int = 100_000
    per_alpha: float = 0.6
    per_beta_start: float = 0.4
    per_beta_end: float = 1.0
    per_eps: float = 1e-3
    hidden: tuple = (512,) * 6
    layer_budget: int | None = None
    dtype: str = "float32"
    # bootstrap values are clipped to the return range; rewards are terminal and in [0, 1]
    value_clip: tuple = (0.0, 1.0)
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")
        for name in ("episodes", "minibatch", "target_update", "replay_capacity"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if len(self.value_clip) != 2 or not self.value_clip[0] < self.value_clip[1]:
            raise ValueError("value_clip must be (low, high) with low < high")

    def decay_episodes(self) -> int:
        return max(1, int(round(self.eps_decay_fraction * self.episodes)))

    def epsilon(self, episode: int) -> float:
        frac = min(1.0, episode / self.decay_episodes())
        return self.eps_start + frac * (self.eps_end - self.eps_start)

    def beta(self, episode: int) -> float:
        frac = min(1.0, episode / max(1, self.episodes - 1))
        return self.per_beta_start + frac * (self.per_beta_end - self.per_beta_start)

    def horizon(self, window: WindowSpec, layers: int) -> int:
        budget = self.layer_budget or layer_budget(window)
        return int(layers) * budget


def select_action(q_values: np.ndarray, epsilon: float, rng: np.random.Generator) -> int:
    if rng.random() < epsilon:
        return int(rng.integers(len(q_values)))
    return int(np.argmax(q_values))


def one_hot_states(ids: np.ndarray, n_actions: int) -> np.ndarray:
    """Encode padded action-id rows (``-1`` = empty) as flat one-hot slots."""
    ids = np.atleast_2d(ids)
    b, horizon = ids.shape
    out = np.zeros((b, horizon, n_actions + 1), dtype=np.float32)
    col = np.where(ids < 0, n_actions, ids)
    out[np.arange(b)[:, None], np.arange(horizon)[None, :], col] = 1.0
    return out.reshape(b, -1)


@dataclass
class TrainResult:
    best_arch: CircuitArchitecture
    best_params: np.ndarray
    best_reward: float
    best_entropy: float
    s0: float
    log: list = field(default_factory=list)
    coupling: float = float("nan")
    n_sites: int = 0
    learn_steps: int = 0


class DQNAgent:
    """Online/target network pair, replay memory and the learning schedule."""

    def __init__(self, n_actions: int, horizon: int, cfg: TrainConfig):
        self.cfg = cfg
        self.n_actions = n_actions
        self.horizon = horizon
        self.rng = stream(cfg.seed, "agent")
        self.per_rng = stream(cfg.seed, "per")
        n_in = horizon * (n_actions + 1)
        self.net = QNetwork(n_in, n_actions, cfg.hidden, rng=stream(cfg.seed, "weights"),
                            dtype=np.dtype(cfg.dtype))
        self.target = self.net.copy()
        self.opt = Adam(self.net.params(), lr=cfg.learning_rate)
        self.buffer = ReplayBuffer(cfg.replay_capacity, horizon, cfg.per_alpha, cfg.per_eps)
        self.learn_steps = 0

    def act(self, ids: np.ndarray, epsilon: float) -> int:
        if self.rng.random() < epsilon:
            return int(self.rng.integers(self.n_actions))
        q = q_forward(self.net, one_hot_states(ids, self.n_actions))[0]
        return int(np.argmax(q))

    def sync_target(self):
        self.target.load_from(self.net)

    def learn(self, beta: float) -> float:
        (s, a, r, s2, done), w, idx = per_sample(self.buffer, self.cfg.minibatch, beta, self.per_rng)
        batch = (one_hot_states(s, self.n_actions), a, r, one_hot_states(s2, self.n_actions), done, w)
        loss, td = train_step(self.net, self.target, batch, self.opt, self.cfg.gamma, self.cfg.value_clip)
        per_update(self.buffer, idx, td)
        self.learn_steps += 1
        if self.learn_steps % self.cfg.target_update == 0:
            self.sync_target()
        return loss


def train_agent(
    model: ModelSpec,
    coupling: float | None = None,
    window: WindowSpec = WindowSpec(),
    layers: int = 1,
    cfg: TrainConfig = TrainConfig(),
    opt_cfg: OptimizeConfig = OptimizeConfig(),
    ground: PureState | None = None,
    progress=None,
) -> TrainResult:
    """Train a DQN agent to build a disentangling circuit for one ground state.

    Returns the best architecture ever evaluated together with the
    per-episode log ``(episode, reward, S_RL, epsilon, loss_mean)``. Early
    stopping (``patience`` episodes without a new best) only kicks in once
    exploration has reached its floor.
    """
    if coupling is not None:
        model = model.with_coupling(coupling)
    if ground is None:
        ground = ground_state(model).state
    horizon = cfg.horizon(window, layers)
    n_actions = len(action_space(window, ground.n_sites))
    agent = DQNAgent(n_actions, horizon, cfg)
    cache: dict = {}
    best = None
    rows = []
    last_improvement = 0
    for ep in range(cfg.episodes):
        eps = cfg.epsilon(ep)
        beta = cfg.beta(ep)
        env = env_reset(ground, window, horizon)
        ids = np.full(horizon, -1, dtype=np.int16)
        losses = []
        reward, s_rl, info = 0.0, float("nan"), {}
        failed = False
        while not env.done:
            a = agent.act(ids, eps)
            nxt = ids.copy()
            nxt[env.t] = a
            try:
                env, reward, done, info = env_step(env, a, opt_cfg, cache)
            except (FloatingPointError, np.linalg.LinAlgError) as exc:
                log.warning("episode %d failed: %s", ep, exc)
                env = replace(env, arch=env.arch.append(a))
                reward, done, info, failed = 0.0, True, {}, True
            agent.buffer.add(ids, a, reward, nxt, done)
            ids = nxt
            if len(agent.buffer) >= cfg.minibatch:
                losses.append(agent.learn(beta))
        if not failed:
            res = info["result"]
            s_rl = res.entropy
            if best is None or reward > best[0]:
                best = (reward, env.arch, res)
                last_improvement = ep
        rows.append((ep, reward, s_rl, eps, float(np.mean(losses)) if losses else float("nan")))
        if progress is not None:
            progress(rows[-1])
        if ep >= cfg.decay_episodes() and ep - last_improvement >= cfg.patience:
            break
    if best is None:
        raise RuntimeError("every episode failed")
    reward, arch, res = best
    return TrainResult(arch, res.params, reward, res.entropy, env.s0, rows,
                       model.coupling, ground.n_sites, agent.learn_steps)
