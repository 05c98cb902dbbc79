"""Flat ``key = value`` run configuration shared by all commands."""
from __future__ import annotations

import math
from dataclasses import fields
from pathlib import Path

from . import __version__
from .agent import TrainConfig
from .circuit import WindowSpec
from .optimizer import OptimizeConfig
from .seeding import child_seed

CONFIG_NAME = "config.txt"


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _angle(text: str) -> float:
    """Float, also accepting ``pi`` expressions such as ``pi/2``."""
    t = text.strip().lower().replace(" ", "")
    if "pi" in t:
        num, _, den = t.partition("/")
        coef = num.replace("pi", "").rstrip("*") or "1"
        val = float(coef) * math.pi
        return val / float(den) if den else val
    return float(t)


def _optional_int(text: str):
    return None if text.strip().lower() in ("", "none") else int(text)


def _int_tuple(text: str) -> tuple:
    return tuple(int(x) for x in text.replace(" ", "").split(",") if x)


def _clip(text: str) -> tuple:
    """``lo,hi`` or ``off``."""
    if text.strip().lower() == "off":
        return (-math.inf, math.inf)
    lo, hi = (float(x) for x in text.split(","))
    return (lo, hi)


def _str(text: str) -> str:
    return text.strip()


def _select(text: str) -> str:
    t = text.strip()
    if t not in ("pair", "side"):
        raise ValueError(f"select must be pair or side, got {t!r}")
    return t


# key -> (parser, default)
RUN_KEYS = {
    "model": (_str, "tfim"),
    "n_sites": (int, 8),
    "coupling": (float, 1.0),
    "a": (float, 0.5),
    "b": (float, 1.5),
    "grid": (_str, "0.5:0.1:1.5"),
    "radius": (int, 1),
    "target": (int, 0),
    "cnot_pairs": (_str, "adjacent"),
    "layers": (int, 2),
    "seed": (int, 0),
    "seeds": (_int_tuple, None),
    "select": (_select, "pair"),
    "sizes": (_int_tuple, (10, 12, 14)),
    "warm_start": (_bool, True),
    "reoptimize": (_bool, True),
    "output": (_str, None),
}
TRAIN_KEYS = {
    "episodes": (int, None), "patience": (int, None), "minibatch": (int, None),
    "learning_rate": (float, None), "target_update": (int, None), "gamma": (float, None),
    "eps_start": (float, None), "eps_end": (float, None), "eps_decay_fraction": (float, None),
    "replay_capacity": (int, None), "per_alpha": (float, None), "per_beta_start": (float, None),
    "per_beta_end": (float, None), "per_eps": (float, None), "hidden": (_int_tuple, None),
    "layer_budget": (_optional_int, None), "dtype": (_str, None), "value_clip": (_clip, None),
}
OPT_KEYS = {
    "init_scheme": (_str, None), "mean": (_angle, None), "half_width": (_angle, None),
    "gradient_step": (float, None), "grad_tol": (float, None), "max_iters": (int, None),
    "restarts": (_optional_int, None),
}
ALL_KEYS = RUN_KEYS | TRAIN_KEYS | OPT_KEYS


class ConfigError(ValueError):
    pass


def parse_config_text(text: str) -> dict:
    """Raw string values; ``#`` starts a comment, unknown keys are rejected."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if key not in ALL_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = val.strip()
    return out


def resolve(file_values: dict | None = None, overrides: dict | None = None) -> dict:
    """Typed configuration: defaults, then file values, then non-None overrides."""
    cfg = {k: d for k, (_, d) in ALL_KEYS.items()}
    for source in (file_values or {}), {k: v for k, v in (overrides or {}).items() if v is not None}:
        for key, val in source.items():
            if key not in ALL_KEYS:
                raise ConfigError(f"unknown key {key!r}")
            parser, default = ALL_KEYS[key]
            try:
                if isinstance(val, str) and default is None and val.strip().lower() == "none":
                    cfg[key] = None
                else:
                    cfg[key] = parser(val) if isinstance(val, str) else val
            except ValueError as exc:
                raise ConfigError(f"{key}: {exc}") from None
    if cfg["model"] not in ("tfim", "xxz"):
        raise ConfigError(f"model must be tfim or xxz, got {cfg['model']!r}")
    return cfg


def load_config(path, overrides: dict | None = None) -> dict:
    values = parse_config_text(Path(path).read_text()) if path else {}
    return resolve(values, overrides)


def train_config(cfg: dict, seed: int | None = None) -> TrainConfig:
    kw = {k: cfg[k] for k in TRAIN_KEYS if cfg.get(k) is not None}
    return TrainConfig(**kw, seed=cfg["seed"] if seed is None else seed)


def optimize_config(cfg: dict) -> OptimizeConfig:
    kw = {k: cfg[k] for k in OPT_KEYS if cfg.get(k) is not None}
    return OptimizeConfig(**kw, seed=child_seed(cfg["seed"], "optimizer"))


def window(cfg: dict) -> WindowSpec:
    return WindowSpec(cfg["target"], cfg["radius"], cfg["cnot_pairs"])


def _show(val) -> str:
    if isinstance(val, tuple):
        return ",".join(map(str, val))
    if isinstance(val, float):
        return repr(val)
    return "none" if val is None else str(val)


def dumps_config(cfg: dict, command: str) -> str:
    """Fully resolved configuration, including the library defaults it used."""
    train = train_config(cfg)
    opt = optimize_config(cfg)
    lines = [f"# qdisentangle {__version__}", f"# command: {command}"]
    for key in RUN_KEYS:
        lines.append(f"{key} = {_show(cfg[key])}")
    for f in fields(TrainConfig):
        if f.name in TRAIN_KEYS:
            lines.append(f"{f.name} = {_show(getattr(train, f.name))}")
    for f in fields(OptimizeConfig):
        if f.name in OPT_KEYS:
            lines.append(f"{f.name} = {_show(getattr(opt, f.name))}")
    return "\n".join(lines) + "\n"


def prepare_output(directory, force: bool = False) -> Path:
    """Create ``directory``; refuse to reuse a non-empty one unless ``force``."""
    out = Path(directory)
    if out.exists() and any(out.iterdir()) and not force:
        raise FileExistsError(f"{out} is not empty; pass --force to overwrite")
    out.mkdir(parents=True, exist_ok=True)
    return out
