"""Command-line entry point: ``qdisentangle <command> [flags]``."""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from . import config as C
from .circuit import format_angle, reanchor
from .io import write_log_csv, write_scan_csv
from .oracle import region_sites, state_min_entropy
from .phase_scan import (
    TrainedCircuit,
    best_seed_run,
    parse_grid,
    reference_curves,
    scan_curves,
    train_side,
    transfer_scan,
)
from .quantum_state import site_entropy
from .spin_models import ModelSpec, ground_state

# flag name -> config key, for flags shared between commands
_FLAG_KEYS = {
    "model": "model", "n": "n_sites", "coupling": "coupling", "a": "a", "b": "b",
    "grid": "grid", "radius": "radius", "target": "target", "layers": "layers",
    "seed": "seed", "seeds": "seeds", "select": "select", "sizes": "sizes", "episodes": "episodes",
    "init_scheme": "init_scheme", "mean": "mean", "half_width": "half_width",
    "output": "output",
}


def _common(p: argparse.ArgumentParser, *names):
    p.set_defaults(subparser=p)
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--force", action="store_true", help="overwrite a non-empty output directory")
    p.add_argument("-v", "--verbose", action="store_true")
    spec = {
        "model": dict(choices=("tfim", "xxz")),
        "n": dict(type=str, metavar="N"),
        "coupling": dict(type=str),
        "a": dict(type=str),
        "b": dict(type=str),
        "grid": dict(type=str, metavar="START:STEP:STOP"),
        "radius": dict(type=str, choices=("1", "2")),
        "target": dict(type=str),
        "layers": dict(type=str),
        "seed": dict(type=str),
        "seeds": dict(type=str, help="comma-separated training seeds"),
        "select": dict(choices=("pair", "side"), help="best seed run by clean crossing, or best reward per side"),
        "sizes": dict(type=str, help="comma-separated chain lengths"),
        "episodes": dict(type=str),
        "init_scheme": dict(choices=("all_pi", "uniform")),
        "mean": dict(type=str, help="uniform initialization mean, e.g. pi/2"),
        "half_width": dict(type=str),
        "output": dict(type=str, help="output directory"),
    }
    for name in names:
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, default=None, **spec[name])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qdisentangle", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ground", help="ground-state energy and single-site entropy")
    _common(p, "model", "n", "coupling", "seed", "output")

    p = sub.add_parser("train", help="train disentangling circuits at couplings a and b")
    _common(p, "model", "n", "a", "b", "radius", "target", "layers", "seed", "seeds", "select", "grid",
            "episodes", "output")

    p = sub.add_parser("scan", help="scan two trained circuits over a coupling grid")
    _common(p, "model", "n", "grid", "init_scheme", "mean", "half_width", "seed", "output")
    p.add_argument("--circuit-a", dest="circuit_a")
    p.add_argument("--circuit-b", dest="circuit_b")
    p.add_argument("--references", action="store_true", help="add the pair-oracle reference curves")

    p = sub.add_parser("transfer", help="scan trained circuits on longer chains")
    _common(p, "model", "sizes", "grid", "init_scheme", "mean", "half_width", "seed", "output")
    p.add_argument("--circuit-a", dest="circuit_a")
    p.add_argument("--circuit-b", dest="circuit_b")

    p = sub.add_parser("oracle", help="exact minimum target entropy over a local region")
    _common(p, "model", "n", "coupling", "target", "output")
    p.add_argument("--window", type=int, choices=(2, 3, 5), help="region size (default: all)")

    p = sub.add_parser("duality", help="pair-oracle curve and its image under lambda -> 1/lambda")
    _common(p, "n", "grid", "target", "output")
    return ap


def _resolve(args) -> dict:
    overrides = {key: getattr(args, flag) for flag, key in _FLAG_KEYS.items() if hasattr(args, flag)}
    if getattr(args, "init_scheme", None) is not None:
        # an explicit scheme on the command line replaces the trained-angle warm start
        overrides["warm_start"] = False
    return C.load_config(args.config, overrides)


def _output(cfg, args, parser, required: bool) -> Path | None:
    if cfg["output"] is None:
        if required:
            parser.error("the following arguments are required: --output")
        return None
    out = C.prepare_output(cfg["output"], args.force)
    (out / C.CONFIG_NAME).write_text(C.dumps_config(cfg, args.command))
    return out


def _model(cfg, coupling=None) -> ModelSpec:
    return ModelSpec(cfg["model"], cfg["n_sites"], cfg["coupling"] if coupling is None else coupling)


def _reopt(cfg):
    return C.optimize_config(cfg) if cfg["reoptimize"] else None


def cmd_ground(cfg, out):
    model = _model(cfg)
    res = ground_state(model, seed=cfg["seed"])
    s = site_entropy(res.state, cfg["target"])
    print(f"energy {format_angle(res.energy)}")
    print(f"entropy {format_angle(s)}")
    if out:
        with open(out / "ground.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["model", "n_sites", "coupling", "energy", "entropy", "residual", "method"])
            w.writerow([model.kind, model.n_sites, format_angle(model.coupling), format_angle(res.energy),
                        format_angle(s), format_angle(res.residual_norm), res.method])
    return 0


def cmd_train(cfg, out):
    seeds = cfg["seeds"] or (cfg["seed"],)
    win = C.window(cfg)
    opt = C.optimize_config(cfg)
    if not cfg["a"] < cfg["b"]:
        raise ValueError("need a < b")

    def keep_log(label, seed, rows):
        write_log_csv(out / f"log_{label}_seed{seed}.csv", rows)

    args = (cfg["model"], cfg["n_sites"])
    if cfg["select"] == "pair":
        best, runs = best_seed_run(*args, cfg["a"], cfg["b"], cfg["layers"], win, C.train_config(cfg), opt,
                                   seeds, parse_grid(cfg["grid"]), _reopt(cfg), cfg["warm_start"],
                                   on_result=keep_log)
        for run in runs:
            print(f"seed {run.seed}: ", end="")
            _print_scan(run.scan)
        pair = (best.circuit_a, best.circuit_b)
    else:
        pair = tuple(
            train_side(*args, coupling, cfg["layers"], win, C.train_config(cfg), opt, seeds,
                       on_result=lambda seed, rows, _l=label: keep_log(_l, seed, rows))
            for label, coupling in (("a", cfg["a"]), ("b", cfg["b"])))
    for label, c in zip("ab", pair):
        c.save(out / f"circuit_{label}.txt")
        print(f"{label}: coupling {c.coupling} seed {c.seed} S_RL {format_angle(c.entropy)} "
              f"reward {format_angle(c.reward)} {c.arch}")
    return 0


def _load_pair(args, parser):
    if not args.circuit_a or not args.circuit_b:
        parser.error("the following arguments are required: --circuit-a, --circuit-b")
    return TrainedCircuit.load(args.circuit_a), TrainedCircuit.load(args.circuit_b)


def cmd_scan(cfg, out, ca, cb, references):
    grid = parse_grid(cfg["grid"])
    res = scan_curves(cfg["model"], cfg["n_sites"], grid, ca, cb, _reopt(cfg), cfg["warm_start"],
                      references=references)
    write_scan_csv(out / "scan.csv", res)
    _print_scan(res)
    return 0


def _print_scan(res):
    print(f"crossing {res.crossing if res.crossing is None else format_angle(res.crossing)}"
          + (f" flags {','.join(res.flags)}" if res.flags else ""))


def cmd_transfer(cfg, out, ca, cb):
    grid = parse_grid(cfg["grid"])
    ca.arch, cb.arch = reanchor(ca.arch, 0), reanchor(cb.arch, 0)
    results = transfer_scan(ca, cb, cfg["model"], cfg["sizes"], grid, _reopt(cfg), cfg["warm_start"])
    for n, res in results.items():
        write_scan_csv(out / f"scan_N{n}.csv", res)
        print(f"N={n}: ", end="")
        _print_scan(res)
    return 0


def cmd_oracle(cfg, out, sizes):
    gs = ground_state(_model(cfg), seed=cfg["seed"]).state
    rows = []
    for size in sizes:
        val = state_min_entropy(gs, region_sites(cfg["target"], cfg["n_sites"], size))
        rows.append((size, val))
        print(f"window {size} min_entropy {format_angle(val)}")
    if out:
        with open(out / "oracle.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["model", "n_sites", "coupling", "window", "min_entropy"])
            for size, val in rows:
                w.writerow([cfg["model"], cfg["n_sites"], format_angle(cfg["coupling"]), size, format_angle(val)])
    return 0


def cmd_duality(cfg, out):
    grid = parse_grid(cfg["grid"])
    direct, dual = reference_curves("tfim", cfg["n_sites"], grid, cfg["target"])
    with open(out / "duality.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["coupling", "direct_ref", "dual_ref"])
        for row in zip(grid, direct, dual):
            w.writerow([format_angle(x) for x in row])
    for g, d, u in zip(grid, direct, dual):
        print(f"{g:.4g} direct {d:.6f} dual {u:.6f}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    sub = args.subparser
    try:
        cfg = _resolve(args)
        if args.command == "ground":
            return cmd_ground(cfg, _output(cfg, args, sub, False))
        if args.command == "train":
            return cmd_train(cfg, _output(cfg, args, sub, True))
        if args.command == "scan":
            ca, cb = _load_pair(args, sub)
            return cmd_scan(cfg, _output(cfg, args, sub, True), ca, cb, args.references)
        if args.command == "transfer":
            ca, cb = _load_pair(args, sub)
            return cmd_transfer(cfg, _output(cfg, args, sub, True), ca, cb)
        if args.command == "oracle":
            sizes = (args.window,) if args.window else (2, 3, 5)
            return cmd_oracle(cfg, _output(cfg, args, sub, False), sizes)
        if args.command == "duality":
            return cmd_duality(cfg, _output(cfg, args, sub, True))
    except (ValueError, FileExistsError, FileNotFoundError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 1  # pragma: no cover


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
