"""Locate the Ising transition from two learned disentangling circuits.

For each seed an agent is trained on both sides of the transition, both
circuits are re-optimized across a coupling grid and the point where their
entropy curves cross is located. The agent settings are scaled down so the
script finishes in about a minute; ``TrainConfig()`` holds the full ones.
"""
# %%
from qdisentangle.agent import TrainConfig
from qdisentangle.circuit import WindowSpec
from qdisentangle.phase_scan import best_seed_run, reference_curves, region_slopes

N = 8
cfg = TrainConfig(hidden=(256, 256), minibatch=64, episodes=1000, patience=100, target_update=100)

# %%
# A seed whose two circuits re-optimize to the same curve says nothing about
# the phases, so runs with one clean crossing are preferred.
best, runs = best_seed_run("tfim", N, 0.5, 1.5, layers=2, window=WindowSpec(0, 1), cfg=cfg, seeds=(0, 1, 2))
for run in runs:
    print(f"seed {run.seed}: S_a(0.5) = {run.circuit_a.entropy:.4f}  S_b(1.5) = {run.circuit_b.entropy:.4f}  "
          f"crossing {run.scan.crossing} {run.scan.flags}")
print("kept seed", best.seed)
for name, c in (("a", best.circuit_a), ("b", best.circuit_b)):
    print(f"  circuit {name}:", " ".join(str(g) for g in c.arch.gates))

# %%
# The reference columns are the best 2-site circuit for the direct model and
# its Kramers-Wannier image.
res = best.scan
direct, dual = reference_curves("tfim", N, res.grid)
print(f"{'g':>7} {'S_raw':>7} {'S_a':>7} {'S_b':>7} {'direct':>7} {'dual':>7}")
for row in zip(res.grid, res.s_raw, res.s_a, res.s_b, direct, dual):
    print(" ".join(f"{x:7.4f}" for x in row))
print("crossing", res.crossing)

# %%
for seg in region_slopes(res.grid, res.s_a - res.s_b):
    print(f"{seg.label:>4} slope region {seg.lo:.2f} .. {seg.hi:.2f}")
