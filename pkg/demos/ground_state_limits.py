"""Single-site entropy of the Ising chain ground state, before and after
the best possible window disentangler.

Run with ``python3 demos/ground_state_limits.py``.
"""
# %%
import numpy as np

from qdisentangle.oracle import region_sites, state_min_entropy
from qdisentangle.quantum_state import site_entropy
from qdisentangle.spin_models import ModelSpec, ground_state

N = 8
couplings = [0.01, 0.5, 1.0, 1.5, 3.0, 50.0]

# %%
# At small coupling the field dominates and site 0 is nearly a product
# state. At large coupling the chain is a cat state and site 0 carries
# one full bit. The oracle columns show how much of that bit a unitary
# on a 2, 3 or 5 site window around site 0 can remove.
print(f"{'coupling':>8} {'S_raw':>8} {'win2':>8} {'win3':>8} {'win5':>8}")
for g in couplings:
    gs = ground_state(ModelSpec("tfim", N, g)).state
    mins = [state_min_entropy(gs, region_sites(0, N, k)) for k in (2, 3, 5)]
    print(f"{g:8.2f} {site_entropy(gs, 0):8.4f} " + " ".join(f"{m:8.4f}" for m in mins))

# %%
# The XXZ chain at the isotropic point: the raw entropy is exactly one bit
# because the ground state has zero magnetization on every site.
gs = ground_state(ModelSpec("xxz", N, 1.0)).state
print("xxz S_raw", round(site_entropy(gs, 0), 6))
print("xxz window minima", [round(state_min_entropy(gs, region_sites(0, N, k)), 4) for k in (2, 3, 5)])
