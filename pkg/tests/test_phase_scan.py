from dataclasses import replace

import numpy as np
import pytest

from qdisentangle.agent import TrainConfig, train_agent
from qdisentangle.circuit import CircuitArchitecture, GateTemplate, WindowSpec
from qdisentangle.oracle import region_sites, state_min_entropy
from qdisentangle.phase_scan import (
    DEFAULT_GRID,
    ScanResult,
    SeedRun,
    best_seed_run,
    TrainedCircuit,
    crossing,
    find_crossing,
    layers_converged,
    parse_grid,
    reference_curves,
    region_slopes,
    scan_curves,
    select_run,
    train_pair,
    transfer_scan,
)
from qdisentangle.spin_models import ModelSpec, ground_state

W1 = WindowSpec(0, 1)
SMALL = TrainConfig(hidden=(32, 32), minibatch=16, episodes=40, patience=20, target_update=10)


def test_parse_grid():
    np.testing.assert_array_equal(parse_grid("0.5:0.1:1.5"), DEFAULT_GRID)
    assert len(DEFAULT_GRID) == 11 and DEFAULT_GRID[5] == 1.0
    for bad in ("0.5:0.1", "1:0:2", "2:0.1:1", "a:b:c"):
        with pytest.raises(ValueError):
            parse_grid(bad)


def test_crossing_linear_interpolation():
    root, flags = find_crossing([0.9, 1.1], [-0.2, 0.2], [0, 0])
    assert root == pytest.approx(1.0) and flags == []


def test_crossing_identical_curves():
    root, flags = find_crossing(DEFAULT_GRID, np.ones(11), np.ones(11))
    assert root is None and "identical_curves" in flags


def test_crossing_absent():
    assert find_crossing(DEFAULT_GRID, np.zeros(11), np.ones(11)) == (None, [])


def test_crossing_multiple_prefers_midpoint():
    d = np.array([-1, 1, 1, 1, 1, -1, -1, -1, -1, -1, 1.0])
    root, flags = find_crossing(DEFAULT_GRID, d, np.zeros(11))
    assert "multiple_crossings" in flags
    assert root == pytest.approx(0.95)


def test_crossing_on_grid_point():
    d = np.array([-2, -1, 0, 1, 2.0])
    root, flags = find_crossing([1, 2, 3, 4, 5], d, np.zeros(5))
    assert root == 3 and flags == []


def test_crossing_is_permutation_stable():
    rng = np.random.default_rng(0)
    for _ in range(50):
        a, b = rng.random(11), rng.random(11)
        r1, _ = find_crossing(DEFAULT_GRID, a, b)
        r2, _ = find_crossing(DEFAULT_GRID, b, a)
        assert (r1 is None and r2 is None) or abs(r1 - r2) < 1e-12


def test_crossing_fills_result():
    res = ScanResult("tfim", 8, np.array([0.9, 1.1]), np.ones(2), np.array([0.1, 0.3]), np.array([0.3, 0.1]))
    assert crossing(res) == pytest.approx(1.0) and res.crossing == pytest.approx(1.0)


def test_region_slopes_fast_slow_fast():
    x = np.linspace(0, 1, 21)
    segs = region_slopes(x, (x - 0.5) ** 3)
    assert [s.label for s in segs] == ["fast", "slow", "fast"]
    assert segs[1].lo <= 0.5 <= segs[1].hi


def test_region_slopes_merges_to_three_segments():
    x = np.linspace(0, 1, 21)
    y = (x - 0.5) ** 3
    y[3] = y[2]  # a flat spot inside the first fast region
    segs = region_slopes(x, y)
    assert len(segs) <= 3
    assert any(s.label == "slow" and s.lo <= 0.5 <= s.hi for s in segs)


def test_region_slopes_constant():
    segs = region_slopes(DEFAULT_GRID, np.full(11, 0.3))
    assert len(segs) == 1 and segs[0].label == "slow"


def test_region_slopes_needs_five_points():
    with pytest.raises(ValueError):
        region_slopes([0, 1, 2, 3], [0, 1, 2, 3])


def test_reference_curves():
    grid = np.array([0.5, 1.0, 2.0])
    direct, dual = reference_curves("tfim", 8, grid)
    assert dual[1] == direct[1]
    assert dual[0] == direct[2]  # 1/0.5 is exactly 2.0
    big, _ = reference_curves("tfim", 8, [50.0])
    assert big[0] == pytest.approx(0.0, abs=1e-6)
    with pytest.raises(ValueError):
        reference_curves("tfim", 8, [0.0, 1.0])
    with pytest.raises(ValueError):
        reference_curves("xxz", 8, [1.0])


def test_layers_converged():
    assert layers_converged(1.0, 1.05, 0.1)
    assert not layers_converged(1.0, 1.2, 0.1)
    assert not layers_converged(None, 1.0, 0.1)


def _fixed(arch, params, n=8, coupling=1.0):
    return TrainedCircuit(arch, np.asarray(params, float), n, coupling, float("nan"))


def test_target_only_circuit_reproduces_raw_entropy():
    arch = CircuitArchitecture(W1, (GateTemplate("RY", (1,)), GateTemplate("H", (1,))))
    c = _fixed(arch, [0.4])
    for n in (8, 10):
        res = scan_curves("tfim", n, [0.7, 1.0, 1.3], c, c)
        np.testing.assert_allclose(res.s_a, res.s_raw, atol=1e-10)
    out = transfer_scan(c, c, "tfim", [10, 12], [0.8, 1.2], reopt=None)
    for res in out.values():
        np.testing.assert_allclose(res.s_a, res.s_raw, atol=1e-10)
        assert "identical_curves" in res.flags


def test_scan_rejects_unsorted_grid_and_small_chain():
    arch = CircuitArchitecture(WindowSpec(0, 2), ())
    c = _fixed(arch, [])
    with pytest.raises(ValueError):
        scan_curves("tfim", 8, [1.0, 0.9], c, c)
    with pytest.raises(ValueError):
        scan_curves("tfim", 4, [1.0], c, c)


@pytest.fixture(scope="module")
def small_pair():
    return train_pair("tfim", 6, 0.5, 1.5, layers=1, cfg=SMALL, seeds=(0, 1))


def test_train_pair_requires_ordered_couplings():
    with pytest.raises(ValueError):
        train_pair("tfim", 6, 1.5, 0.5, 1)


def test_scan_properties(small_pair, tmp_path):
    ca, cb = small_pair
    assert ca.seed in (0, 1) and cb.seed in (0, 1)
    res = scan_curves("tfim", 6, [0.5, 1.0, 1.5], ca, cb)
    assert len(res) == 3
    # evaluating a circuit at its own training point reproduces S_RL
    assert res.s_a[0] == pytest.approx(ca.entropy, abs=1e-6)
    assert res.s_b[2] == pytest.approx(cb.entropy, abs=1e-6)
    assert res.s_a[0] <= res.s_raw[0] and res.s_b[2] <= res.s_raw[2]
    for i, g in enumerate(res.grid):
        gs = ground_state(ModelSpec("tfim", 6, g)).state
        floor = state_min_entropy(gs, region_sites(0, 6, 3))
        assert res.s_a[i] >= floor - 1e-8 and res.s_b[i] >= floor - 1e-8
    for arr in (res.s_raw, res.s_a, res.s_b):
        assert np.all((arr >= 0) & (arr <= 1))
    assert res.metadata["init_scheme"] == "warm_start"
    ca.save(tmp_path / "a.txt")
    loaded = TrainedCircuit.load(tmp_path / "a.txt")
    assert loaded.arch.gates == ca.arch.gates and np.array_equal(loaded.params, ca.params)


def test_train_side_picks_highest_reward(small_pair):
    ca, _ = small_pair
    rewards = [train_agent(ModelSpec("tfim", 6, 0.5), cfg=replace(SMALL, seed=s)).best_reward for s in (0, 1)]
    assert ca.reward == max(rewards)


def _run(seed, reward, d):
    c = _fixed(CircuitArchitecture(W1, ()), [])
    c = replace(c, reward=reward / 2, seed=seed)
    res = ScanResult("tfim", 8, DEFAULT_GRID, np.zeros(11), np.asarray(d, float), np.zeros(11))
    crossing(res)
    return SeedRun(seed, c, c, res)


def test_select_run_prefers_clean_crossing():
    rising = DEFAULT_GRID - 1.0
    runs = [_run(0, 1.9, rising), _run(1, 2.0, np.zeros(11)), _run(2, 1.95, np.sin(20 * rising))]
    assert runs[0].clean and not runs[1].clean and not runs[2].clean
    assert select_run(runs).seed == 0
    runs.append(_run(3, 1.92, rising - 0.05))
    assert select_run(runs).seed == 3
    assert select_run(runs[:3] + [_run(4, 1.9, rising)]).seed == 0


def test_best_seed_run_scans_each_seed(small_pair):
    seen = []
    best, runs = best_seed_run("tfim", 6, 0.5, 1.5, layers=1, cfg=SMALL, seeds=(0, 1),
                               grid=[0.5, 1.0, 1.5], on_result=lambda *a: seen.append(a[:2]))
    assert seen == [("a", 0), ("a", 1), ("b", 0), ("b", 1)]
    assert [r.seed for r in runs] == [0, 1] and best in runs
    assert all(r.circuit_a.seed == r.circuit_b.seed == r.seed for r in runs)
    assert max(r.circuit_a.reward for r in runs) == small_pair[0].reward
