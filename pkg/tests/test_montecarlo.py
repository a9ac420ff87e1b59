from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import ks_2samp

from semirps import checks, limit_law
from semirps.engine import game_rng, run_game
from semirps.montecarlo import (
    DiagnosticsMissing,
    EmptySample,
    ExperimentConfig,
    esn_consistency,
    ks_distance,
    reference_time,
    run_experiment,
    simulate_games,
    t1_scaling,
)
from semirps.strategies import STRATEGIES, UnknownStrategy, get_strategy

C = limit_law.constants()
r_names = [k for k, s in STRATEGIES.items() if s.side == "r"]
n_names = [k for k, s in STRATEGIES.items() if s.side == "n"]


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 25), seed=st.integers(0, 2**63), r=st.sampled_from(r_names), nn=st.sampled_from(n_names))
def test_kernel_replays_engine(n, seed, r, nn):
    batch = simulate_games(n, r, nn, seed, 3, 6)
    t0 = reference_time(n)
    for j, g in enumerate(range(3, 6)):
        tr = run_game(n, get_strategy(r), get_strategy(nn), game_rng(seed, g))
        assert batch.score[j] == tr.final_score
        assert (batch.t1[j], batch.t2[j]) == (tr.t1, tr.t2)
        assert batch.s_t0[j] == tr.score_at(t0)
        used = [tr.r_moves[:t0].count(m) for m in sorted(set(tr.r_moves))]
        assert np.array_equal(3 * batch.x[j], 3 * np.array(used) - t0)


def test_diagnostic_invariants():
    g = simulate_games(50, "greedy-r", "greedy-n", 1, 0, 500)
    assert np.all(g.x.sum(axis=1) == 0) and np.all(g.t1 <= g.t2)
    rec = next(g.records())
    assert rec.x_max == max(rec.x) and not rec.early_exhaustion


@pytest.mark.parametrize("n,expected", [(1, 0), (8, 12), (27, 81 - 27), (1000, 2700)])
def test_reference_time(n, expected):
    assert reference_time(n) == expected


def test_thread_count_does_not_change_results():
    base = dict(n=30, games=3000, master_seed=17, chunk_rounds=5000)
    a = run_experiment(ExperimentConfig(**base, threads=1))
    b = run_experiment(ExperimentConfig(**base, threads=3))
    assert np.array_equal(a.games.score, b.games.score)
    assert (a.mean, a.variance, a.esn_gap_mean) == (b.mean, b.variance, b.esn_gap_mean)


def test_chunking_does_not_change_results():
    a = run_experiment(ExperimentConfig(30, 3000, master_seed=4, chunk_rounds=5000))
    b = run_experiment(ExperimentConfig(30, 3000, master_seed=4))
    assert np.array_equal(a.games.score, b.games.score)
    assert a.mean == pytest.approx(b.mean, abs=1e-12) and a.variance == pytest.approx(b.variance, rel=1e-12)


def test_empty_game():
    st_ = run_experiment(ExperimentConfig(0, 10))
    assert (st_.mean, st_.variance, st_.p_r_wins, st_.mean_t1) == (0.0, 0.0, 0.0, 0.0)


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(5, 0)
    with pytest.raises(UnknownStrategy):
        ExperimentConfig(5, 10, strategy_r="greedy-n")


def test_probabilities_sum_to_one():
    s = run_experiment(ExperimentConfig(20, 2000, master_seed=2))
    assert s.p_r_wins + s.p_draw + s.p_n_wins == pytest.approx(1.0, abs=1e-15)


def test_greedy_mean_at_n100():
    s = run_experiment(ExperimentConfig(100, 10**5, master_seed=21))
    assert 1.40 <= s.mean / 10 <= 1.53


@pytest.mark.parametrize("nn", ["greedy-n", "rock-then-greedy-n", "uniform-n"])
def test_phase_identity_at_n100(nn):
    s = run_experiment(ExperimentConfig(100, 10**5, strategy_n=nn, master_seed=22))
    assert abs(esn_consistency(s, 100)) <= 4 * s.esn_gap_se


def test_cyclic_r_small_n():
    s = run_experiment(ExperimentConfig(7, 10**5, strategy_r="cyclic-r", master_seed=23))
    assert abs(s.mean - 4 / 3) <= 4 * s.std_error


def test_t1_scaling_n1():
    assert t1_scaling(run_experiment(ExperimentConfig(1, 100)), 1) == 2.0


def test_diagnostics_required():
    s = run_experiment(ExperimentConfig(5, 10, record_diagnostics=False))
    with pytest.raises(DiagnosticsMissing):
        esn_consistency(s, 5)


def test_csv_export(tmp_path):
    s = run_experiment(ExperimentConfig(4, 3, master_seed=1))
    path = tmp_path / "games.csv"
    s.games.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("game,final_score,t1,t2") and len(lines) == 4


def test_ks_examples():
    assert ks_distance([1, 2, 3], [1, 2, 3]) == 0.0
    assert ks_distance([0], [1]) == 1.0
    with pytest.raises(EmptySample):
        ks_distance([], [1])


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=1, max_size=30), st.lists(st.integers(-5, 5), min_size=1, max_size=30))
def test_ks_matches_scipy(a, b):
    assert ks_distance(a, b) == pytest.approx(ks_2samp(a, b, method="asymp").statistic, abs=1e-12)


def test_ks_two_rep_a_batches():
    a = limit_law.draw_stream("A", 10**5, 1)
    b = limit_law.draw_stream("A", 10**5, 2)
    assert ks_distance(a, b) <= 0.01


# Large-n properties share the cached runs used by the acceptance suite.


def _rock_run():
    p = checks.LEVELS["full"]
    return checks._experiment(p["rock_n"], p["rock_games"], "greedy-r", "rock-then-greedy-n",
                              checks._subseed(0, 8))


def test_variance_band_for_non_stupid_n():
    n = 10**4
    runs = {
        "greedy-n": checks._experiment(n, 10**4, "greedy-r", "greedy-n", checks._subseed(0, 9)),
        "rock-then-greedy-n": _rock_run(),
        "uniform-n": checks._experiment(n, 10**4, "greedy-r", "uniform-n", 31),
    }
    for name, s in runs.items():
        assert 0.348 <= s.variance / n <= 5.008, name


def test_greedy_distribution_at_n10000():
    n = 10**4
    s = checks._experiment(n, 10**5, "greedy-r", "greedy-n", 32)
    ref = limit_law.draw_stream("A", 10**5, 33)
    assert ks_distance(s.scores / math.sqrt(n), ref) <= 0.02


def test_rock_distribution_above_the_atom():
    # Compare CDFs only above n^0.4 / sqrt(n), past the smeared-out atom at zero.
    s = _rock_run()
    n = s.n
    x = s.scores / math.sqrt(n)
    ref = np.sort(limit_law.draw_stream("EROCK", 10**5, 34))
    cut = n**0.4 / math.sqrt(n)
    pts = np.concatenate([x[x > cut], ref[ref > cut]])
    gap = np.abs(np.searchsorted(x, pts, side="right") / x.size
                 - np.searchsorted(ref, pts, side="right") / ref.size).max()
    assert gap <= 0.02
