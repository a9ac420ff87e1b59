"""Batch simulation of strategy pairs and the statistics built on it.

Game ``i`` of an experiment is played on the stream ``game_rng(seed, i)``
and consumes exactly two uniforms per round (R's draw, then N's), the same
contract as :func:`semirps.engine.run_game`.  The compiled kernel below
reproduces the engine move for move for every registered strategy, so a
batch is an exact replay of the reference engine, only faster.

Games are processed in fixed-size chunks; per-chunk accumulators are merged
in chunk order, so results do not depend on the number of worker threads.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np

from semirps.engine import RMoveExhausted, game_rng
from semirps.moments import Moments
from semirps.strategies import get_strategy


class EmptySample(ValueError):
    pass


class DiagnosticsMissing(ValueError):
    pass


def reference_time(n: int) -> int:
    """T0 = 3n - 3 * ceil(n^(2/3)), in exact integer arithmetic."""
    if n <= 0:
        return 0
    m = round(n ** (2.0 / 3.0))
    while m**3 < n * n:
        m += 1
    while m > 0 and (m - 1) ** 3 >= n * n:
        m -= 1
    return 3 * n - 3 * m


# ---------------------------------------------------------------------------
# compiled game loop


@numba.njit(cache=True)
def _sample(p, u):
    cum = 0.0
    last = 0
    for i in range(3):
        if p[i] > 0.0:
            last = i
        cum += p[i]
        if u < cum:
            return i
    return last


@numba.njit(cache=True)
def _pair_low(rem):
    if rem[2] == 0:
        return 0
    if rem[0] == 0:
        return 1
    return 2


@numba.njit(cache=True)
def _r_mix(code, t, rem, live, p):
    third = 1.0 / 3.0
    p[:] = 0.0
    if code == 1:  # cyclic
        p[t % 3] = 1.0
    elif live == 3:
        p[:] = third
    elif live == 2:
        x = _pair_low(rem)
        p[x] = third
        p[(x + 1) % 3] = 2.0 / 3.0
    else:
        for i in range(3):
            if rem[i] > 0:
                p[i] = 1.0


@numba.njit(cache=True)
def _n_mix(code, rem, live, p):
    third = 1.0 / 3.0
    p[:] = 0.0
    if live == 3:
        if code == 2:  # rock while R has all three moves
            p[0] = 1.0
        else:
            p[:] = third
    elif live == 2:
        x = _pair_low(rem)
        if code == 1:
            p[(x + 1) % 3] = 0.5
            p[(x + 2) % 3] = 0.5
        else:
            p[(x + 1) % 3] = 2.0 / 3.0
            p[(x + 2) % 3] = third
    else:
        for i in range(3):
            if rem[i] > 0:
                p[(i + 1) % 3] = 1.0


@numba.njit(cache=True, nogil=True)
def _play_chunk(n, r_code, n_code, t0, uniforms, score, t1, t2, s_t0, x):
    """Play ``uniforms.shape[0]`` games; returns 0 or 1 + index of a bad game."""
    rem = np.empty(3, dtype=np.int64)
    pr = np.empty(3)
    pn = np.empty(3)
    third_t0 = t0 // 3
    for g in range(uniforms.shape[0]):
        rem[:] = n
        live = 3 if n > 0 else 0
        s = 0
        t1[g] = 0
        t2[g] = 0
        if t0 == 0:
            s_t0[g] = 0
            for i in range(3):
                x[g, i] = 0
        for t in range(3 * n):
            _r_mix(r_code, t, rem, live, pr)
            _n_mix(n_code, rem, live, pn)
            r = _sample(pr, uniforms[g, t, 0])
            m = _sample(pn, uniforms[g, t, 1])
            if rem[r] == 0:
                return 1 + g
            rem[r] -= 1
            d = (m - r) % 3
            if d == 1:
                s += 1
            elif d == 2:
                s -= 1
            if rem[r] == 0:
                if live == 3:
                    t1[g] = t + 1
                elif live == 2:
                    t2[g] = t + 1
                live -= 1
            if t + 1 == t0:
                s_t0[g] = s
                for i in range(3):
                    x[g, i] = (n - rem[i]) - third_t0
        score[g] = s
    return 0


# ---------------------------------------------------------------------------
# experiment records


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    games: int
    strategy_r: str = "greedy-r"
    strategy_n: str = "greedy-n"
    master_seed: int = 0
    record_diagnostics: bool = True
    threads: int = 1
    chunk_rounds: int = 1 << 21  # uniforms budget per chunk is twice this

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        if self.games < 1:
            raise ValueError("games must be at least 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 bits")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        get_strategy(self.strategy_r, "r")
        get_strategy(self.strategy_n, "n")

    def echo(self) -> dict:
        return {
            "n": self.n,
            "games": self.games,
            "strategy_r": self.strategy_r,
            "strategy_n": self.strategy_n,
            "master_seed": self.master_seed,
            "record_diagnostics": self.record_diagnostics,
        }


@dataclass(frozen=True)
class DiagnosticRecord:
    game: int
    final_score: int
    t1: int
    t2: int
    s_t0: int
    x: tuple[int, int, int]
    x_max: int
    l1_residual: int
    early_exhaustion: bool  # T1 <= T0


@dataclass
class GameArrays:
    """Per-game outputs of a batch, in game-index order."""

    n: int
    score: np.ndarray
    t1: np.ndarray
    t2: np.ndarray
    s_t0: np.ndarray
    x: np.ndarray  # (games, 3)

    @property
    def t0(self) -> int:
        return reference_time(self.n)

    @property
    def l1_residual(self) -> np.ndarray:
        x = self.x
        pred = np.maximum.reduce([x[:, 0] + 2 * x[:, 1], x[:, 1] + 2 * x[:, 2], x[:, 2] + 2 * x[:, 0]])
        return self.score - self.s_t0 - pred

    @property
    def esn_gap(self) -> np.ndarray:
        """Score minus the phase-length predictor (t2 - t1)/3 + (3n - t2)."""
        return self.score - ((self.t2 - self.t1) / 3.0 + (3 * self.n - self.t2))

    def records(self):
        l1 = self.l1_residual
        t0 = self.t0
        for g in range(self.score.size):
            xi = tuple(int(v) for v in self.x[g])
            yield DiagnosticRecord(
                game=g,
                final_score=int(self.score[g]),
                t1=int(self.t1[g]),
                t2=int(self.t2[g]),
                s_t0=int(self.s_t0[g]),
                x=xi,
                x_max=max(xi),
                l1_residual=int(l1[g]),
                early_exhaustion=bool(self.n > 0 and self.t1[g] <= t0),
            )

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["game", "final_score", "t1", "t2", "s_t0", "x1", "x2", "x3",
                        "x_max", "l1_residual", "early_exhaustion"])
            for r in self.records():
                w.writerow([r.game, r.final_score, r.t1, r.t2, r.s_t0, *r.x, r.x_max,
                            r.l1_residual, int(r.early_exhaustion)])


@dataclass
class SummaryStats:
    n: int
    count: int
    mean: float
    variance: float
    std_error: float
    variance_std_error: float
    p_r_wins: float
    p_draw: float
    p_n_wins: float
    scores: np.ndarray = field(repr=False)  # sorted; the empirical CDF
    mean_t1: float | None = None
    mean_t2: float | None = None
    mean_abs_l1_residual: float | None = None
    esn_gap_mean: float | None = None
    esn_gap_se: float | None = None
    games: GameArrays | None = field(default=None, repr=False)

    def ecdf(self, values) -> np.ndarray:
        return np.searchsorted(self.scores, values, side="right") / self.count

    @property
    def has_diagnostics(self) -> bool:
        return self.mean_t1 is not None


def simulate_games(
    n: int,
    strategy_r: str,
    strategy_n: str,
    master_seed: int,
    start: int,
    stop: int,
) -> GameArrays:
    """Play games ``start .. stop-1`` of the experiment seeded by ``master_seed``."""
    r_code = get_strategy(strategy_r, "r").kernel_code
    n_code = get_strategy(strategy_n, "n").kernel_code
    count = stop - start
    rounds = 3 * n
    uniforms = np.empty((count, rounds, 2))
    for j in range(count):
        game_rng(master_seed, start + j).random(out=uniforms[j])
    out = GameArrays(
        n=n,
        score=np.empty(count, dtype=np.int64),
        t1=np.empty(count, dtype=np.int64),
        t2=np.empty(count, dtype=np.int64),
        s_t0=np.empty(count, dtype=np.int64),
        x=np.empty((count, 3), dtype=np.int64),
    )
    status = _play_chunk(n, r_code, n_code, reference_time(n), uniforms,
                         out.score, out.t1, out.t2, out.s_t0, out.x)
    if status:
        raise RMoveExhausted(f"game {start + status - 1}: {strategy_r} chose an exhausted move")
    return out


def _concat(parts: list[GameArrays], n: int) -> GameArrays:
    return GameArrays(
        n=n,
        score=np.concatenate([p.score for p in parts]),
        t1=np.concatenate([p.t1 for p in parts]),
        t2=np.concatenate([p.t2 for p in parts]),
        s_t0=np.concatenate([p.s_t0 for p in parts]),
        x=np.concatenate([p.x for p in parts]),
    )


def run_experiment(cfg: ExperimentConfig) -> SummaryStats:
    per_chunk = max(1, cfg.chunk_rounds // max(1, 3 * cfg.n))
    bounds = [(s, min(cfg.games, s + per_chunk)) for s in range(0, cfg.games, per_chunk)]

    def work(b):
        g = simulate_games(cfg.n, cfg.strategy_r, cfg.strategy_n, cfg.master_seed, *b)
        return g, Moments.of(g.score), Moments.of(g.esn_gap)

    if cfg.threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(work, bounds))
    else:
        results = [work(b) for b in bounds]

    score_m = Moments()
    esn_m = Moments()
    for _, sm, em in results:
        score_m.merge(sm)
        esn_m.merge(em)
    games = _concat([r[0] for r in results], cfg.n)

    count = games.score.size
    stats = SummaryStats(
        n=cfg.n,
        count=count,
        mean=score_m.mean,
        variance=score_m.variance,
        std_error=score_m.std_error,
        variance_std_error=score_m.variance_std_error,
        p_r_wins=float(np.count_nonzero(games.score < 0)) / count,
        p_draw=float(np.count_nonzero(games.score == 0)) / count,
        p_n_wins=float(np.count_nonzero(games.score > 0)) / count,
        scores=np.sort(games.score),
    )
    if cfg.record_diagnostics:
        stats.mean_t1 = float(games.t1.mean())
        stats.mean_t2 = float(games.t2.mean())
        stats.mean_abs_l1_residual = float(np.abs(games.l1_residual).mean())
        stats.esn_gap_mean = esn_m.mean
        stats.esn_gap_se = esn_m.std_error
        stats.games = games
    return stats


# ---------------------------------------------------------------------------
# derived statistics


def ks_distance(sample_a, sample_b) -> float:
    """Two-sample Kolmogorov-Smirnov distance between empirical CDFs.

    Both CDFs are right-continuous and compared at every pooled sample
    point, which handles ties in discrete data.
    """
    a = np.sort(np.asarray(sample_a, dtype=float).ravel())
    b = np.sort(np.asarray(sample_b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise EmptySample("KS distance needs two nonempty samples")
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    return float(np.abs(fa - fb).max())


def _require(stats: SummaryStats, n: int) -> None:
    if not stats.has_diagnostics:
        raise DiagnosticsMissing("experiment was run without diagnostics")
    if n != stats.n:
        raise ValueError(f"stats are for n={stats.n}, not n={n}")


def esn_consistency(stats: SummaryStats, n: int) -> float:
    """Mean score minus the mean of (t2 - t1)/3 + (3n - t2).

    Zero in expectation for greedy R against any N that never plays a move
    that cannot win; not zero path by path.
    """
    _require(stats, n)
    return stats.mean - ((stats.mean_t2 - stats.mean_t1) / 3.0 + 3 * n - stats.mean_t2)


def t1_scaling(stats: SummaryStats, n: int) -> float:
    """mean(3n - t1) / sqrt(n)."""
    _require(stats, n)
    if n == 0:
        return 0.0
    return (3 * n - stats.mean_t1) / math.sqrt(n)


def l1_residual_scaled(stats: SummaryStats, n: int) -> float:
    """mean |l1 residual| / n^(1/3)."""
    _require(stats, n)
    if n == 0:
        return 0.0
    return stats.mean_abs_l1_residual / n ** (1.0 / 3.0)
