"""Acceptance checks, shared by ``semirps verify`` and the test suite.

Every check returns a :class:`CheckResult` made of named sub-checks, each
with the measured value, the target and the pass/fail verdict.  ``full``
runs every check at its acceptance size; ``quick`` shrinks sample sizes for
a fast smoke run (its verdicts are indicative only).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from semirps import limit_law, solver
from semirps.engine import Move
from semirps.montecarlo import (
    ExperimentConfig,
    SummaryStats,
    esn_consistency,
    ks_distance,
    l1_residual_scaled,
    run_experiment,
    t1_scaling,
)
from semirps.strategies import greedy_r_mix

C = limit_law.constants()


@dataclass
class SubCheck:
    name: str
    passed: bool
    value: float | None = None
    target: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "value": self.value, "target": self.target}


@dataclass
class CheckResult:
    id: int
    title: str
    checks: list[SubCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, value=None, target: str = "") -> None:
        v = None if value is None else float(value)
        self.checks.append(SubCheck(name, bool(passed), v, target))

    def subset(self, *names: str) -> list[SubCheck]:
        picked = [c for c in self.checks if c.name.split("[")[0] in names]
        if not picked:
            raise KeyError(names)
        return picked

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        failed = [c.name for c in self.checks if not c.passed]
        extra = f"  (failed: {', '.join(failed)})" if failed else ""
        return f"[{status}] {self.id:2d}. {self.title}{extra}"

    def to_json(self) -> dict:
        return {"id": self.id, "title": self.title, "passed": self.passed,
                "checks": [c.to_json() for c in self.checks]}


def _within(value: float, target: float, tol: float) -> bool:
    return abs(value - target) <= tol


def _subseed(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence([int(seed), *keys]).generate_state(1, np.uint64)[0])


LEVELS = {
    "full": dict(
        value_ns=(10, 20, 50, 100, 200),
        oracle_table_n=50, oracle_extra=(100, 200), mix_total=30,
        brute_total=6, grid_step=1e-3,
        limit_draws=10**6, ks_limit=0.003,
        mc_n=2500, mc_games=10**5,
        spiro_n=100, spiro_games=10**5,
        rock_n=10**4, rock_games=10**5,
        l1_ns=(10**2, 10**3, 10**4), l1_games=10**4,
        t1_n=10**4, t1_games=10**4, t1_oracle_draws=10**6,
    ),
    "quick": dict(
        value_ns=(10, 20, 50, 100),
        oracle_table_n=20, oracle_extra=(50,), mix_total=15,
        brute_total=6, grid_step=1e-3,
        limit_draws=10**5, ks_limit=0.003 * math.sqrt(10),
        mc_n=1000, mc_games=10**4,
        spiro_n=100, spiro_games=10**4,
        rock_n=10**3, rock_games=10**4,
        l1_ns=(10**2, 10**3), l1_games=2000,
        t1_n=10**3, t1_games=4000, t1_oracle_draws=10**5,
    ),
}


@lru_cache(maxsize=2)
def _table(n: int) -> solver.ValueTable:
    return solver.compute_value_table(n)


def diagonal_values(ns) -> dict[int, float]:
    """V(n, n, n) for each n, all read from one table of the largest size."""
    table = _table(max(ns))
    return {n: table[(n, n, n)] for n in ns}


@lru_cache(maxsize=16)
def _experiment(n: int, games: int, r: str, nn: str, seed: int) -> SummaryStats:
    return run_experiment(ExperimentConfig(n, games, r, nn, master_seed=seed))


# ---------------------------------------------------------------------------
# exact solver


def check_exact_value(p: dict, seed: int = 0) -> CheckResult:
    res = CheckResult(1, "exact optimal value against the limiting constant")
    values = diagonal_values(p["value_ns"])
    ratios = [values[n] / math.sqrt(n) for n in p["value_ns"]]
    if 100 in p["value_ns"]:
        r100 = ratios[p["value_ns"].index(100)]
        res.add("V(100)/10 in [1.44, 1.48]", 1.44 <= r100 <= 1.48, r100, "[1.44, 1.48]")
    res.add("V/sqrt(n) increasing", all(a < b for a, b in zip(ratios, ratios[1:])),
            min(b - a for a, b in zip(ratios, ratios[1:])), "> 0")
    cap = C.mean + 0.01
    res.add("V/sqrt(n) <= mean + 0.01", max(ratios) <= cap, max(ratios), f"<= {cap:.6f}")
    return res


def check_oracle(p: dict, seed: int = 0) -> CheckResult:
    res = CheckResult(2, "backward induction agrees with the greedy chain oracle")
    ns = [*range(1, p["oracle_table_n"] + 1), *p["oracle_extra"]]
    values = diagonal_values(ns)
    worst = max(abs(values[n] - solver.greedy_chain_expectation(n)) for n in ns)
    res.add("|V(n,n,n) - greedy chain| <= 1e-9", worst <= 1e-9, worst, "<= 1e-9")

    mix_table = _table(p["mix_total"])
    worst_mix = 0.0
    for s in mix_table.states():
        if 1 <= sum(s) <= p["mix_total"]:
            opt = solver.optimal_r_mix(s, mix_table).probabilities
            greedy = greedy_r_mix(s).probabilities
            worst_mix = max(worst_mix, max(abs(a - b) for a, b in zip(opt, greedy)))
    res.add("optimal R mix == greedy R mix", worst_mix <= 1e-9, worst_mix, "<= 1e-9")
    return res


def simplex_grid(rows: int, step: float) -> np.ndarray:
    """All mixed strategies over ``rows`` moves on a lattice of the given step."""
    k = round(1.0 / step)
    if rows == 1:
        return np.ones((1, 1))
    if rows == 2:
        w = np.arange(k + 1) / k
        return np.column_stack([w, 1.0 - w])
    i, j = np.meshgrid(np.arange(k + 1), np.arange(k + 1), indexing="ij")
    keep = i + j <= k
    i, j = i[keep], j[keep]
    return np.column_stack([i, j, k - i - j]) / k


def grid_minimax(payoffs: np.ndarray, step: float = 1e-3) -> float:
    """min over gridded row mixes of N's best pure reply."""
    grid = simplex_grid(payoffs.shape[0], step)
    return float((grid @ payoffs).max(axis=1).min())


def brute_force_values(max_total: int, step: float = 1e-3) -> dict[tuple[int, int, int], float]:
    """Values of all states with a+b+c <= max_total by recursive grid minimax."""
    values = {(0, 0, 0): 0.0}
    for total in range(1, max_total + 1):
        for a in range(total + 1):
            for b in range(total - a + 1):
                s = (a, b, total - a - b)
                rows = [m for m in Move if s[m.index] > 0]
                M = np.empty((len(rows), 3))
                for p, r in enumerate(rows):
                    child = list(s)
                    child[r.index] -= 1
                    M[p] = solver.RPS[r.index] + values[tuple(child)]
                values[s] = grid_minimax(M, step)
    return values


def check_brute_force(p: dict, seed: int = 0) -> CheckResult:
    res = CheckResult(3, "small states against grid-search minimax")
    total = p["brute_total"]
    table = _table(total)
    brute = brute_force_values(total, p["grid_step"])
    worst = max(abs(table[s] - v) for s, v in brute.items())
    res.add("|DP - grid minimax| <= 5e-3", worst <= 5e-3, worst, "<= 5e-3")
    for s, target in (((0, 0, 1), 1.0), ((1, 1, 0), 4.0 / 3.0), ((1, 1, 1), 4.0 / 3.0)):
        err = abs(table[s] - target)
        res.add(f"V{s} exact", err <= 1e-12, table[s], f"{target!r} +- 1e-12")
    return res


# ---------------------------------------------------------------------------
# limit law


def _moment_checks(res: CheckResult, label: str, x: np.ndarray, with_win: bool = True) -> None:
    n = x.size
    mean_se = x.std(ddof=1) / math.sqrt(n)
    m = x.mean()
    res.add(f"mean[{label}]", _within(m, C.mean, 4 * mean_se), m, f"{C.mean:.7f} +- {4 * mean_se:.2e}")
    d = x - m
    s2 = float(d @ d) / (n - 1)
    mu4 = float(np.mean(d**4))
    var_se = math.sqrt(max(mu4 - s2 * s2 * (n - 3) / (n - 1), 0.0) / n)
    res.add(f"variance[{label}]", _within(s2, C.variance, 4 * var_se), s2,
            f"{C.variance:.5f} +- {4 * var_se:.2e}")
    if with_win:
        pneg = float(np.mean(x < 0))
        p_se = math.sqrt(C.win_prob * (1 - C.win_prob) / n)
        res.add(f"p_negative[{label}]", _within(pneg, C.win_prob, 4 * p_se), pneg,
                f"{C.win_prob:.6f} +- {4 * p_se:.2e}")


def check_limit_constants(p: dict, seed: int = 0) -> CheckResult:
    res = CheckResult(4, "limit-law samplers reproduce mean, variance and P(S<0)")
    draws = {}
    for k, rep in enumerate(limit_law.GREEDY_REPS):
        x = limit_law.draw_stream(rep, p["limit_draws"], _subseed(seed, 4, k))
        draws[rep] = x
        _moment_checks(res, rep.value, x)
    for a, b in itertools.combinations(limit_law.GREEDY_REPS, 2):
        ks = ks_distance(draws[a], draws[b])
        res.add(f"ks[{a.value}-{b.value}]", ks <= p["ks_limit"], ks, f"<= {p['ks_limit']:.4f}")
    return res


# ---------------------------------------------------------------------------
# Monte Carlo


def check_greedy_simulation(p: dict, seed: int = 0) -> CheckResult:
    n, games = p["mc_n"], p["mc_games"]
    res = CheckResult(5, f"greedy vs greedy at n={n}, {games} games")
    st = _experiment(n, games, "greedy-r", "greedy-n", _subseed(seed, 5))
    mean = st.mean / math.sqrt(n)
    res.add("mean/sqrt(n)", _within(mean, C.mean, 0.05), mean, "1.4658 +- 0.05")
    var = st.variance / n
    res.add("variance/n", _within(var, C.variance, 0.20), var, "2.678 +- 0.20")
    res.add("p_negative", _within(st.p_r_wins, C.win_prob, 0.006), st.p_r_wins, "0.0647 +- 0.006")
    ref = limit_law.draw_stream(limit_law.LimitRep.A, games, _subseed(seed, 5, 1))
    ks = ks_distance(st.scores / math.sqrt(n), ref)
    res.add("ks vs rep A", ks <= 0.02, ks, "<= 0.02")
    return res


def check_phase_identity(p: dict, seed: int = 0) -> CheckResult:
    n, games = p["mc_n"], p["mc_games"]
    res = CheckResult(6, f"score equals phase-length predictor in mean at n={n}")
    for nn, key in (("greedy-n", 5), ("rock-then-greedy-n", 6)):
        st = _experiment(n, games, "greedy-r", nn, _subseed(seed, key))
        gap = esn_consistency(st, n)
        res.add(f"gap[{nn}]", abs(gap) <= 4 * st.esn_gap_se, gap, f"0 +- {4 * st.esn_gap_se:.3f}")
    return res


def check_cyclic(p: dict, seed: int = 0) -> CheckResult:
    n, games = p["spiro_n"], p["spiro_games"]
    res = CheckResult(7, f"cyclic R against greedy N at n={n}")
    st = _experiment(n, games, "cyclic-r", "greedy-n", _subseed(seed, 7))
    res.add("mean == 4/3", _within(st.mean, 4 / 3, 4 * st.std_error), st.mean,
            f"1.3333 +- {4 * st.std_error:.3f}")
    return res


def check_rock_first(p: dict, seed: int = 0) -> CheckResult:
    n, games = p["rock_n"], p["rock_games"]
    res = CheckResult(8, f"rock-then-greedy N against greedy R at n={n}")
    st = _experiment(n, games, "greedy-r", "rock-then-greedy-n", _subseed(seed, 8))
    atom = float(st.ecdf(n**0.4))
    res.add("atom P(S <= n^0.4)", _within(atom, 1 / 3, 0.02), atom, "1/3 +- 0.02")
    mean = st.mean / math.sqrt(n)
    res.add("mean/sqrt(n)", _within(mean, C.mean, 0.05), mean, "1.4658 +- 0.05")
    var = st.variance / n
    res.add("variance/n", 0.348 <= var <= 5.008, var, "[0.348, 5.008]")
    return res


def check_l1_residual(p: dict, seed: int = 0) -> CheckResult:
    res = CheckResult(9, "endgame residual stays on the n^(1/3) scale")
    scaled = []
    for n in p["l1_ns"]:
        st = _experiment(n, p["l1_games"], "greedy-r", "greedy-n", _subseed(seed, 9))
        scaled.append(l1_residual_scaled(st, n))
    ratio = max(scaled) / min(scaled)
    res.add("max/min of mean|residual|/n^(1/3)", ratio <= 3.0, ratio, "<= 3")
    return res


def check_t1_scaling(p: dict, seed: int = 0) -> CheckResult:
    n = p["t1_n"]
    res = CheckResult(10, f"first exhaustion time scaling at n={n}")
    st = _experiment(n, p["t1_games"], "greedy-r", "greedy-n", _subseed(seed, 9))
    v = limit_law.v_triple(p["t1_oracle_draws"], np.random.default_rng(_subseed(seed, 10)))
    oracle = 3.0 * float(v.max(axis=1).mean())
    got = t1_scaling(st, n)
    res.add("mean(3n - T1)/sqrt(n)", _within(got, oracle, 0.1), got, f"{oracle:.4f} +- 0.1")
    return res


CHECKS = {
    1: check_exact_value,
    2: check_oracle,
    3: check_brute_force,
    4: check_limit_constants,
    5: check_greedy_simulation,
    6: check_phase_identity,
    7: check_cyclic,
    8: check_rock_first,
    9: check_l1_residual,
    10: check_t1_scaling,
}


def run_check(cid: int, level: str = "full", seed: int = 0) -> CheckResult:
    return CHECKS[cid](LEVELS[level], seed)


def run_all(level: str = "full", seed: int = 0, on_result=None) -> list[CheckResult]:
    out = []
    for cid in CHECKS:
        r = run_check(cid, level, seed)
        if on_result is not None:
            on_result(r)
        out.append(r)
    return out
