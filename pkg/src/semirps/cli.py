"""Command-line front end: ``semirps {solve,simulate,limit-sample,constants,verify}``.

Every command prints JSON (floats at 9 significant digits) except
``limit-sample`` without ``--summary``, which prints one draw per line.
Exit status: 0 on success, 1 when ``verify`` finds a failing check, 2 on
usage errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys

import numpy as np

from semirps import checks, limit_law, solver
from semirps.montecarlo import (
    ExperimentConfig,
    esn_consistency,
    ks_distance,
    l1_residual_scaled,
    run_experiment,
    t1_scaling,
)
from semirps.strategies import STRATEGIES, UnknownStrategy

MAX_SOLVE_N = 2000
MAX_TABLE_N = 200  # the full cube is (n+1)^3 values


def _round(obj):
    if isinstance(obj, float):
        return float(f"{obj:.9g}") if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def emit(obj, out=None) -> None:
    print(json.dumps(_round(obj), indent=2), file=out or sys.stdout)


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semirps", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="exact optimal value V(n, n, n)")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--table-out", help=f"write every state's value as CSV (n <= {MAX_TABLE_N})")

    p = sub.add_parser("simulate", help="Monte Carlo games between two strategies")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--games", type=_positive, required=True)
    p.add_argument("--r", required=True, choices=[k for k, s in STRATEGIES.items() if s.side == "r"])
    p.add_argument("--nn", required=True, choices=[k for k, s in STRATEGIES.items() if s.side == "n"])
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--diagnostics", action="store_true", help="record per-game diagnostics")
    p.add_argument("--out", help="write per-game records as CSV (implies --diagnostics)")
    p.add_argument("--threads", type=_positive, default=1)

    p = sub.add_parser("limit-sample", help="draws from a limit-law representation")
    p.add_argument("--rep", required=True, type=str.upper, choices=[r.value for r in limit_law.LimitRep])
    p.add_argument("--count", type=_positive, required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--summary", action="store_true", help="print summary JSON instead of draws")

    sub.add_parser("constants", help="closed-form limit constants")

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--level", choices=sorted(checks.LEVELS), default="quick")
    p.add_argument("--seed", type=_seed, required=True)
    return parser


def cmd_solve(args) -> int:
    n = args.n
    if n > MAX_SOLVE_N:
        raise UsageError(f"--n is capped at {MAX_SOLVE_N}")
    if args.table_out:
        if n > MAX_TABLE_N:
            raise UsageError(f"--table-out is capped at n = {MAX_TABLE_N}")
        table = solver.compute_value_table(n)
        table.to_csv(args.table_out)
        value = table.root
    else:
        value = solver.optimal_value(n)
    emit({"n": n, "value": value, "value_over_sqrt_n": value / math.sqrt(n)})
    return 0


def cmd_simulate(args) -> int:
    cfg = ExperimentConfig(
        n=args.n, games=args.games, strategy_r=args.r, strategy_n=args.nn,
        master_seed=args.seed, record_diagnostics=bool(args.diagnostics or args.out),
        threads=args.threads,
    )
    st = run_experiment(cfg)
    n = cfg.n
    rep = limit_law.LimitRep.EROCK if cfg.strategy_n == "rock-then-greedy-n" else limit_law.LimitRep.A
    ref = limit_law.draw_stream(rep, cfg.games, cfg.master_seed)
    out = {
        "config": cfg.echo(),
        "count": st.count,
        "mean": st.mean,
        "var": st.variance,
        "se": st.std_error,
        "var_se": st.variance_std_error,
        "p_r_wins": st.p_r_wins,
        "p_draw": st.p_draw,
        "p_n_wins": st.p_n_wins,
        "mean_over_sqrt_n": st.mean / math.sqrt(n),
        "var_over_n": st.variance / n,
        "ks_vs_limit": {"rep": rep.value, "distance": ks_distance(st.scores / math.sqrt(n), ref)},
    }
    if st.has_diagnostics:
        out.update(
            mean_t1=st.mean_t1,
            mean_t2=st.mean_t2,
            esn_gap=esn_consistency(st, n),
            esn_gap_se=st.esn_gap_se,
            t1_scaling=t1_scaling(st, n),
            l1_residual_scaled=l1_residual_scaled(st, n),
        )
    if args.out:
        st.games.to_csv(args.out)
    emit(out)
    return 0


def cmd_limit_sample(args) -> int:
    x = limit_law.draw_stream(args.rep, args.count, args.seed)
    if args.summary:
        emit({
            "rep": args.rep,
            "count": args.count,
            "mean": float(x.mean()),
            "var": float(x.var(ddof=1)) if x.size > 1 else 0.0,
            "p_negative": float(np.mean(x < 0)),
            "p_zero_atom": float(np.mean(x == 0)),
        })
    else:
        sys.stdout.write("".join(f"{v:.9g}\n" for v in x))
    return 0


def cmd_constants(args) -> int:
    emit(dataclasses.asdict(limit_law.constants()))
    return 0


def cmd_verify(args) -> int:
    def show(r):
        print(r.line(), file=sys.stderr, flush=True)

    results = checks.run_all(args.level, args.seed, on_result=show)
    ok = all(r.passed for r in results)
    emit({"level": args.level, "seed": args.seed, "passed": ok,
          "criteria": [r.to_json() for r in results]})
    return 0 if ok else 1


class UsageError(Exception):
    pass


COMMANDS = {
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "limit-sample": cmd_limit_sample,
    "constants": cmd_constants,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, UnknownStrategy, ValueError) as exc:
        parser.error(str(exc))  # exits with status 2
        return 2


if __name__ == "__main__":
    sys.exit(main())
