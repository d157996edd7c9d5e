"""Command-line interface: run sweeps, re-validate results, render tables.

Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 a Monte-Carlo
validation check failed in ``validate``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import ConfigError
from .experiments import (
    emit_csv,
    emit_json,
    load_config,
    read_rows_csv,
    render_iteration_table,
    revalidate_payload,
    run_sweep,
)


def _cmd_run(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed0 = args.seed
    if args.regimes:
        from .experiments import RegimeSpec

        cfg.regimes = [RegimeSpec.parse(tok) for tok in args.regimes.split(",")]
    if args.out:
        cfg.output_dir = args.out
    os.makedirs(cfg.output_dir, exist_ok=True)
    rows, payload = run_sweep(cfg)
    csv_path = os.path.join(cfg.output_dir, "results.csv")
    json_path = os.path.join(cfg.output_dir, "results.json")
    emit_csv(rows, csv_path)
    emit_json(payload, json_path)
    print(f"wrote {csv_path} and {json_path} "
          f"({sum(isinstance(r.seed, int) for r in rows)} runs)")
    return 0


def _cmd_validate(args):
    with open(args.results, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    records, all_ok = revalidate_payload(payload, mc_samples=args.samples,
                                         seed=args.seed)
    for rec in records:
        est = ", ".join(f"{v:.4f}" for v in rec["estimates"])
        verdict = "ok" if rec["ok"] else "FAIL"
        print(f"{rec['regime']:>22} P={rec['P']:<5g} seed={rec['seed']:<4} "
              f"{rec['kind']} outage [{est}] {verdict}")
    if not records:
        print("no outage-regime solutions to validate")
    return 0 if all_ok else 3


def _cmd_table(args):
    if args.results.endswith(".json"):
        with open(args.results, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        from .experiments import ResultRow

        rows = [ResultRow(**rec) for rec in payload["rows"]]
        problem = payload["config"].get("problem", "maximin")
    else:
        rows = read_rows_csv(args.results)
        problem = "maximin"
    print(render_iteration_table(rows, problem))
    return 0


def build_parser():
    p = argparse.ArgumentParser(
        prog="secbeam",
        description="Secrecy-throughput / secure-energy-efficiency "
                    "beamforming simulator")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a sweep from a config file")
    run.add_argument("config", help="path to the experiment config")
    run.add_argument("--out", help="output directory (overrides config)")
    run.add_argument("--seed", type=int, help="override seed0")
    run.add_argument("--regimes", help="override regimes, e.g. 'perfect,ev:0.1'")
    run.set_defaults(fn=_cmd_run)

    val = sub.add_parser("validate", help="re-run Monte-Carlo checks on results")
    val.add_argument("results", help="path to a results.json file")
    val.add_argument("--samples", type=int, default=None)
    val.add_argument("--seed", type=int, default=7)
    val.set_defaults(fn=_cmd_validate)

    tab = sub.add_parser("table", help="render the average-iteration table")
    tab.add_argument("results", help="path to results.csv or results.json")
    tab.set_defaults(fn=_cmd_table)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
