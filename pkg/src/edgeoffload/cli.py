"""Command-line entry point.

Subcommands: validate, run, sweep, summarize. Exit codes: 0 success,
1 validation failure, 2 runtime invariant abort, 64 usage error. All file
output lands under --out (or $EDGEOFFLOAD_OUT, default ./runs); every run's
effective post-override config is embedded in its metadata JSON.
"""

from __future__ import annotations

import argparse
import csv
import glob
import json
import os
import sys
from pathlib import Path

from .domain import config_from_dict, validate_config
from .engine import SWEEP_AXES, run, sweep, write_run
from .errors import InvariantViolation
from .policies import POLICY_NAMES
from .presets import PRESET_NAMES, load_preset

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INVARIANT = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class UsageError(ValueError):
    pass


def _load_config_dict(path: str) -> dict:
    if path in PRESET_NAMES:
        return load_preset(path)
    with open(path) as fh:
        return json.load(fh)


def _apply_overrides(data: dict, overrides: list[str]) -> dict:
    """Apply dotted-key=value overrides; the key path must already exist."""
    for item in overrides:
        if "=" not in item:
            raise UsageError(f"override {item!r} is not of the form key=value")
        dotted, raw = item.split("=", 1)
        keys = dotted.split(".")
        node = data
        for key in keys[:-1]:
            if isinstance(node, list):
                key = int(key)
                node = node[key]
            elif key in node:
                node = node[key]
            else:
                raise UsageError(f"override path {dotted!r} does not exist in the config")
        leaf = keys[-1]
        if isinstance(node, list):
            idx = int(leaf)
            if idx >= len(node):
                raise UsageError(f"override path {dotted!r} does not exist in the config")
            node[idx] = json.loads(raw)
        else:
            if leaf not in node:
                raise UsageError(f"override path {dotted!r} does not exist in the config")
            try:
                node[leaf] = json.loads(raw)
            except json.JSONDecodeError:
                node[leaf] = raw
    return data


def _out_dir(args) -> Path:
    if args.out:
        return Path(args.out)
    return Path(os.environ.get("EDGEOFFLOAD_OUT", "runs"))


def _values(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True,
                   help="config JSON path, or a bundled preset name "
                        f"({', '.join(PRESET_NAMES)})")
    p.add_argument("--set", dest="overrides", action="append", default=[],
                   metavar="KEY=VALUE", help="dotted-path config override")
    p.add_argument("--out", default=None, help="output directory "
                   "(default $EDGEOFFLOAD_OUT or ./runs)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="edgeoffload",
                     description="slot-time service offloading simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a config against every invariant")
    p.add_argument("--config", required=True)
    p.add_argument("--set", dest="overrides", action="append", default=[],
                   metavar="KEY=VALUE")

    p = sub.add_parser("run", help="simulate one seeded run")
    _add_common(p)
    p.add_argument("--policy", default="ldso", choices=POLICY_NAMES)
    p.add_argument("--seed", type=int, default=None,
                   help="run seed (default: rng_seed from the config)")
    p.add_argument("--name", default=None, help="output file stem")

    p = sub.add_parser("sweep", help="grid of runs over one parameter axis")
    _add_common(p)
    p.add_argument("--axis", required=True,
                   help=f"one of {SWEEP_AXES} (case-insensitive)")
    p.add_argument("--values", required=True, help="comma-separated axis values")
    p.add_argument("--policy", dest="policies", default="ldso",
                   help=f"comma-separated subset of {POLICY_NAMES}")
    p.add_argument("--seeds", default=None,
                   help="comma-separated base seeds (default: config rng_seed)")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                   help="parallel runs (default: available cores)")

    p = sub.add_parser("summarize", help="combine run metadata into one CSV")
    p.add_argument("--inputs", required=True, help="glob over run .json files")
    p.add_argument("--out", default=None, help="summary CSV path (default stdout)")
    return parser


def _cmd_validate(args) -> int:
    data = _apply_overrides(_load_config_dict(args.config), args.overrides)
    try:
        cfg = config_from_dict(data)
    except (ValueError, KeyError) as exc:
        print(f"invalid config: {exc}")
        return EXIT_INVALID
    report = validate_config(cfg)
    print(report)
    return EXIT_OK if report.ok else EXIT_INVALID


def _cmd_run(args) -> int:
    data = _apply_overrides(_load_config_dict(args.config), args.overrides)
    cfg = config_from_dict(data)
    report = validate_config(cfg)
    if not report.ok:
        print(report)
        return EXIT_INVALID
    record = run(cfg, args.policy, seed=args.seed)
    csv_file, meta_file = write_run(record, _out_dir(args), args.name)
    s = record.summary
    print(f"{args.policy} seed={record.seed} slots={s['slots']} "
          f"avg_cost={s['avg_cost']:.6g} avg_sum_q={s['avg_sum_q']:.6g} "
          f"offloaded_bits={s['total_offloaded_bits']:.6g} -> {csv_file}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    data = _apply_overrides(_load_config_dict(args.config), args.overrides)
    cfg = config_from_dict(data)
    report = validate_config(cfg)
    if not report.ok:
        print(report)
        return EXIT_INVALID
    policies = [p for p in args.policies.split(",") if p]
    for p in policies:
        if p not in POLICY_NAMES:
            raise UsageError(f"unknown policy {p!r}")
    axis = args.axis.lower()
    if axis not in SWEEP_AXES:
        raise UsageError(f"unknown axis {args.axis!r}; expected one of {SWEEP_AXES}")
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else [cfg.rng_seed]
    out = _out_dir(args)
    rows = sweep(cfg, axis, _values(args.values), policies, seeds,
                 out_dir=out, jobs=max(1, args.jobs))
    summary_path = out / "sweep_summary.csv"
    fields = ["axis", "value", "policy", "base_seed", "seed", "avg_cost",
              "avg_sum_q", "total_offloaded_bits", "stabilization_slot",
              "name", "error"]
    with open(summary_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k) for k in fields})
    failures = [r for r in rows if r["error"]]
    print(f"{len(rows)} runs ({len(failures)} failed) -> {summary_path}")
    return EXIT_OK


def _cmd_summarize(args) -> int:
    paths = sorted(glob.glob(args.inputs))
    metas = []
    for path in paths:
        if not path.endswith(".json"):
            continue
        with open(path) as fh:
            meta = json.load(fh)
        if "summary" in meta:
            metas.append((Path(path).stem, meta))
    if not metas:
        print(f"no run metadata matched {args.inputs!r}")
        return EXIT_INVALID
    fields = ["name", "policy", "seed", "config_hash", "axis", "value",
              "avg_cost", "avg_sum_q", "total_offloaded_bits",
              "total_served_bits", "stabilization_slot"]
    rows = []
    for name, meta in metas:
        sweep_info = meta.get("sweep") or {}
        s = meta["summary"]
        rows.append({
            "name": name, "policy": meta["policy"], "seed": meta["seed"],
            "config_hash": meta["config_hash"], "axis": sweep_info.get("axis"),
            "value": sweep_info.get("value"), "avg_cost": s["avg_cost"],
            "avg_sum_q": s["avg_sum_q"],
            "total_offloaded_bits": s["total_offloaded_bits"],
            "total_served_bits": s["total_served_bits"],
            "stabilization_slot": s["stabilization_slot"],
        })
    target = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.DictWriter(target, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if args.out:
            target.close()
            print(f"{len(rows)} runs -> {args.out}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"validate": _cmd_validate, "run": _cmd_run,
                "sweep": _cmd_sweep, "summarize": _cmd_summarize}
    try:
        return handlers[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
