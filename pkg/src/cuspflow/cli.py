"""Command-line experiment runner.

Each subcommand runs a fixed group of named checks, writes ``<sub>.csv``
(columns ``x,check,series,value``; ``x`` is the sweep or time variable of
the row) and a flat ``report.json``. Exit codes: 0 all checks pass, 1 some
check failed, 2 usage or configuration error, 3 numerical failure.
Outputs are byte-identical for identical config and seed; wall-clock time
goes to stderr only.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path
from typing import Dict, List

import numpy as np

from . import __version__
from .checks import SUBCOMMANDS, Check
from .config import ExperimentConfig, parse_config
from .errors import ConfigError, NumericalFailure

ORDER = ("ode", "spectrum", "coercivity", "resolvent", "apriori", "flow", "norms", "kfun")


def _fmt(v) -> str:
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, complex):
        return repr(v.real) if v.imag == 0 else f"{v.real!r}{v.imag:+}j"
    return str(v)


def run_subcommand(name: str, cfg: ExperimentConfig, out: Path, scale: float) -> tuple[List[Check], bool]:
    rows = []
    checks, numerical = [], False
    for fn in SUBCOMMANDS[name]:
        local: list = []
        t0 = time.perf_counter()
        try:
            chk = fn(cfg, local, scale)
        except NumericalFailure as exc:
            numerical = True
            chk = Check(fn.__name__.replace("check_", "error_"), False, None, None, 0, {"error": f"{type(exc).__name__}: {exc}"})
        print(f"[{name}] {chk.name}: {'PASS' if chk.passed else 'FAIL'} ({time.perf_counter() - t0:.1f}s)", file=sys.stderr)
        checks.append(chk)
        rows.extend((x, chk.name, s, v) for x, s, v in local)
    with open(out / f"{name}.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "check", "series", "value"])
        for r in rows:
            w.writerow([_fmt(c) for c in r])
    return checks, numerical


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cuspflow", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=ORDER + ("all",))
    p.add_argument("--config", type=Path, help="key = value configuration file")
    p.add_argument("--seed", type=int, help="unsigned 64-bit seed (overrides the config)")
    p.add_argument("--out", type=Path, help="output directory (overrides the config)")
    p.add_argument("--check-tolerance-scale", type=float, default=1.0, help="multiply every tolerance")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config) if args.config else ExperimentConfig()
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError(["--seed: must be an unsigned 64-bit integer"])
            cfg = cfg.with_seed(args.seed)
        if not args.check_tolerance_scale > 0:
            raise ConfigError(["--check-tolerance-scale: must be positive"])
    except ConfigError as exc:
        for v in exc.violations:
            print(f"config error: {v}", file=sys.stderr)
        return 2
    out = args.out if args.out is not None else Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    names = ORDER if args.command == "all" else (args.command,)
    t0 = time.perf_counter()
    report: Dict[str, object] = {}
    numerical = False
    for name in names:
        checks, num = run_subcommand(name, cfg, out, args.check_tolerance_scale)
        numerical |= num
        for c in checks:
            entry = c.as_json()
            entry["subcommand"] = name
            report[c.name] = entry
    report["_config"] = cfg.as_dict()
    report["_provenance"] = {
        "code_version": __version__,
        "command": args.command,
        "grid": {"s": cfg.s, "R": cfg.R, "n": cfg.n, "dr": cfg.grid.dr},
        "seed": cfg.seed,
        "tolerance_scale": args.check_tolerance_scale,
    }
    with open(out / "report.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    failed = [k for k, v in report.items() if not k.startswith("_") and not v["pass"]]
    print(f"wall-clock {time.perf_counter() - t0:.1f}s", file=sys.stderr)
    if numerical:
        return 3
    if failed:
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
