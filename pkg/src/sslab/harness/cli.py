"""Command-line entry point: ``sslab run | list | describe``."""
from __future__ import annotations

import argparse
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor

from . import config, scenarios
from .runner import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, EXIT_RUNTIME, run
from .tolerances import TOLERANCE_TABLE_VERSION, TOLERANCES


def _status(passed) -> str:
    return {True: "PASS", False: "FAIL", None: "SKIP"}[passed]


def _run_one(cfg: config.RunConfig, scale: float) -> tuple[int, str]:
    try:
        result = run(cfg, scale)
    except Exception:  # any failure inside a scenario is a runtime error
        return EXIT_RUNTIME, f"[{cfg.scenario}] runtime error\n{traceback.format_exc()}"
    lines = [f"[{cfg.scenario}] {_status(r.passed)} {r.check_id} measured={r.measured!r} "
             f"expected={r.expected!r} tol={r.tolerance:.3g}" for r in result.records]
    lines.append(f"[{cfg.scenario}] report: {result.out_dir / 'report.jsonl'}")
    return result.exit_code, "\n".join(lines)


def cmd_run(args) -> int:
    if args.tolerance_scale <= 0:
        print("error: --tolerance-scale must be positive", file=sys.stderr)
        return EXIT_CONFIG
    cfgs = []
    for path in args.config:
        try:
            cfg = config.load(path, args.seed, args.out)
        except config.ConfigError as exc:
            print(f"config error in {path}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        cfgs.append(cfg)
    if args.out and len(cfgs) > 1:
        for cfg in cfgs:
            cfg.out_dir = cfg.out_dir / cfg.scenario
    if args.jobs > 1 and len(cfgs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, cfgs, [args.tolerance_scale] * len(cfgs)))
    else:
        results = [_run_one(cfg, args.tolerance_scale) for cfg in cfgs]
    for _, text in results:
        print(text)
    return max(code for code, _ in results)


def cmd_list(args) -> int:
    for sc in scenarios.list_scenarios():
        print(f"{sc.name:30s} [{sc.module}] {sc.description}\n{'':30s} anchor: {sc.anchor}")
    return EXIT_OK


def cmd_describe(args) -> int:
    try:
        sc = scenarios.get(args.scenario)
    except KeyError as exc:
        print(str(exc).strip("'\""), file=sys.stderr)
        return EXIT_CONFIG
    print(f"name:        {sc.name}")
    print(f"module:      {sc.module}")
    print(f"anchor:      {sc.anchor}")
    print(f"description: {sc.description}")
    print(f"needs seed:  {'yes' if sc.sampling else 'no'}")
    print(f"tolerance table {TOLERANCE_TABLE_VERSION}; relevant defaults:")
    prefix = {"vnalg": "vn.", "galilei": "galilei.", "qdyn": "qdyn.", "extdyn": "extdyn."}.get(sc.module)
    for key, val in TOLERANCES.items():
        if (prefix and key.startswith(prefix)) or (sc.module == "cocycle" and key.split(".")[0] in
                                                   ("cocycle", "witness", "extension", "obstruction")) \
                or (sc.module == "maxwell" and key.split(".")[0] in ("maxwell", "charge")):
            print(f"  {key:32s} {val:.3g}")
    print("example config:")
    print(config.example_config(sc.name), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sslab", description="Reproducible superselection checks.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run scenario config file(s)")
    r.add_argument("config", nargs="+", help="YAML config path(s)")
    r.add_argument("--seed", type=int, default=None, help="override the config seed")
    r.add_argument("--out", default=None, help="output directory (overrides config and SSLAB_OUT)")
    r.add_argument("--tolerance-scale", type=float, default=1.0,
                   help="multiply abs/phase/floor tolerances by this factor")
    r.add_argument("--jobs", type=int, default=1, help="run several configs in parallel processes")
    r.set_defaults(func=cmd_run)
    ls = sub.add_parser("list", help="list built-in scenarios")
    ls.set_defaults(func=cmd_list)
    d = sub.add_parser("describe", help="describe one scenario")
    d.add_argument("scenario")
    d.set_defaults(func=cmd_describe)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
