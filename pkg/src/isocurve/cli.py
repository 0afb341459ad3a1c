"""``isocurve run <job.json>`` and ``isocurve scan <manifest.json>``.

Every flag can also be set through an ``ISOCURVE_*`` environment variable,
e.g. ``ISOCURVE_PARALLEL=4``.  The exit code is 0 when every verdict was
computed, 2 for schema or input errors, 3 when a resource limit was hit and
4 when an internal invariant failed; ``scan`` returns the largest code seen.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .jobs import EXIT_INPUT, MANIFEST_SCHEMA, run_job, scan, scan_report

import jsonschema


def _env(name: str, cast=str, default=None):
    raw = os.environ.get(f"ISOCURVE_{name}")
    if raw is None or raw == "":
        return default
    if cast is bool:
        return raw.lower() in ("1", "true", "yes", "on")
    return cast(raw)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _emit(obj, out: str | None) -> None:
    text = dumps(obj)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--degree-cap", type=int, default=_env("DEGREE_CAP", int))
    common.add_argument("--node-cap", type=int, default=_env("NODE_CAP", int))
    common.add_argument("--time-budget", type=float, default=_env("TIME_BUDGET", float))
    common.add_argument("--out", default=_env("OUT"))
    common.add_argument(
        "--timing", action="store_true", default=_env("TIMING", bool, False), help="add wall-clock timings (breaks byte-identity)"
    )

    ap = argparse.ArgumentParser(prog="isocurve", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", parents=[common], help="run one job file")
    run.add_argument("job")
    sc = sub.add_parser("scan", parents=[common], help="run every job of a manifest")
    sc.add_argument("manifest")
    sc.add_argument("--parallel", type=int, default=_env("PARALLEL", int, 1))
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    kwargs = dict(degree_cap=args.degree_cap, node_cap=args.node_cap, time_budget=args.time_budget, timing=args.timing)
    path = args.job if args.command == "run" else args.manifest
    try:
        payload = _load(path)
    except (OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"isocurve: cannot read {path}: {exc}\n")
        return EXIT_INPUT
    if args.command == "run":
        report = run_job(payload, **kwargs)
        _emit(report, args.out)
        return report["exit_code"]
    try:
        jsonschema.validate(payload, MANIFEST_SCHEMA)
    except jsonschema.ValidationError as exc:
        sys.stderr.write(f"isocurve: bad manifest: {exc.message}\n")
        return EXIT_INPUT
    result = scan_report(scan(payload["jobs"], max(1, args.parallel), **kwargs))
    _emit(result, args.out)
    return result["summary"]["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
