"""Command-line entry point: ``rclattice <kind> [options]`` and ``rclattice acceptance <suite>``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from .experiments import ExperimentSpec, run

KINDS = ("sample", "cftp", "couple", "oracle", "decay", "spatial", "scaling", "sandwich",
         "dual-sample")


def _error(kind: str, **detail) -> int:
    print(json.dumps({"error": kind, **detail}, sort_keys=True), file=sys.stderr)
    return 2 if kind in ("invalid_spec", "unknown_suite") else 1


def _json_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--spec", type=Path, help="JSON experiment spec")
    p.add_argument("--seed", type=int, help="64-bit seed (overrides the spec)")
    p.add_argument("--out", type=Path, default=Path("runs"), help="output root (default: runs)")
    p.add_argument("--workers", type=int, default=1, help="processes for replica fan-out")
    p.add_argument("--via-dual", action="store_true",
                   help="sample above the critical point through the subcritical dual")
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--bc", type=_json_value, help='"free", "wired" or a JSON object')
    p.add_argument("--set", action="append", default=[], metavar="KEY=JSON",
                   help="override any spec field")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rclattice",
                                     description="Random-cluster dynamics on square boxes.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        _add_common(sub.add_parser(kind, help=f"run a {kind} experiment"))
    acc = sub.add_parser("acceptance", help="run an acceptance suite")
    acc.add_argument("suite", help="exact, coupling, duality, spatial, scaling, decay or all")
    return parser


def _spec_from_args(args) -> dict:
    data = {}
    if args.spec is not None:
        data = json.loads(args.spec.read_text())
        if not isinstance(data, dict):
            raise ValueError("spec file must hold a JSON object")
        if data.get("kind", args.command) != args.command:
            raise ValueError(f"spec kind {data['kind']!r} does not match subcommand {args.command!r}")
    data["kind"] = args.command
    for key in ("seed", "n", "p", "q", "bc"):
        val = getattr(args, key)
        if val is not None:
            data[key] = val
    if args.via_dual:
        data["via_dual"] = True
    for item in args.set:
        key, sep, val = item.partition("=")
        if not sep:
            raise ValueError(f"--set expects KEY=JSON, got {item!r}")
        data[key.strip().replace("-", "_")] = _json_value(val)
    return data


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "acceptance":
        from .acceptance import SUITES, run_suite

        if args.suite != "all" and args.suite not in SUITES:
            return _error("unknown_suite", suite=args.suite, choices=sorted(SUITES) + ["all"])
        checks = run_suite(args.suite, echo=lambda line: print(line, flush=True))
        return 0 if all(c.passed for c in checks) else 1

    try:
        spec = ExperimentSpec.model_validate(_spec_from_args(args))
    except ValidationError as exc:
        details = [{"loc": list(e["loc"]), "msg": e["msg"]} for e in exc.errors()]
        return _error("invalid_spec", details=details)
    except (ValueError, OSError) as exc:
        return _error("invalid_spec", details=[{"loc": [], "msg": str(exc)}])
    try:
        run_dir = run(spec, args.out, workers=args.workers)
    except ValueError as exc:
        return _error("run_failed", message=str(exc))
    print(json.dumps({"run_dir": str(run_dir),
                      "summary": json.loads((run_dir / "summary.json").read_text())},
                     indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
