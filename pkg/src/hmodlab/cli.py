"""Command-line client for the verification service.

The CLI is a thin front end: it assembles a request, runs it either
in-process (default) or against a remote service instance (``--server``),
writes report/CSV files, and maps outcomes to exit codes:

* 0 -- every check passed;
* 1 -- a check ran to completion and failed (verified failure);
* 2 -- resource or parameter problems (bad config, exhausted budgets,
  unwritable output, unreachable server).

The environment variable ``HMODLAB_OUT`` overrides the report directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import httpx

from . import __version__, suites
from .errors import BudgetExhausted, HmodlabError, ParameterError, WindowSearchError
from .service.app import emit_curve_payload, run_suites_payload
from .service.schemas import CurveRequest, SuiteRequest

SUITE_COMMANDS = suites.SUITE_NAMES + ("all",)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hmodlab",
        description="Verification suites for the Hilbert-module counterexample over C[0,1].",
    )
    parser.add_argument("--version", action="version", version=f"hmodlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_opts = argparse.ArgumentParser(add_help=False)
    run_opts.add_argument("--tol", help="enclosure tolerance as a fraction, e.g. 1/1073741824")
    run_opts.add_argument("--budget", type=int, help="max subinterval evaluations per enclosure")
    run_opts.add_argument("--depth", type=int, help="witness search depth")
    run_opts.add_argument("--trunc", help="truncation sizes N,M")
    run_opts.add_argument("--qseq", help="path to a file of q-sequence values, one fraction per line")
    run_opts.add_argument("--config", help="key=value config file (flags override it)")
    run_opts.add_argument("--server", help="base URL of a running service, e.g. http://host:8000")

    for name in SUITE_COMMANDS:
        p = sub.add_parser(name, parents=[run_opts], help=f"run the {name} suite(s)")
        p.add_argument("--out", help="report output directory (default '.')")
        p.set_defaults(func=cmd_suite, suite=name)

    pc = sub.add_parser("curves", parents=[run_opts], help="emit CSV samples of a curve")
    pc.add_argument("object", choices=suites.CURVE_OBJECTS)
    pc.add_argument("--params", default="", help="comma-separated key=value pairs, e.g. q=1/2,m=8")
    pc.add_argument("--samples", type=int, default=101)
    pc.add_argument("--out", help="output CSV file (default stdout)")
    pc.set_defaults(func=cmd_curves)

    ps = sub.add_parser("serve", help="start the HTTP service")
    ps.add_argument("--host", default="127.0.0.1")
    ps.add_argument("--port", type=int, default=8000)
    ps.set_defaults(func=cmd_serve)
    return parser


def _request_options(args) -> tuple[dict, str]:
    """Merge config file and flags into request options plus an output dir."""
    options: dict = {}
    out_dir = "."
    if args.config:
        options = suites.parse_config_file(args.config)
        out_dir = options.pop("__out__", out_dir)
    for key in ("tol", "budget", "depth", "trunc"):
        value = getattr(args, key, None)
        if value is not None:
            options[key] = value
    if getattr(args, "qseq", None):
        options["qseq"] = args.qseq
    if getattr(args, "out", None):
        out_dir = args.out
    env_out = os.environ.get("HMODLAB_OUT")
    if env_out:
        out_dir = env_out
    return options, out_dir


def _qseq_values(options: dict):
    """Load a file-based q-sequence into explicit values so that remote
    servers never need local paths."""
    qseq = options.get("qseq")
    if not qseq or qseq == "builtin-dyadic":
        return None
    path = Path(qseq)
    values = [line.strip() for line in path.read_text().splitlines() if line.strip()]
    if not values:
        raise ParameterError(f"q-sequence file {path} is empty")
    return values


def _suite_request(options: dict) -> SuiteRequest:
    payload = {}
    if options.get("tol") is not None:
        payload["tol"] = str(options["tol"])
    if options.get("budget") is not None:
        payload["budget"] = int(options["budget"])
    if options.get("depth") is not None:
        payload["depth"] = int(options["depth"])
    if options.get("trunc") is not None:
        payload["trunc"] = str(options["trunc"])
    qseq = _qseq_values(options)
    if qseq is not None:
        payload["qseq"] = qseq
    try:
        return SuiteRequest(**payload)
    except ValueError as err:
        raise ParameterError(str(err)) from err


def _post_json(server: str, path: str, payload: dict) -> dict:
    response = httpx.post(server.rstrip("/") + path, json=payload, timeout=600.0)
    if response.status_code == 422:
        raise ParameterError(f"server rejected request: {response.text}")
    if response.status_code == 503:
        raise BudgetExhausted(f"server resource error: {response.text}")
    response.raise_for_status()
    return response.json()


def _strip_nulls(obj):
    if isinstance(obj, dict):
        return {k: _strip_nulls(v) for k, v in obj.items() if v is not None}
    if isinstance(obj, list):
        return [_strip_nulls(v) for v in obj]
    return obj


def cmd_suite(args) -> int:
    options, out_dir = _request_options(args)
    request = _suite_request(options)
    if args.server:
        response = _post_json(args.server, f"/suites/{args.suite}", request.model_dump())
    else:
        response = run_suites_payload(args.suite, request).model_dump()
    response = _strip_nulls(response)

    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    all_passed = True
    for report in response["reports"]:
        target = out_path / f"report-{report['suite']}.json"
        target.write_text(json.dumps(report, indent=2) + "\n")
        n_checks = len(report["checks"])
        status = "PASS" if report["passed"] else "FAIL"
        print(f"suite {report['suite']}: {status} ({n_checks} checks) -> {target}")
        all_passed = all_passed and report["passed"]
    return 0 if all_passed else 1


def cmd_curves(args) -> int:
    options, _ = _request_options(args)
    params = {}
    if args.params:
        for item in args.params.split(","):
            if "=" not in item:
                raise ParameterError(f"expected key=value in --params, got {item!r}")
            key, value = item.split("=", 1)
            params[key.strip()] = value.strip()
    payload = {"params": params, "samples": args.samples}
    qseq = _qseq_values(options)
    if qseq is not None:
        payload["qseq"] = qseq
    if args.server:
        response = _post_json(args.server, f"/curves/{args.object}", payload)
    else:
        try:
            request = CurveRequest(**payload)
        except ValueError as err:
            raise ParameterError(str(err)) from err
        response = emit_curve_payload(args.object, request).model_dump()
    csv = response["csv"]
    if args.out:
        Path(args.out).write_text(csv)
        print(f"curve {args.object}: {response['samples']} samples -> {args.out}")
    else:
        sys.stdout.write(csv)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, WindowSearchError) as err:
        print(f"hmodlab: error: {err}", file=sys.stderr)
        return 2
    except BudgetExhausted as err:
        print(f"hmodlab: resource error: {err}", file=sys.stderr)
        return 2
    except httpx.HTTPError as err:
        print(f"hmodlab: server error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"hmodlab: i/o error: {err}", file=sys.stderr)
        return 2
    except HmodlabError as err:
        print(f"hmodlab: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
