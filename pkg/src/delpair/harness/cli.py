"""Command line entry point ``delpair``."""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from ..errors import DelpairError, InvalidTask
from ..jsonio import array_from_json, cplx_from_json, cplx_to_json
from ..period import validate
from ..theta import parse_characteristic, theta
from .checks import run_suite
from .report import CHECKS, DEFAULT_GRID, VerificationTask, exit_code, merge_reports, summary_line, write_reports


def _complex_list(text: str) -> list:
    return [cplx_from_json(x) for x in text.split(",") if x.strip()]


def _load_omega(text: str) -> np.ndarray:
    if os.path.exists(text):
        with open(text) as fh:
            raw = json.load(fh)
        if isinstance(raw, dict):
            raw = raw.get("omega", raw)
    else:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError:
            raw = text
    om = array_from_json(raw)
    return np.atleast_2d(om)


def cmd_theta(args) -> int:
    om = validate(_load_omega(args.omega))
    z = np.array(_complex_list(args.z), dtype=complex)
    char = parse_characteristic(args.char, om.genus) if args.char else None
    th = theta(z, om, char, args.tol, gradient=args.gradient)
    out = {
        "value": cplx_to_json(th.value()),
        "mantissa": cplx_to_json(th.mantissa),
        "exponent": th.exponent,
        "tail_bound": th.tail_bound,
    }
    if args.gradient:
        out["gradient"] = [cplx_to_json(v) for v in th.grad_value()]
        out["grad_tail_bound"] = th.grad_tail_bound
    print(json.dumps(out))
    return 0


def _emit(reports, json_out) -> int:
    for r in reports:
        print(summary_line(r))
    if json_out:
        write_reports(json_out, reports)
    return exit_code(reports)


def cmd_verify(args) -> int:
    record = {"check": args.check, "seed": args.seed, "slow": args.slow}
    if args.tau is not None:
        record["tau"] = args.tau
    if args.omega is not None:
        record["omega"] = _load_omega(args.omega).tolist()
        record["omega"] = [[cplx_to_json(x) for x in row] for row in record["omega"]]
    record["grid"] = args.grid if args.grid is not None else DEFAULT_GRID.get(args.check, 5)
    if args.tol is not None:
        record["tol"] = args.tol
    if args.lam is not None:
        record["lambda"] = args.lam.split(",")
    return _emit(run_suite([record]), args.json_out)


def cmd_run(args) -> int:
    with open(args.tasks) as fh:
        payload = json.load(fh)
    tasks = payload["tasks"] if isinstance(payload, dict) else payload
    if not isinstance(tasks, list):
        raise InvalidTask("task file must hold a list of task records")
    return _emit(run_suite(tasks, workers=args.workers), args.json_out)


def cmd_report(args) -> int:
    reports = merge_reports(args.merge)
    return _emit(reports, args.out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="delpair", description="Deligne pairing and torsion verification tools.")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("theta", help="evaluate a Riemann theta function")
    t.add_argument("--omega", required=True, help="period matrix: JSON file, JSON literal or a scalar like 1j")
    t.add_argument("--z", required=True, help="comma-separated complex coordinates")
    t.add_argument("--char", default=None, help="characteristic 'a,b' or 'a1:a2,b1:b2'")
    t.add_argument("--tol", type=float, default=1e-12)
    t.add_argument("--gradient", action="store_true")
    t.set_defaults(func=cmd_theta)

    v = sub.add_parser("verify", help="run one verification check")
    v.add_argument("check", choices=CHECKS)
    v.add_argument("--tau", default=None, help="genus-one modulus, e.g. 1+2j")
    v.add_argument("--omega", default=None, help="period matrix (file or JSON)")
    v.add_argument("--grid", type=int, default=None)
    v.add_argument("--tol", type=float, default=None)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--lambda", dest="lam", default=None, help="comma-separated lambda values")
    v.add_argument("--json-out", default=None)
    v.add_argument("--slow", action="store_true", help="extra cross-checks for the spectral oracle")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("run", help="run a JSON task file")
    r.add_argument("tasks")
    r.add_argument("--json-out", default=None)
    r.add_argument("--workers", type=int, default=1)
    r.set_defaults(func=cmd_run)

    m = sub.add_parser("report", help="merge report files")
    m.add_argument("--merge", nargs="+", required=True)
    m.add_argument("--out", default=None)
    m.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DelpairError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
