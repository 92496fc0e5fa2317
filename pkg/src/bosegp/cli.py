"""Command-line entry point: ``compute``, ``sweep`` and ``verify``.

Exit codes: 0 success, 1 numerical or verification failure, 2 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

from .config import ConfigError, RunConfig, load_config
from .errors import BoseGPError, ContractError
from .free_energy import FreeEnergyBreakdown, solve_scattering, upper_bound
from .ideal_gas import ideal_gas
from .verify import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

CSV_COLUMNS = (
    "kappa", "beta", "beta_c", "mu0", "N0", "rho0", "a", "a_N", "F0_plus", "F0_bec",
    "Fbec", "branch", "interaction", "bogo_corr", "total", "error_scale",
)


class UsageError(Exception):
    pass


def compute_breakdown(cfg: RunConfig, kappa: float | None = None) -> FreeEnergyBreakdown:
    """The bound for ``cfg`` (temperature overridden by ``kappa`` if given)."""
    params = cfg.params(kappa)
    sol = solve_scattering(params)
    ideal = ideal_gas(params.beta, params.N, params.L, tol=cfg.sum_tail)
    if ideal.residual > cfg.root_residual:
        raise BoseGPError(f"ideal-gas residual {ideal.residual:.2e} exceeds tol.root_residual")
    return upper_bound(params, sol, ideal)


def _fmt(x) -> str:
    return x if isinstance(x, str) else repr(float(x))


def csv_text(rows: list[FreeEnergyBreakdown]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for b in rows:
        d = b.as_dict()
        w.writerow([_fmt(d[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def report_text(b: FreeEnergyBreakdown) -> str:
    lines = [
        f"kappa = {b.kappa!r}   beta = {b.beta!r}   beta_c = {b.beta_c!r}",
        f"N = {b.N!r}   L = {b.L!r}   a = {b.a!r}   a_N = {b.a_N!r}",
        f"mu0 = {b.mu0!r}   N0 = {b.N0!r}   rho0 = {b.rho0!r}",
        "",
        f"  F0_plus                      {b.F0_plus!r}",
        f"+ interaction 8 pi a_N L^3 rho^2 {b.interaction!r}",
        f"+ min(interacting, ideal)      {min(b.Fbec, b.F0_bec)!r}",
        f"    interacting F^BEC - 8 pi a_N L^3 rho0^2 = {b.Fbec!r}",
        f"    ideal F0_bec                          = {b.F0_bec!r}",
        f"    selected: {b.branch}" + ("   (near critical: both branches shown)" if b.near_critical else ""),
        f"+ correction sum               {b.bogo_corr!r}   (truncation bound {b.bogo_tail_bound!r})",
        f"= total                        {b.total!r}",
        "",
        f"remainder scale L^-2 N^(7/12)  {b.error_scale!r}   (reported, not added)",
        f"condensate log term ln(4 beta a_N / L^3) / (2 beta) = {b.log_term!r}",
    ]
    return "\n".join(lines) + "\n"


def parse_range(spec: str) -> list[float]:
    """``START:STOP:STEP`` to an inclusive, increasing grid."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError(f"range {spec!r} must look like START:STOP:STEP")
    try:
        start, stop, step = (float(x) for x in parts)
    except ValueError:
        raise UsageError(f"range {spec!r} has a non-numeric entry") from None
    if not (start > 0 and step > 0 and math.isfinite(stop)):
        raise UsageError("range needs START > 0 and STEP > 0")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    if n <= 0:
        raise UsageError(f"range {spec!r} is empty")
    return [round(start + i * step, 12) for i in range(n)]


def _sweep_row(args):
    cfg, kappa = args
    return compute_breakdown(cfg, kappa)


def cmd_compute(args) -> int:
    cfg = load_config(args.config)
    b = compute_breakdown(cfg)
    out = args.out or cfg.out
    text = csv_text([b])
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text + "\n")
    sys.stdout.write(report_text(b))
    return EXIT_OK if math.isfinite(b.total) else EXIT_FAIL


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    grid = parse_range(args.kappa)
    jobs = [(cfg, k) for k in grid]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(j) for j in jobs]
    text = csv_text(rows)
    out = args.out or cfg.out
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    switches = [(a.kappa, b.kappa) for a, b in zip(rows, rows[1:]) if a.branch != b.branch]
    for lo, hi in switches:
        print(f"branch switch between kappa = {lo!r} and kappa = {hi!r}", file=sys.stderr if not out else sys.stdout)
    if not switches:
        print("no branch switch on this grid", file=sys.stderr if not out else sys.stdout)
    bad = [b.kappa for b in rows if not math.isfinite(b.total)]
    return EXIT_FAIL if bad else EXIT_OK


def cmd_verify(args) -> int:
    if args.suite != "all" and args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from all, {', '.join(SUITES)}")
    cfg = load_config(args.config)
    checks = run_suite(cfg, args.suite)
    for c in checks:
        print(json.dumps(c.as_dict()))
    failed = [c for c in checks if not c.passed]
    print(json.dumps({"summary": True, "checks": len(checks), "failed": len(failed)}))
    return EXIT_FAIL if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bosegp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("compute", help="evaluate the bound for one configuration")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compute)
    p = sub.add_parser("sweep", help="evaluate the bound on a kappa grid")
    p.add_argument("--config", required=True)
    p.add_argument("--kappa", required=True, metavar="START:STOP:STEP")
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("verify", help="run invariant and oracle checks")
    p.add_argument("--config", required=True)
    p.add_argument("--suite", required=True)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, UsageError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BoseGPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
