"""Command-line front end: ``stazbw run|check|oracle``."""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .checks import DEFAULT_SEED, SUITES, run_suite, tol_scale
from .config import ConfigError, load_config
from .dynamics import IntegrationError, integrate
from .oracle import RATIO_RANGE, run_oracle
from .table import COLUMNS, observables, write_csv

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def source_version() -> str:
    """Package version, plus the git commit when running from a checkout."""
    here = os.path.dirname(os.path.abspath(__file__))
    try:
        out = subprocess.run(["git", "rev-parse", "--short", "HEAD"], cwd=here,
                             capture_output=True, text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def run_checks(t, rows: np.ndarray) -> dict:
    """Per-run invariants, each as {value, tol, passed}."""
    scale = tol_scale()
    m = t.mass
    col = {name: rows[:, k] for k, name in enumerate(COLUMNS)}
    checks = {
        "H_constant": (float(np.max(np.abs(col["H"] - col["H"][0]))), 1e-9 * m),
        "nonlinear_residual": (float(np.max(col["res_nl"])), 1e-10),
    }
    if t.field.is_free:
        checks["J_drift"] = (float(np.max(np.abs(t.J - t.J[0]))), 1e-8)
        checks["p_dot_v_eq_m"] = (float(np.max(np.abs(col["pv"] - m))), 1e-9 * m)
        checks["Omega_dot_S_eq_m"] = (float(np.max(np.abs(col["OmegaS"] - m))), 1e-9 * m)
    return {k: {"value": v, "tol": tol * scale, "passed": bool(v <= tol * scale)}
            for k, (v, tol) in checks.items()}


def cmd_run(config_path: str, out_dir: str, seed: int) -> int:
    started = _now()
    try:
        job = load_config(config_path)
        tol_scale()
    except (ConfigError, ValueError) as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        t = integrate(job.sim)
        rows = observables(t)
    except IntegrationError as exc:
        print(f"error: numerical abort at sample {exc.index}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if not np.all(np.isfinite(rows)):
        bad = int(np.nonzero(~np.all(np.isfinite(rows), axis=1))[0][0])
        print(f"error: numerical abort at sample {bad}: non-finite observable",
              file=sys.stderr)
        return EXIT_NUMERIC

    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    if "trajectory" in job.outputs:
        paths["trajectory"] = os.path.join(out_dir, "trajectory.csv")
        write_csv(paths["trajectory"], rows)
    checks = run_checks(t, rows)
    if "report" in job.outputs:
        paths["report"] = os.path.join(out_dir, "report.json")
        manifest = {
            "version": source_version(),
            "seed": seed,
            "config_text": job.text,
            "config": job.sim.describe(),
            "config_digest": job.sim.digest(),
            "samples": len(t),
            "started": started,
            "finished": _now(),
            "outputs": paths,
            "checks": checks,
        }
        with open(paths["report"], "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    for name, c in checks.items():
        flag = "PASS" if c["passed"] else "FAIL"
        print(f"{flag}  {name:<20s} value={c['value']:.3e}  tol={c['tol']:.1e}")
    print(f"wrote {len(t)} samples to {out_dir}")
    return EXIT_OK


def cmd_check(suite: str, seed: int, perturb: float) -> int:
    try:
        results = run_suite(suite, seed=seed, perturb=perturb)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_oracle(config_path: str, euler: bool) -> int:
    try:
        job = load_config(config_path)
    except ConfigError as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not job.sim.field.is_free:
        print("error: the closed-form oracle needs a free-field config", file=sys.stderr)
        return EXIT_CONFIG
    try:
        r = run_oracle(job.sim, integrator="euler" if euler else None)
    except IntegrationError as exc:
        print(f"error: numerical abort at sample {exc.index}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    spp = job.sim.steps_per_period
    print(f"integrator        {r.integrator}")
    print(f"max error (spp={spp})  {r.error:.6e}")
    print(f"max error (spp={2 * spp})  {r.error_half:.6e}")
    print(f"error bound       {r.bound:.6e}")
    print(f"convergence ratio {r.ratio:.4f}  (accepted range {RATIO_RANGE[0]:g}..{RATIO_RANGE[1]:g})")
    print("PASS" if r.passed else "FAIL")
    return EXIT_OK if r.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stazbw", description=__doc__)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="integrate a config and write trajectory.csv/report.json")
    run.add_argument("config")
    run.add_argument("--out", default="stazbw-out", help="output directory")
    run.add_argument("--seed", type=int, default=DEFAULT_SEED)

    chk = sub.add_parser("check", help="run an invariant suite")
    chk.add_argument("suite", choices=sorted(SUITES) + ["all"])
    chk.add_argument("--seed", type=int, default=DEFAULT_SEED)
    chk.add_argument("--perturb", type=float, default=0.0, metavar="EPS",
                     help="inject a fault of size EPS (negative control)")

    orc = sub.add_parser("oracle", help="compare against the closed-form free solution")
    orc.add_argument("config")
    orc.add_argument("--euler-debug", action="store_true",
                     help="use forward Euler (the convergence ratio should drop to ~2)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, args.out, args.seed)
    if args.command == "check":
        return cmd_check(args.suite, args.seed, args.perturb)
    return cmd_oracle(args.config, args.euler_debug)


if __name__ == "__main__":
    sys.exit(main())
