"""Command line entry point: ``normsol {solve,sweep,verify,eigen}``.

Exit codes: 0 when every check passes, 1 for numerical or check failures
and I/O errors, 2 for usage and configuration errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import io as nio
from .config import Config, load_config
from .continuation import continue_to_limit, prepare_geometry, sweep_rho
from .core import build_grid
from .eigen import first_eigenpair
from .errors import ConfigError, GeometryInadmissible, NormsolError
from .verify import verify_all

logger = logging.getLogger("normsol")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _out_dir(cfg: Config, args) -> Path:
    return Path(args.out if args.out else cfg.out_dir)


def cmd_solve(cfg: Config, out: Path) -> int:
    params = cfg.params()
    grid = build_grid(params.domain, cfg.n)
    result_path = out / "result.json"
    try:
        prepared = prepare_geometry(params, grid, cfg.seed, cfg.trial_count)
        res = continue_to_limit(
            params,
            grid,
            cfg.schedule(),
            cfg.minimize_options(),
            u_floor=cfg.u_floor,
            residual_tol=cfg.residual_tol,
            prepared=prepared,
        )
    except GeometryInadmissible as exc:
        nio.write_json(
            result_path,
            {
                "status": "failed",
                "error": str(exc),
                "params": nio.params_dict(params),
                "geometry": exc.report.as_dict() if exc.report else None,
                "log": [],
            },
        )
        print(f"solve failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except NormsolError as exc:
        nio.write_json(result_path, {"status": "failed", "error": str(exc), "params": nio.params_dict(params), "log": []})
        print(f"solve failed: {exc}", file=sys.stderr)
        return EXIT_FAIL

    nio.write_json(result_path, nio.solve_result_dict(res, grid))
    last = res.log.records[-1]
    nio.write_profile(
        out / "profile.csv",
        grid,
        res.u.values,
        {
            "dim": params.dim,
            "r": params.r,
            "p": params.p,
            "rho": params.rho,
            "eps": last.eps,
            "lambda": res.lam,
            "energy": res.energy,
        },
    )
    print(f"lambda = {res.lam:.12g}  energy = {res.energy:.12g}  status = {'passed' if res.passed else 'failed'}")
    for name, value in res.checks.items():
        print(f"  {name}: {value}")
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_sweep(cfg: Config, out: Path, rho_list: list[float]) -> int:
    params = cfg.params()
    grid = build_grid(params.domain, cfg.n)
    entries = sweep_rho(
        params,
        grid,
        rho_list,
        cfg.schedule(),
        cfg.minimize_options(),
        threads=cfg.threads,
        seed=cfg.seed,
        trial_count=cfg.trial_count,
        u_floor=cfg.u_floor,
        residual_tol=cfg.residual_tol,
    )
    nio.atomic_write_text(out / "sweep.csv", nio.sweep_csv_text(entries))
    for e in entries:
        if e.result is None:
            print(f"rho = {e.rho:g}: {e.error}")
        else:
            print(f"rho = {e.rho:g}: lambda = {e.result.lam:.10g}  passed = {e.passed}")
    return EXIT_OK if all(e.passed for e in entries) else EXIT_FAIL


def cmd_verify(cfg: Config, out: Path) -> int:
    params = cfg.params()
    grid = build_grid(params.domain, cfg.n)
    report = verify_all(
        params,
        grid,
        cfg.seed,
        schedule=cfg.schedule(),
        opts=cfg.minimize_options(),
        trial_count=cfg.trial_count,
        u_floor=cfg.u_floor,
        residual_tol=cfg.residual_tol,
    )
    nio.write_json(out / "report.json", report.as_dict())
    for key, entry in report.entries.items():
        print(f"{entry.status:8s} {key}")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_eigen(cfg: Config, out: Path) -> int:
    grid = build_grid(cfg.domain_spec(), cfg.n)
    eig = first_eigenpair(grid)
    nio.write_profile(out / "eigen_profile.csv", grid, eig.phi1.values, {"lambda1": eig.lambda1})
    print(f"lambda1 = {eig.lambda1:.17g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="normsol", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value config file (default: bundled)")
        p.add_argument("--out", help="output directory (overrides out_dir)")
        p.add_argument("--threads", type=int, help="worker threads (overrides threads)")

    common(sub.add_parser("solve", help="continuation eps -> 0 at one mass"))
    sw = sub.add_parser("sweep", help="solve for several masses")
    common(sw)
    sw.add_argument("--rho", required=True, help="comma separated masses")
    common(sub.add_parser("verify", help="run every bound check and write a report"))
    common(sub.add_parser("eigen", help="first Dirichlet eigenpair"))
    return parser


def _parse_rho(text: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --rho list {text!r}") from exc
    if not values:
        raise ConfigError("--rho needs at least one value")
    return values


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.threads is not None:
            cfg = cfg.replace(threads=args.threads)
            cfg.validate()
        rho_list = _parse_rho(args.rho) if args.command == "sweep" else None
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    out = _out_dir(cfg, args)
    try:
        if args.command == "solve":
            return cmd_solve(cfg, out)
        if args.command == "sweep":
            return cmd_sweep(cfg, out, rho_list)
        if args.command == "verify":
            return cmd_verify(cfg, out)
        return cmd_eigen(cfg, out)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except NormsolError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
