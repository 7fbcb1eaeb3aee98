"""
Command-line front end.

Subcommands: fk, workspace, solve, stiffness, validate, oracle-check.
Machine-readable output (CSV / JSON) goes to --out or stdout; human
status lines go to stderr. Exit codes: 0 success, 1 configuration or
usage errors, 2 infeasible loads / exceeded ranges, 3 non-convergence
(diagnostics are still written).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .config import default_config_path, load_finger_config
from .energy import equilibrium_report, random_tip_load_cases
from .errors import (
    BoundaryMinimum,
    ConfigError,
    EmptyCloud,
    GeometryInfeasible,
    NoConvergence,
    RangeExceeded,
    ResolutionTooLow,
    TensionInfeasible,
)
from .model import ExternalLoad, coupling_angles, forward_kinematics, jacobian
from .statics import (
    solution_to_dict,
    solve_static,
    stiffness_sweep,
    sweep_to_csv,
)
from .workspace import (
    cloud_to_csv,
    grid_sidecar,
    grid_to_pgm,
    occupancy_grid,
    sweep_workspace,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INFEASIBLE = 2
EXIT_NO_CONVERGENCE = 3

REFERENCE_PAYLOADS = "0.5,1.0,1.5,2.0,2.5,3.0"


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to the config exit code."""

    def error(self, message):
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


class _UsageError(ValueError):
    pass


def _parse_length(text: str) -> float:
    """Meters by default; 'mm:' prefix for millimeters."""
    text = text.strip()
    if text.startswith("mm:"):
        return float(text[3:]) * 1e-3
    return float(text)


def _parse_pair(text: str, what: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise _UsageError(f"{what} must be two comma-separated numbers")
    return (float(parts[0]), float(parts[1]))


def _parse_payloads(text: str) -> list[float]:
    items = [p for p in text.split(",") if p.strip()]
    if not items:
        raise _UsageError("payload list is empty")
    values = [float(p) for p in items]
    if any(v < 0.0 for v in values):
        raise _UsageError("payloads must be >= 0")
    return values


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text, encoding="utf-8")


def _status(msg: str) -> None:
    sys.stderr.write(msg + "\n")


def _add_shared(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None,
                        help="finger config JSON (default: shipped calibration)")
    parser.add_argument("--out", default=None, help="output path")
    parser.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="table output format (default csv)")
    parser.add_argument("--threshold", type=float, default=None,
                        help="solver residual threshold in meters")
    parser.add_argument("--max-iter", type=int, default=None,
                        help="solver iteration cap")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tendonfinger",
                     description="Coupled tendon-finger simulation toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fk", help="coupled kinematics at displacement q")
    _add_shared(p)
    p.add_argument("q", help="tendon displacement, meters (or mm:<value>)")

    p = sub.add_parser("workspace", help="sweep reachable points per link")
    _add_shared(p)
    p.add_argument("--resolution", type=int, default=100)
    p.add_argument("--cell", type=float, default=1e-3,
                   help="occupancy cell size in meters (default 1 mm)")

    p = sub.add_parser("solve", help="static configuration under load")
    _add_shared(p)
    p.add_argument("q", help="tendon displacement, meters (or mm:<value>)")
    p.add_argument("--force", default="0,0", help="tip force FX,FY in newtons")
    p.add_argument("--moment", type=float, default=0.0,
                   help="external moment in newton-meters")
    p.add_argument("--at", default=None,
                   help="force application point X,Y in meters (default fingertip)")

    p = sub.add_parser("stiffness", help="deflection/stiffness over payloads")
    _add_shared(p)
    p.add_argument("--payloads", required=True, help="comma-separated masses in kg")
    p.add_argument("--q", default="0", help="tendon displacement (default 0)")

    p = sub.add_parser("validate", help="static-loading validation table")
    _add_shared(p)
    p.add_argument("--payloads", default=REFERENCE_PAYLOADS,
                   help=f"comma-separated masses in kg (default {REFERENCE_PAYLOADS})")
    p.add_argument("--reference", default=None,
                   help="reference CSV with payload_kg,deflection_mm columns")

    p = sub.add_parser("oracle-check",
                       help="fixed-point vs energy-minimization comparison")
    _add_shared(p)
    p.add_argument("--cases", type=int, default=10)
    p.add_argument("--seed", type=int, default=7)

    return parser


def _load_config(args, *, need_tendons=False):
    path = args.config if args.config is not None else default_config_path()
    cfg = load_finger_config(path)
    if need_tendons and not cfg.tendons:
        raise ConfigError(
            "config declares no tendons; this command needs the full "
            "six-tendon definition"
        )
    threshold = cfg.solver.threshold
    max_iter = cfg.solver.max_iterations
    if args.threshold is not None:
        if args.threshold <= 0.0:
            raise ConfigError("--threshold must be > 0")
        threshold = args.threshold
    if args.max_iter is not None:
        if args.max_iter < 1:
            raise ConfigError("--max-iter must be >= 1")
        max_iter = args.max_iter
    return cfg, threshold, max_iter


def _cmd_fk(args) -> int:
    cfg, _, _ = _load_config(args)
    q = _parse_length(args.q)
    config = coupling_angles(q, cfg.geometry)
    tip = forward_kinematics(config, cfg.geometry)
    jac = jacobian(q, cfg.geometry)
    lines = [
        f"q_m = {q:.9g}",
        "theta_rad = " + " ".join(f"{t:.9g}" for t in config.theta),
        "theta_deg = " + " ".join(f"{math.degrees(t):.9g}" for t in config.theta),
        f"fingertip_mm = {tip.position[0] * 1e3:.6f} {tip.position[1] * 1e3:.6f}",
        f"jacobian = {jac[0]:.9g} {jac[1]:.9g}",
    ]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_workspace(args) -> int:
    cfg, _, _ = _load_config(args)
    if args.out is None:
        raise ConfigError("workspace requires --out <basename> for its files")
    cloud = sweep_workspace(cfg.geometry, args.resolution)
    union = occupancy_grid(cloud, args.cell)
    per_link = {}
    for link in (1, 2, 3):
        per_link[str(link)] = occupancy_grid(cloud, args.cell, links=(link,)).area

    base = Path(args.out)
    try:
        base.parent.mkdir(parents=True, exist_ok=True)
        base.with_suffix(".csv").write_text(cloud_to_csv(cloud), encoding="utf-8")
        base.with_suffix(".pgm").write_text(grid_to_pgm(union), encoding="utf-8")
        base.with_suffix(".json").write_text(
            grid_sidecar(union, per_link), encoding="utf-8"
        )
    except OSError as exc:
        raise ConfigError(f"cannot write workspace output: {exc}") from None

    for link, pts, counts in zip(
        (1, 2, 3), cloud.points_per_link, cloud.sample_counts
    ):
        _status(
            f"link {link}: points={len(pts)} "
            f"(samples per variable: {counts[0]}) "
            f"area_m2={per_link[str(link)]:.6e}"
        )
    _status(f"union area_m2={union.area:.6e} cell_m={args.cell}")
    return EXIT_OK


def _cmd_solve(args) -> int:
    cfg, threshold, max_iter = _load_config(args, need_tendons=True)
    q = _parse_length(args.q)
    force = _parse_pair(args.force, "--force")
    at = _parse_pair(args.at, "--at") if args.at is not None else None
    load = ExternalLoad(force=force, moment=args.moment, application_point=at)
    try:
        sol = solve_static(
            q, cfg.geometry, cfg.tendons, load,
            threshold=threshold, max_iterations=max_iter,
        )
    except NoConvergence as exc:
        doc = {
            "status": "no_convergence",
            "detail": str(exc),
            "trace": [
                {
                    "iteration": rec.index,
                    "theta_rad": list(rec.theta),
                    "fingertip_y_m": rec.fingertip_y,
                    "tensions_n": list(rec.tensions),
                    "residual_m": rec.residual,
                }
                for rec in exc.trace
            ],
        }
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
        _status(f"no convergence: {exc}")
        return EXIT_NO_CONVERGENCE
    doc = {"status": "ok", **solution_to_dict(sol)}
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK


def _rows_to_output(rows, fmt: str) -> str:
    if fmt == "csv":
        return sweep_to_csv(rows)
    return json.dumps(
        [
            {
                "payload_kg": r.payload_kg,
                "deflection_mm": None if math.isnan(r.deflection_m)
                else r.deflection_m * 1e3,
                "stiffness_N_per_m": None if math.isnan(r.stiffness_n_per_m)
                else r.stiffness_n_per_m,
                "iterations": r.iterations,
                "status": r.status,
            }
            for r in rows
        ],
        indent=2,
    ) + "\n"


def _cmd_stiffness(args) -> int:
    cfg, threshold, max_iter = _load_config(args, need_tendons=True)
    payloads = _parse_payloads(args.payloads)
    q = _parse_length(args.q)
    rows = stiffness_sweep(
        cfg.geometry, cfg.tendons, q, payloads,
        threshold=threshold, max_iterations=max_iter,
    )
    _emit(_rows_to_output(rows, args.format), args.out)
    return EXIT_OK if all(r.status == "ok" for r in rows) else EXIT_INFEASIBLE


def _read_reference(path: str) -> dict[float, float]:
    """payload_kg -> deflection_mm from a reference CSV."""
    lines = Path(path).read_text(encoding="utf-8").strip().splitlines()
    if not lines:
        raise ConfigError(f"reference file '{path}' is empty")
    header = [h.strip() for h in lines[0].split(",")]
    try:
        i_payload = header.index("payload_kg")
        i_defl = header.index("deflection_mm")
    except ValueError:
        raise ConfigError(
            "reference CSV must carry payload_kg and deflection_mm columns"
        ) from None
    table = {}
    for line in lines[1:]:
        cells = line.split(",")
        table[float(cells[i_payload])] = float(cells[i_defl])
    return table


def _cmd_validate(args) -> int:
    cfg, threshold, max_iter = _load_config(args, need_tendons=True)
    payloads = _parse_payloads(args.payloads)
    rows = stiffness_sweep(
        cfg.geometry, cfg.tendons, 0.0, payloads,
        threshold=threshold, max_iterations=max_iter,
    )
    _emit(_rows_to_output(rows, args.format), args.out)

    ok_rows = [r for r in rows if r.status == "ok"]
    deflections = [r.deflection_m for r in ok_rows]
    monotone = all(b > a for a, b in zip(deflections, deflections[1:]))
    _status(f"rows: {len(rows)} ok: {len(ok_rows)} "
            f"deflection monotone: {'yes' if monotone else 'no'}")

    if args.reference is not None:
        ref = _read_reference(args.reference)
        devs = []
        for r in ok_rows:
            for ref_payload, ref_mm in ref.items():
                if abs(ref_payload - r.payload_kg) < 1e-9:
                    devs.append(abs(r.deflection_m * 1e3 - ref_mm))
        if devs:
            total_mm = cfg.geometry.total_length * 1e3
            max_dev, mean_dev = max(devs), sum(devs) / len(devs)
            _status(
                f"reference comparison: max deviation {max_dev:.3f} mm "
                f"({100.0 * max_dev / total_mm:.3f}% of finger length), "
                f"mean {mean_dev:.3f} mm ({100.0 * mean_dev / total_mm:.3f}%)"
            )
        else:
            _status("reference comparison: no matching payloads")

    return EXIT_OK if len(ok_rows) == len(rows) else EXIT_INFEASIBLE


def _cmd_oracle_check(args) -> int:
    cfg, threshold, max_iter = _load_config(args, need_tendons=True)
    cases = random_tip_load_cases(args.cases, args.seed, cfg.geometry)
    report = equilibrium_report(
        cfg.geometry, cfg.tendons, 0.0, cases,
        threshold=threshold, max_iterations=max_iter,
    )
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    summary = report["summary"]
    _status(
        f"cases: {len(report['cases'])} "
        f"max fingertip gap: {100.0 * summary['max_delta_fraction_of_length']:.4f}% "
        f"of finger length (tolerance 1%)"
    )
    return EXIT_OK


_COMMANDS = {
    "fk": _cmd_fk,
    "workspace": _cmd_workspace,
    "solve": _cmd_solve,
    "stiffness": _cmd_stiffness,
    "validate": _cmd_validate,
    "oracle-check": _cmd_oracle_check,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ResolutionTooLow, _UsageError) as exc:
        _status(f"error: {exc}")
        return EXIT_CONFIG
    except ValueError as exc:
        _status(f"error: {exc}")
        return EXIT_CONFIG
    except (RangeExceeded, TensionInfeasible, GeometryInfeasible,
            EmptyCloud, BoundaryMinimum) as exc:
        _status(f"error: {exc.__class__.__name__}: {exc}")
        return EXIT_INFEASIBLE
    except OSError as exc:
        _status(f"error: {exc}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
