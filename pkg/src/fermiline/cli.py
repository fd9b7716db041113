"""Command-line front door: simulate, causality, perturb, design, sweep.

Exit codes: 0 success, 1 partial sweep failure, 2 invalid configuration,
3 runtime failure (unreachable tolerance, unresolved front, ...). No
command writes outside its output directory, and every output directory
contains exactly one manifest.
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

from . import causality, config, dynamics, expdesign, hilbert, output, perturbation
from .errors import (
    ConfigError,
    ConvergenceError,
    FrontUnresolvedError,
    PropagationError,
    ResourceLimitError,
)
from .model import Discretization

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

log = logging.getLogger("fermiline")


def _resolved(cfg) -> dict:
    return {
        "active_modes": cfg.n_active,
        "delta_k": cfg.delta_k,
        "box_length": cfg.disc.box_length,
        "omega_max": cfg.disc.omega_max,
        "n_max": cfg.disc.n_max,
        "cutoff": cfg.disc.cutoff,
    }


def cmd_simulate(raw: dict, outdir: Path) -> list[Path]:
    cfg, settings = config.build_run(raw)
    basis = hilbert.enumerate_basis(cfg.n_active, cfg.disc.n_max)
    h = hilbert.build_hamiltonian(cfg, basis)
    psi0 = dynamics.initial_state(basis, settings.initial_state)
    traj = dynamics.evolve(
        h,
        psi0,
        settings.grid,
        tol=settings.tol,
        store_snapshots=False,
        diag_observables=dynamics.standard_observables(basis),
    )
    series = dynamics.observables(traj, basis)
    meta = {
        "config_digest": config.config_digest(raw),
        "command": "simulate",
        "active_modes": cfg.n_active,
        "norm_drift": output.format_float(traj.norm_drift),
    }
    path = outdir / "observables.csv"
    output.write_csv(path, series.columns(), meta)
    return [path]


def cmd_causality(raw: dict, outdir: Path) -> list[Path]:
    cfg, settings = config.build_run(raw)
    opts = raw.get("causality") or {}
    guard = float(opts.get("guard_fraction", causality.GUARD_FRACTION))
    report = causality.run_differential(
        cfg, settings.grid, tol=settings.tol, guard=guard
    )
    digest = config.config_digest(raw)
    outputs = []

    path = outdir / "delta_p.csv"
    output.write_csv(path, report.columns(), {"config_digest": digest, "command": "causality"})
    outputs.append(path)

    summary = {
        "prefront_residual": report.prefront_residual,
        "postfront_peak": report.postfront_peak,
        "front_time": report.front_time,
        "rise_time": report.rise_time,
        "threshold": report.threshold,
        "guard_fraction": report.guard_fraction,
        "separation": report.separation,
        "notes": report.notes,
    }

    ladder_spec = opts.get("convergence_ladder") or []
    if ladder_spec:
        ladder = []
        for overrides in ladder_spec:
            disc = Discretization(
                modes=int(overrides.get("modes", cfg.disc.modes)),
                omega_max=float(overrides.get("omega_max", cfg.disc.omega_max)),
                box_length=float(overrides.get("box_length", cfg.disc.box_length)),
                n_max=int(overrides.get("n_max", cfg.disc.n_max)),
                t_max=cfg.disc.t_max,
                cutoff=str(overrides.get("cutoff", cfg.disc.cutoff)),
                omega_soft=overrides.get("omega_soft", cfg.disc.omega_soft),
            )
            ladder.append(disc)
        rows = causality.convergence_scan(cfg, settings.grid, ladder, tol=settings.tol)
        path = outdir / "convergence.csv"
        output.write_csv(
            path,
            {
                "modes": [r.modes for r in rows],
                "omega_max": [r.omega_max for r in rows],
                "active_modes": [r.active_modes for r in rows],
                "prefront_residual": [r.prefront_residual for r in rows],
                "postfront_peak": [r.postfront_peak for r in rows],
                "ratio_to_previous": [
                    r.ratio_to_previous if r.ratio_to_previous is not None else float("nan")
                    for r in rows
                ],
            },
            {"config_digest": digest, "command": "causality convergence"},
        )
        outputs.append(path)
        monotone = all(
            r.ratio_to_previous is None or r.ratio_to_previous <= 1.0 for r in rows
        )
        summary["convergence_monotone"] = monotone
        if rows and rows[-1].ratio_to_previous and 0 < rows[-1].ratio_to_previous < 1:
            last = rows[-1]
            summary["extrapolated_residual"] = (
                last.prefront_residual * last.ratio_to_previous / (1 - last.ratio_to_previous)
            )
        if not monotone:
            log.warning("convergence ladder is not monotone; see convergence.csv")

    if opts.get("compare_perturbative"):
        overlay = causality.compare_perturbative(cfg, settings.grid, tol=settings.tol)
        path = outdir / "overlay.csv"
        output.write_csv(
            path,
            {
                "t": overlay.times,
                "delta_p": overlay.delta_p,
                "perturbative_total": overlay.perturbative_total,
                "m1_sq": overlay.background_pt,
                "p_e_b_baseline": overlay.background_ed,
            },
            {"config_digest": digest, "command": "causality overlay"},
        )
        outputs.append(path)
        summary["rel_l2_distance"] = overlay.rel_l2_distance
        summary["overlay_notes"] = overlay.notes

    path = outdir / "report.json"
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    outputs.append(path)
    return outputs


def cmd_perturb(raw: dict, outdir: Path) -> list[Path]:
    cfg, settings = config.build_run(raw)
    opts = raw.get("perturbation") or {}
    include = bool(opts.get("include_interference", True))
    curves = perturbation.prob_curves(cfg, settings.grid, include_interference=include)
    meta = {
        "config_digest": config.config_digest(raw),
        "command": "perturb",
        "active_modes": cfg.n_active,
        "include_interference": include,
    }
    path = outdir / "curves.csv"
    output.write_csv(path, curves.columns(), meta)
    return [path]


def cmd_design(raw: dict, outdir: Path) -> list[Path]:
    design = raw.get("design")
    if not design:
        raise ConfigError(["cmd_design requires a design section"])
    report = expdesign.feasibility_report(design)
    digest = config.config_digest(raw)

    txt = outdir / "feasibility.txt"
    txt.write_text("\n".join(expdesign.report_lines(report)) + "\n", encoding="utf-8")

    machine = {
        "config_digest": digest,
        "omega_a_rad_per_s": report.omega_a_rad_per_s,
        "omega_b_rad_per_s": report.omega_b_rad_per_s,
        "g_over_omega_a": report.g_over_omega_a,
        "g_over_omega_b": report.g_over_omega_b,
        "k_a": report.k_a,
        "k_b": report.k_b,
        "stay_probability_a": report.stay_a,
        "stay_probability_b": report.stay_b,
        "thermal_occupancy_a": report.thermal_occupancy_a,
        "thermal_occupancy_b": report.thermal_occupancy_b,
        "initial_photon_probability": report.initial_photon_probability,
        "preparation_fidelity": report.fidelity.fidelity,
        "passed": report.passed,
        "checks": [
            {
                "name": c.name,
                "value": c.value,
                "threshold": c.threshold,
                "comparison": c.comparison,
                "passed": c.passed,
                "margin": c.margin,
            }
            for c in report.checks
        ],
    }
    js = outdir / "feasibility.json"
    js.write_text(json.dumps(machine, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return [txt, js]


_POINT_COMMANDS = {
    "simulate": cmd_simulate,
    "causality": cmd_causality,
    "perturb": cmd_perturb,
}


def _point_id(overrides: dict) -> str:
    canon = json.dumps(overrides, sort_keys=True, separators=(",", ":"), default=float)
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def cmd_sweep(raw: dict, outdir: Path, jobs: int = 1) -> tuple[list[Path], int]:
    sweep = raw.get("sweep") or {}
    axes = sweep.get("axes") or []
    command = str(sweep.get("command", "simulate"))
    if command not in _POINT_COMMANDS:
        raise ConfigError([f"sweep.command must be one of {sorted(_POINT_COMMANDS)}"])
    runner = _POINT_COMMANDS[command]

    for axis in axes:
        if "key" not in axis or "values" not in axis:
            raise ConfigError(["each sweep axis needs 'key' and 'values'"])
    keys = [axis["key"] for axis in axes]
    grids = [axis["values"] for axis in axes]
    combos = list(itertools.product(*grids)) if grids else [()]
    points = [
        dict(zip(keys, combo)) for combo in combos
    ]

    base = {k: v for k, v in raw.items() if k != "sweep"}
    results = {}

    def run_point(overrides):
        pid = _point_id(overrides)
        pdir = outdir / f"point_{pid}"
        pdir.mkdir(parents=True, exist_ok=True)
        started = datetime.now(timezone.utc)
        point_raw = config.apply_overrides(base, overrides)
        try:
            files = runner(point_raw, pdir)
            cfg, _ = config.build_run(point_raw) if command != "design" else (None, None)
            output.write_manifest(
                pdir, command, point_raw, files, started,
                resolved=_resolved(cfg) if cfg else None,
            )
            return pid, overrides, "ok", str(pdir)
        except Exception as exc:  # per-point failures recorded, not raised
            return pid, overrides, f"failed: {exc}", str(pdir)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for pid, overrides, status, pdir in pool.map(run_point, points):
                results[pid] = (overrides, status, pdir)
    else:
        for point in points:
            pid, overrides, status, pdir = run_point(point)
            results[pid] = (overrides, status, pdir)

    # deterministic index regardless of execution order
    ordered = sorted(results.items())
    index_lines = ["point_id," + ",".join(keys) + ("," if keys else "") + "status,dir"]
    for pid, (overrides, status, pdir) in ordered:
        values = ",".join(output.format_float(overrides[k]) for k in keys)
        sep = "," if keys else ""
        index_lines.append(f"{pid},{values}{sep}{status.split(':')[0]},{Path(pdir).name}")
    index = outdir / "index.csv"
    index.write_text("\n".join(index_lines) + "\n", encoding="utf-8")

    failures = [s for _, s, _ in results.values() if s != "ok"]
    for pid, (overrides, status, _) in ordered:
        if status != "ok":
            log.error("sweep point %s %s: %s", pid, overrides, status)
    return [index], (EXIT_PARTIAL if failures else EXIT_OK)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fermiline",
        description="Two artificial atoms on a 1-D line: dynamics, causality, "
        "perturbation theory and experiment feasibility.",
    )
    parser.add_argument("command", choices=["simulate", "causality", "perturb", "design", "sweep"])
    parser.add_argument("--config", required=True, help="YAML configuration file")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--jobs", type=int, default=1, help="sweep parallelism")
    parser.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        raw = config.load_config(args.config)
        # validate before creating any outputs
        if args.command == "sweep":
            base = {k: v for k, v in raw.items() if k != "sweep"}
            command = str((raw.get("sweep") or {}).get("command", "simulate"))
            if command != "design":
                config.build_run(base)
        elif args.command != "design":
            config.build_run(raw)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    started = datetime.now(timezone.utc)

    try:
        if args.command == "sweep":
            files, code = cmd_sweep(raw, outdir, jobs=max(1, args.jobs))
            output.write_manifest(outdir, args.command, raw, files, started)
            return code
        runner = {
            "simulate": cmd_simulate,
            "causality": cmd_causality,
            "perturb": cmd_perturb,
            "design": cmd_design,
        }[args.command]
        files = runner(raw, outdir)
        resolved = None
        if args.command != "design":
            cfg, _ = config.build_run(raw)
            resolved = _resolved(cfg)
        output.write_manifest(outdir, args.command, raw, files, started, resolved=resolved)
        return EXIT_OK
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PropagationError, FrontUnresolvedError, ConvergenceError, ResourceLimitError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
