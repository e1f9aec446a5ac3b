"""Command-line entry point: reproducible runs with manifests.

Subcommands: ``curve`` (disagreement curves to CSV + figure), ``pde``
(split-step runs with snapshots), ``verify`` (randomized bound/construction
suites), ``discriminate`` (two-source Monte-Carlo protocol) and
``export-model`` (write a seeded model in the JSON interchange format).

Every run writes ``manifest.json`` (resolved config, config hash, seed,
versions, timestamp) into the output directory; numeric outputs contain no
timestamps, so re-running the recorded command reproduces them bit for bit.

Exit codes: 0 success, 1 verification/assertion failure, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import datetime as dt
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import DEFAULT_CONFIG, AppConfig, load_config
from .discrimination import discriminate, write_trials_csv
from .errors import CalibrationError, ConfigError, DomainExhaustedError, TeeterkitError
from .flipflop import (
    DisagreementCurve,
    sample_classical_curve,
    sample_curve,
    time_grid,
    write_curve_csv,
)
from .modelio import write_model
from .pde import (
    evolve_to_times,
    init_gaussian,
    quadrant_probability,
    set_fft_workers,
    step,
    write_marginals_csv,
    write_snapshot,
)
from .qmodel import random_model
from .verification import SUITES, run_suite


def _versions() -> dict:
    import matplotlib
    import scipy

    return {
        "teeterkit": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "matplotlib": matplotlib.__version__,
    }


def _config_sha256(config_path) -> str:
    if config_path is None:
        payload = json.dumps(DEFAULT_CONFIG, sort_keys=True).encode()
    else:
        payload = Path(config_path).read_bytes()
    return hashlib.sha256(payload).hexdigest()


def _write_manifest(out_dir: Path, subcommand: str, args: argparse.Namespace,
                    config_doc, seed, outputs) -> None:
    manifest = {
        "subcommand": subcommand,
        "argv": sys.argv[1:] if sys.argv else [],
        "configPath": getattr(args, "config", None),
        "configSha256": _config_sha256(getattr(args, "config", None)),
        "config": config_doc,
        "seed": seed,
        "versions": _versions(),
        "timestampUtc": dt.datetime.now(dt.timezone.utc).isoformat(),
        "outputs": sorted(outputs),
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")


def _prepare_out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_curve(args) -> int:
    cfg = load_config(args.config)
    out = _prepare_out_dir(args)
    p = cfg.dimensionless
    times = time_grid(cfg.curve.t_min, cfg.curve.t_max, cfg.curve.t_step)

    outputs = []
    curves = []
    analytic = sample_curve(p, times)
    write_curve_csv(analytic, out / "curve_analytic.csv")
    outputs.append("curve_analytic.csv")
    curves.append(analytic)

    if args.classical:
        classical = sample_classical_curve(p, times)
        write_curve_csv(classical, out / "curve_classical.csv")
        outputs.append("curve_classical.csv")
        curves.append(classical)

    if args.pde:
        try:
            snaps = evolve_to_times(p, cfg.pde.grid, times)
            pde_times = tuple(t for t, _ in snaps)
            pde_probs = tuple(quadrant_probability(f) for _, f in snaps)
        except DomainExhaustedError as exc:
            print(f"warning: pde curve truncated: {exc}", file=sys.stderr)
            good = [t for t in times if t <= exc.last_valid_time]
            snaps = evolve_to_times(p, cfg.pde.grid, good)
            pde_times = tuple(t for t, _ in snaps)
            pde_probs = tuple(quadrant_probability(f) for _, f in snaps)
        pde_curve = DisagreementCurve(pde_times, pde_probs, "pde")
        write_curve_csv(pde_curve, out / "curve_pde.csv")
        outputs.append("curve_pde.csv")
        curves.append(pde_curve)

    if not args.no_plot:
        from .plotting import save_curve_figure

        save_curve_figure(curves, out / "curve.png")
        outputs.append("curve.png")

    _write_manifest(out, "curve", args, cfg.raw, cfg.seed, outputs)
    return 0


def cmd_pde(args) -> int:
    cfg = load_config(args.config)
    out = _prepare_out_dir(args)
    p = cfg.dimensionless
    grid = cfg.pde.grid
    outputs = []

    if args.times:
        times = [float(t) for t in args.times.split(",")]
    else:
        times = list(time_grid(cfg.curve.t_min, cfg.curve.t_max, cfg.curve.t_step))

    snapshot_every = cfg.pde.snapshot_every
    field = init_gaussian(grid, p)
    recorded = [(0.0, quadrant_probability(field))] if times and times[0] == 0.0 else []
    truncated = None
    curve_times = [t for t in times if t > 0.0]
    try:
        for t in curve_times:
            steps = int(round((t - field.time) / grid.dt))
            if abs(field.time + steps * grid.dt - t) > 1e-9:
                raise ConfigError(f"time {t} is not a multiple of dt={grid.dt}")
            while steps > 0:
                chunk = steps if snapshot_every <= 0 else min(steps, snapshot_every)
                field = step(field, p, chunk)
                steps -= chunk
                if snapshot_every > 0:
                    stem = f"snapshot_t{field.time:.6f}"
                    write_snapshot(field, out / f"{stem}.bin")
                    write_marginals_csv(field, out / f"{stem}_marginals.csv")
                    outputs += [f"{stem}.bin", f"{stem}_marginals.csv"]
            recorded.append((field.time, quadrant_probability(field)))
    except DomainExhaustedError as exc:
        truncated = exc.last_valid_time
        print(f"warning: run truncated at t={truncated:.6g}: {exc}", file=sys.stderr)

    curve = DisagreementCurve(tuple(t for t, _ in recorded),
                              tuple(q for _, q in recorded), "pde")
    write_curve_csv(curve, out / "curve_pde.csv")
    outputs.append("curve_pde.csv")

    report = {
        "grid": {"extent": grid.extent, "points": grid.points, "dt": grid.dt},
        "finalTime": field.time,
        "finalNorm": field.norm,
        "truncatedAt": truncated,
        "quadrantProbability": dict((repr(t), q) for t, q in recorded),
    }
    (out / "pde_report.json").write_text(json.dumps(report, indent=1) + "\n")
    outputs.append("pde_report.json")

    if not args.no_plot:
        from .plotting import save_curve_figure, save_density_figure

        save_density_figure(field, out / "density.png")
        save_curve_figure([curve], out / "curve_pde.png")
        outputs += ["density.png", "curve_pde.png"]

    _write_manifest(out, "pde", args, cfg.raw, cfg.seed, outputs)
    return 0


def cmd_verify(args) -> int:
    out = _prepare_out_dir(args)
    try:
        reports = run_suite(args.suite, args.samples, args.seed)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 2
    failures = sum(r["failures"] for r in reports)
    name = args.suite.replace("-", "_")
    (out / f"verify_{name}.json").write_text(json.dumps(reports, indent=1) + "\n")
    for r in reports:
        status = "ok" if r["failures"] == 0 else "FAIL"
        print(f"{r['proposition']}: samples={r['samples']} failures={r['failures']} "
              f"worstMargin={r['worstMargin']:.3e} [{status}]")
    _write_manifest(out, "verify", args, {"suite": args.suite, "samples": args.samples},
                    args.seed, [f"verify_{name}.json"])
    return 0 if failures == 0 else 1


def cmd_discriminate(args) -> int:
    cfg = load_config(args.config)
    out = _prepare_out_dir(args)
    disc = cfg.discrimination
    seed = args.seed if args.seed is not None else disc.seed
    src_a, src_b = disc.sources
    try:
        report, trial_sets, _ = discriminate(src_a, src_b, disc.waiting_times,
                                             disc.trials_per_run, seed)
    except CalibrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for c0, intensity in exc.trace:
            print(f"  bisection: c0={c0:.6g} intensity={intensity:.6g}", file=sys.stderr)
        return 1

    outputs = []
    write_trials_csv(trial_sets, out / "trials.csv")
    outputs.append("trials.csv")
    (out / "discrimination.json").write_text(json.dumps(report.to_dict(), indent=1) + "\n")
    outputs.append("discrimination.json")
    if not args.no_plot:
        from .plotting import save_discrimination_figure

        save_discrimination_figure(report, out / "discrimination.png")
        outputs.append("discrimination.png")
    for row in report.rows:
        print(f"T={row.waiting_time:g}: nuA={row.nu_a:.5f} nuB={row.nu_b:.5f} "
              f"diff={row.difference:+.5f} z={row.z:+.2f}")
    print(f"headline |z| = {report.headline_z:.2f}")
    _write_manifest(out, "discriminate", args, cfg.raw, seed, outputs)
    return 0


def cmd_export_model(args) -> int:
    out = _prepare_out_dir(args)
    rng = np.random.default_rng(args.seed)
    model = random_model(args.dim, rng, n_a=args.knobs_a, n_b=args.knobs_b)
    path = out / args.name
    write_model(model, path)
    _write_manifest(out, "export-model", args,
                    {"dim": args.dim, "knobsA": args.knobs_a, "knobsB": args.knobs_b},
                    args.seed, [args.name])
    print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teeterkit",
        description="Quantum models of teetering detectors: curves, solver "
                    "cross-checks, verification suites, source discrimination.",
    )
    parser.add_argument("--out-dir", default="teeterkit-out",
                        help="directory for outputs and the run manifest")
    parser.add_argument("--threads", type=int, default=0,
                        help="FFT worker threads (0 = all available)")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    curve = sub.add_parser("curve", help="disagreement-probability curves")
    curve.add_argument("--config", default=None)
    curve.add_argument("--classical", action="store_true",
                       help="also write the classical-limit curve")
    curve.add_argument("--pde", action="store_true",
                       help="also run the split-step solver over the same grid")
    curve.add_argument("--no-plot", action="store_true")
    curve.set_defaults(func=cmd_curve)

    pde = sub.add_parser("pde", help="split-step evolution with snapshots")
    pde.add_argument("--config", default=None)
    pde.add_argument("--times", default=None,
                     help="comma-separated sample times (default: curve grid)")
    pde.add_argument("--no-plot", action="store_true")
    pde.set_defaults(func=cmd_pde)

    verify = sub.add_parser("verify", help="randomized verification suites")
    verify.add_argument("suite", choices=SUITES + ("all",))
    verify.add_argument("--samples", type=int, default=200)
    verify.add_argument("--seed", type=int, default=1)
    verify.set_defaults(func=cmd_verify)

    disc = sub.add_parser("discriminate", help="two-source discrimination protocol")
    disc.add_argument("--config", default=None)
    disc.add_argument("--seed", type=int, default=None,
                      help="override the config seed")
    disc.add_argument("--no-plot", action="store_true")
    disc.set_defaults(func=cmd_discriminate)

    export = sub.add_parser("export-model", help="write a seeded random model as JSON")
    export.add_argument("--dim", type=int, default=3)
    export.add_argument("--seed", type=int, default=0)
    export.add_argument("--knobs-a", type=int, default=2)
    export.add_argument("--knobs-b", type=int, default=2)
    export.add_argument("--name", default="model.json")
    export.set_defaults(func=cmd_export_model)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads > 0:
        set_fft_workers(args.threads)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except TeeterkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
