"""Command-line pipeline: wind record -> spectrum -> damage -> prognosis.

Exit codes: 0 success, 2 input/validation error, 3 numerical non-convergence.
"""
import argparse
import io
import sys
import warnings

import numpy as np

from . import _csv
from .config import load_config
from .errors import InputError, NonConvergenceError
from .fatigue import (DamageParams, SNCurve, damage_trajectory, read_trajectory_csv,
                      write_trajectory_csv)
from .gproc import (ShapeBasis, calibrate_from_cov, calibrate_shape, estimate_mle,
                    estimate_mom, percent_label, prognosis, read_inspections_csv,
                    simulate_paths, write_prognosis_csv)
from .windload import (YEAR_SECONDS, WindConfig, build_spectrum, calibrate_transfer,
                       ingest_wind_csv, read_spectrum_csv, synthetic_wind, tile_schedule,
                       wind_pressure, write_spectrum_csv, write_wind_csv)

EXIT_INPUT = 2
EXIT_NUMERIC = 3


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _diag(msg):
    print(msg, file=sys.stderr)


def _sn_curve(cfg):
    return SNCurve(cfg.sn_a, cfg.sn_b, cfg.sn_m, cfg.sigma_ult)


def _damage_params(cfg):
    if cfg.damage_A is not None:
        return DamageParams(cfg.damage_A, cfg.damage_B, cfg.damage_p, cfg.damage_q)
    return DamageParams.from_b(cfg.damage_B, cfg.damage_p, cfg.damage_q)


def _model(trajectory, cfg):
    if cfg.u is not None:
        return calibrate_shape(trajectory, cfg.u, cfg.t_ref)
    return calibrate_from_cov(trajectory, cfg.cov_ref, cfg.t_ref)


def cmd_synth_wind(args, cfg):
    samples = synthetic_wind(cfg.wind_samples, cfg.wind_shape, cfg.wind_scale, cfg.seed)
    buf = io.StringIO()
    write_wind_csv(samples, buf)
    _emit(buf.getvalue(), args.out)
    _diag(f"wrote {len(samples)} synthetic 5-min samples")


def cmd_spectrum(args, cfg):
    samples = ingest_wind_csv(args.wind_csv)
    wind = WindConfig(cfg.rho, cfg.cp)
    v_max = max(s.speed for s in samples)
    v_ref = cfg.v_ref if cfg.v_ref is not None else v_max
    transfer = calibrate_transfer(v_ref, cfg.sigma_ref, wind)
    spectrum = build_spectrum(samples, transfer, wind, cfg.rotor_rpm, cfg.n_bins)
    annual = tile_schedule(spectrum, 1.0)[0]
    buf = io.StringIO()
    write_spectrum_csv(annual, buf)
    _emit(buf.getvalue(), args.out)
    _diag(f"k = {_csv.fmt(transfer.k)} MPa/Pa (v_ref = {_csv.fmt(v_ref)} m/s)")
    _diag(f"peak stress = {_csv.fmt(transfer.stress(wind_pressure(v_max, wind)))} MPa")
    _diag(f"record: {len(samples)} samples, {_csv.fmt(spectrum.duration / YEAR_SECONDS)} yr; "
          f"spectrum scaled to 1 yr, {len(annual.blocks)} blocks")


def cmd_damage(args, cfg):
    spectrum = read_spectrum_csv(args.spectrum_csv)
    schedule = tile_schedule(spectrum, cfg.horizon_years)
    traj = damage_trajectory(schedule, _sn_curve(cfg), _damage_params(cfg), cfg.steps_per_year)
    buf = io.StringIO()
    write_trajectory_csv(traj, buf)
    _emit(buf.getvalue(), args.out)
    if traj.failed:
        _diag(f"failure: mean damage reaches 1 at t = {_csv.fmt(traj.failure_time)} yr")
    else:
        _diag(f"final mean damage {_csv.fmt(traj.damage[-1])} at t = {_csv.fmt(traj.times[-1])} yr")


def cmd_prognosis(args, cfg):
    traj = read_trajectory_csv(args.trajectory_csv)
    model = _model(traj, cfg)
    result = prognosis(model, traj.times, cfg.d_cr_list)
    buf = io.StringIO()
    write_prognosis_csv(result, buf)
    _emit(buf.getvalue(), args.out)
    _diag(f"gamma process: c = {_csv.fmt(model.shape_scale)}, u = {_csv.fmt(model.rate)}, "
          f"t_ref = {_csv.fmt(model.t_ref)} yr")


def cmd_fit(args, cfg):
    records = read_inspections_csv(args.inspections_csv)
    traj = read_trajectory_csv(args.trajectory_csv)
    basis, _ = ShapeBasis.from_trajectory(traj, cfg.t_ref)
    times = np.array([r.time for r in records])
    damage = np.array([r.observed_damage for r in records])
    estimator = estimate_mle if args.method == "mle" else estimate_mom
    fit = estimator(times, damage, basis)
    lines = [f"method = {fit.method}", f"n_increments = {fit.n_increments}",
             f"mean_rate = {_csv.fmt(fit.mean_rate)}"]
    if fit.identifiable:
        lines += [f"c = {_csv.fmt(fit.c)}", f"u = {_csv.fmt(fit.u)}"]
        if fit.loglik is not None:
            lines.append(f"loglik = {_csv.fmt(fit.loglik)}")
        lines.append(f"cov_at_t_ref = {_csv.fmt(fit.cov_at(1.0))}")
        lines.append(f"t_ref = {_csv.fmt(basis.t_ref)}")
    else:
        lines.append("c = unidentifiable")
        lines.append("u = unidentifiable (a single increment fixes only c/u)")
    _emit("\n".join(lines) + "\n", args.out)


def cmd_simulate(args, cfg):
    traj = read_trajectory_csv(args.trajectory_csv)
    model = _model(traj, cfg)
    grid = traj.times
    sim = simulate_paths(model, grid, cfg.n_paths, cfg.seed, cfg.d_cr_list, workers=cfg.workers)
    analytic = prognosis(model, grid, cfg.d_cr_list)
    header = ["t_years", "damage_mean", "path_mean", "path_var"]
    cols = [grid, analytic.damage_mean, sim.mean, sim.variance]
    for j, d in enumerate(cfg.d_cr_list):
        label = percent_label(d)
        header += [f"emp_{label}", f"F_{label}"]
        cols += [sim.exceedance[:, j], analytic.failure[d]]
    buf = io.StringIO()
    _csv.write_table(buf, header, zip(*cols))
    _emit(buf.getvalue(), args.out)
    _diag(f"simulated {cfg.n_paths} paths (seed {cfg.seed}); u = {_csv.fmt(model.rate)}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bladeprog",
        description="Fatigue-damage prognosis for composite blades under wind loading.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--out", help="output file (default: stdout)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-wind", parents=[common], help="generate a Weibull wind record")
    p.set_defaults(func=cmd_synth_wind)

    p = sub.add_parser("spectrum", parents=[common], help="wind CSV -> annual load spectrum")
    p.add_argument("wind_csv")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("damage", parents=[common], help="spectrum -> mean damage trajectory")
    p.add_argument("spectrum_csv")
    p.set_defaults(func=cmd_damage)

    p = sub.add_parser("prognosis", parents=[common], help="trajectory -> failure probabilities")
    p.add_argument("trajectory_csv")
    p.set_defaults(func=cmd_prognosis)

    p = sub.add_parser("fit", parents=[common], help="estimate (c, u) from inspections")
    p.add_argument("inspections_csv")
    p.add_argument("trajectory_csv")
    p.add_argument("--method", choices=("mom", "mle"), default="mle")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo check of prognosis")
    p.add_argument("trajectory_csv")
    p.set_defaults(func=cmd_simulate)
    return parser


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def main(argv=None):
    args = build_parser().parse_args(argv)
    with warnings.catch_warnings():
        warnings.showwarning = _show_warning
        try:
            cfg = load_config(args.config)
            args.func(args, cfg)
        except InputError as exc:
            _diag(f"error: {exc}")
            return EXIT_INPUT
        except NonConvergenceError as exc:
            _diag(f"error: {exc}")
            return EXIT_NUMERIC
        except OSError as exc:
            _diag(f"error: {exc}")
            return EXIT_INPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())
