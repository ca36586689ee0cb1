"""Configuration-driven sweep runner and validation reporter.

A single JSON document describes one experiment: the three channel
sections, the sweep grid, Monte-Carlo settings, and numeric knobs.  dB
values live only here at the boundary; everything internal is linear.

``sweep`` writes one CSV row per grid point with the fixed column order
(sweep_db, op_exact, op_asymp, op_quad, op_mc, op_mc_se, asr_exact,
asr_asymp, asr_quad, asr_mc, asr_mc_se, flags).  Failed cells stay empty
and are named in ``flags``; the run continues.  ``validate`` plays the
closed forms, the quadrature oracle, and the Monte-Carlo estimates
against each other over the same grid and reports pass/fail.

Exit codes: 0 success, 1 numeric failure or failed validation, 2
usage/config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channels import (
    POINTING_PRESETS,
    FsoCdfInterpolator,
    FsoLinkParams,
    InterferenceParams,
    RfLinkParams,
    SystemConfig,
    dgg_derive,
)
from . import metrics
from .mc import simulate_asr, simulate_outage

CSV_COLUMNS = ("sweep_db", "op_exact", "op_asymp", "op_quad", "op_mc",
               "op_mc_se", "asr_exact", "asr_asymp", "asr_quad", "asr_mc",
               "asr_mc_se", "flags")
METRIC_NAMES = ("op_exact", "op_asymp", "op_quad", "op_mc",
                "asr_exact", "asr_asymp", "asr_quad", "asr_mc")
SWEEP_VARIABLES = ("mu_r_db", "avg_snr_db", "both_locked")


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start_db: float
    stop_db: float
    points: int
    metrics: tuple
    mc_trials: int
    seed: int

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ConfigError(f"sweep.variable must be one of {SWEEP_VARIABLES}")
        if not self.start_db < self.stop_db:
            raise ConfigError("sweep.start_db must be below sweep.stop_db")
        if self.points < 2:
            raise ConfigError("sweep.points must be at least 2")
        if not self.metrics:
            raise ConfigError("sweep.metrics must name at least one metric")
        bad = [m for m in self.metrics if m not in METRIC_NAMES]
        if bad:
            raise ConfigError(f"unknown metrics {bad}; choose from {METRIC_NAMES}")

    def grid_db(self):
        return np.linspace(self.start_db, self.stop_db, self.points)


def _db_to_linear(db):
    return 10.0 ** (db / 10.0)


def _section(doc, key):
    if key not in doc:
        raise ConfigError(f"missing config section '{key}'")
    if not isinstance(doc[key], dict):
        raise ConfigError(f"config section '{key}' must be an object")
    return doc[key]


def _field(sec, name, kind, default=None):
    if name not in sec:
        if default is not None:
            return default
        raise ConfigError(f"missing config key '{name}'")
    v = sec[name]
    try:
        return kind(v)
    except (TypeError, ValueError):
        raise ConfigError(f"config key '{name}' has invalid value {v!r}")


@dataclass(frozen=True)
class Experiment:
    base: SystemConfig
    sweep: SweepSpec
    delta: float

    def at(self, sweep_db):
        """System configuration at one grid point."""
        val = _db_to_linear(sweep_db)
        rf, fso = self.base.rf, self.base.fso
        if self.sweep.variable in ("avg_snr_db", "both_locked"):
            rf = RfLinkParams(m=rf.m, avg_snr=val, n_users=rf.n_users)
        if self.sweep.variable in ("mu_r_db", "both_locked"):
            fso = FsoLinkParams(alpha1=fso.alpha1, alpha2=fso.alpha2,
                                beta1=fso.beta1, beta2=fso.beta2,
                                omega1=fso.omega1, omega2=fso.omega2,
                                xi=fso.xi, mu_r=val, r=fso.r)
        return SystemConfig(rf=rf, fso=fso, interference=self.base.interference,
                            gamma_th=self.base.gamma_th)


def load_experiment(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as ex:
        raise ConfigError(f"cannot read config: {ex}")
    except json.JSONDecodeError as ex:
        raise ConfigError(f"config is not valid JSON: {ex}")

    rf_sec = _section(doc, "rf")
    rf = RfLinkParams(m=_field(rf_sec, "m", int),
                      avg_snr=_db_to_linear(_field(rf_sec, "avg_snr_db", float)),
                      n_users=_field(rf_sec, "n_users", int, 1))

    fso_sec = _section(doc, "fso")
    if "xi" in fso_sec:
        xi = _field(fso_sec, "xi", float)
    elif "pointing" in fso_sec:
        preset = fso_sec["pointing"]
        if preset not in POINTING_PRESETS:
            raise ConfigError(f"fso.pointing must be one of "
                              f"{sorted(POINTING_PRESETS)}")
        xi = POINTING_PRESETS[preset]
    else:
        raise ConfigError("missing config key 'xi' (or 'pointing') in fso")
    fso = FsoLinkParams(alpha1=_field(fso_sec, "alpha1", float),
                        alpha2=_field(fso_sec, "alpha2", float),
                        beta1=_field(fso_sec, "beta1", float),
                        beta2=_field(fso_sec, "beta2", float),
                        omega1=_field(fso_sec, "omega1", float),
                        omega2=_field(fso_sec, "omega2", float),
                        xi=xi,
                        mu_r=_db_to_linear(_field(fso_sec, "mu_r_db", float)),
                        r=_field(fso_sec, "r", int, 1))

    int_sec = _section(doc, "interference")
    intf = InterferenceParams(m_i=_field(int_sec, "m_i", float),
                              omega_i=_db_to_linear(_field(int_sec, "omega_i_db", float)),
                              n_interferers=_field(int_sec, "n_interferers", int, 1))

    if "gamma_th_db" not in doc:
        raise ConfigError("missing config key 'gamma_th_db'")
    gamma_th = _db_to_linear(float(doc["gamma_th_db"]))

    sweep_sec = _section(doc, "sweep")
    mc_sec = doc.get("mc", {})
    if not isinstance(mc_sec, dict):
        raise ConfigError("config section 'mc' must be an object")
    sweep = SweepSpec(variable=_field(sweep_sec, "variable", str),
                      start_db=_field(sweep_sec, "start_db", float),
                      stop_db=_field(sweep_sec, "stop_db", float),
                      points=_field(sweep_sec, "points", int),
                      metrics=tuple(sweep_sec.get("metrics", ())),
                      mc_trials=_field(mc_sec, "trials", int, 100_000),
                      seed=_field(mc_sec, "seed", int, 12345))

    num_sec = doc.get("numerics", {})
    if not isinstance(num_sec, dict):
        raise ConfigError("config section 'numerics' must be an object")
    delta = _field(num_sec, "delta", float, 1.0)

    try:
        base = SystemConfig(rf=rf, fso=fso, interference=intf, gamma_th=gamma_th)
    except ValueError as ex:
        raise ConfigError(str(ex))
    return Experiment(base=base, sweep=sweep, delta=delta)


def _mc_seed(seed, idx):
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(idx,))
    return int(ss.generate_state(1, np.uint64)[0])


def _fmt(v):
    if v is None:
        return ""
    return "%.12g" % v


def _evaluate_point(exp, idx, sweep_db, derived, interp, wanted, threads):
    """All requested metrics at one grid point; returns (cells, failed)."""
    cfg = exp.at(sweep_db)
    cells = {name: None for name in CSV_COLUMNS[1:-1]}
    flags = []
    failed = False

    def run(name, fn):
        nonlocal failed
        try:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                value = fn()
            for w in caught:
                if issubclass(w.category, metrics.NumericalNoiseWarning):
                    flags.append(f"{name}_clamped")
            if isinstance(value, float) and not math.isfinite(value):
                flags.append(f"{name}_nonfinite")
                failed = True
                return None
            return value
        except Exception as ex:
            flags.append(f"{name}_failed:{type(ex).__name__}")
            failed = True
            return None

    dd = derived
    if "op_exact" in wanted:
        cells["op_exact"] = run("op_exact", lambda: metrics.outage_exact(cfg, derived=dd))
    if "op_asymp" in wanted:
        # the expansion exceeds 1 below its regime; saturate for emission
        v = run("op_asymp", lambda: metrics.outage_asymptotic(cfg, derived=dd))
        if v is not None:
            clamped = min(max(v, 0.0), 1.0)
            if clamped != v:
                flags.append("op_asymp_clamped")
            cells["op_asymp"] = clamped
    if "op_quad" in wanted:
        cells["op_quad"] = run("op_quad", lambda: metrics.outage_quadrature(
            cfg, derived=dd, interp=interp))
    if "op_mc" in wanted:
        est = run("op_mc", lambda: simulate_outage(
            cfg, exp.sweep.mc_trials, _mc_seed(exp.sweep.seed, idx),
            workers=threads))
        if est is not None:
            cells["op_mc"], cells["op_mc_se"] = est.mean, est.std_error
            if est.mean * est.n_samples < 100.0:
                flags.append("op_mc_low_hits")
    if "asr_exact" in wanted:
        cells["asr_exact"] = run("asr_exact", lambda: metrics.asr_exact(
            cfg, delta=exp.delta, derived=dd))
    if "asr_asymp" in wanted:
        v = run("asr_asymp", lambda: metrics.asr_asymptotic(
            cfg, delta=exp.delta, derived=dd))
        if v is not None:
            clamped = max(v, 0.0)
            if clamped != v:
                flags.append("asr_asymp_clamped")
            cells["asr_asymp"] = clamped
    if "asr_quad" in wanted:
        cells["asr_quad"] = run("asr_quad", lambda: metrics.asr_quadrature(
            cfg, derived=dd, interp=interp))
    if "asr_mc" in wanted:
        est = run("asr_mc", lambda: simulate_asr(
            cfg, exp.sweep.mc_trials, _mc_seed(exp.sweep.seed, idx),
            workers=threads))
        if est is not None:
            cells["asr_mc"], cells["asr_mc_se"] = est.mean, est.std_error
    return cells, flags, failed


def run_sweep(exp, out_stream, threads=1):
    """Evaluate the grid and write CSV rows in grid order; returns exit code."""
    derived = dgg_derive(exp.base.fso)
    wanted = set(exp.sweep.metrics)
    needs_interp = wanted & {"op_quad", "asr_quad"}
    interp = FsoCdfInterpolator(exp.base.fso, derived=derived) if needs_interp else None

    grid = exp.sweep.grid_db()

    def work(idx):
        return _evaluate_point(exp, idx, grid[idx], derived, interp, wanted, 1)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, range(len(grid))))
    else:
        results = [work(i) for i in range(len(grid))]

    writer = csv.writer(out_stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    any_failed = False
    for idx, (cells, flags, failed) in enumerate(results):
        any_failed |= failed
        row = [_fmt(grid[idx])]
        row += [_fmt(cells[name]) for name in CSV_COLUMNS[1:-1]]
        row.append(";".join(flags))
        writer.writerow(row)
    return 1 if any_failed else 0


def run_validate(exp, out_stream, threads=1):
    """Cross-route comparison over the grid; returns exit code."""
    derived = dgg_derive(exp.base.fso)
    interp = FsoCdfInterpolator(exp.base.fso, derived=derived)
    grid = exp.sweep.grid_db()

    checks = []

    def check(label, value, tol, detail=""):
        ok = value <= tol
        checks.append(ok)
        state = "PASS" if ok else "FAIL"
        print(f"  {state}  {label}: {value:.3e} (tolerance {tol:g}) {detail}",
              file=out_stream)

    op_rel = 0.0
    op_rel_at = None
    op_dev = 0.0
    asr_abs = 0.0
    asr_dev = 0.0
    for idx, sweep_db in enumerate(grid):
        cfg = exp.at(sweep_db)
        oq = metrics.outage_quadrature(cfg, derived=derived, interp=interp)
        oe = metrics.outage_exact(cfg, derived=derived)
        if oq >= 1e-6:
            rel = abs(oe - oq) / oq
            if rel > op_rel:
                op_rel, op_rel_at = rel, sweep_db
        aq = metrics.asr_quadrature(cfg, derived=derived, interp=interp)
        ae = metrics.asr_exact(cfg, delta=exp.delta, derived=derived)
        asr_abs = max(asr_abs, abs(ae - aq))
        seed = _mc_seed(exp.sweep.seed, idx)
        op_est = simulate_outage(cfg, exp.sweep.mc_trials, seed, workers=threads)
        if op_est.std_error > 0:
            op_dev = max(op_dev, abs(oe - op_est.mean) / op_est.std_error)
        asr_est = simulate_asr(cfg, exp.sweep.mc_trials, seed, workers=threads)
        if asr_est.std_error > 0:
            asr_dev = max(asr_dev, abs(ae - asr_est.mean) / asr_est.std_error)

    print(f"validation over {len(grid)} points "
          f"({exp.sweep.variable} from {grid[0]:g} to {grid[-1]:g} dB):",
          file=out_stream)
    at = f"at {op_rel_at:g} dB" if op_rel_at is not None else "(all OP < 1e-6)"
    check("outage |exact-quad|/quad", op_rel, 1e-4, at)
    check("outage |exact-mc| in std errors", op_dev, 3.0,
          f"at {exp.sweep.mc_trials} trials")
    check("rate |exact-quad| bits/s/Hz", asr_abs, 1e-3)
    check("rate |exact-mc| in std errors", asr_dev, 3.0,
          f"at {exp.sweep.mc_trials} trials")

    print("resolutions in force:", file=out_stream)
    for line in metrics.RESOLUTIONS:
        print(f"  - {line}", file=out_stream)
    verdict = "PASS" if all(checks) else "FAIL"
    print(verdict, file=out_stream)
    return 0 if all(checks) else 1


def _thread_count(args):
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("RFSO_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"RFSO_THREADS must be an integer, got {env!r}")
    return 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="rfso",
        description="Outage and sum-rate sweeps for the relayed RF/optical link")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="evaluate metrics over the SNR grid")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--out", help="CSV output path (default: stdout)")
    p_sweep.add_argument("--seed", type=int, help="override the Monte-Carlo seed")
    p_sweep.add_argument("--threads", type=int, help="parallel grid evaluation")

    p_val = sub.add_parser("validate", help="cross-route agreement report")
    p_val.add_argument("config")
    p_val.add_argument("--threads", type=int, help="parallel Monte-Carlo blocks")

    args = parser.parse_args(argv)

    try:
        exp = load_experiment(args.config)
        threads = _thread_count(args)
        if args.command == "sweep":
            if args.seed is not None:
                sw = exp.sweep
                exp = Experiment(base=exp.base, delta=exp.delta,
                                 sweep=SweepSpec(variable=sw.variable,
                                                 start_db=sw.start_db,
                                                 stop_db=sw.stop_db,
                                                 points=sw.points,
                                                 metrics=sw.metrics,
                                                 mc_trials=sw.mc_trials,
                                                 seed=args.seed))
            if args.out:
                buf = io.StringIO()
                code = run_sweep(exp, buf, threads=threads)
                with open(args.out, "w", newline="") as fh:
                    fh.write(buf.getvalue())
                print(f"wrote {exp.sweep.points} rows to {args.out}",
                      file=sys.stderr)
            else:
                code = run_sweep(exp, sys.stdout, threads=threads)
            return code
        return run_validate(exp, sys.stdout, threads=threads)
    except ConfigError as ex:
        print(f"config error: {ex}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
