"""``simulate`` command: run orchestration and data emission."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from . import io as sio
from . import rydberg
from .bloch import solve_steady_state, steady_state_residual
from .config import ENV_OUTPUT_DIR, MODES, RunConfig, config_to_dict, load_config, parse_config
from .diffusion import completeness_audit, dump_rows
from .errors import ConfigError, SFWMError, ValidationError, ZeroDrive
from .observables import (correlation_g2, drive_sweep_rates, oscillation_frequency,
                          spectral_rates)
from .response import CHANNELS, coefficient_scan

STATUS = {0: "ok", 2: "validation-error", 3: "numerical-failure", 4: "no-emission"}


@dataclass
class RunResult:
    exit_code: int
    status: str
    out_dir: Path
    outputs: Dict[str, str] = field(default_factory=dict)
    manifest: dict = field(default_factory=dict)
    error: Optional[dict] = None


class _Run:
    """Mutable state shared by the mode handlers of one run."""

    def __init__(self, cfg: RunConfig, out_dir: Path):
        self.cfg = cfg
        self.out = out_dir
        self.outputs: Dict[str, str] = {}
        self.summary: dict = {}
        self.validity: dict = {}
        self.timings: Dict[str, float] = {}
        self.params = cfg.params

    def csv(self, name, header, rows):
        if self.cfg.emit.csv:
            self.outputs[name] = str(sio.write_csv(self.out / name, header, rows))

    def gnuplot(self, name, csv_name, xcol, ycols, xlabel, ylabel, logy=False):
        if self.cfg.emit.gnuplot:
            self.outputs[name] = str(sio.write_gnuplot(self.out / name, csv_name, xcol,
                                                       ycols, xlabel, ylabel, logy))

    def timed(self, label, fn):
        t0 = time.perf_counter()
        try:
            return fn()
        finally:
            self.timings[label] = time.perf_counter() - t0


# ---------------------------------------------------------------- modes
def _steady_state(run: _Run):
    p = run.params
    rho = solve_steady_state(p)
    run.csv("steady_state.csv",
            ["m_level", "n_level", "re_sigma_mn_dimensionless", "im_sigma_mn_dimensionless"],
            [(m, n, rho.s(m, n).real, rho.s(m, n).imag)
             for m in range(1, 6) for n in range(1, 6)])
    run.csv("diffusion_dump.csv",
            ["alpha", "beta", "re_oracle_gamma31", "im_oracle_gamma31",
             "table_value_gamma31", "oracle_value_gamma31", "abs_diff_gamma31"],
            dump_rows(p, rho))
    s55 = float(rho.s(5, 5).real)
    try:
        a = rydberg.assess(p, s55)
        ryd = dataclasses.asdict(a)
    except ZeroDrive:
        ryd = None
    run.summary["steady_state"] = dict(
        populations=rho.populations.tolist(),
        residual=float(np.max(np.abs(steady_state_residual(p, rho)))),
        hermiticity_error=float(rho.hermiticity_error()),
        rydberg=ryd,
        diffusion_unlisted_entries=[dict(alpha=x, beta=y, value=v)
                                    for x, y, v in completeness_audit(p, rho)],
    )
    run.validity["rydberg_meanfield"] = None if ryd is None else bool(ryd["valid"])


def _validity_curve(run: _Run):
    full = run.cfg.omega_d_grid.values()
    grid = full[full > 0]  # no blockade radius without the dressing drive
    if grid.size == 0:
        raise ValidationError("validity curve needs positive omega_d values", "grids.omega_d")
    rows = rydberg.boundary_density_curve(run.params, grid, workers=run.cfg.threads)
    run.csv("validity_curve.csv", ["omega_d_over_gamma31", "n_max_per_um3", "valid_ceiling_hit"],
            [(od, n / 1e12, hit) for od, n, hit in rows])
    run.gnuplot("validity_curve.gp", "validity_curve.csv", 1, [2],
                "Omega_d / gamma31", "N_max / um^-3", logy=True)
    n = np.array([r[1] for r in rows])
    run.summary["validity_curve"] = dict(strictly_decreasing=bool(np.all(np.diff(n) < 0)),
                                         ceiling_hits=int(sum(r[2] for r in rows)),
                                         skipped_nonpositive=int(full.size - grid.size))


def _coef_header(axis):
    h = [axis]
    for name in ("gamma_as", "g_raman", "kappa_s", "kappa_as"):
        h += [f"re_{name}_per_cm", f"im_{name}_per_cm", f"abs_{name}_per_cm"]
    h += [f"abs_xi_s_{c}_per_sqrt_cm" for c in CHANNELS]
    h += [f"abs_xi_as_{c}_per_sqrt_cm" for c in CHANNELS]
    return h + ["abs_denominator_gamma31_pow6", "valid"]


def _coef_row(x, r):
    if not r["ok"]:
        return [x] + [float("nan")] * 24 + [0.0, False]
    s = r["resp"]
    row = [x]
    for v in (s.gamma_as, s.g_raman, s.kappa_s, s.kappa_as):
        row += [v.real, v.imag, abs(v)]
    row += [abs(s.xi_s[c]) for c in CHANNELS] + [abs(s.xi_as[c]) for c in CHANNELS]
    return row + [r["det"], True]


def _coefficient_scan(run: _Run, axis: Optional[str] = None):
    cfg = run.cfg
    axis = axis or cfg.scan_axis
    if axis == "omega":
        rows = coefficient_scan(run.params, omega_grid=cfg.omega_grid.values(),
                                workers=cfg.threads)
        xs, col, name = [r["omega"] for r in rows], "omega_over_gamma31", "coefficients_vs_omega"
    else:
        rows = coefficient_scan(run.params, omega_d_grid=cfg.omega_d_grid.values(),
                                workers=cfg.threads)
        xs, col, name = [r["omega_d"] for r in rows], "omega_d_over_gamma31", \
            "coefficients_vs_omega_d"
    run.csv(f"{name}.csv", _coef_header(col), [_coef_row(x, r) for x, r in zip(xs, rows)])
    # columns 4, 7, 10, 13: |Gamma_as|, |g_R|, |kappa_s|, |kappa_as|
    run.gnuplot(f"{name}.gp", f"{name}.csv", 1, [4, 7, 10, 13], col.replace("_over_", " / "),
                "|coefficient| / cm^-1")
    ok = [r for r in rows if r["ok"]]
    info = dict(points=len(rows), flagged=len(rows) - len(ok))
    if ok:
        ks = np.array([abs(r["resp"].kappa_s) for r in ok])
        info["argmax_abs_kappa_s"] = float(xs[rows.index(ok[int(np.argmax(ks))])])
    run.summary[name] = info
    run.validity[f"{name}_all_points_valid"] = not info["flagged"]


def _drive_sweep(run: _Run):
    cfg = run.cfg
    rows = drive_sweep_rates(run.params, cfg.omega_d_grid.values(), cfg.omega_grid.values(),
                             cfg.nz, cfg.threads)
    run.csv("rates_vs_omega_d.csv",
            ["omega_d_over_gamma31", "rs_d_gamma31", "rs_f_gamma31", "ras_d_gamma31",
             "ras_f_gamma31", "occupancy_dimensionless", "rydberg_valid"],
            [(r["omega_d"], r["rs_d"], r["rs_f"], r["ras_d"], r["ras_f"], r["occupancy"],
              r["valid"]) for r in rows])
    run.gnuplot("rates_vs_omega_d.gp", "rates_vs_omega_d.csv", 1, [2, 3, 4, 5],
                "Omega_d / gamma31", "rate / gamma31", logy=True)
    run.summary["drive_sweep"] = dict(
        points=len(rows),
        rydberg_invalid_points=[r["omega_d"] for r in rows if not r["valid"]])
    run.validity["drive_sweep_rydberg_valid"] = all(r["valid"] for r in rows)


def _g2(run: _Run):
    cfg = run.cfg
    omega = cfg.omega_grid.values()
    tau_grid = None if cfg.tau_grid is None else cfg.tau_grid.values()
    spec_rows, g2_rows, info = [], [], []
    for od in cfg.g2_omega_d:
        p = run.params.replace(omega_d=float(od))
        sp = spectral_rates(p, omega, nz=cfg.nz, workers=cfg.threads)
        for k in range(omega.size):
            spec_rows.append((od, sp.omega[k], sp.rs_d[k], sp.rs_f[k], sp.ras_d[k],
                              sp.ras_f[k], sp.cross[k].real, sp.cross[k].imag, sp.mask[k]))
        res = correlation_g2(p, spectral=sp, tau_grid=tau_grid)
        tau, phi, g2 = res.tau, res.phi, res.g2
        if tau_grid is None:
            lo, hi = cfg.tau_window
            keep = (tau >= lo) & (tau <= hi)
        else:
            keep = np.ones(tau.shape, bool)
        for t, f, g in zip(tau[keep], phi[keep], g2[keep]):
            g2_rows.append((od, t, g, f.real, f.imag, abs(f) ** 2))
        entry = dict(omega_d=float(od), rs_gamma31=res.rs, ras_gamma31=res.ras,
                     g2_peak=float(np.max(g2)), tau_at_peak=float(tau[int(np.argmax(g2))]))
        try:
            fr, bw = oscillation_frequency(tau, np.abs(phi) ** 2)
            entry.update(oscillation_frequency_gamma31=fr, fft_bin_gamma31=bw)
        except ValueError:
            entry.update(oscillation_frequency_gamma31=None, fft_bin_gamma31=None)
        info.append(entry)
    run.csv("spectral_rates.csv",
            ["omega_d_over_gamma31", "omega_over_gamma31", "rs_d_density_dimensionless",
             "rs_f_density_dimensionless", "ras_d_density_dimensionless",
             "ras_f_density_dimensionless", "re_cross_density_dimensionless",
             "im_cross_density_dimensionless", "evaluated"], spec_rows)
    run.csv("g2_vs_tau.csv",
            ["omega_d_over_gamma31", "tau_times_gamma31", "g2_dimensionless",
             "re_phi_gamma31", "im_phi_gamma31", "abs_phi_sq_gamma31_sq"], g2_rows)
    run.gnuplot("g2_vs_tau.gp", "g2_vs_tau.csv", 2, [3], "tau gamma31", "g2")
    run.summary["g2"] = info


def _full_report(run: _Run):
    run.timed("steady-state", lambda: _steady_state(run))
    run.timed("validity-curve", lambda: _validity_curve(run))
    run.timed("coefficient-scan-omega", lambda: _coefficient_scan(run, "omega"))
    run.timed("coefficient-scan-omega_d", lambda: _coefficient_scan(run, "omega_d"))
    run.timed("drive-sweep", lambda: _drive_sweep(run))
    run.timed("g2", lambda: _g2(run))


HANDLERS = {
    "steady-state": _steady_state,
    "validity-curve": _validity_curve,
    "coefficient-scan": _coefficient_scan,
    "drive-sweep": _drive_sweep,
    "g2": _g2,
    "full-report": _full_report,
}


# ---------------------------------------------------------------- driver
def _error_payload(exc: BaseException, code: int) -> dict:
    return {"status": STATUS.get(code, "error"), "exit_code": code,
            "error": type(exc).__name__, "message": str(exc),
            "field": getattr(exc, "field", None)}


def run(cfg: RunConfig, out_dir=None) -> RunResult:
    """Execute ``cfg`` and write artifacts; never raises for pipeline errors."""
    out = Path(out_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    r = _Run(cfg, out)
    canon = config_to_dict(cfg)
    manifest = {
        "tool": "simulate", "version": __version__, "mode": cfg.mode, "preset": cfg.preset,
        "config": canon, "input_hash": sio.git_blob_hash(sio.canonical_json(canon)),
        "seed": cfg.seed, "threads": cfg.threads,
        "units": {"rate": "gamma31 (multiply by params.gamma31_hz for s^-1)",
                  "length": "cm", "density": "cm^-3", "coefficients": "cm^-1"},
    }
    t0 = time.perf_counter()
    code, err = 0, None
    try:
        if cfg.self_consistent_delta15:
            d15 = r.timed("self-consistent-delta15",
                          lambda: rydberg.self_consistent_delta15(cfg.params))
            r.params = cfg.params.replace(delta_15=d15)
            manifest["delta_15_self_consistent"] = d15
        if cfg.mode == "full-report":
            _full_report(r)
        else:
            r.timed(cfg.mode, lambda: HANDLERS[cfg.mode](r))
    except SFWMError as exc:
        code, err = exc.exit_code, _error_payload(exc, exc.exit_code)
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        code, err = 3, _error_payload(exc, 3)
    r.timings["total"] = time.perf_counter() - t0
    gp = r.params
    manifest.update(status=STATUS[code], exit_code=code, summary=r.summary,
                    validity=r.validity, timings=r.timings,
                    transit_time_s=gp.length / gp.light_speed,
                    outputs={Path(k).name: sio.file_sha256(v) for k, v in r.outputs.items()})
    if err is not None:
        manifest["error"] = err
        sio.write_json(out / "error.json", err)
    if cfg.emit.json or err is not None:
        sio.write_json(out / "manifest.json", manifest)
    return RunResult(code, STATUS[code], out, r.outputs, manifest, err)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="simulate",
                                 description="Rydberg-dressed SFWM photon-pair simulator")
    ap.add_argument("mode", choices=MODES)
    ap.add_argument("--config", help="TOML or JSON run configuration")
    ap.add_argument("--preset", help="figure recipe (figA, figB, figC, figD, figF_a, figF_b)")
    ap.add_argument("--out", help=f"output directory (default ${ENV_OUTPUT_DIR} or config)")
    ap.add_argument("--threads", type=int, help="worker threads for grid points")
    ap.add_argument("--omega-points", type=int, help="override the omega grid point count")
    ap.add_argument("--seed", type=int, help="recorded only; the pipeline is deterministic")
    return ap


def _emit_error(exc, code):
    print(json.dumps(_error_payload(exc, code), sort_keys=True))
    return code


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            cfg = load_config(args.config, args.mode, args.preset)
        elif args.preset:
            cfg = parse_config({}, args.mode, args.preset)
        else:
            raise ConfigError("give --config and/or --preset")
        over = {}
        if args.threads is not None:
            over["threads"] = args.threads
        if args.seed is not None:
            over["seed"] = args.seed
        if args.omega_points is not None:
            g = cfg.omega_grid
            over["omega_grid"] = type(g)(g.min, g.max, args.omega_points)
        cfg = dataclasses.replace(cfg, **over)
    except ConfigError as exc:
        return _emit_error(exc, exc.exit_code)
    res = run(cfg, args.out)
    if res.error is not None:
        print(json.dumps(res.error, sort_keys=True))
    else:
        print(json.dumps({"status": res.status, "exit_code": 0, "out_dir": str(res.out_dir),
                          "outputs": sorted(Path(v).name for v in res.outputs.values())},
                         sort_keys=True))
    return res.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
