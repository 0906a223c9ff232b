"""Acceptance criteria, one test each, run at their stated tolerances.

Every test prints a single ``criterion N: PASS|FAIL`` line with the measured
quantities; the lines are also collected into the terminal summary.
"""

import time

import numpy as np

from sfwm import cli
from sfwm.bloch import DensityMatrix, build_drift_matrix, integrate_bloch, solve_steady_state
from sfwm.config import PRESETS, Grid, parse_config, preset_params
from sfwm.diffusion import completeness_audit, diffusion_matrix, table_discrepancies
from sfwm.errors import ZeroRateNormalization
from sfwm.observables import (correlation_g2, drive_sweep_rates, oscillation_frequency,
                              spectral_rates, total_rates)
from sfwm.propagation import boundary_matrix, noise_kernels, solve_transfer, transfer_matrix
from sfwm.response import CHANNELS, coefficient_scan, first_order_oracle, propagation_coefficients
from sfwm.rydberg import blockade_radius, boundary_density_curve, occupancy

from conftest import ACCEPTANCE_LINES, random_params
from test_propagation import ode, random_response

WORKERS = 4


def report(n, title, checks, elapsed, budget):
    """checks: list of (label, ok, detail)."""
    checks = list(checks) + [(f"runtime < {budget:g} s", elapsed < budget, f"{elapsed:.2f} s")]
    ok = all(c[1] for c in checks)
    parts = "; ".join(f"{lab} {'ok' if good else 'FAILED'} ({det})" for lab, good, det in checks)
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} [{title}] {parts}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def fig3():
    return preset_params("figB")


def test_criterion_01_steady_state_oracle(rng):
    t0 = time.perf_counter()
    cases = [random_params(rng) for _ in range(20)] + [preset_params(n) for n in PRESETS]
    worst = 0.0
    for p in cases:
        rates = -np.linalg.eigvals(build_drift_matrix(p)).real
        slowest = np.min(rates[rates > 1e-9])
        b = integrate_bloch(p, DensityMatrix.pure(1), 60.0 / slowest)
        worst = max(worst, float(np.max(np.abs(solve_steady_state(p).rho - b.rho))))
    report(1, "steady state vs time integration",
           [(f"{len(cases)} cases componentwise <= 1e-8", worst <= 1e-8, f"max {worst:.2e}")],
           time.perf_counter() - t0, 5)


def test_criterion_02_closed_forms(rng):
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        p = random_params(rng)
        rho = solve_steady_state(p)
        w = rng.uniform(-6, 6)
        r = propagation_coefficients(p, rho, w)
        o = first_order_oracle(p, rho, w)
        for k in ("gamma_as", "g_raman", "kappa_s", "kappa_as"):
            ref = o[k]
            err = abs(getattr(r, k) - ref) / abs(ref) if ref != 0 else abs(getattr(r, k))
            worst = max(worst, err)
    report(2, "closed-form coefficients vs first-order oracle",
           [("200 draws relative <= 1e-8", worst <= 1e-8, f"max {worst:.2e}")],
           time.perf_counter() - t0, 10)


def test_criterion_03_diffusion_table(rng):
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        p = random_params(rng)
        worst = max(worst, max(table_discrepancies(p, solve_steady_state(p)).values()))
    p = fig3()
    extra = completeness_audit(p, solve_steady_state(p))
    listed = ", ".join(f"D[{a},{b}]={v:.3e}" for a, b, v in extra)
    report(3, "diffusion table vs Einstein oracle",
           [("50 draws absolute <= 1e-10", worst <= 1e-10, f"max {worst:.2e}"),
            ("audit lists unprinted nonzero entries", len(extra) > 0, listed)],
           time.perf_counter() - t0, 5)


def test_criterion_04_bvp(rng):
    t0 = time.perf_counter()
    L = 0.01
    e_bc, e_kern = 0.0, 0.0
    for _ in range(10):
        r = random_response(rng, rng.uniform(0.1, 10) / L)
        M = r.coefficient_matrix()
        T = transfer_matrix(r, L)
        abcd = boundary_matrix(T)
        s0, aL = rng.normal(size=2) + 1j * rng.normal(size=2)
        ya, yb = ode(M, 0, L, [s0, 0.0]), ode(M, 0, L, [s0, 1.0])
        u = (aL - ya[1]) / (yb[1] - ya[1])
        yL = ode(M, 0, L, [s0, u])
        out = abcd @ np.array([s0, aL])
        scale = max(1.0, *np.abs(out))
        e_bc = max(e_bc, abs(out[0] - yL[0]) / scale, abs(out[1] - u) / scale)
        z0 = rng.uniform(0, L)
        P, Q = noise_kernels(r, T, L, np.array([z0]))
        xi = r.xi_matrix()
        scale = max(1.0, np.max(np.abs(P)), np.max(np.abs(Q)))
        for k in range(len(CHANNELS)):
            def shoot(v):
                return ode(M, z0, L, ode(M, 0, z0, [0.0, v]) + xi[:, k])
            ya, yb = shoot(0.0), shoot(1.0)
            v = -ya[1] / (yb[1] - ya[1])
            e_kern = max(e_kern, abs(shoot(v)[0] - P[0, k]) / scale, abs(v - Q[0, k]) / scale)
    report(4, "boundary map and noise kernels vs ODE oracles",
           [("ABCD vs shooting <= 1e-9", e_bc <= 1e-9, f"max {e_bc:.2e}"),
            ("kernels vs delta source <= 1e-8", e_kern <= 1e-8, f"max {e_kern:.2e}")],
           time.perf_counter() - t0, 5)


def test_criterion_05_coefficient_resonance():
    t0 = time.perf_counter()
    p = fig3()
    grid = np.arange(0.0, 40.0 + 1e-9, 0.25)
    rows = coefficient_scan(p, omega_d_grid=grid, workers=WORKERS)
    ks = np.array([abs(r["resp"].kappa_s) for r in rows])
    arg = float(grid[int(np.argmax(ks))])
    low = grid <= 17.0
    mono = bool(np.all(np.diff(ks[low]) > 0))
    r0 = propagation_coefficients(p, solve_steady_state(p), 0.0)
    gap = abs(abs(r0.kappa_s) - abs(r0.kappa_as)) / abs(r0.kappa_s)
    report(5, "|kappa_s(0)| against Omega_d",
           [("argmax in [23.5, 24.5]", 23.5 <= arg <= 24.5, f"argmax {arg:g}"),
            ("increasing on [0, 17]", mono, f"{int(low.sum())} points"),
            ("|kappa_s| = |kappa_as| to 1e-10", gap <= 1e-10,
             f"{abs(r0.kappa_s):.6f} vs {abs(r0.kappa_as):.6f}, rel {gap:.2e}")],
           time.perf_counter() - t0, 10)


def test_criterion_06_density_scaling(rng):
    t0 = time.perf_counter()
    worst = 0.0
    for p in (fig3(), random_params(rng), random_params(rng)):
        rho = solve_steady_state(p)
        for w in (-1.0, 0.0, 0.7):
            a = propagation_coefficients(p, rho, w)
            b = propagation_coefficients(p.replace(density=2 * p.density), rho, w)
            for k in ("gamma_as", "g_raman", "kappa_s", "kappa_as"):
                ref = 2 * getattr(a, k)
                worst = max(worst, abs(getattr(b, k) - ref) / abs(ref))
            for c in CHANNELS:
                for x, y in ((a.xi_s[c], b.xi_s[c]), (a.xi_as[c], b.xi_as[c])):
                    worst = max(worst, abs(y - np.sqrt(2) * x) / abs(np.sqrt(2) * x))
    report(6, "density doubling",
           [("coefficients x2 and xi x sqrt2 to 1e-12", worst <= 1e-12, f"max {worst:.2e}")],
           time.perf_counter() - t0, 1)


def test_criterion_07_boundary_density_curve():
    t0 = time.perf_counter()
    p = preset_params("figA")
    grid = Grid(1.0, 17.0, 65).values()
    rows = boundary_density_curve(p, grid, workers=WORKERS)
    n = np.array([r[1] for r in rows])
    res = 0.0
    for od, nmax, _ in rows:
        q = p.replace(omega_d=od)
        s55 = float(solve_steady_state(q).s(5, 5).real)
        res = max(res, abs(occupancy(q, s55, blockade_radius(q), nmax) - 1))
    rising = np.flatnonzero(np.diff(n) >= 0)
    where = ", ".join(f"{grid[i]:g}->{grid[i + 1]:g}" for i in rising)
    report(7, "boundary density against Omega_d on [1, 17]",
           [("strictly decreasing", rising.size == 0,
             f"non-decreasing steps {where or 'none'}; N_max {n[0] / 1e12:.3f} at 1, "
             f"peak {n.max() / 1e12:.3f} at {grid[int(np.argmax(n))]:g} um^-3"),
            ("occupancy residual <= 1e-8", res <= 1e-8, f"max {res:.2e}")],
           time.perf_counter() - t0, 5)


def test_criterion_08_drive_suite():
    t0 = time.perf_counter()
    p = preset_params("figD")
    rows = drive_sweep_rates(p, np.arange(0.0, 17.5, 1.0), workers=WORKERS)
    rs = np.array([r["rs_d"] for r in rows])
    ras = np.array([r["ras_d"] for r in rows])
    inc = bool(np.all(np.diff(rs) > 0) and np.all(np.diff(ras) > 0))
    peaks, osc = [], []
    for od in (0.0, 12.0, 17.0):
        res = correlation_g2(p.replace(omega_d=od), workers=WORKERS)
        peaks.append(float(res.g2.max()))
        osc.append(oscillation_frequency(res.tau, np.abs(res.phi) ** 2))
    order = peaks[0] > peaks[1] > peaks[2]
    omega_c = abs(p.omega_c)
    near = all(abs(f - omega_c) <= bw for f, bw in osc)
    report(8, "rates and g2 against Omega_d",
           [("(a) R_s^D and R_as^D increasing", inc,
             f"R_s^D {rs[0]:.4g}->{rs[-1]:.4g}, R_as^D {ras[0]:.4g}->{ras[-1]:.4g}"),
            ("(b) g2 peak ordering 0 > 12 > 17", order,
             ", ".join(f"{x:.3f}" for x in peaks)),
            ("(c) oscillation within one bin of Omega_c = 3", near,
             ", ".join(f"{f:.3f}+-{bw:.3f}" for f, bw in osc))],
           time.perf_counter() - t0, 60)


def test_criterion_09_dephasing_suite():
    t0 = time.perf_counter()
    p = preset_params("figD")
    grid = np.arange(0.0, 17.5, 1.0)
    slow = drive_sweep_rates(p, grid, workers=WORKERS)
    fast = drive_sweep_rates(p.replace(gamma21=0.1), grid, workers=WORKERS)
    ratio_slow = np.array([r["rs_f"] / r["ras_f"] for r in slow])
    ratio_fast = np.array([r["rs_f"] / r["ras_f"] for r in fast])
    sel = grid <= 12.0
    in_band = bool(np.all((ratio_slow[sel] >= 0.95) & (ratio_slow[sel] <= 1.05)))
    leaves = bool(np.any((ratio_fast < 0.8) | (ratio_fast > 1.25)))
    f_over_d = [min(r["rs_f"] / r["rs_d"], r["ras_f"] / r["ras_d"]) for r in slow]
    report(9, "dephasing and correlated versus uncorrelated rates",
           [("gamma21 = 1e-3 ratio in [0.95, 1.05] for Omega_d <= 12", in_band,
             f"{ratio_slow[sel].min():.4f}..{ratio_slow[sel].max():.4f}"),
            ("gamma21 = 0.1 ratio leaves [0.8, 1.25]", leaves,
             f"{ratio_fast.min():.4f}..{ratio_fast.max():.4f}"),
            ("R^F > R^D across the sweep", min(f_over_d) > 1, f"min R^F/R^D {min(f_over_d):.3f}")],
           time.perf_counter() - t0, 60)


def test_criterion_10_pump_off(tmp_path):
    t0 = time.perf_counter()
    p = fig3().replace(omega_p=0.0)
    rho = solve_steady_state(p)
    pure = bool(np.array_equal(rho.rho, DensityMatrix.pure(1).rho))
    nonzero = []
    for w in (0.0, 1.0, -2.5):
        r = propagation_coefficients(p, rho, w)
        nonzero += [f"{k}({w:g})={complex(getattr(r, k)):.3g}"
                    for k in ("gamma_as", "g_raman", "kappa_s", "kappa_as")
                    if getattr(r, k) != 0]
    sp = spectral_rates(p, np.linspace(-32, 32, 257))
    tot = total_rates(sp, check_edges=False)
    zero_rates = tot.rs == 0 and tot.ras == 0
    try:
        correlation_g2(p, spectral=sp, check_edges=False)
        raised = False
    except ZeroRateNormalization:
        raised = True
    cfg = parse_config({"params": {"omega_p": 0.0}, "g2": {"omega_d_values": [1.2]},
                        "grids": {"omega": {"min": -32.0, "max": 32.0, "count": 257}}}, "g2")
    code = cli.run(cfg, tmp_path).exit_code
    report(10, "pump off",
           [("steady state is |1><1| exactly", pure, "ok" if pure else "differs"),
            ("all coefficients 0", not nonzero, ", ".join(nonzero) or "all zero"),
            ("zero rates", zero_rates, f"R_s {tot.rs:g}, R_as {tot.ras:g}"),
            ("g2 exits with no-emission status 4", raised and code == 4, f"exit {code}")],
           time.perf_counter() - t0, 1)


def test_criterion_11_numerical_hygiene(tmp_path):
    t0 = time.perf_counter()
    p = fig3()
    rho = solve_steady_state(p)
    worst_w = 0.0
    for od in (1.2, 17.0):
        q = p.replace(omega_d=od)
        r0 = solve_steady_state(q)
        a = total_rates(spectral_rates(q, Grid(-256, 256, 32768).values(), r0, workers=WORKERS))
        b = total_rates(spectral_rates(q, Grid(-256, 256, 65536).values(), r0, workers=WORKERS))
        for k in ("rs_d", "rs_f", "ras_d", "ras_f"):
            worst_w = max(worst_w, abs(getattr(a, k) - getattr(b, k)) / abs(getattr(b, k)))
    D = diffusion_matrix(p, rho)
    Dst, Das = D.stokes_block(), D.antistokes_block()
    worst_z = 0.0
    for w in np.linspace(-6, 6, 13):
        r = propagation_coefficients(p, rho, w)
        vals = []
        for nz in (32, 64):
            s = solve_transfer(r, p.length, nz)
            fs = np.einsum("z,za,ab,zb->", s.weights, s.P.conj(), Dst, s.P).real
            fa = np.einsum("z,za,ab,zb->", s.weights, s.Q, Das, s.Q.conj()).real
            vals.append((fs, fa))
        for x, y in zip(*vals):
            worst_z = max(worst_z, abs(x - y) / abs(y))
    raw = {"grids": {"omega": {"min": -4.0, "max": 4.0, "count": 129},
                     "omega_d": {"min": 0.0, "max": 17.0, "count": 18}},
           "options": {"scan_axis": "omega"}}
    same = True
    for mode, files in (("coefficient-scan", ["coefficients_vs_omega.csv"]),
                        ("steady-state", ["steady_state.csv", "diffusion_dump.csv"])):
        cfg = parse_config(raw, mode)
        ra, rb = cli.run(cfg, tmp_path / "a"), cli.run(cfg, tmp_path / "b")
        same &= ra.exit_code == 0 and rb.exit_code == 0
        same &= all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
                    for f in files)
    report(11, "numerical hygiene",
           [("omega grid doubling <= 0.1%", worst_w <= 1e-3, f"max {worst_w:.2e}"),
            ("N_z doubling <= 1e-8", worst_z <= 1e-8, f"max {worst_z:.2e}"),
            ("identical configs give identical CSV bytes", bool(same), "3 files")],
           time.perf_counter() - t0, 60)
