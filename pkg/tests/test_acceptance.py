"""Acceptance gate: one test per criterion, one pass/fail line each.

Every criterion prints `[criterion NN] PASS|FAIL <name>: <detail>` so the
suite output doubles as an acceptance report.  Tolerances are pinned here
and nowhere else.
"""

import math
import time

import numpy as np
import pytest

from nucleongs.analysis import (cutoff_singular_ratio, cutoff_xi, cutoff_zeta,
                                lower_coupling_bound, test_function_cosbump as cosbump,
                                threshold_bisect, unbounded_family,
                                upper_test_constants)
from nucleongs.energy import (Coupling, dilate, energy, energy_signed,
                              gradient, kinetic_term, kinetic_term_scaled,
                              quartic_term)
from nucleongs.grids import RadialField, RadialGrid, l2_mass
from nucleongs.minimize import MinimizeOptions, minimize, minimize_mass
from nucleongs.shooting import find_ground_state


def report(num, name, ok, detail):
    print(f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'} {name}: {detail}")
    assert ok, f"criterion {num} ({name}): {detail}"


def test_criterion_01_constants():
    two_s2 = lower_coupling_bound()
    closed = 3.0 * math.pi ** (4.0 / 3.0) / 2.0 ** (1.0 / 3.0)
    abar = upper_test_constants()[3]
    ok = (abs(two_s2 - closed) / closed < 1e-12
          and abs(two_s2 - 10.96) <= 0.005
          and abs(abar - 48.06) <= 0.01)
    report(1, "constants", ok, f"2/S^2={two_s2:.12g} abar={abar:.12g}")


def test_criterion_02_closed_form_quadrature():
    r_norm, kin_exact, quart_exact, _ = upper_test_constants()
    grid = RadialGrid(r_norm * math.pi / 2.0, 4096)
    bump = cosbump(grid)
    kin = kinetic_term(bump)
    quart = quartic_term(bump)
    ek = abs(kin - kin_exact) / kin_exact
    eq = abs(quart - quart_exact) / quart_exact
    ok = ek < 1e-4 and eq < 1e-6
    report(2, "closed-form quadrature", ok,
           f"kinetic rel err {ek:.3g} (<1e-4), quartic rel err {eq:.3g} (<1e-6)")


def test_criterion_03_negative_energy_regime():
    t0 = time.time()
    res = minimize(Coupling(50.0), RadialGrid(12.0, 2048))
    elapsed = time.time() - t0
    mass = l2_mass(res.field)
    ok = (res.converged and res.energy.total < 0 and res.energy.total >= -25.0
          and res.field.max_abs <= 1.0 and abs(mass - 1.0) <= 1e-10
          and res.residual <= 1e-6 and elapsed < 30.0)
    report(3, "negative-energy regime", ok,
           f"E={res.energy.total:.8g} residual={res.residual:.3g} "
           f"mass-1={mass - 1:.3g} max|u|={res.field.max_abs:.6g} "
           f"{elapsed:.1f}s")


def test_criterion_04_zero_regime():
    t0 = time.time()
    res = minimize(Coupling(5.0), RadialGrid(40.0, 1024))
    elapsed = time.time() - t0
    ok = res.i_estimate >= -1e-3 and elapsed < 30.0
    report(4, "zero regime", ok,
           f"I-estimate={res.i_estimate:.6g} regime={res.regime} {elapsed:.1f}s")


def test_criterion_05_threshold_bisection():
    t0 = time.time()
    lo_bound = lower_coupling_bound()
    hi_bound = upper_test_constants()[3]
    est = {}
    for n in (512, 1024):
        est[n] = threshold_bisect(RadialGrid(30.0, n),
                                  tol_a=0.05).a0_upper_estimate
    elapsed = time.time() - t0
    ok = (all(lo_bound < e < hi_bound for e in est.values())
          and abs(est[512] - est[1024]) <= 0.5 and elapsed < 600.0)
    report(5, "threshold", ok,
           f"a0 upper estimate {est[512]:.4f} (n=512) vs {est[1024]:.4f} "
           f"(n=1024), bounds ({lo_bound:.4g}, {hi_bound:.4g}), {elapsed:.0f}s")


def test_criterion_06_shooting():
    t0 = time.time()
    c = Coupling(8.0, 1.0)
    assert c.existence_regime                    # a - 2b = 6 > 0
    traj = find_ground_state(c)
    half = find_ground_state(c, g0_tol=0.5e-13)
    elapsed = time.time() - t0
    ok = (traj.classification == "ground-candidate"
          and traj.max_g ** 2 < 1.0 and traj.tail_norm < 1e-4
          and abs(traj.g0 - half.g0) < 1e-6 and elapsed < 10.0)
    report(6, "shooting", ok,
           f"g0={traj.g0:.12g} max g^2={traj.max_g ** 2:.6g} "
           f"tail={traj.tail_norm:.3g} |dg0|={abs(traj.g0 - half.g0):.3g} "
           f"{elapsed:.1f}s")


def test_criterion_07_cross_validation():
    t0 = time.time()
    c = Coupling(60.0)
    res = minimize(c, RadialGrid(12.0, 2048))
    traj = find_ground_state(Coupling(60.0, res.multiplier_b))
    shoot_on_grid = np.interp(res.field.grid.nodes, traj.r, traj.g, right=0.0)
    linf = float(np.max(np.abs(shoot_on_grid - res.field.values)))
    elapsed = time.time() - t0
    ok = res.converged and linf <= 1e-2 and elapsed < 60.0
    report(7, "cross-validation", ok,
           f"L-inf={linf:.3g} (<=1e-2) b={res.multiplier_b:.6g} "
           f"g0={traj.g0:.6g} {elapsed:.1f}s")


def test_criterion_08_gradient_check():
    rng = np.random.default_rng(2024)
    grid = RadialGrid(8.0, 160)
    c = Coupling(9.0)
    worst = 0.0
    for _ in range(20):
        amp = rng.uniform(0.3, 0.9)
        width = rng.uniform(1.0, 3.0)
        wig = rng.uniform(0.0, 0.1)
        vals = amp * np.exp(-grid.nodes ** 2 / width) \
            * (1 + wig * np.sin(rng.uniform(1, 4) * grid.nodes))
        u = RadialField(grid, vals)
        assert u.max_abs < 1.0
        gr = gradient(u, c)
        d = rng.standard_normal(grid.n)
        d /= np.max(np.abs(d))
        eps = 1e-6
        ep = energy(RadialField(grid, vals + eps * d), c).total
        em = energy(RadialField(grid, vals - eps * d), c).total
        fd = (ep - em) / (2 * eps)
        analytic = float(np.sum(grid.weights * gr.values * d))
        worst = max(worst, abs(fd - analytic) / abs(fd))
    ok = worst < 1e-6
    report(8, "gradient check", ok, f"worst rel err {worst:.3g} (<1e-6)")


def test_criterion_09_scaling_identity():
    r_norm, _, _, _ = upper_test_constants()
    grid = RadialGrid(r_norm * math.pi / 2.0, 4096)
    u = cosbump(grid)
    a = 30.0
    worst = 0.0
    for gamma in (2.0, 4.0):
        lhs = energy(dilate(u, gamma), Coupling(a)).total
        rhs = gamma ** -2 * kinetic_term_scaled(u, gamma ** -3) \
            - gamma ** -3 * (a / 2.0) * quartic_term(u)
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    ok = worst < 1e-3
    report(9, "scaling identity", ok, f"worst rel err {worst:.3g} (<1e-3)")


def test_criterion_10_unbounded_signed_functional():
    t0 = time.time()
    grid = RadialGrid(4.0, 8192)
    c = Coupling(1.0)
    vals = [energy_signed(unbounded_family(n, grid), c) for n in (4, 8, 16)]
    ratio = abs(vals[2]) / abs(vals[1])
    elapsed = time.time() - t0
    ok = (vals[0] > vals[1] > vals[2] and 6.4 <= ratio <= 9.6
          and elapsed < 60.0)
    report(10, "unboundedness of F", ok,
           f"F={vals[0]:.4g}, {vals[1]:.4g}, {vals[2]:.4g}; "
           f"ratio {ratio:.3f} in [6.4, 9.6] {elapsed:.1f}s")


def test_criterion_11_cutoff_properties():
    xs = np.linspace(0.0, 3.0, 10000)
    partition = float(np.max(np.abs(cutoff_xi(xs) + cutoff_zeta(xs) - 1.0)))
    inner = np.linspace(1.0 + 1e-4, 2.0 - 1e-4, 40001)
    ratio = cutoff_singular_ratio(inner)
    ok = (partition < 1e-12 and np.all(np.isfinite(ratio))
          and ratio[0] < 1e-2 and ratio[-1] < 1e-2)
    report(11, "cut-off properties", ok,
           f"|xi+zeta-1|={partition:.3g} edge ratios "
           f"{ratio[0]:.3g}/{ratio[-1]:.3g} (<1e-2)")


def test_criterion_12_subadditivity_probe():
    grid = RadialGrid(12.0, 1024)
    c = Coupling(60.0)
    estimates = {}
    for nu in (0.25, 0.5, 0.75, 1.0):
        estimates[nu] = minimize_mass(c, nu, grid).i_estimate
    margins = {nu: (estimates[nu] + estimates[round(1.0 - nu, 2)]
                    - estimates[1.0])
               for nu in (0.25, 0.5, 0.75)}
    ok = all(m > 0 for m in margins.values())
    report(12, "subadditivity probe", ok,
           "margins I_nu + I_(1-nu) - I_1 = "
           + ", ".join(f"{nu}: {m:.4g}" for nu, m in margins.items()))
