"""Analytic constants, explicit test functions, threshold bisection, and
concentration diagnostics.

Closed forms implemented here: the best Sobolev constant S of the H1 -> L6
embedding (hence the lower coupling bound 2/S^2), the normalized cosine bump
and its exact kinetic/quartic values (hence the upper coupling bound abar),
the double-exponential cut-off pair (xi, zeta), the Levy concentration
functions of a radial field, and the explicit unit-mass family on which the
signed-denominator functional F diverges to -infinity like -c n^3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .energy import Coupling, DEFAULT_FLOOR
from .grids import RadialField, RadialGrid, integrate_radial, l2_mass
from .minimize import MinimizeOptions, minimize_from, minimize_mass

SQRT_LN2 = math.sqrt(math.log(2.0))


# ---------------------------------------------------------------------------
# closed-form constants


def sobolev_constant() -> float:
    """Best constant S of the Sobolev embedding H1(R^3) -> L6(R^3)."""
    return 1.0 / math.sqrt(3.0 * math.pi) * (4.0 / math.sqrt(math.pi)) ** (1.0 / 3.0)


def lower_coupling_bound() -> float:
    """2/S^2 = 3 pi^(4/3) / 2^(1/3) ~ 10.96, below which the infimum is 0."""
    return 3.0 * math.pi ** (4.0 / 3.0) / 2.0 ** (1.0 / 3.0)


def upper_test_constants() -> tuple[float, float, float, float]:
    """(R, kinetic_closed, quartic_closed, abar) of the cosine test function.

    R normalizes the bump to unit mass; abar = 2*kinetic/quartic ~ 48.06 is
    the coupling at which the bump's energy vanishes.
    """
    pi = math.pi
    r_norm = (2.0 / pi) ** (2.0 / 3.0) * (3.0 / (pi ** 2 - 6.0)) ** (1.0 / 3.0)
    kinetic = pi ** 4 / 6.0 * r_norm
    quartic = 3.0 * (2.0 * pi ** 2 - 15.0) / (8.0 * (pi ** 2 - 6.0))
    return r_norm, kinetic, quartic, 2.0 * kinetic / quartic


def constants_report() -> dict:
    s = sobolev_constant()
    r_norm, kinetic, quartic, abar = upper_test_constants()
    return {"S": s, "two_over_S2": lower_coupling_bound(), "R": r_norm,
            "kinetic_closed": kinetic, "quartic_closed": quartic, "abar": abar}


def test_function_cosbump(grid: RadialGrid) -> RadialField:
    """Unit-mass cosine bump cos(r/R) on r <= R*pi/2, zero outside."""
    r_norm = upper_test_constants()[0]
    edge = r_norm * math.pi / 2.0
    if grid.r_max < edge:
        raise ValueError(
            f"grid r_max {grid.r_max:.6g} does not cover the bump support {edge:.6g}")
    vals = np.where(grid.nodes <= edge, np.cos(grid.nodes / r_norm), 0.0)
    return RadialField(grid, np.maximum(vals, 0.0))


# ---------------------------------------------------------------------------
# cut-off functions


def _zeta_open(x):
    """exp(1 - 1/(1 - exp(1 - 1/(2-x)))) on 1 < x < 2, evaluated stably."""
    with np.errstate(over="ignore", under="ignore", divide="ignore"):
        t = np.exp(1.0 - 1.0 / (2.0 - x))
        return np.exp(1.0 - 1.0 / (1.0 - t))


def cutoff_xi(x):
    """Cut-off equal to 1 on [0, 1], 0 on [2, inf), double-exponential between."""
    x = np.asarray(x, dtype=float)
    out = np.where(x <= 1.0, 1.0, 0.0)
    mid = (x > 1.0) & (x < 2.0)
    out = np.where(mid, 1.0 - _zeta_open(np.where(mid, x, 1.5)), out)
    return out if out.ndim else float(out)


def cutoff_zeta(x):
    """Complementary cut-off: zeta = 1 - xi on (1, 2), 0 inside, 1 outside."""
    x = np.asarray(x, dtype=float)
    out = np.where(x >= 2.0, 1.0, 0.0)
    mid = (x > 1.0) & (x < 2.0)
    out = np.where(mid, _zeta_open(np.where(mid, x, 1.5)), out)
    return out if out.ndim else float(out)


def cutoff_xi_derivative(x):
    """Exact xi' on (1, 2) by differentiating the closed form."""
    x = np.asarray(x, dtype=float)
    mid = (x > 1.0) & (x < 2.0)
    xm = np.where(mid, x, 1.5)
    with np.errstate(over="ignore", under="ignore", divide="ignore"):
        t = np.exp(1.0 - 1.0 / (2.0 - xm))
        es = np.exp(1.0 - 1.0 / (1.0 - t))
        sprime = t / ((1.0 - t) ** 2 * (2.0 - xm) ** 2)
        val = -es * sprime
    out = np.where(mid, np.nan_to_num(val), 0.0)
    return out if out.ndim else float(out)


def cutoff_singular_ratio(x):
    """(xi')^2 / (1 - xi^2) on (1, 2); tends to 0 at both endpoints."""
    x = np.asarray(x, dtype=float)
    mid = (x > 1.0) & (x < 2.0)
    xm = np.where(mid, x, 1.5)
    with np.errstate(over="ignore", under="ignore", divide="ignore"):
        t = np.exp(1.0 - 1.0 / (2.0 - xm))
        es = np.exp(1.0 - 1.0 / (1.0 - t))       # = zeta = 1 - xi
        sprime = t / ((1.0 - t) ** 2 * (2.0 - xm) ** 2)
        # (xi')^2/(1-xi^2) = e^(2s) s'^2 / (e^s (2 - e^s)) = e^s s'^2/(2 - e^s)
        val = es * sprime ** 2 / (2.0 - es)
    out = np.where(mid, np.nan_to_num(val), 0.0)
    return out if out.ndim else float(out)


def cutoff_ratio_bound(samples: int = 10000) -> float:
    """Sampled maximum of the singular ratio over (1, 2)."""
    xs = np.linspace(1.0, 2.0, samples + 2)[1:-1]
    return float(np.max(cutoff_singular_ratio(xs)))


# ---------------------------------------------------------------------------
# Levy concentration functions


def _cumulative_radial(h: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """Per-node cumulative of 4*pi*int_0^r h s^2 ds with piecewise-linear h."""
    r = grid.nodes
    a, b = r[:-1], r[1:]
    m0 = (b ** 3 - a ** 3) / 3.0
    m1 = (b ** 4 - a ** 4) / 4.0
    dr = b - a
    wa = (b * m0 - m1) / dr
    wb = (m1 - a * m0) / dr
    cell = 4.0 * np.pi * (wa * h[:-1] + wb * h[1:])
    return np.concatenate(([0.0], np.cumsum(cell)))


def levy_Q(u: RadialField, radius: float) -> float:
    """Mass inside the ball of given radius (center at the origin)."""
    if radius <= 0:
        return 0.0
    cum = _cumulative_radial(u.values ** 2, u.grid)
    return float(np.interp(radius, u.grid.nodes, cum))


def levy_K(u: RadialField, radius: float, floor: float = DEFAULT_FLOOR) -> float:
    """Singular kinetic density integral inside the ball of given radius."""
    if radius <= 0:
        return 0.0
    du = u.derivative()
    dens = du ** 2 / np.maximum(1.0 - u.values ** 2, floor)
    cum = _cumulative_radial(dens, u.grid)
    return float(np.interp(radius, u.grid.nodes, cum))


# ---------------------------------------------------------------------------
# unboundedness family for the signed functional


def family_outer_profile(r):
    """Radial profile f: exp((r - sqrt(ln 2))^2) near 0, cut-off tail after."""
    r = np.asarray(r, dtype=float)
    out = np.where(r < SQRT_LN2,
                   np.exp((np.minimum(r, SQRT_LN2) - SQRT_LN2) ** 2),
                   cutoff_xi(r + 1.0 - SQRT_LN2))
    return out if out.ndim else float(out)


FAMILY_SUPPORT = 1.0 + SQRT_LN2


def unbounded_family(n: int, grid: RadialGrid) -> RadialField:
    """Unit-mass member g_n^(R_n) of the family driving F to -infinity.

    g_n = max(n^(3/2) xi(n r), f(r)), rescaled by R_n so the mass is one.
    The grid must resolve the inner scale R_n/n and cover the support.
    """
    if n < 2:
        raise ValueError(f"family index must be >= 2, got {n}")

    def sample(scale):
        arg = grid.nodes / scale
        vals = np.where(arg <= FAMILY_SUPPORT,
                        np.maximum(n ** 1.5 * cutoff_xi(n * arg),
                                   family_outer_profile(arg)), 0.0)
        return vals

    def mass_of(scale):
        return integrate_radial(sample(scale) ** 2, grid) - 1.0

    hi = min(1.0, grid.r_max / FAMILY_SUPPORT)
    if mass_of(hi) < 0:
        raise ValueError("grid r_max too small to reach unit mass")
    scale = brentq(mass_of, 1e-3, hi, xtol=1e-14)
    if grid.spacing > scale / (8.0 * n):
        raise ValueError(
            f"grid spacing {grid.spacing:.3g} under-resolves the inner scale "
            f"{scale / n:.3g}; need spacing <= {scale / (8 * n):.3g}")
    return RadialField(grid, sample(scale))


# ---------------------------------------------------------------------------
# critical-coupling bisection


@dataclass
class ThresholdBracket:
    a_lo: float
    a_hi: float
    probes: list = field(default_factory=list)
    tol_a: float = 0.5

    @property
    def a0_upper_estimate(self) -> float:
        """Smallest coupling with a certified negative-energy witness."""
        return self.a_hi

    def as_dict(self) -> dict:
        return {"a_lo": self.a_lo, "a_hi": self.a_hi,
                "a0_upper_estimate": self.a0_upper_estimate,
                "probes": self.probes}


def threshold_probe(a: float, grid: RadialGrid, opts: MinimizeOptions,
                    warm: RadialField | None = None, seeds=(0,)):
    """Best minimization outcome at coupling a over warm/seeded starts."""
    c = Coupling(a)
    best = None
    starts = []
    if warm is not None:
        starts.append(("warm", warm))
    for s in seeds:
        starts.append((f"seed{s}", None))
    for label, u0 in starts:
        if u0 is not None:
            res = minimize_from(c, grid, u0, opts)
        else:
            res = minimize_mass(c, opts.nu, grid,
                                replace(opts, seed=int(label[4:])))
        if best is None or res.i_estimate < best.i_estimate:
            best = res
    return best


def threshold_bisect(grid: RadialGrid, opts: MinimizeOptions | None = None,
                     tol_a: float = 0.5, tol_energy: float = 1e-4,
                     seeds=(0, 1, 2)) -> ThresholdBracket:
    """Bisect the coupling between the analytic bounds 2/S^2 and abar.

    The sign predicate at each probe is "computed upper bound on the infimum
    below -tol_energy".  Negative probes warm-start later ones (the energy is
    monotone in a), which keeps shallow wells near the threshold detectable.
    The returned a_hi is an upper-bound estimate of the critical coupling
    (radial restriction), always inside (2/S^2, abar].
    """
    opts = opts or MinimizeOptions(tol_residual=1e-5, max_iters=4000)
    a_lo = lower_coupling_bound()
    a_hi = upper_test_constants()[3]
    probes = []
    witness = None
    # continuation sweep from above: locate a first negative witness cheaply
    for a in np.linspace(a_hi, a_lo, 8)[:-1]:
        res = threshold_probe(a, grid, opts, warm=witness, seeds=(0,))
        negative = res.i_estimate < -tol_energy
        probes.append({"a": float(a), "i_estimate": res.i_estimate,
                       "negative": negative, "regime": res.regime})
        if negative:
            a_hi = float(a)
            witness = res.field
        else:
            a_lo = max(a_lo, float(a))
            break
    while a_hi - a_lo > tol_a:
        mid = 0.5 * (a_lo + a_hi)
        res = threshold_probe(mid, grid, opts, warm=witness, seeds=seeds)
        negative = res.i_estimate < -tol_energy
        probes.append({"a": mid, "i_estimate": res.i_estimate,
                       "negative": negative, "regime": res.regime})
        if negative:
            a_hi = mid
            witness = res.field
        else:
            a_lo = mid
    return ThresholdBracket(a_lo, a_hi, probes, tol_a)
