"""Energy functionals with the state-dependent singular denominator.

The constrained functional is

    E(u) = 4*pi*int u'(r)^2 / (1 - u^2)_+ r^2 dr  -  (a/2) * 4*pi*int u^4 r^2 dr,

together with its signed-denominator variant F (negative contributions allowed
where u^2 > 1), the exact gradient of the discrete quadrature sum, and the
mass-preserving dilation u -> gamma^(-3/2) u(r/gamma).

The kinetic quadrature lives on staggered cells: the derivative is the exact
slope over each grid cell and the denominator is evaluated at the cell
midpoint value.  A purely nodal centered-difference scheme admits a
checkerboard mode with zero discrete derivative, which the minimization flow
would exploit; the cell scheme is the same order of accuracy and has no such
null mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import RadialField, RadialGrid, integrate_radial, l2_mass

DEFAULT_FLOOR = 1e-12
DEFAULT_EXCLUSION = 1e-8


@dataclass(frozen=True)
class Coupling:
    """Quartic coupling a and (optionally) the multiplier/mass parameter b."""

    a: float
    b: float | None = None

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"coupling a must be positive, got {self.a}")

    @property
    def existence_regime(self) -> bool:
        """Condition a - 2b > 0, b > 0 under which shooting solutions exist."""
        return self.b is not None and self.b > 0 and self.a - 2 * self.b > 0


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic: float
    quartic: float
    total: float
    saturated: bool = False

    def as_dict(self, a: float, mass: float) -> dict:
        d = {"kinetic": self.kinetic, "quartic": self.quartic,
             "total": self.total, "a": a, "mass": mass}
        if self.saturated:
            d["saturated"] = True
        return d


def _check_floor(floor: float) -> None:
    if not 0 < floor <= 1e-6:
        raise ValueError(f"denominator floor must be in (0, 1e-6], got {floor}")


def _cell_measure(grid: RadialGrid) -> np.ndarray:
    """4*pi*int_cell r^2 dr for each of the n-1 grid cells (cached)."""
    meas = getattr(grid, "_cell_measure", None)
    if meas is None:
        a, b = grid.nodes[:-1], grid.nodes[1:]
        meas = 4.0 * np.pi * (b ** 3 - a ** 3) / 3.0
        meas.flags.writeable = False
        grid._cell_measure = meas
    return meas


def _cell_slope_mid(u: RadialField):
    """Per-cell derivative (exact slope) and midpoint value."""
    v = u.values
    slope = np.diff(v) / u.grid.spacing
    mid = 0.5 * (v[:-1] + v[1:])
    return slope, mid


def kinetic_term(u: RadialField, floor: float = DEFAULT_FLOOR) -> float:
    """Singular kinetic energy 4*pi*int u'^2 / max((1-u^2)_+, floor) r^2 dr."""
    _check_floor(floor)
    slope, mid = _cell_slope_mid(u)
    denom = np.maximum(1.0 - mid ** 2, floor)
    return float(_cell_measure(u.grid) @ (slope ** 2 / denom))


def kinetic_term_scaled(u: RadialField, shrink: float,
                        floor: float = DEFAULT_FLOOR) -> float:
    """Deformed kinetic energy 4*pi*int u'^2 / (1 - shrink*u^2)_+ r^2 dr.

    With shrink = gamma^-3 this is the kinetic part of the dilation identity
    E(u_gamma) = gamma^-2 * kinetic_term_scaled(u, gamma^-3) - gamma^-3 * (a/2) quartic(u).
    """
    _check_floor(floor)
    slope, mid = _cell_slope_mid(u)
    denom = np.maximum(1.0 - shrink * mid ** 2, floor)
    return float(_cell_measure(u.grid) @ (slope ** 2 / denom))


def quartic_term(u: RadialField) -> float:
    """Attractive term 4*pi*int u^4 r^2 dr (without the a/2 factor)."""
    return integrate_radial(u.values ** 4, u.grid)


def energy(u: RadialField, c: Coupling, floor: float = DEFAULT_FLOOR) -> EnergyBreakdown:
    """Energy breakdown E = kinetic - (a/2)*quartic.

    The result is flagged saturated when the denominator floor was active in
    some cell, i.e. the field presses |u| = 1 and the kinetic value is a
    large finite surrogate for +inf.
    """
    _check_floor(floor)
    kin = kinetic_term(u, floor)
    quart = quartic_term(u)
    _, mid = _cell_slope_mid(u)
    saturated = bool(np.any(1.0 - mid ** 2 <= floor))
    return EnergyBreakdown(kin, quart, kin - 0.5 * c.a * quart, saturated)


def energy_signed(u: RadialField, c: Coupling,
                  exclusion: float = DEFAULT_EXCLUSION) -> float:
    """Signed-denominator functional F(u); denominators may be negative.

    Cells with |1 - u_mid^2| < exclusion are dropped from the kinetic
    quadrature; the singular set is a finite union of radii for the fields
    of interest.  Coincides with energy(...).total whenever max|u| < 1.
    """
    if not 0 < exclusion <= 1e-3:
        raise ValueError(f"exclusion band must be in (0, 1e-3], got {exclusion}")
    slope, mid = _cell_slope_mid(u)
    denom = 1.0 - mid ** 2
    keep = np.abs(denom) >= exclusion
    kin = float(_cell_measure(u.grid)[keep] @ (slope[keep] ** 2 / denom[keep]))
    return kin - 0.5 * c.a * quartic_term(u)


def gradient(u: RadialField, c: Coupling, floor: float = DEFAULT_FLOOR) -> RadialField:
    """Exact gradient of the discrete energy in the weighted L2 pairing.

    Returns g such that sum_i w_i g_i delta_i equals the directional
    derivative of energy(...).total along delta, to machine precision.  At
    interior nodes g is consistent (up to an overall factor 2 from the real
    parametrization) with the radial Euler-Lagrange operator
    -(1/r^2)(r^2 u'/(1-u^2))' + u u'^2/(1-u^2)^2 - a u^3.
    """
    _check_floor(floor)
    grid = u.grid
    w = grid.weights
    h = grid.spacing
    meas = _cell_measure(grid)
    slope, mid = _cell_slope_mid(u)
    raw = 1.0 - mid ** 2
    denom = np.maximum(raw, floor)
    active = raw > floor                     # floor/positive-part clamp inactive

    flux = meas * slope / denom              # per-cell transport coefficient
    de = np.zeros(grid.n)
    # d(slope_c)/du_i = -1/h at the cell's left node, +1/h at the right node
    de[:-1] -= 2.0 * flux / h
    de[1:] += 2.0 * flux / h
    # d(denom_c)/du_i = -mid_c at both nodes of an active cell
    sing = meas * slope ** 2 / denom ** 2 * mid * active
    de[:-1] += sing
    de[1:] += sing
    de -= 2.0 * c.a * w * u.values ** 3
    return RadialField(grid, de / w)


def dilate(u: RadialField, gamma: float, target_grid: RadialGrid | None = None,
           allow_truncation: bool = False) -> RadialField:
    """Mass-preserving dilation u_gamma(r) = gamma^(-3/2) u(r/gamma).

    Without a target grid the field is resampled on a grid with the same node
    count and r_max scaled by gamma (no truncation possible).  With a target
    grid that does not cover the dilated support, a truncation error is raised
    unless allow_truncation is set.
    """
    if not gamma > 0:
        raise ValueError(f"dilation factor must be positive, got {gamma}")
    if target_grid is None:
        target_grid = RadialGrid(gamma * u.grid.r_max, u.grid.n)
    support = gamma * _support_radius(u)
    if target_grid.r_max < support - 1e-12 and not allow_truncation:
        raise ValueError(
            f"dilated support radius {support:.6g} exceeds target grid r_max "
            f"{target_grid.r_max:.6g}; pass allow_truncation=True to proceed")
    vals = gamma ** -1.5 * np.interp(
        target_grid.nodes / gamma, u.grid.nodes, u.values, right=0.0)
    return RadialField(target_grid, vals)


def _support_radius(u: RadialField) -> float:
    nz = np.nonzero(u.values)[0]
    if nz.size == 0:
        return 0.0
    return float(u.grid.nodes[min(nz[-1] + 1, u.grid.n - 1)])
