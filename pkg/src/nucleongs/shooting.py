"""Shooting solver for the radial first-order system

    f' + (2/r) f = g (f^2 - a g^2 + b),      g' = f (1 - g^2),

with the regularity condition f(0) = 0.  Square-integrable solutions decay to
(0, 0) at infinity; they are found by bisection on the initial datum g(0)
between `overshoot` trajectories (g crosses zero) and `undershoot`
trajectories (f returns to positive values while 0 < g < 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .energy import Coupling

SERIES_DELTA = 1e-6
F_BLOWUP = 1e6


@dataclass
class ShootTrajectory:
    r: np.ndarray
    f: np.ndarray
    g: np.ndarray
    g0: float
    classification: str      # ground-candidate | overshoot | undershoot | inconclusive
    r_end: float
    bracket: tuple | None = None

    @property
    def max_g(self) -> float:
        return float(np.max(np.abs(self.g)))

    @property
    def tail_norm(self) -> float:
        return float(abs(self.f[-1]) + abs(self.g[-1]))

    def as_dict(self, c: Coupling) -> dict:
        return {
            "a": c.a, "b": c.b, "g0": self.g0,
            "bracket": list(self.bracket) if self.bracket else None,
            "max_g": self.max_g, "tail_norm": self.tail_norm,
            "classification": self.classification, "r_end": self.r_end,
        }

    def save_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("r,f,g\n")
            for r, f, g in zip(self.r, self.f, self.g):
                fh.write(f"{r:.17g},{f:.17g},{g:.17g}\n")


def rhs(r: float, f: float, g: float, c: Coupling):
    """Right-hand side (f', g') of the radial system; r must be positive."""
    fp = g * (f * f - c.a * g * g + c.b) - 2.0 * f / r
    gp = f * (1.0 - g * g)
    return fp, gp


def _series_start(g0: float, c: Coupling, delta: float = SERIES_DELTA):
    """Leading-order start at r = delta under f(0) = 0: f ~ g0 (b - a g0^2) r/3."""
    return np.array([g0 * (c.b - c.a * g0 ** 2) * delta / 3.0, g0])


def integrate_trajectory(g0: float, c: Coupling, r_max: float = 15.0,
                         tol: float = 1e-4, rtol: float = 1e-10,
                         atol: float = 1e-12, n_samples: int = 2048) -> ShootTrajectory:
    """Integrate from the series start and classify the trajectory.

    Events: g falling through 0 -> overshoot; f rising through 0 while the
    start had f < 0 -> undershoot; r_max reached with f^2 + g^2 < tol^2 ->
    ground-candidate; anything else -> inconclusive.
    """
    if c.b is None:
        raise ValueError("shooting requires a coupling with both a and b")
    if not 0 < g0 < 1:
        raise ValueError(f"g0 must be in (0, 1), got {g0}")

    def odefun(r, y):
        return rhs(r, y[0], y[1], c)

    def ev_g_zero(r, y):
        return y[1]
    ev_g_zero.terminal = True
    ev_g_zero.direction = -1.0

    def ev_f_rising(r, y):
        return y[0]
    ev_f_rising.terminal = True
    ev_f_rising.direction = 1.0

    def ev_blowup(r, y):
        return abs(y[0]) - F_BLOWUP
    ev_blowup.terminal = True

    y0 = _series_start(g0, c)
    starts_negative = y0[0] < 0
    sol = solve_ivp(odefun, (SERIES_DELTA, r_max), y0, method="DOP853",
                    rtol=rtol, atol=atol, dense_output=True,
                    events=[ev_g_zero, ev_f_rising, ev_blowup])

    r_end = float(sol.t[-1])
    rs = np.linspace(SERIES_DELTA, r_end, n_samples)
    vals = sol.sol(rs)
    r = np.concatenate(([0.0], rs))
    f = np.concatenate(([0.0], vals[0]))
    g = np.concatenate(([g0], vals[1]))

    hit_g_zero = sol.t_events[0].size > 0
    hit_f_rising = sol.t_events[1].size > 0 and starts_negative
    hit_blowup = sol.t_events[2].size > 0

    if hit_g_zero:
        cls = "overshoot"
    elif hit_f_rising:
        cls = "undershoot"
    elif hit_blowup:
        cls = "undershoot" if f[-1] > 0 else "overshoot"
    elif sol.status == 0 and f[-1] ** 2 + g[-1] ** 2 < tol ** 2:
        cls = "ground-candidate"
    elif sol.status == 0 and not starts_negative and 0 < g[-1] < 1:
        # f >= 0 from the start: the source term pushes g toward 1
        cls = "undershoot"
    else:
        cls = "inconclusive"
    return ShootTrajectory(r, f, g, g0, cls, r_end)


class BracketError(RuntimeError):
    """No overshoot/undershoot sign change found over the initial bracket."""


def find_ground_state(c: Coupling, r_max: float = 15.0, tol: float = 1e-4,
                      rtol: float = 1e-10, atol: float = 1e-12,
                      g0_tol: float = 1e-13, n_samples: int = 2048) -> ShootTrajectory:
    """Bisect g(0) over (sqrt(b/a), 1) toward the decaying trajectory."""
    if c.b is None or c.b <= 0:
        raise ValueError("find_ground_state requires b > 0")
    lo = np.sqrt(c.b / c.a) + 1e-9       # series start gives undershoot below
    hi = 1.0 - 1e-9
    if lo >= hi:
        raise BracketError(f"empty bracket: sqrt(b/a) = {lo:.6g} >= 1")

    kw = dict(r_max=r_max, tol=tol, rtol=rtol, atol=atol, n_samples=64)

    def classify(g0):
        t = integrate_trajectory(g0, c, **kw)
        return t.classification

    cls_hi = classify(hi)
    if cls_hi != "overshoot":
        raise BracketError(
            f"no overshoot at g0 = {hi:.6g} (got {cls_hi}); the existence "
            f"condition a - 2b > 0 holds: {c.existence_regime}")
    while hi - lo > g0_tol:
        mid = 0.5 * (lo + hi)
        cls = classify(mid)
        if cls == "overshoot":
            hi = mid
        elif cls in ("undershoot", "inconclusive", "ground-candidate"):
            if cls == "ground-candidate":
                lo = hi = mid
                break
            lo = mid
        else:  # pragma: no cover
            raise BracketError(f"unexpected classification {cls}")

    g0 = 0.5 * (lo + hi)
    traj = integrate_trajectory(g0, c, r_max=r_max, tol=tol, rtol=rtol,
                                atol=atol, n_samples=n_samples)
    if traj.classification != "ground-candidate":
        # the double-precision limit on g0 was hit before r_max: truncate at
        # the point of closest approach to the origin of the (f, g) plane
        norm = traj.f ** 2 + traj.g ** 2
        k = int(np.argmin(norm[1:]) + 1)
        if norm[k] < tol ** 2:
            traj = ShootTrajectory(traj.r[:k + 1], traj.f[:k + 1],
                                   traj.g[:k + 1], g0, "ground-candidate",
                                   float(traj.r[k]))
    traj.bracket = (lo, hi)
    return traj


def verify_system(t: ShootTrajectory, c: Coupling) -> dict:
    """Residuals of both equations from centered differencing of the samples."""
    if t.r.size < 8:
        raise ValueError("need at least 8 samples to difference the trajectory")
    r, f, g = t.r[1:], t.f[1:], t.g[1:]   # drop the series-start node at r = 0
    df = np.gradient(f, r)
    dg = np.gradient(g, r)
    fp = g * (f ** 2 - c.a * g ** 2 + c.b) - 2.0 * f / r
    gp = f * (1.0 - g ** 2)
    sl = slice(1, -1)                     # one-sided ends are lower order
    return {
        "residual_f": float(np.max(np.abs(df[sl] - fp[sl]))),
        "residual_g": float(np.max(np.abs(dg[sl] - gp[sl]))),
    }
