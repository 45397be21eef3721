"""Command-line front end.

Subcommands: constants, minimize, shoot, threshold, scan, unbounded-demo,
diagnose, selftest.  Each run writes a JSON summary (plus CSV profiles where
applicable) into the output directory; all floats are emitted with 17
significant digits so outputs round-trip exactly.  Exit codes: 0 success,
1 validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import analysis, grids, shooting
from .energy import Coupling, energy_signed, kinetic_term, quartic_term
from .minimize import MinimizeOptions, minimize as run_minimize

OUTDIR_ENV = "NUCLEONGS_OUTDIR"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2


class NumericalFailure(RuntimeError):
    pass


def _float17(x):
    return float(f"{x:.17g}")


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return _float17(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    return obj


def _write_json(payload: dict, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(_jsonify(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_config(path: str | None) -> dict:
    """Flat key=value config file; '#' starts a comment."""
    cfg = {}
    if path is None:
        return cfg
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        cfg[key] = val
    return cfg


KNOWN_KEYS = {"rmax", "n", "a", "b", "nu", "init", "seed", "tol", "tol_a",
              "out", "max_iters", "tol_residual"}


def _merge_config(args: argparse.Namespace) -> dict:
    cfg = _load_config(getattr(args, "config", None))
    unknown = set(cfg) - KNOWN_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    merged = {}
    for key in KNOWN_KEYS:
        if key in cfg:
            merged[key] = cfg[key]
        cli_val = getattr(args, key, None)
        if cli_val is not None:
            merged[key] = cli_val
    return merged


def _outdir(args) -> Path:
    out = getattr(args, "out", None) or os.environ.get(OUTDIR_ENV) or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _resolved(args, **extra) -> dict:
    cfg = {k: v for k, v in vars(args).items()
           if k not in ("func", "config") and v is not None}
    cfg.update(extra)
    return cfg


# ---------------------------------------------------------------------------
# subcommands


def cmd_constants(args) -> int:
    report = analysis.constants_report()
    report["config"] = _resolved(args)
    _write_json(report, _outdir(args) / "constants.json")
    print(json.dumps(_jsonify(analysis.constants_report())))
    return EXIT_OK


def _make_opts(args, **overrides):
    kw = dict(nu=args.nu, init=args.init, seed=args.seed)
    if getattr(args, "max_iters", None):
        kw["max_iters"] = args.max_iters
    if getattr(args, "tol_residual", None):
        kw["tol_residual"] = args.tol_residual
    kw.update(overrides)
    return MinimizeOptions(**kw)


def cmd_minimize(args) -> int:
    grid = grids.make_grid(args.rmax, args.n)
    c = Coupling(args.a)
    opts = _make_opts(args)
    res = run_minimize(c, grid, opts)
    out = _outdir(args)
    payload = res.as_dict(args.a)
    payload["config"] = _resolved(args)
    _write_json(payload, out / "minimize.json")
    grids.save_profile(res.field, out / "minimize_profile.csv")
    with open(out / "minimize_history.csv", "w") as fh:
        fh.write("iter,energy,residual,step\n")
        for it, e, r, s in res.history:
            fh.write(f"{it},{e:.17g},{r:.17g},{s:.17g}\n")
    print(f"minimize a={args.a} nu={args.nu}: energy={res.energy.total:.10g} "
          f"b={res.multiplier_b:.10g} regime={res.regime}")
    if not res.converged and res.regime != "vanishing":
        raise NumericalFailure(f"flow did not converge (regime={res.regime})")
    return EXIT_OK


def cmd_shoot(args) -> int:
    c = Coupling(args.a, args.b)
    try:
        traj = shooting.find_ground_state(c, r_max=args.rmax, tol=args.tol)
    except shooting.BracketError as exc:
        raise NumericalFailure(str(exc)) from exc
    out = _outdir(args)
    payload = traj.as_dict(c)
    payload["config"] = _resolved(args)
    _write_json(payload, out / "shoot.json")
    traj.save_csv(out / "shoot_trajectory.csv")
    print(f"shoot a={args.a} b={args.b}: g0={traj.g0:.12g} "
          f"class={traj.classification} tail={traj.tail_norm:.3g}")
    if traj.classification != "ground-candidate":
        raise NumericalFailure(f"no decaying trajectory: {traj.classification}")
    return EXIT_OK


def cmd_threshold(args) -> int:
    grid = grids.make_grid(args.rmax, args.n)
    opts = MinimizeOptions(tol_residual=1e-5, max_iters=4000,
                                   seed=args.seed)
    bracket = analysis.threshold_bisect(grid, opts, tol_a=args.tol_a)
    out = _outdir(args)
    payload = bracket.as_dict()
    payload["config"] = _resolved(args)
    _write_json(payload, out / "threshold.json")
    print(f"threshold: a0 upper estimate {bracket.a0_upper_estimate:.6g} "
          f"in [{bracket.a_lo:.6g}, {bracket.a_hi:.6g}]")
    lo, hi = analysis.lower_coupling_bound(), analysis.upper_test_constants()[3]
    if not (lo < bracket.a0_upper_estimate < hi):
        raise NumericalFailure("threshold estimate escaped the analytic bounds")
    return EXIT_OK


def cmd_scan(args) -> int:
    grid = grids.make_grid(args.rmax, args.n)
    rows = []
    for a in np.linspace(args.a_from, args.a_to, args.steps):
        res = run_minimize(Coupling(float(a)), grid,
                               _make_opts(args, tol_residual=1e-5, max_iters=4000))
        rows.append((float(a), res.i_estimate, res.multiplier_b,
                     res.converged, res.regime))
        print(f"scan a={a:.6g}: I~{res.i_estimate:.8g} regime={res.regime}")
    out = _outdir(args)
    with open(out / "scan.csv", "w") as fh:
        fh.write("a,i_estimate,b,converged,regime\n")
        for a, e, b, conv, reg in rows:
            fh.write(f"{a:.17g},{e:.17g},{b:.17g},{int(conv)},{reg}\n")
    _write_json({"rows": [list(r) for r in rows], "config": _resolved(args)},
                out / "scan.json")
    return EXIT_OK


def cmd_unbounded_demo(args) -> int:
    ns = [int(s) for s in args.n_list.split(",")]
    values = []
    c = Coupling(args.a)
    for n in ns:
        grid = grids.make_grid(0.8, max(4096, 32 * n))
        fam = analysis.unbounded_family(n, grid)
        values.append(energy_signed(fam, c))
        print(f"unbounded-demo n={n}: F={values[-1]:.8g}")
    payload = {"n": ns, "F": values, "a": args.a, "config": _resolved(args)}
    _write_json(payload, _outdir(args) / "unbounded_demo.json")
    if not all(b < a for a, b in zip(values, values[1:])):
        raise NumericalFailure("family values are not strictly decreasing")
    return EXIT_OK


def cmd_diagnose(args) -> int:
    u = grids.load_profile(args.profile)
    radii = np.linspace(0.0, u.grid.r_max, 101)
    mass = grids.l2_mass(u)
    rows = [(float(r), analysis.levy_Q(u, float(r)), analysis.levy_K(u, float(r)))
            for r in radii]
    out = _outdir(args)
    with open(out / "diagnose.csv", "w") as fh:
        fh.write("R,levy_Q,levy_K\n")
        for r, q, k in rows:
            fh.write(f"{r:.17g},{q:.17g},{k:.17g}\n")
    conc_radius = next((r for r, q, _ in rows if mass > 0 and q >= 0.99 * mass),
                       None)
    _write_json({"mass": mass, "concentration_radius": conc_radius,
                 "config": _resolved(args)}, out / "diagnose.json")
    print(f"diagnose: mass={mass:.10g} 99%-radius={conc_radius}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    """Reduced-resolution run over the acceptance checks."""
    t0 = time.time()
    checks = []

    def check(name, fn):
        try:
            ok, detail = fn()
        except Exception as exc:  # surface, don't abort the suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        checks.append((name, ok, detail))
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")

    def c_constants():
        rep = analysis.constants_report()
        ok = (abs(rep["two_over_S2"] - 10.96) < 0.005
              and abs(rep["abar"] - 48.06) < 0.01)
        return ok, f"2/S^2={rep['two_over_S2']:.6g} abar={rep['abar']:.6g}"

    def c_quadrature():
        r_norm, kin, quart, _ = analysis.upper_test_constants()
        grid = grids.make_grid(r_norm * np.pi / 2, 4096)
        bump = analysis.test_function_cosbump(grid)
        kq = kinetic_term(bump)
        qq = quartic_term(bump)
        ok = (abs(kq - kin) / kin < 1e-4 and abs(qq - quart) / quart < 1e-6)
        return ok, f"kinetic={kq:.8g} quartic={qq:.8g}"

    def c_negative():
        grid = grids.make_grid(20.0, 512)
        res = run_minimize(Coupling(50.0), grid,
                               MinimizeOptions(tol_residual=1e-6))
        ok = (res.converged and -25.0 <= res.energy.total < 0.0
              and res.field.max_abs <= 1.0)
        return ok, f"E={res.energy.total:.8g} residual={res.residual:.3g}"

    def c_zero_regime():
        grid = grids.make_grid(20.0, 512)
        res = run_minimize(Coupling(5.0), grid,
                               MinimizeOptions(max_iters=4000,
                                                       tol_residual=1e-5))
        return res.i_estimate >= -1e-3, f"I~{res.i_estimate:.6g} ({res.regime})"

    def c_shooting():
        traj = shooting.find_ground_state(Coupling(8.0, 1.0))
        ok = (traj.classification == "ground-candidate"
              and traj.max_g < 1.0 and traj.tail_norm < 1e-4)
        return ok, f"g0={traj.g0:.10g} tail={traj.tail_norm:.3g}"

    def c_cutoffs():
        xs = np.linspace(0.0, 3.0, 10000)
        comp = np.max(np.abs(analysis.cutoff_xi(xs) + analysis.cutoff_zeta(xs) - 1))
        lim = max(analysis.cutoff_singular_ratio(1 + 1e-4),
                  analysis.cutoff_singular_ratio(2 - 1e-4))
        return comp < 1e-12 and lim < 1e-2, f"|xi+zeta-1|={comp:.3g} limits={lim:.3g}"

    def c_unbounded():
        c = Coupling(1.0)
        vals = []
        for n in (4, 8):
            grid = grids.make_grid(0.8, 4096)
            vals.append(energy_signed(
                analysis.unbounded_family(n, grid), c))
        return vals[1] < vals[0] < 0, f"F(4)={vals[0]:.6g} F(8)={vals[1]:.6g}"

    check("constants", c_constants)
    check("closed-form quadrature", c_quadrature)
    check("negative-energy regime", c_negative)
    check("zero regime", c_zero_regime)
    check("shooting", c_shooting)
    check("cut-off properties", c_cutoffs)
    check("unbounded family", c_unbounded)

    payload = {"checks": [{"name": n, "pass": ok, "detail": d}
                          for n, ok, d in checks],
               "elapsed_s": time.time() - t0, "config": _resolved(args)}
    _write_json(payload, _outdir(args) / "selftest.json")
    failed = [n for n, ok, _ in checks if not ok]
    if failed:
        raise NumericalFailure(f"selftest failures: {failed}")
    print(f"selftest: all {len(checks)} checks passed "
          f"in {payload['elapsed_s']:.1f}s")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nucleongs",
        description="Ground states of the constrained nucleon mean-field "
                    "energy functional")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--out", help=f"output directory (or ${OUTDIR_ENV})")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("constants", help="analytic constants report")
    sp.set_defaults(func=cmd_constants)

    sp = sub.add_parser("minimize", help="ground-state minimization")
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--nu", type=float, default=1.0)
    sp.add_argument("--rmax", type=float, default=20.0)
    sp.add_argument("--n", type=int, default=2048)
    sp.add_argument("--init", default="cosbump",
                    choices=["cosbump", "gaussian", "flattop"])
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-iters", dest="max_iters", type=int)
    sp.add_argument("--tol-residual", dest="tol_residual", type=float)
    sp.set_defaults(func=cmd_minimize)

    sp = sub.add_parser("shoot", help="radial shooting ground state")
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--b", type=float, required=True)
    sp.add_argument("--tol", type=float, default=1e-4)
    sp.add_argument("--rmax", type=float, default=15.0)
    sp.set_defaults(func=cmd_shoot)

    sp = sub.add_parser("threshold", help="critical-coupling bisection")
    sp.add_argument("--tol-a", dest="tol_a", type=float, default=0.5)
    sp.add_argument("--rmax", type=float, default=20.0)
    sp.add_argument("--n", type=int, default=512)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_threshold)

    sp = sub.add_parser("scan", help="energy sweep over the coupling")
    sp.add_argument("--a-from", dest="a_from", type=float, required=True)
    sp.add_argument("--a-to", dest="a_to", type=float, required=True)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--nu", type=float, default=1.0)
    sp.add_argument("--rmax", type=float, default=20.0)
    sp.add_argument("--n", type=int, default=512)
    sp.add_argument("--init", default="cosbump",
                    choices=["cosbump", "gaussian", "flattop"])
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("unbounded-demo",
                        help="signed functional on the diverging family")
    sp.add_argument("--n-list", dest="n_list", default="4,8,16")
    sp.add_argument("--a", type=float, default=1.0)
    sp.set_defaults(func=cmd_unbounded_demo)

    sp = sub.add_parser("diagnose", help="concentration functions of a profile")
    sp.add_argument("--profile", required=True)
    sp.set_defaults(func=cmd_diagnose)

    sp = sub.add_parser("selftest", help="reduced-resolution acceptance run")
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _merge_config(args)
        return args.func(args)
    except (ValueError, grids.GridSizingError, FileNotFoundError) as exc:
        print(f"error: validation: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalFailure as exc:
        print(f"error: numerical: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
