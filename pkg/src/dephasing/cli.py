"""Command-line front end: reproducible batch runs with CSV/JSON output.

One executable, six subcommands:

    gamma      exact decoherence curve  ->  CSV t,gamma,abs_coherence,rate
    classify   decoherence regime + constants  ->  JSON
    asymptote  exact-vs-law residual report  ->  JSON or CSV
    qrf        regression-formula scaling check  ->  JSON
    embed-fit  exponential-sum certification  ->  JSON
    bath       finite-bath discretization  ->  CSV (+ convergence table)

Configuration comes from ``--config file.json`` with flag overrides; unknown
keys are rejected.  Data outputs are byte-deterministic (fixed float
formatting, no timestamps); run metadata goes to stderr.

Exit codes: 0 ok, 2 configuration error, 3 mathematical divergence,
4 accuracy not met.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import asymptotics, dynamics, embedfit, qrf
from .errors import AccuracyError, DivergenceError
from .quad import QuadConfig
from .spectral import BathSpec, classify

__all__ = ["main", "build_parser"]


class ConfigError(ValueError):
    pass


_SPACINGS = ("linear", "log")


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return data


def _check_keys(obj: dict, allowed: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")


def _bath_from(config: dict, args) -> BathSpec:
    bath_cfg = config.get("bath")
    density_over = {}
    for key, attr in (("kind", "kind"), ("omega_scale", "omega_scale"),
                      ("coupling2", "coupling2"), ("exponent", "exponent")):
        val = getattr(args, attr, None)
        if val is not None:
            density_over[key] = val
    beta_over = getattr(args, "beta", None)
    if bath_cfg is None and (beta_over is None or "kind" not in density_over
                             or "omega_scale" not in density_over):
        raise ConfigError("a bath is required: give --config with a 'bath' object, "
                          "or --beta, --kind and --omega-scale")
    if bath_cfg is None:
        bath_cfg = {"beta": beta_over, "density": density_over}
    else:
        bath_cfg = json.loads(json.dumps(bath_cfg))  # deep copy
        if beta_over is not None:
            bath_cfg["beta"] = beta_over
        bath_cfg.setdefault("density", {}).update(density_over)
    try:
        return BathSpec.from_dict(bath_cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _quad_cfg_from(config: dict, args, b: BathSpec) -> QuadConfig:
    tol = args.tol if args.tol is not None else config.get("tol", 1e-10)
    omega_c = args.omega_c if args.omega_c is not None else config.get("omega_c")
    panels = args.max_panels if args.max_panels is not None else config.get("max_panels", 300)
    try:
        return QuadConfig(
            omega_c=float(omega_c) if omega_c is not None else b.density.omega_scale,
            rel_tol=float(tol),
            max_panels=int(panels),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _grid_from(config: dict, args) -> np.ndarray:
    grid = dict(config.get("grid", {}))
    _check_keys(grid, {"t_min", "t_max", "n_points", "spacing"}, "grid")
    for key, attr in (("t_min", "t_min"), ("t_max", "t_max"),
                      ("n_points", "n_points"), ("spacing", "spacing")):
        val = getattr(args, attr, None)
        if val is not None:
            grid[key] = val
    t_min = float(grid.get("t_min", 0.0))
    t_max = float(grid.get("t_max", 10.0))
    n = int(grid.get("n_points", 101))
    spacing = grid.get("spacing", "linear")
    if spacing not in _SPACINGS:
        raise ConfigError(f"spacing must be one of {_SPACINGS}")
    if n < 1 or t_max <= t_min or t_min < 0.0:
        raise ConfigError("grid requires 0 <= t_min < t_max and n_points >= 1")
    if spacing == "log":
        if t_min <= 0.0:
            raise ConfigError("log spacing requires t_min > 0")
        return np.geomspace(t_min, t_max, n)
    return np.linspace(t_min, t_max, n)


def _open_out(path: str | None):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True


def _emit_json(obj: dict, path: str | None) -> None:
    fh, close = _open_out(path)
    try:
        fh.write(json.dumps(obj, indent=2) + "\n")
    finally:
        if close:
            fh.close()


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


# -- subcommand bodies --------------------------------------------------------

_COMMON_KEYS = {"bath", "tol", "omega_c", "max_panels", "out"}


def _cmd_gamma(config: dict, args) -> int:
    _check_keys(config, _COMMON_KEYS | {"grid"}, "config")
    b = _bath_from(config, args)
    cfg = _quad_cfg_from(config, args, b)
    times = _grid_from(config, args)
    classify(b)  # surfaces divergence before any quadrature runs
    started = time.perf_counter()
    out = args.out if args.out is not None else config.get("out")
    fh, close = _open_out(out)
    try:
        dynamics.write_curve_csv(b, times, fh, cfg)
    finally:
        if close:
            fh.close()
    _info(f"# gamma: {len(times)} points, rel_tol={cfg.rel_tol:g}, "
          f"{time.perf_counter() - started:.2f}s")
    return 0


def _cmd_classify(config: dict, args) -> int:
    _check_keys(config, _COMMON_KEYS, "config")
    b = _bath_from(config, args)
    tol = args.tol if args.tol is not None else config.get("tol", 1e-10)
    reg = classify(b, quad_tol=float(tol))
    k = reg.constants
    report: dict = {"class": reg.regime_class.value, "gamma_lowfreq": reg.gamma_lowfreq}
    for name, val in (("gamma0", k.gamma0), ("alpha", k.alpha), ("A", k.big_a),
                      ("delta", k.delta), ("gamma_infinity", k.gamma_infinity)):
        if val is not None:
            report[name] = val
    report["constant_estimable"] = k.constant_estimable
    _emit_json(report, args.out if args.out is not None else config.get("out"))
    return 0


def _cmd_asymptote(config: dict, args) -> int:
    _check_keys(config, _COMMON_KEYS | {"grid", "t_fit", "format"}, "config")
    b = _bath_from(config, args)
    cfg = _quad_cfg_from(config, args, b)
    times = _grid_from(config, args)
    t_fit = args.t_fit if args.t_fit is not None else config.get("t_fit")
    fmt = args.format if args.format is not None else config.get("format", "json")
    if fmt not in ("json", "csv"):
        raise ConfigError("format must be 'json' or 'csv'")
    started = time.perf_counter()
    report = asymptotics.residual_report(b, times, cfg,
                                         t_fit=float(t_fit) if t_fit is not None else None)
    out = args.out if args.out is not None else config.get("out")
    if fmt == "json":
        _emit_json(report.to_json_dict(), out)
    else:
        fh, close = _open_out(out)
        try:
            report.write_csv(fh)
        finally:
            if close:
                fh.close()
    _info(f"# asymptote: regime={report.regime.regime_class.value}, "
          f"{len(report.rows)} points, {time.perf_counter() - started:.2f}s")
    return 0


def _cmd_qrf(config: dict, args) -> int:
    _check_keys(config, _COMMON_KEYS | {"j", "l", "t", "ladder", "growth_factor"}, "config")
    b = _bath_from(config, args)
    cfg = _quad_cfg_from(config, args, b)

    def ints(text):
        return tuple(int(x) for x in text.split(","))

    def floats(text):
        return tuple(float(x) for x in text.split(","))

    j = ints(args.j) if args.j is not None else tuple(config.get("j", ()))
    l = ints(args.l) if args.l is not None else tuple(config.get("l", ()))
    t = floats(args.times) if args.times is not None else tuple(config.get("t", ()))
    ladder = (floats(args.ladder) if args.ladder is not None
              else tuple(config.get("ladder", (10.0, 30.0, 100.0, 300.0))))
    growth = float(config.get("growth_factor", 1.2))
    if not j or not l or not t:
        raise ConfigError("qrf requires j, l and t (e.g. --j 1,0 --l 0,1 --times 1,1)")
    try:
        spec = qrf.MultiTimeSpec(tuple(int(x) for x in j), tuple(int(x) for x in l),
                                 tuple(float(x) for x in t))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    started = time.perf_counter()
    check = qrf.qrf_check(b, spec, cfg, ladder=ladder, growth_factor=growth)
    report = {
        "n": spec.n,
        "j": list(spec.j),
        "l": list(spec.l),
        "t": list(spec.t),
        "T": spec.big_t,
        "min_t": spec.min_t,
        "gamma0": check.gamma0,
        "ladder": list(ladder),
        "lhs": [r.lhs_exponent for r in check.rungs],
        "rhs": [r.rhs_exponent for r in check.rungs],
        "gamma0T": [r.gamma0_t for r in check.rungs],
        "normalized_dev": {
            "lhs": [r.normalized_lhs for r in check.rungs],
            "rhs": [r.normalized_rhs for r in check.rungs],
        },
        "pass": check.passed,
    }
    _emit_json(report, args.out if args.out is not None else config.get("out"))
    _info(f"# qrf: {len(check.rungs)} rungs, pass={check.passed}, "
          f"{time.perf_counter() - started:.2f}s")
    return 0


def _read_curve_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    ts, ys = [], []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh):
                line = line.strip()
                if not line:
                    continue
                parts = line.split(",")
                try:
                    values = [float(p) for p in parts[:2]]
                except ValueError:
                    if line_no == 0:
                        continue  # header
                    raise ConfigError(f"{path}: malformed row {line_no + 1}: {line!r}")
                if len(values) < 2:
                    raise ConfigError(f"{path}: row {line_no + 1} needs t,value")
                ts.append(values[0])
                ys.append(values[1])
    except OSError as exc:
        raise ConfigError(f"cannot read {path!r}: {exc}") from exc
    if len(ts) < 4:
        raise ConfigError("curve CSV needs at least 4 rows")
    return np.asarray(ts), np.asarray(ys)


def _cmd_embed_fit(config: dict, args) -> int:
    _check_keys(config, _COMMON_KEYS | {"grid", "input", "k_max", "floor", "powers"}, "config")
    source = args.input if args.input is not None else config.get("input")
    if source is not None:
        times, values = _read_curve_csv(source)
    else:
        b = _bath_from(config, args)
        cfg = _quad_cfg_from(config, args, b)
        times = _grid_from(config, args)
        curve = dynamics.dephasing_curve(b, times, cfg)
        values = curve.coherence
    k_max = int(args.k_max if args.k_max is not None else config.get("k_max", embedfit.DEFAULT_K_MAX))
    floor = float(args.floor if args.floor is not None else config.get("floor", embedfit.DEFAULT_FLOOR))
    powers = bool(args.powers or config.get("powers", False))
    started = time.perf_counter()
    try:
        report = embedfit.certify_curve(times, values, K_max=k_max, floor=floor,
                                        powers_allowed=powers)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    _emit_json(report.to_json_dict(), args.out if args.out is not None else config.get("out"))
    _info(f"# embed-fit: K_max={k_max}, verdict={report.verdict}, "
          f"residual={report.max_rel_residual:.3e}, {time.perf_counter() - started:.2f}s")
    return 0


def _cmd_bath(config: dict, args) -> int:
    _check_keys(config, _COMMON_KEYS | {"grid", "n_modes", "omega_max", "table_out"}, "config")
    b = _bath_from(config, args)
    cfg = _quad_cfg_from(config, args, b)
    n_modes = int(args.n_modes if args.n_modes is not None else config.get("n_modes", 1000))
    omega_max = float(args.omega_max if args.omega_max is not None
                      else config.get("omega_max", 20.0 * b.density.omega_scale))
    try:
        fb = dynamics.sample_bath(b.density, n_modes, omega_max)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = args.out if args.out is not None else config.get("out")
    fh, close = _open_out(out)
    try:
        fh.write("omega,g_abs2\n")
        for w, g2 in zip(fb.omegas, fb.g_abs2):
            fh.write(f"{w:.17g},{g2:.17g}\n")
    finally:
        if close:
            fh.close()
    table_out = args.table_out if args.table_out is not None else config.get("table_out")
    if table_out is not None:
        times = _grid_from(config, args)
        classify(b)
        started = time.perf_counter()
        fh, close = _open_out(table_out)
        try:
            fh.write("t,gamma_discrete,gamma_exact,abs_error\n")
            for t in times:
                gn = dynamics.finite_bath_gamma(fb, b.beta, float(t))
                gx = dynamics.gamma_of_t(b, float(t), cfg)
                fh.write(f"{t:.17g},{gn:.17g},{gx:.17g},{abs(gn - gx):.17g}\n")
        finally:
            if close:
                fh.close()
        _info(f"# bath: convergence table {len(times)} points, "
              f"{time.perf_counter() - started:.2f}s")
    _info(f"# bath: {n_modes} modes up to omega_max={omega_max:g}")
    return 0


_COMMANDS = {
    "gamma": _cmd_gamma,
    "classify": _cmd_classify,
    "asymptote": _cmd_asymptote,
    "qrf": _cmd_qrf,
    "embed-fit": _cmd_embed_fit,
    "bath": _cmd_bath,
}


def _beta_type(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dephasing",
        description="Exact qubit pure-dephasing decoherence: curves, long-time laws, "
                    "regression checks, exponential-sum certification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    bath_parent = argparse.ArgumentParser(add_help=False)
    bath_parent.add_argument("--config", help="JSON config file; flags override its keys")
    bath_parent.add_argument("--beta", type=_beta_type,
                             help="inverse temperature (number or 'inf'; default from config)")
    bath_parent.add_argument("--kind", choices=("ohmic_exp", "drude_lorentz", "power_law", "tabulated"),
                             help="spectral density kind")
    bath_parent.add_argument("--omega-scale", dest="omega_scale", type=float,
                             help="cutoff / characteristic frequency Omega")
    bath_parent.add_argument("--coupling2", type=float, help="squared coupling factor (default 1)")
    bath_parent.add_argument("--exponent", type=float,
                             help="low-frequency power of J (power_law kind; default 1)")
    bath_parent.add_argument("--tol", type=float,
                             help="relative quadrature tolerance (default 1e-10)")
    bath_parent.add_argument("--omega-c", dest="omega_c", type=float,
                             help="base head/tail splitting cutoff (default: omega_scale)")
    bath_parent.add_argument("--max-panels", dest="max_panels", type=int,
                             help="adaptive subdivision cap (default 300)")
    bath_parent.add_argument("--out", help="output path (default: stdout)")

    grid_parent = argparse.ArgumentParser(add_help=False)
    grid_parent.add_argument("--t-min", dest="t_min", type=float, help="grid start (default 0)")
    grid_parent.add_argument("--t-max", dest="t_max", type=float, help="grid end (default 10)")
    grid_parent.add_argument("--n-points", dest="n_points", type=int,
                             help="number of grid points (default 101)")
    grid_parent.add_argument("--spacing", choices=_SPACINGS, help="grid spacing (default linear)")

    sub.add_parser("gamma", parents=[bath_parent, grid_parent],
                   help="decoherence curve CSV: t,gamma,abs_coherence,rate")
    sub.add_parser("classify", parents=[bath_parent],
                   help="decoherence regime and constants as JSON")

    p = sub.add_parser("asymptote", parents=[bath_parent, grid_parent],
                       help="exact-vs-law residual report")
    p.add_argument("--t-fit", dest="t_fit", type=float,
                   help="start of the constant-estimation window (default: last 25%% of grid)")
    p.add_argument("--format", choices=("json", "csv"), help="output format (default json)")

    p = sub.add_parser("qrf", parents=[bath_parent],
                       help="multi-time regression-formula scaling check")
    p.add_argument("--j", help="comma-separated bits, e.g. 1,0")
    p.add_argument("--l", help="comma-separated bits, e.g. 0,1")
    p.add_argument("--times", help="comma-separated base times, e.g. 1,1")
    p.add_argument("--ladder", help="comma-separated scale ladder (default 10,30,100,300)")

    p = sub.add_parser("embed-fit", parents=[bath_parent, grid_parent],
                       help="exponential-sum certification of a curve")
    p.add_argument("--input", help="CSV of t,value samples (otherwise bath+grid coherence)")
    p.add_argument("--k-max", dest="k_max", type=int, help="maximum model order (default 8)")
    p.add_argument("--floor", type=float, help="residual floor for the verdict (default 1e-2)")
    p.add_argument("--powers", action="store_true",
                   help="allow polynomial prefactors t^n on clustered rates")

    p = sub.add_parser("bath", parents=[bath_parent, grid_parent],
                       help="midpoint finite-bath discretization CSV")
    p.add_argument("--n-modes", dest="n_modes", type=int, help="number of modes (default 1000)")
    p.add_argument("--omega-max", dest="omega_max", type=float,
                   help="discretization range (default 20 * omega_scale)")
    p.add_argument("--table-out", dest="table_out",
                   help="also write a discrete-vs-exact convergence table to this path")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_json(args.config) if getattr(args, "config", None) else {}
        return _COMMANDS[args.command](config, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except AccuracyError as exc:
        print(f"error: accuracy not met: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
