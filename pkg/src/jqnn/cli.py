"""Command-line front end: ``jqnn approx1d|approxnd|experiment|verify``.

Exit codes: 0 success, 1 configuration or input error, 2 compile failure,
3 resource guard exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from jqnn import io
from jqnn.pipeline import (
    EXPERIMENTS,
    MultiQnnModel,
    UniQnnModel,
    abs_sin,
    abs_sin_pow,
    approximate_multivariate,
    approximate_univariate,
    degree_for,
    experiment_target,
    fit_loglog_slope,
    heat_reference,
    run_experiment,
    sup_error,
)
from jqnn.qnn_compile import CompileFailed, NotBounded
from jqnn.qsim import MAX_DENSE_QUBITS, TooLarge, lcu_amplitude_fast, lcu_dense_unitary
from jqnn.trig_core import PeriodicFn, default_grid, eval_poly, r_of_K

log = logging.getLogger("jqnn")

EXIT_OK, EXIT_CONFIG, EXIT_COMPILE, EXIT_GUARD = 0, 1, 2, 3
VERIFY_TOL = 1e-9
BUILTINS = ("abssin", "abssin25", "zero", "cos", "prodcos", "heat")


class ConfigError(ValueError):
    """Invalid command-line configuration or input file."""


@dataclass
class RunConfig:
    command: str
    func: str = "abssin"
    K: tuple[int, ...] = (0,)
    N: tuple[int, ...] = (2,)
    t: float = 0.5
    tol: float = 1e-8
    grid: int | None = None
    out: Path = Path(".")
    seed: int = 0
    max_qubits: int = 24
    dense_check: bool = False
    experiment: str = ""
    model: Path | None = None
    report: Path | None = None
    extra: dict = field(default_factory=dict)


# ------------------------------------------------------------------- parsing


def parse_ints(text: str, name: str) -> tuple[int, ...]:
    """``"3"``, ``"2,4,6"`` or the inclusive range ``"2..7"``."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError("empty range")
            return tuple(range(lo, hi + 1))
        vals = tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"--{name}: cannot parse {text!r} ({exc})") from None
    if not vals:
        raise ConfigError(f"--{name}: empty value")
    return vals


def _from_coeff_file(path: Path) -> PeriodicFn:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"--func: cannot read {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--func: invalid JSON in {path} at byte offset {len(text[: exc.pos].encode())}") from None
    try:
        poly = io.poly_from_dict(data)
    except io.ModelFormatError as exc:
        raise ConfigError(f"--func: {path}: {exc}") from None
    d = int(data["dims"])
    if d == 1:
        return PeriodicFn(lambda x: np.real(eval_poly(poly, x)), 1, name=path.name)
    return PeriodicFn(lambda *xs: np.real(eval_poly(poly, np.stack(np.broadcast_arrays(*xs), axis=-1))), d, name=path.name)


def resolve_function(spec: str, d: int, t: float = 0.5) -> PeriodicFn:
    """Built-in name or path to a trigonometric coefficient file."""
    if spec not in BUILTINS:
        path = Path(spec)
        if path.suffix == ".json" or path.exists():
            f = _from_coeff_file(path)
            if f.dims != d:
                raise ConfigError(f"--func: {path} has dims={f.dims}, command needs d={d}")
            return f
        raise ConfigError(f"--func: unknown function {spec!r}; builtins are {', '.join(BUILTINS)}")
    if spec in ("abssin", "abssin25", "cos") and d != 1:
        raise ConfigError(f"--func: {spec} is univariate; use prodcos, heat, zero or a coefficient file")
    if spec == "abssin":
        return abs_sin()
    if spec == "abssin25":
        return abs_sin_pow(2.5)
    if spec == "cos":
        return PeriodicFn(np.cos, 1, smoothness=math.inf, factors=(np.cos,), name="cos")
    if spec == "zero":
        return PeriodicFn(lambda *xs: np.zeros(np.broadcast(*xs).shape), d, math.inf, name="zero")
    if spec == "prodcos":

        def prodcos(*xs):
            out = np.cos(xs[0])
            for x in xs[1:]:
                out = out * np.cos(x)
            return out

        return PeriodicFn(prodcos, d, math.inf, factors=(np.cos,) * d, name="prodcos")
    if not t > 0:
        raise ConfigError(f"--t must be positive, got {t}")
    return heat_reference(t, d)


def _check_KN(K: Sequence[int], N: Sequence[int]) -> None:
    if any(n < 1 for n in N):
        raise ConfigError(f"--N: every entry must be >= 1, got {','.join(map(str, N))}")
    if any(k < 0 for k in K):
        raise ConfigError(f"--K: every entry must be >= 0, got {','.join(map(str, K))}")


# -------------------------------------------------------------------- output


def _points_csv(model, f: PeriodicFn, G: int) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    g = default_grid(G, f.dims)
    if f.dims == 1:
        w.writerow(["x", "f", "predict"])
        fx, px = f(g), model.predict(g)
        for row in zip(g, fx, px):
            w.writerow([repr(float(v)) for v in row])
    else:
        mesh = np.meshgrid(*([g] * f.dims), indexing="ij")
        pts = np.stack(mesh, axis=-1).reshape(-1, f.dims)
        fx = np.asarray(f(*pts.T)).reshape(-1)
        px = model.predict(pts).reshape(-1)
        w.writerow([f"x{j + 1}" for j in range(f.dims)] + ["f", "predict"])
        for p, a, b in zip(pts, fx, px):
            w.writerow([repr(float(v)) for v in (*p, a, b)])
    return buf.getvalue()


def _model_report(cfg: RunConfig, model, f: PeriodicFn) -> dict:
    G = cfg.grid or (4096 if f.dims == 1 else 256)
    poly_err = sup_error(lambda x: np.real(eval_poly(model.poly, x)), f, G)
    qnn_err = sup_error(model.predict, f, G)
    rep = {
        "command": cfg.command,
        "func": cfg.func,
        "t": cfg.t,
        "grid": G,
        "K": model.K if isinstance(model.K, int) else list(model.K),
        "N": model.N if isinstance(model.N, int) else list(model.N),
        "L": model.L if isinstance(model.L, int) else list(model.L),
        "c": model.c,
        "param_count": model.param_count,
        "poly_sup_error": poly_err,
        "qnn_sup_error": qnn_err,
        "compile_residual": model.residual,
    }
    if isinstance(model, MultiQnnModel):
        rep.update(q=model.q, d=model.d, n_blocks=model.n_blocks, qubits=model.q + model.d)
    return rep


# ------------------------------------------------------------------ commands


def cmd_approx1d(cfg: RunConfig) -> int:
    if len(cfg.K) != 1 or len(cfg.N) != 1:
        raise ConfigError("approx1d takes scalar --K and --N")
    _check_KN(cfg.K, cfg.N)
    f = resolve_function(cfg.func, 1, cfg.t)
    model = approximate_univariate(f, cfg.K[0], cfg.N[0], tol=cfg.tol)
    rep = _model_report(cfg, model, f)
    io.write_atomic(cfg.out / "model.json", io.dumps(io.model_to_dict(model)))
    io.write_atomic(cfg.out / "report.json", io.dumps(rep))
    log.info("approx1d L=%d qnn_sup_error=%.3e", model.L, rep["qnn_sup_error"])
    return EXIT_OK


def cmd_approxnd(cfg: RunConfig) -> int:
    K, N = cfg.K, cfg.N
    d = max(len(K), len(N))
    if d < 2:
        raise ConfigError("approxnd needs vector --K or --N with at least two entries")
    K = K * d if len(K) == 1 else K
    N = N * d if len(N) == 1 else N
    if len(K) != d or len(N) != d:
        raise ConfigError(f"--K and --N lengths disagree ({len(cfg.K)} vs {len(cfg.N)})")
    _check_KN(K, N)
    n_blocks = math.prod(2 * degree_for(n, k) + 1 for n, k in zip(N, K))
    qubits = (n_blocks - 1).bit_length() + d
    if qubits > cfg.max_qubits:
        raise TooLarge(f"circuit needs {qubits} qubits; --max-qubits is {cfg.max_qubits}")
    if cfg.dense_check and qubits > MAX_DENSE_QUBITS:
        raise TooLarge(f"dense check needs {qubits} qubits; guard is {MAX_DENSE_QUBITS}")
    f = resolve_function(cfg.func, d, cfg.t)
    model = approximate_multivariate(f, K, N, tol=cfg.tol)
    rep = _model_report(cfg, model, f)
    if cfg.dense_check:
        x = np.random.default_rng(cfg.seed).uniform(-np.pi, np.pi, d)
        U = lcu_dense_unitary(model.spec, x)
        rep["dense_check_gap"] = abs(complex(U[0, 0]) - lcu_amplitude_fast(model.spec, x))
    io.write_atomic(cfg.out / "model.json", io.dumps(io.model_to_dict(model)))
    io.write_atomic(cfg.out / "report.json", io.dumps(rep))
    log.info("approxnd L=%s q=%d qnn_sup_error=%.3e", model.L, model.q, rep["qnn_sup_error"])
    return EXIT_OK


def cmd_experiment(cfg: RunConfig) -> int:
    name = cfg.experiment
    if name not in EXPERIMENTS:
        raise ConfigError(f"experiment: unknown name {name!r}; expected one of {', '.join(EXPERIMENTS)}")
    N_range, K_range = cfg.extra["N_range"], cfg.extra["K_range"]
    _check_KN(K_range, N_range)
    if name == "heat" and not cfg.t > 0:
        raise ConfigError(f"--t must be positive, got {cfg.t}")
    curve, models = run_experiment(name, N_range, K_range, t=cfg.t, tol=cfg.tol, G=cfg.grid, keep_models=True)
    f = experiment_target(name, cfg.t)
    top = models[(max(N_range), max(K_range))]
    G = cfg.grid or (4096 if f.dims == 1 else 256)
    # below N = 2 r_K the kernel multipliers can exceed one, so the fit
    # window starts there; the fixed N >= 4 fit is kept alongside
    slopes, slopes_n4, windows = {}, {}, {}
    for K in K_range:
        windows[str(K)] = max(4, 2 * r_of_K(K))
        for dest, n_min in ((slopes, windows[str(K)]), (slopes_n4, 4)):
            try:
                dest[str(K)] = fit_loglog_slope(curve, K, N_min=n_min)
            except ValueError:
                dest[str(K)] = None
    rep = {
        "command": "experiment",
        "experiment": name,
        "t": cfg.t,
        "grid": G,
        "N": list(N_range),
        "K": list(K_range),
        "rows": len(curve.rows),
        "slopes": slopes,
        "slope_N_min": windows,
        "slopes_from_N4": slopes_n4,
        "max_compile_residual": max(r.compile_residual for r in curve.rows),
        "points_cell": {"N": max(N_range), "K": max(K_range)},
    }
    io.write_atomic(cfg.out / "errors.csv", curve.to_csv())
    io.write_atomic(cfg.out / "points.csv", _points_csv(top, f, G))
    io.write_atomic(cfg.out / "report.json", io.dumps(rep))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    path = cfg.model
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"verify: cannot read {path}: {exc}") from None
    try:
        model = io.loads_model(text)
    except io.ModelFormatError as exc:
        raise ConfigError(f"verify: {path}: {exc}") from None
    report_path = cfg.report or path.with_name("report.json")
    stored = None
    if report_path.exists():
        try:
            stored = json.loads(report_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"verify: {report_path}: invalid JSON at byte offset {exc.pos}") from None
    func = cfg.func or (stored or {}).get("func")
    if not func:
        raise ConfigError("verify: no --func given and no report to take it from")
    t = cfg.t if cfg.extra.get("t_given") or stored is None else float(stored.get("t", cfg.t))
    d = 1 if isinstance(model, UniQnnModel) else model.d
    f = resolve_function(func, d, t)
    G = cfg.grid or (stored or {}).get("grid") or (4096 if d == 1 else 256)
    fresh = sup_error(model.predict, f, G)
    out = {
        "model": str(path),
        "func": func,
        "grid": G,
        "qnn_sup_error": fresh,
        "roundtrip_identical": io.dumps(io.model_to_dict(model)) == text,
    }
    ok = out["roundtrip_identical"]
    if stored is not None and "qnn_sup_error" in stored:
        out["stored_qnn_sup_error"] = stored["qnn_sup_error"]
        out["deviation"] = abs(fresh - float(stored["qnn_sup_error"]))
        ok = ok and out["deviation"] <= VERIFY_TOL
    out["ok"] = ok
    sys.stdout.write(io.dumps(out))
    return EXIT_OK if ok else EXIT_CONFIG


COMMANDS = {
    "approx1d": cmd_approx1d,
    "approxnd": cmd_approxnd,
    "experiment": cmd_experiment,
    "verify": cmd_verify,
}


# ---------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-8, help="compile residual target")
    common.add_argument("--grid", type=int, default=None, help="reporting grid points per axis")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--t", type=float, default=None, help="time for the heat target")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="jqnn", description="Jackson-operator QNN approximation.")
    sub = p.add_subparsers(dest="command", required=True)

    a1 = sub.add_parser("approx1d", parents=[common], help="single-qubit approximant")
    a1.add_argument("--func", default="abssin")
    a1.add_argument("--K", default="0")
    a1.add_argument("--N", required=True)

    an = sub.add_parser("approxnd", parents=[common], help="multi-qubit LCU approximant")
    an.add_argument("--func", default="prodcos")
    an.add_argument("--K", default="0")
    an.add_argument("--N", required=True)
    an.add_argument("--max-qubits", type=int, default=24)
    an.add_argument("--dense-check", action="store_true", help="compare against the dense unitary")

    ex = sub.add_parser("experiment", parents=[common], help="error sweep over (N, K)")
    ex.add_argument("name")
    ex.add_argument("--N", default=None, help="N values (list or range a..b)")
    ex.add_argument("--K", default=None)
    ex.add_argument("--Nmax", type=int, default=None)
    ex.add_argument("--Kmax", type=int, default=None)

    ve = sub.add_parser("verify", parents=[common], help="reload a model and re-check its error")
    ve.add_argument("model", type=Path)
    ve.add_argument("--func", default=None)
    ve.add_argument("--report", type=Path, default=None)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(
        command=ns.command,
        tol=ns.tol,
        grid=ns.grid,
        out=ns.out,
        seed=ns.seed,
        t=0.5 if ns.t is None else ns.t,
        extra={"t_given": ns.t is not None},
    )
    if not cfg.tol > 0:
        raise ConfigError(f"--tol must be positive, got {cfg.tol}")
    if cfg.grid is not None and cfg.grid < 2:
        raise ConfigError(f"--grid must be >= 2, got {cfg.grid}")
    if ns.command in ("approx1d", "approxnd"):
        cfg.func = ns.func
        cfg.K = parse_ints(ns.K, "K")
        cfg.N = parse_ints(ns.N, "N")
        if ns.command == "approxnd":
            cfg.max_qubits = ns.max_qubits
            cfg.dense_check = ns.dense_check
    elif ns.command == "experiment":
        cfg.experiment = ns.name
        heat = ns.name == "heat"
        if ns.N is not None:
            N_range = parse_ints(ns.N, "N")
        else:
            N_range = tuple(range(1 if not heat else 2, (ns.Nmax or (7 if heat else 20)) + 1))
        if ns.K is not None:
            K_range = parse_ints(ns.K, "K")
        else:
            K_range = tuple(range(0, (ns.Kmax if ns.Kmax is not None else (2 if heat else 5)) + 1))
        if not N_range or not K_range:
            raise ConfigError("experiment: empty N or K range")
        cfg.extra.update(N_range=N_range, K_range=K_range)
    else:
        cfg.model = ns.model
        cfg.report = ns.report
        cfg.func = ns.func
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(message)s")
    stage = ns.command
    try:
        cfg = config_from_args(ns)
        return COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"jqnn {stage}: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CompileFailed, NotBounded) as exc:
        print(f"jqnn {stage}: compile failed: {exc}", file=sys.stderr)
        return EXIT_COMPILE
    except TooLarge as exc:
        print(f"jqnn {stage}: resource guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (ValueError, OSError) as exc:
        print(f"jqnn {stage}: input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
