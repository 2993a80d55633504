"""End-to-end constructions (univariate and LCU multivariate), the
experiment targets, and error/rate measurement."""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from jqnn.qnn_compile import CompileFailed, compile_monomial, compile_trig_poly
from jqnn.qnn_params import QnnParams
from jqnn.qsim import BlockSpec, lcu_amplitudes_fast, lexicographic_box, single_qubit_amplitudes
from jqnn.trig_core import (
    PeriodicFn,
    TrigPoly1D,
    TrigPolyND,
    default_grid,
    eval_poly,
    jackson_approx_1d,
    jackson_approx_nd,
    r_of_K,
    sup_norm_estimate,
)

__all__ = [
    "SAFETY",
    "UniQnnModel",
    "MultiQnnModel",
    "ErrorRow",
    "ErrorCurve",
    "CSV_HEADER",
    "degree_for",
    "approximate_univariate",
    "approximate_multivariate",
    "sup_error",
    "rescale_period",
    "unwrap_period",
    "heat_reference",
    "heat_convolution",
    "heat_truncation",
    "abs_sin",
    "abs_sin_pow",
    "run_experiment",
    "fit_loglog_slope",
]

log = logging.getLogger(__name__)

SAFETY = 1.0 + 1e-6
CSV_HEADER = ("N", "K", "L", "param_count", "poly_sup_error", "qnn_sup_error", "compile_residual")


def degree_for(N: int, K: int) -> int:
    """``L = ceil((K+3)/2) * floor(N/2)``."""
    return r_of_K(K) * (N // 2)


def _zero_params(depth: int) -> QnnParams:
    theta = np.zeros(depth + 1)
    theta[0] = math.pi
    return QnnParams(depth, theta, np.zeros(depth + 2))


@dataclass(frozen=True)
class UniQnnModel:
    K: int
    N: int
    L: int
    c: float
    params: QnnParams
    residual: float = 0.0
    poly: TrigPoly1D | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.params.depth != 2 * self.L:
            raise ValueError(f"params depth {self.params.depth} != 2L = {2 * self.L}")
        if self.c < 0:
            raise ValueError("scaling constant must be nonnegative")

    @property
    def param_count(self) -> int:
        return self.params.n_params

    def amplitude(self, x) -> np.ndarray:
        return single_qubit_amplitudes(self.params, x)

    def predict(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = self.c * np.real(self.amplitude(x.reshape(-1)))
        return out.reshape(x.shape)


@dataclass(frozen=True)
class MultiQnnModel:
    K: tuple[int, ...]
    N: tuple[int, ...]
    L: tuple[int, ...]
    c: float
    spec: BlockSpec
    residual: float = 0.0
    poly: TrigPolyND | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.n_blocks != math.prod(2 * Lj + 1 for Lj in self.L):
            raise ValueError("block count does not match the index box")

    @property
    def d(self) -> int:
        return self.spec.d

    @property
    def q(self) -> int:
        return self.spec.q

    @property
    def n_blocks(self) -> int:
        return self.spec.n_blocks

    @property
    def param_count(self) -> int:
        return sum(p.n_params for blk in self.spec.blocks for p in blk)

    def predict(self, x) -> np.ndarray:
        """``c * 2^q * Re<0|U(x)|0>``; ``x`` has shape ``(..., d)``."""
        x = np.asarray(x, dtype=float)
        lead = x.shape[:-1]
        amp = lcu_amplitudes_fast(self.spec, x.reshape(-1, self.d))
        return (self.c * 2**self.q * np.real(amp)).reshape(lead)


def approximate_univariate(
    f: PeriodicFn, K: int, N: int, *, tol: float = 1e-8, M: int | None = None
) -> UniQnnModel:
    """Single-qubit QNN approximant of ``f`` with depth ``2L``."""
    if f.dims != 1:
        raise ValueError(f"univariate construction needs dims=1, got {f.dims}")
    if N < 1 or K < 0:
        raise ValueError(f"need N >= 1 and K >= 0, got N={N}, K={K}")
    L = degree_for(N, K)
    c = (2 ** (K + 1) - 1) * sup_norm_estimate(f) * SAFETY
    if c == 0.0:
        return UniQnnModel(K, N, L, 0.0, _zero_params(2 * L), 0.0, TrigPoly1D(np.zeros(2 * L + 1), True))
    T = jackson_approx_1d(f, N, K, M)
    target = T.scaled(1.0 / c)
    params, report = compile_trig_poly(target, tol)
    return UniQnnModel(K, N, L, c, params, report.residual, T)


def approximate_multivariate(
    f: PeriodicFn,
    K: Sequence[int],
    N: Sequence[int],
    *,
    tol: float = 1e-8,
    M: Sequence[int] | None = None,
    workers: int | None = None,
) -> MultiQnnModel:
    """LCU multi-qubit QNN approximant; one tensor-product block per index ``n``."""
    d = f.dims
    K, N = tuple(int(k) for k in K), tuple(int(n) for n in N)
    if len(K) != d or len(N) != d:
        raise ValueError(f"K and N must have length d={d}")
    if any(n < 1 for n in N) or any(k < 0 for k in K):
        raise ValueError(f"need N >= 1 and K >= 0, got N={N}, K={K}")
    L = tuple(degree_for(n, k) for n, k in zip(N, K))
    ordering = lexicographic_box(L)
    c = sup_norm_estimate(f) * math.prod(2 ** (k + 1) - 1 for k in K) * SAFETY

    unit: dict[int, QnnParams] = {}
    worst = 0.0
    for m in sorted({n[j] for n in ordering for j in range(1, d)}):
        unit[m], rep = compile_monomial(1.0, m, tol)
        worst = max(worst, rep.residual)

    if c == 0.0:
        poly = TrigPolyND(np.zeros([2 * Lj + 1 for Lj in L]), True)
        heads = [_zero_params(2 * abs(n[0])) for n in ordering]
    else:
        poly = jackson_approx_nd(f, N, K, M)

        def head(n):
            try:
                return compile_monomial(poly.coeff(n) / c, n[0], tol)
            except CompileFailed as exc:
                raise CompileFailed(f"block n={n}: {exc}", exc.best_residual) from exc

        with ThreadPoolExecutor(max_workers=workers or _default_workers()) as pool:
            results = list(pool.map(head, ordering))
        heads = [p for p, _ in results]
        worst = max([worst] + [r.residual for _, r in results])

    blocks = tuple((heads[i],) + tuple(unit[n[j]] for j in range(1, d)) for i, n in enumerate(ordering))
    spec = BlockSpec(tuple(ordering), blocks, d)
    return MultiQnnModel(K, N, L, c, spec, worst, poly)


def _default_workers() -> int:
    env = os.environ.get("JQNN_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _eval_grid(d: int, G: int) -> list[np.ndarray]:
    g = default_grid(G, d)
    if d == 1:
        return [g]
    return np.meshgrid(*([g] * d), indexing="ij")


def sup_error(predict: Callable, f: PeriodicFn, G: int | None = None) -> float:
    """``max |f - predict|`` over the uniform grid (4096 points, or 256 per axis).

    ``predict`` receives the points as an array with a trailing axis of
    length ``d`` when ``d > 1`` and as a flat array when ``d == 1``.
    """
    d = f.dims
    G = G or (4096 if d == 1 else 256)
    mesh = _eval_grid(d, G)
    fx = np.asarray(f(*mesh), dtype=float)
    if d == 1:
        px = np.asarray(predict(mesh[0]))
    else:
        px = np.asarray(predict(np.stack(mesh, axis=-1)))
    return float(np.max(np.abs(fx - px)))


def rescale_period(ftilde: Callable, M: float) -> PeriodicFn:
    """2*pi-periodic ``f(x) = ftilde(M x / (2 pi))`` for an ``M``-periodic ``ftilde``."""
    if not M > 0:
        raise ValueError(f"period M must be positive, got {M}")
    scale = M / (2.0 * math.pi)
    return PeriodicFn(lambda x: ftilde(scale * x), 1, name=f"rescaled(M={M})")


def unwrap_period(predict: Callable, M: float) -> Callable:
    """Map a 2*pi-periodic predictor back to the ``M``-periodic axis."""
    if not M > 0:
        raise ValueError(f"period M must be positive, got {M}")
    scale = 2.0 * math.pi / M
    return lambda s: predict(scale * np.asarray(s, dtype=float))


def abs_sin() -> PeriodicFn:
    return PeriodicFn(lambda x: np.abs(np.sin(x)), 1, smoothness=0.0, name="abssin")


def abs_sin_pow(p: float = 2.5) -> PeriodicFn:
    return PeriodicFn(lambda x: np.abs(np.sin(x)) ** p, 1, smoothness=p, name=f"abssin{p:g}")


def heat_truncation(t: float, tail: float = 1e-10) -> int:
    """Smallest odd cutoff with ``(4/pi) exp(-(trunc+2)^2 t) < tail``."""
    m = 1
    while (4.0 / math.pi) * math.exp(-((m + 2) ** 2) * t) >= tail:
        m += 2
    return m


def heat_reference(t: float, d: int, trunc: int | None = None) -> PeriodicFn:
    """Heat solution at time ``t`` from the odd-square-wave initial condition.

    ``u(t, x) = prod_j u1(t, x_j)`` with
    ``u1(t, s) = sum_{m odd <= trunc} 4/(pi m) exp(-m^2 t) sin(m s)``.
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    trunc = heat_truncation(t) if trunc is None else int(trunc)
    if trunc < 1:
        raise ValueError(f"trunc must be >= 1, got {trunc}")
    ms = np.arange(1, trunc + 1, 2, dtype=float)
    amps = 4.0 / (math.pi * ms) * np.exp(-(ms**2) * t)

    def u1(s):
        s = np.asarray(s, dtype=float)
        return np.sin(np.multiply.outer(s, ms)) @ amps

    def u(*xs):
        out = u1(xs[0])
        for x in xs[1:]:
            out = out * u1(x)
        return out

    return PeriodicFn(u, d, smoothness=math.inf, factors=(u1,) * d, name=f"heat(t={t:g})")


def heat_convolution(t: float, s: float) -> float:
    """``u1(t, s)`` by quadrature of the Gaussian heat kernel against the
    square-wave initial condition on the real line.  Cross-check only."""
    width = 12.0 * math.sqrt(4.0 * t) + math.pi
    lo, hi = s - width, s + width
    k0, k1 = math.floor(lo / math.pi), math.ceil(hi / math.pi)
    total = 0.0
    norm = 1.0 / math.sqrt(4.0 * math.pi * t)
    for k in range(k0, k1):
        a, b = max(k * math.pi, lo), min((k + 1) * math.pi, hi)
        if a >= b:
            continue
        sign = 1.0 if k % 2 == 0 else -1.0
        val, _ = integrate.quad(lambda y: math.exp(-((s - y) ** 2) / (4.0 * t)), a, b, epsabs=1e-14, epsrel=1e-13)
        total += sign * val
    return norm * total


# ------------------------------------------------------------------ curves


@dataclass(frozen=True)
class ErrorRow:
    N: int
    K: int
    L: int
    param_count: int
    poly_sup_error: float
    qnn_sup_error: float
    compile_residual: float

    def __post_init__(self):
        if min(self.poly_sup_error, self.qnn_sup_error, self.compile_residual) < 0:
            raise ValueError("errors must be nonnegative")


@dataclass
class ErrorCurve:
    name: str
    rows: list[ErrorRow] = field(default_factory=list)

    def for_K(self, K: int) -> list[ErrorRow]:
        return sorted((r for r in self.rows if r.K == K), key=lambda r: r.N)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([r.N, r.K, r.L, r.param_count] + [repr(float(v)) for v in (r.poly_sup_error, r.qnn_sup_error, r.compile_residual)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, name: str = "") -> "ErrorCurve":
        reader = csv.reader(io.StringIO(text))
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        rows = [
            ErrorRow(int(a), int(b), int(c), int(d), float(e), float(f_), float(g))
            for a, b, c, d, e, f_, g in reader
        ]
        return cls(name, rows)


EXPERIMENTS = ("fig1", "fig2", "heat")


def experiment_target(name: str, t: float = 0.5) -> PeriodicFn:
    if name in ("fig1", "fig1_abssin"):
        return abs_sin()
    if name in ("fig2", "fig2_abssin25"):
        return abs_sin_pow(2.5)
    if name == "heat":
        return heat_reference(t, 2)
    raise ValueError(f"unknown experiment {name!r}; expected one of {EXPERIMENTS}")


def run_experiment(
    name: str,
    N_range: Sequence[int],
    K_range: Sequence[int],
    *,
    t: float = 0.5,
    tol: float = 1e-8,
    G: int | None = None,
    keep_models: bool = False,
):
    """Sweep ``(N, K)`` and record polynomial and QNN sup errors.

    ``name`` is ``fig1`` (``|sin x|``), ``fig2`` (``|sin x|^2.5``) or
    ``heat`` (two-dimensional heat solution at time ``t``).  Returns the
    curve, plus a dict of models keyed by ``(N, K)`` if ``keep_models``.
    """
    N_range, K_range = list(N_range), list(K_range)
    if not N_range or not K_range:
        raise ValueError("N_range and K_range must be nonempty")
    f = experiment_target(name, t)
    curve = ErrorCurve(name if name != "heat" else f"heat(t={t:g})")
    models = {}
    for K in K_range:
        for N in N_range:
            try:
                if f.dims == 1:
                    model = approximate_univariate(f, K, N, tol=tol)
                    L, cnt = model.L, model.param_count
                    poly_pred = lambda x, m=model: np.real(eval_poly(m.poly, x))
                    res = model.residual
                else:
                    model = approximate_multivariate(f, (K,) * f.dims, (N,) * f.dims, tol=tol)
                    L, cnt = model.L[0], model.param_count
                    poly_pred = lambda x, m=model: np.real(eval_poly(m.poly, x))
                    res = model.residual
            except CompileFailed as exc:
                raise CompileFailed(f"{name} (N={N}, K={K}): {exc}", exc.best_residual) from exc
            row = ErrorRow(
                N, K, L, cnt,
                sup_error(poly_pred, f, G),
                sup_error(model.predict, f, G),
                res,
            )
            log.info("%s N=%d K=%d L=%d err=%.3e", name, N, K, L, row.qnn_sup_error)
            curve.rows.append(row)
            if keep_models:
                models[(N, K)] = model
    return (curve, models) if keep_models else curve


def fit_loglog_slope(curve: ErrorCurve | Sequence[ErrorRow], K: int | None = None, *, N_min: int = 1, which: str = "qnn") -> float:
    """Least-squares slope of ``log(error)`` against ``log(N)``."""
    rows = curve.rows if isinstance(curve, ErrorCurve) else list(curve)
    if K is not None:
        rows = [r for r in rows if r.K == K]
    rows = [r for r in rows if r.N >= N_min]
    attr = "qnn_sup_error" if which == "qnn" else "poly_sup_error"
    N = np.array([r.N for r in rows], dtype=float)
    e = np.array([getattr(r, attr) for r in rows], dtype=float)
    if len(rows) < 4 or np.unique(N).size < 2:
        raise ValueError("need at least 4 rows with distinct N")
    if np.any(e <= 0):
        raise ValueError("errors must be positive for a log-log fit")
    slope, _ = np.polyfit(np.log(N), np.log(e), 1)
    return float(slope)
