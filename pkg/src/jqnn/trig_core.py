"""Fourier analysis and the Jackson approximation operator.

Trigonometric polynomials are stored by their complex exponential
coefficients ``c_n`` on the symmetric index box ``-L <= n <= L``; entry
``coeffs[n + L]`` holds ``c_n``.  Everything in here is a pure function of
its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "PeriodicFn",
    "TrigPoly1D",
    "TrigPolyND",
    "JacksonWeights",
    "dirichlet_sum",
    "fourier_coeff_1d",
    "fourier_coeffs_1d",
    "fourier_coeff_nd",
    "fourier_coeffs_nd",
    "jackson_weights",
    "jackson_kernel",
    "jackson_approx_1d",
    "jackson_approx_nd",
    "jackson_direct_quadrature",
    "eval_poly",
    "sup_norm_estimate",
    "modulus_of_continuity",
    "default_grid",
    "r_of_K",
]

HERMITIAN_TOL = 1e-12
# counts are kept as exact Python ints; this caps them at a signed 128-bit type
_COUNT_MAX = 2**127 - 1


def default_grid(G: int, d: int) -> np.ndarray:
    """Uniform grid ``-pi + 2*pi*m/G``, ``m = 0..G-1`` (same for every axis)."""
    return -np.pi + 2.0 * np.pi * np.arange(G) / G


def r_of_K(K: int) -> int:
    """Kernel power exponent ``ceil((K+3)/2)``."""
    if K < 0:
        raise ValueError(f"K must be nonnegative, got {K}")
    return (K + 4) // 2


@dataclass(frozen=True)
class PeriodicFn:
    """A 2*pi-periodic function of ``dims`` real variables.

    ``evaluator`` is called with ``dims`` broadcastable arrays, one per
    coordinate, and must return an array of the broadcast shape.  When the
    function is a coordinate product, ``factors`` holds the univariate
    factors and enables the separable Fourier fast path.
    """

    evaluator: Callable[..., np.ndarray]
    dims: int = 1
    smoothness: float | None = None
    factors: tuple[Callable[[np.ndarray], np.ndarray], ...] | None = None
    name: str = ""

    def __post_init__(self):
        if self.dims < 1:
            raise ValueError(f"dims must be positive, got {self.dims}")
        if self.factors is not None and len(self.factors) != self.dims:
            raise ValueError("number of separable factors must equal dims")

    def __call__(self, *xs):
        if len(xs) != self.dims:
            raise ValueError(f"expected {self.dims} coordinates, got {len(xs)}")
        return self.evaluator(*[np.asarray(x, dtype=float) for x in xs])

    @property
    def separable(self) -> bool:
        return self.factors is not None

    def factor(self, j: int) -> "PeriodicFn":
        if self.factors is None:
            raise ValueError("function is not declared separable")
        return PeriodicFn(self.factors[j], 1, self.smoothness, name=f"{self.name}[{j}]")

    def check_periodic(self, n_probes: int = 64, seed: int = 0, tol: float = 1e-9) -> bool:
        rng = np.random.default_rng(seed)
        xs = rng.uniform(-np.pi, np.pi, size=(self.dims, n_probes))
        base = np.asarray(self(*xs))
        for j in range(self.dims):
            shifted = xs.copy()
            shifted[j] += 2.0 * np.pi
            if np.max(np.abs(np.asarray(self(*shifted)) - base)) > tol:
                return False
        return True


@dataclass(frozen=True)
class TrigPoly1D:
    coeffs: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if c.size % 2 != 1:
            raise ValueError(f"coefficient array must have odd length 2L+1, got {c.size}")
        if self.hermitian and np.max(np.abs(c - np.conj(c[::-1]))) > HERMITIAN_TOL:
            raise ValueError("coefficients flagged hermitian are not conjugate-symmetric")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return (self.coeffs.size - 1) // 2

    def coeff(self, n: int) -> complex:
        L = self.degree
        if abs(n) > L:
            return 0j
        return complex(self.coeffs[n + L])

    def __call__(self, x):
        return eval_poly(self, x)

    def scaled(self, s: complex) -> "TrigPoly1D":
        herm = self.hermitian and np.isreal(s)
        return TrigPoly1D(self.coeffs * s, herm)

    @classmethod
    def constant(cls, value: complex) -> "TrigPoly1D":
        return cls(np.array([value], dtype=complex), np.isreal(value))

    @classmethod
    def monomial(cls, c: complex, n: int) -> "TrigPoly1D":
        L = abs(n)
        coeffs = np.zeros(2 * L + 1, dtype=complex)
        coeffs[n + L] = c
        return cls(coeffs)


@dataclass(frozen=True)
class TrigPolyND:
    """d-variate polynomial; ``coeffs`` has shape ``(2L_1+1, ..., 2L_d+1)``."""

    coeffs: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim < 1 or any(s % 2 != 1 for s in c.shape):
            raise ValueError(f"every axis must have odd length, got shape {c.shape}")
        if self.hermitian:
            flipped = np.conj(c[(slice(None, None, -1),) * c.ndim])
            if np.max(np.abs(c - flipped)) > HERMITIAN_TOL:
                raise ValueError("coefficients flagged hermitian are not conjugate-symmetric")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def dims(self) -> int:
        return self.coeffs.ndim

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple((s - 1) // 2 for s in self.coeffs.shape)

    def coeff(self, n: Sequence[int]) -> complex:
        L = self.degrees
        if any(abs(nj) > Lj for nj, Lj in zip(n, L)):
            return 0j
        return complex(self.coeffs[tuple(nj + Lj for nj, Lj in zip(n, L))])

    def __call__(self, x):
        return eval_poly(self, x)


@dataclass(frozen=True)
class JacksonWeights:
    """Integer weights of the Jackson operator ``T_{N,K}``.

    ``mtilde`` and ``m_nK`` are exact integer counts indexed
    ``l = -r_K*floor(N/2) .. r_K*floor(N/2)`` (offset by ``half_width``).
    """

    N: int
    K: int
    r_K: int
    mtilde: tuple[int, ...]
    m_nK: tuple[int, ...]
    lam: float = field(repr=False)

    @property
    def half_width(self) -> int:
        return self.r_K * (self.N // 2)

    @property
    def degree(self) -> int:
        return self.half_width

    def mtilde_at(self, l: int) -> int:
        h = self.half_width
        return self.mtilde[l + h] if abs(l) <= h else 0

    def m_at(self, n: int) -> int:
        h = self.half_width
        return self.m_nK[n + h] if abs(n) <= h else 0

    def multipliers(self) -> np.ndarray:
        """``(2*pi/lambda) * m_{n,K}`` as floats, computed from the exact integer ratio."""
        m0 = self.mtilde[self.half_width]
        return np.array([m / m0 for m in self.m_nK], dtype=float)


def dirichlet_sum(a: float, t):
    """Closed form of ``sum_{n=-a}^{a} exp(i n t)`` for ``a`` in ``{0, 1/2, 1, ...}``.

    Real-valued; the removable singularity at ``t = 0`` evaluates to ``2a + 1``.
    Works elementwise on arrays.
    """
    two_a = 2.0 * a
    if two_a < 0 or abs(two_a - round(two_a)) > 1e-12:
        raise ValueError(f"a must be a nonnegative half-integer, got {a}")
    t = np.asarray(t, dtype=float)
    half = np.sin(t / 2.0)
    small = np.abs(half) < 1e-300
    safe = np.where(small, 1.0, half)
    out = np.where(small, two_a + 1.0, np.sin((two_a + 1.0) * t / 2.0) / safe)
    return out if out.ndim else float(out)


def _grid_samples_1d(f: PeriodicFn, M: int) -> tuple[np.ndarray, np.ndarray]:
    x = default_grid(M, 1)
    return x, np.asarray(f(x))


def _dft_rows(ns: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.exp(-1j * np.outer(ns, x)) / x.size


def fourier_coeff_1d(f: PeriodicFn, n: int, M: int) -> complex:
    """Uniform-grid approximation of ``(1/2pi) int e^{-inx} f(x) dx``."""
    if f.dims != 1:
        raise ValueError(f"fourier_coeff_1d needs a univariate function, got dims={f.dims}")
    if M < 4 * (abs(n) + 1):
        raise ValueError(f"grid size M={M} too small for n={n}; need M >= {4 * (abs(n) + 1)}")
    x, fx = _grid_samples_1d(f, M)
    return complex(np.sum(np.exp(-1j * n * x) * fx) / M)


def fourier_coeffs_1d(f: PeriodicFn, L: int, M: int) -> np.ndarray:
    """All coefficients ``n = -L..L`` from one set of ``M`` samples."""
    if f.dims != 1:
        raise ValueError(f"expected a univariate function, got dims={f.dims}")
    if M < 4 * (L + 1):
        raise ValueError(f"grid size M={M} too small for degree {L}; need M >= {4 * (L + 1)}")
    x, fx = _grid_samples_1d(f, M)
    return _dft_rows(np.arange(-L, L + 1), x) @ fx


def _check_nd_args(f: PeriodicFn, n: Sequence[int], M: Sequence[int]) -> None:
    if len(n) != f.dims or len(M) != f.dims:
        raise ValueError(
            f"dimension mismatch: f has dims={f.dims}, n has {len(n)}, M has {len(M)}"
        )
    for nj, Mj in zip(n, M):
        if Mj < 4 * (abs(nj) + 1):
            raise ValueError(f"grid size {Mj} too small for index {nj}")


def fourier_coeffs_nd(f: PeriodicFn, L: Sequence[int], M: Sequence[int]) -> np.ndarray:
    """Coefficient box ``-L <= n <= L`` with shape ``(2L_1+1, ..., 2L_d+1)``.

    Separable functions use the product of univariate coefficients; the
    dense tensor quadrature is limited to ``d <= 3``.
    """
    L = [int(v) for v in L]
    M = [int(v) for v in M]
    _check_nd_args(f, L, M)
    d = f.dims
    if f.separable:
        out = np.ones((), dtype=complex)
        for j in range(d):
            cj = fourier_coeffs_1d(f.factor(j), L[j], M[j])
            out = np.multiply.outer(out, cj)
        return out
    if d > 3:
        raise ValueError("dense tensor quadrature is only supported for d <= 3")
    grids = [default_grid(Mj, 1) for Mj in M]
    samples = np.asarray(f(*np.meshgrid(*grids, indexing="ij")), dtype=complex)
    for j in range(d):
        rows = _dft_rows(np.arange(-L[j], L[j] + 1), grids[j])
        # contract axis j, then move the new axis back into place
        samples = np.moveaxis(np.tensordot(rows, samples, axes=([1], [j])), 0, j)
    return samples


def fourier_coeff_nd(f: PeriodicFn, n: Sequence[int], M: Sequence[int]) -> complex:
    _check_nd_args(f, n, M)
    if f.separable:
        return complex(
            np.prod([fourier_coeff_1d(f.factor(j), n[j], M[j]) for j in range(f.dims)])
        )
    L = [abs(v) for v in n]
    box = fourier_coeffs_nd(f, L, M)
    return complex(box[tuple(nj + Lj for nj, Lj in zip(n, L))])


def _self_convolve_ones(width: int, times: int) -> list[int]:
    base = [1] * width
    out = [1]
    for _ in range(times):
        nxt = [0] * (len(out) + width - 1)
        for i, a in enumerate(out):
            for k in range(width):
                nxt[i + k] += a * base[k]
        out = nxt
    return out


def jackson_weights(N: int, K: int) -> JacksonWeights:
    """Exact counts ``mtilde_l``, ``m_{n,K}`` and the normalizer ``lambda_{N,K}``.

    ``mtilde_l`` counts ``2 r_K``-tuples over the half-integer set
    ``{-h/2, ..., h/2}`` (``h = floor(N/2)``) summing to ``l``.  Shifting each
    entry by ``h/2`` turns this into a ``2 r_K``-fold self-convolution of a
    length ``h+1`` vector of ones.
    """
    if N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    r = r_of_K(K)
    h = N // 2
    mt = _self_convolve_ones(h + 1, 2 * r)
    if max(mt) > _COUNT_MAX:
        raise OverflowError(f"Jackson weight counts overflow the 128-bit range for N={N}, K={K}")
    H = r * h
    assert len(mt) == 2 * H + 1

    def mtilde(l: int) -> int:
        return mt[l + H]

    m_nK = []
    for n in range(-H, H + 1):
        total = 0
        for k in range(1, K + 2):
            if k * abs(n) > H:
                break
            total += (-1) ** (k + 1) * math.comb(K + 1, k) * mtilde(k * abs(n))
        m_nK.append(total)
    if max(abs(v) for v in m_nK) > _COUNT_MAX:
        raise OverflowError(f"m_nK overflow for N={N}, K={K}")
    return JacksonWeights(N, K, r, tuple(mt), tuple(m_nK), 2.0 * math.pi * mt[H])


def jackson_kernel(N: int, K: int, t, weights: JacksonWeights | None = None):
    """Normalized kernel ``J_{N,K}(t)``; integrates to one over ``[-pi, pi]``."""
    w = weights or jackson_weights(N, K)
    return dirichlet_sum((N // 2) / 2.0, t) ** (2 * w.r_K) / w.lam


def _default_M(L: int) -> int:
    return max(4096, 16 * (L + 1))


def _is_real_fn(samples: np.ndarray) -> bool:
    return not np.iscomplexobj(samples) or bool(np.all(np.imag(samples) == 0))


def jackson_approx_1d(f: PeriodicFn, N: int, K: int, M: int | None = None) -> TrigPoly1D:
    """Coefficients of ``T_{N,K} f``: ``(2pi/lambda) m_{n,K} fhat(n)``."""
    w = jackson_weights(N, K)
    L = w.degree
    M = _default_M(L) if M is None else M
    if M < 8 * (L + 1):
        raise ValueError(f"quadrature grid M={M} too small; need M >= {8 * (L + 1)}")
    x, fx = _grid_samples_1d(f, M)
    fhat = _dft_rows(np.arange(-L, L + 1), x) @ fx
    coeffs = w.multipliers() * fhat
    real = _is_real_fn(fx)
    if real:
        # conjugate symmetry holds up to DFT rounding; enforce it exactly
        coeffs = 0.5 * (coeffs + np.conj(coeffs[::-1]))
    return TrigPoly1D(coeffs, hermitian=real)


def jackson_approx_nd(
    f: PeriodicFn,
    N: Sequence[int],
    K: Sequence[int],
    M: Sequence[int] | None = None,
) -> TrigPolyND:
    d = f.dims
    if len(N) != d or len(K) != d:
        raise ValueError(f"dimension mismatch: dims={d}, len(N)={len(N)}, len(K)={len(K)}")
    ws = [jackson_weights(int(Nj), int(Kj)) for Nj, Kj in zip(N, K)]
    L = [w.degree for w in ws]
    if M is None:
        M = [_default_M(Lj) for Lj in L] if f.separable else [max(512, 16 * (Lj + 1)) for Lj in L]
    for Mj, Lj in zip(M, L):
        if Mj < 8 * (Lj + 1):
            raise ValueError(f"quadrature grid {Mj} too small for degree {Lj}")
    fhat = fourier_coeffs_nd(f, L, M)
    mult = np.ones(())
    for w in ws:
        mult = np.multiply.outer(mult, w.multipliers())
    coeffs = mult * fhat
    probe = np.asarray(f(*[np.zeros(1)] * d))
    real = _is_real_fn(probe)
    if real:
        coeffs = 0.5 * (coeffs + np.conj(coeffs[(slice(None, None, -1),) * d]))
    return TrigPolyND(coeffs, hermitian=real)


def jackson_direct_quadrature(f: PeriodicFn, N: int, K: int, x, G: int = 2048) -> np.ndarray:
    """``T_{N,K} f`` at points ``x`` by quadrature of the kernel integral.

    Independent of the coefficient formula: the integrand
    ``J(t) * sum_k (-1)^{k+1} C(K+1,k) f(x + k t)`` is a trigonometric
    polynomial in ``t`` when ``f`` is, so the trapezoid rule on ``G`` points
    is exact for band-limited ``f`` and spectrally accurate otherwise.
    """
    w = jackson_weights(N, K)
    t = default_grid(G, 1)
    J = jackson_kernel(N, K, t, w)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    acc = np.zeros((x.size, G))
    for k in range(1, K + 2):
        acc += (-1) ** (k + 1) * math.comb(K + 1, k) * np.asarray(f(x[:, None] + k * t[None, :]))
    return (2.0 * np.pi / G) * acc @ J


def eval_poly(p: TrigPoly1D | TrigPolyND, x) -> np.ndarray:
    """Direct summation of ``sum_n c_n exp(i n.x)``.

    For a univariate polynomial ``x`` is any array of points.  For a
    d-variate polynomial the last axis of ``x`` has length ``d``.
    """
    if isinstance(p, TrigPoly1D):
        xa = np.asarray(x, dtype=float)
        L = p.degree
        phases = np.exp(1j * np.multiply.outer(xa, np.arange(-L, L + 1)))
        out = phases @ p.coeffs
        return out if out.ndim else complex(out)
    xa = np.asarray(x, dtype=float)
    d = p.dims
    if xa.shape[-1] != d:
        raise ValueError(f"point dimension {xa.shape[-1]} does not match polynomial dims {d}")
    lead = xa.shape[:-1]
    pts = xa.reshape(-1, d)
    # contract one axis at a time: acc[P, n_j, ..., n_d]
    acc = np.broadcast_to(p.coeffs, (pts.shape[0],) + p.coeffs.shape)
    for j in range(d):
        Lj = p.degrees[j]
        ej = np.exp(1j * np.outer(pts[:, j], np.arange(-Lj, Lj + 1)))
        acc = np.einsum("pk,pk...->p...", ej, acc)
    out = acc.reshape(lead)
    return out if out.ndim else complex(out)


def _grid_values(f: Callable, d: int, G: int) -> np.ndarray:
    g = default_grid(G, d)
    if d == 1:
        return np.asarray(f(g))
    return np.asarray(f(*np.meshgrid(*([g] * d), indexing="ij")))


def sup_norm_estimate(f: PeriodicFn, G: int | None = None) -> float:
    """Max of ``|f|`` over the uniform grid; a lower bound of the true sup norm.

    Callers that need a safe upper bound multiply by ``1 + 1e-6``.
    """
    if G is None:
        G = 8192 if f.dims == 1 else 512
    if G**f.dims < 1024:
        raise ValueError(f"grid too coarse for a sup-norm estimate: {G} points per axis")
    return float(np.max(np.abs(_grid_values(f, f.dims, G))))


def modulus_of_continuity(f: PeriodicFn, delta: float, G: int = 4096) -> float:
    """Grid estimate of ``sup_{|t|<delta} sup_x |f(x+t) - f(x)|`` for univariate ``f``."""
    if delta < 0:
        raise ValueError(f"delta must be nonnegative, got {delta}")
    if delta == 0:
        return 0.0
    x = default_grid(G, 1)
    fx = np.asarray(f(x))
    ks = np.arange(1, 41)
    mags = np.concatenate([delta * (1.0 - 2.0**-ks), delta * 2.0**-ks])
    best = 0.0
    for t in np.concatenate([mags, -mags]):
        best = max(best, float(np.max(np.abs(np.asarray(f(x + t)) - fx))))
    return best
