"""Compile bounded trigonometric polynomials into single-qubit QNN angles.

Target: parameters ``(theta, phi)`` of depth ``2L`` such that
``<0|U(x)|0> = T(x)`` for a degree-``L`` polynomial with ``|T| <= 1``.

With ``w = exp(-ix/2)`` the layer gate ``R_Z(x)`` is ``diag(w, 1/w)``, so a
depth-``D`` circuit is a 2x2 matrix whose entries are Laurent polynomials in
``w`` of degree ``<= D``.  The analytic route:

1. write ``a(z) = T`` in ``z = w**2 = exp(-ix)`` and find ``b(z)`` with
   ``|a|^2 + |b|^2 = 1`` on the unit circle (Fejer-Riesz factorization of
   ``1 - |a|^2``, by root splitting or, as a backup, the FFT cepstrum);
2. form the SU(2)-valued matrix ``[[a, -b*], [b, a*]]``;
3. strip one ``R_Z(x) R_Y(theta_l) R_Z(phi_l)`` layer at a time from the
   right, choosing the rotation that cancels the top and bottom powers;
4. decompose the remaining constant SU(2) matrix as ``R_Z R_Y R_Z``.

If the resulting residual misses the requested tolerance a least-squares
fit over the angles refines it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from jqnn.qnn_params import QnnParams
from jqnn.qsim import gate_ry, gate_rz, single_qubit_amplitudes
from jqnn.trig_core import TrigPoly1D, default_grid, eval_poly

__all__ = [
    "QnnParams",
    "CompileReport",
    "NotBounded",
    "CompileFailed",
    "compile_trig_poly",
    "compile_monomial",
    "verify_params",
    "complete_amplitude",
    "MAX_DEGREE",
]

log = logging.getLogger(__name__)

MAX_DEGREE = 64
CHECK_GRID = 4096
FAIL_RESIDUAL = 1e-4
_EDGE = 1e-9
# |T| = 1 evaluated in floating point can land one ulp above 1
_ROUNDING = 1e-12


class NotBounded(ValueError):
    """Target polynomial exceeds modulus one on the check grid."""


class CompileFailed(RuntimeError):
    """Neither the analytic nor the numerical route reached the failure threshold."""

    def __init__(self, message: str, best_residual: float):
        super().__init__(message)
        self.best_residual = best_residual


@dataclass(frozen=True)
class CompileReport:
    residual: float
    method: str
    grid: int
    completion: str = ""

    def __post_init__(self):
        if self.residual < 0:
            raise ValueError("residual must be nonnegative")
        if self.method not in ("analytic", "optimized"):
            raise ValueError(f"unknown method {self.method!r}")


def verify_params(p: QnnParams, T: TrigPoly1D, G: int = CHECK_GRID) -> float:
    """Sup over a ``G``-point grid of ``|<0|U(x)|0> - T(x)|``."""
    if T.degree > p.depth // 2:
        raise ValueError(f"polynomial degree {T.degree} exceeds depth/2 = {p.depth // 2}")
    x = default_grid(G, 1)
    return float(np.max(np.abs(single_qubit_amplitudes(p, x) - eval_poly(T, x))))


# ---------------------------------------------------------------- completion


def _z_coeffs(T: TrigPoly1D) -> np.ndarray:
    # a(z) = sum_n c_n z^{-n}; index k+L holds the coefficient of z^k
    return T.coeffs[::-1].copy()


def _defect_coeffs(alpha: np.ndarray) -> np.ndarray:
    """Coefficients of ``1 - a(z) conj(a(z))`` on the circle, indices ``-2L..2L``."""
    g = -np.convolve(alpha, np.conj(alpha[::-1]))
    g[(g.size - 1) // 2] += 1.0
    # Hermitian by construction; drop rounding asymmetry
    return 0.5 * (g + np.conj(g[::-1]))


def _laurent_on_circle(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    L = (coeffs.size - 1) // 2
    return np.polyval(coeffs[::-1], z) * z ** (-L)


def _complete_by_roots(alpha: np.ndarray) -> np.ndarray:
    L = (alpha.size - 1) // 2
    g = _defect_coeffs(alpha)
    # z^{2L} g(z) as an ordinary polynomial, highest power first for np.roots
    poly = g[::-1]
    roots = np.roots(poly)
    n_missing = 4 * L - roots.size
    # np.roots drops leading zeros: those roots sit at infinity and are never picked
    order = np.argsort(np.abs(roots))
    inner = roots[order[: 2 * L]]
    if inner.size < 2 * L:
        raise np.linalg.LinAlgError(f"only {roots.size} finite roots ({n_missing} at infinity)")
    monic = np.poly(inner)[::-1]  # ascending powers z^0..z^{2L}
    z = np.exp(1j * default_grid(max(8 * (2 * L + 1), 256), 1))
    prod2 = np.abs(np.polyval(monic[::-1], z)) ** 2
    gz = np.real(_laurent_on_circle(g, z))
    scale = math.sqrt(max(float(np.dot(gz, prod2) / np.dot(prod2, prod2)), 0.0))
    # b(z) = scale * z^{-L} * prod(z - r_i): indices -L..L
    return scale * monic


def _complete_by_cepstrum(alpha: np.ndarray, n_fft: int) -> np.ndarray:
    L = (alpha.size - 1) // 2
    g = _defect_coeffs(alpha)
    z = np.exp(2j * np.pi * np.arange(n_fft) / n_fft)
    gz = np.real(_laurent_on_circle(g, z))
    floor = np.finfo(float).tiny
    cep = np.fft.fft(np.log(np.maximum(gz, floor))) / n_fft
    analytic = np.zeros(n_fft, dtype=complex)
    analytic[0] = 0.5 * cep[0]
    analytic[1 : n_fft // 2] = cep[1 : n_fft // 2]
    h = np.exp(np.fft.ifft(analytic) * n_fft)
    eta = np.fft.fft(h) / n_fft
    return eta[: 2 * L + 1]


def _completion_error(alpha: np.ndarray, beta: np.ndarray, G: int = 2048) -> float:
    z = np.exp(1j * default_grid(G, 1))
    a = _laurent_on_circle(alpha, z)
    b = _laurent_on_circle(beta, z)
    return float(np.max(np.abs(np.abs(a) ** 2 + np.abs(b) ** 2 - 1.0)))


def complete_amplitude(T: TrigPoly1D) -> tuple[np.ndarray, str, float]:
    """Find ``b`` with ``|T|^2 + |b|^2 = 1`` on the circle.

    Returns the coefficients of ``b(z)`` (``z = exp(-ix)``, indices
    ``-L..L``), the method name and the achieved sup-grid defect.
    """
    alpha = _z_coeffs(T)
    L = T.degree
    if L == 0:
        return np.array([math.sqrt(max(1.0 - abs(alpha[0]) ** 2, 0.0))], dtype=complex), "closed", 0.0
    candidates = []
    try:
        beta = _complete_by_roots(alpha)
        candidates.append((_completion_error(alpha, beta), "roots", beta))
    except (np.linalg.LinAlgError, ValueError) as exc:
        log.debug("root completion failed: %s", exc)
    if not candidates or candidates[0][0] > 1e-11:
        n_fft = 1 << max(14, (16 * (2 * L + 1)).bit_length())
        beta = _complete_by_cepstrum(alpha, n_fft)
        candidates.append((_completion_error(alpha, beta), "cepstrum", beta))
    err, name, beta = min(candidates, key=lambda c: c[0])
    return beta, name, err


# ------------------------------------------------------------------- peeling


def _zyz_angles(U: np.ndarray) -> tuple[float, float, float]:
    """``(alpha, beta, gamma)`` with ``U = R_Z(alpha) R_Y(beta) R_Z(gamma)`` for ``U`` in SU(2)."""
    u00, u10 = U[0, 0], U[1, 0]
    beta = 2.0 * math.atan2(abs(u10), abs(u00))
    s = -2.0 * np.angle(u00) if abs(u00) > 1e-14 else 0.0
    dif = 2.0 * np.angle(u10) if abs(u10) > 1e-14 else 0.0
    alpha, gamma = 0.5 * (s + dif), 0.5 * (s - dif)
    R = gate_rz(alpha) @ gate_ry(beta) @ gate_rz(gamma)
    if np.max(np.abs(R + U)) < np.max(np.abs(R - U)):
        alpha += 2.0 * math.pi
    return float(alpha), float(beta), float(gamma)


def _peel(alpha: np.ndarray, beta: np.ndarray) -> QnnParams:
    L = (alpha.size - 1) // 2
    D = 2 * L
    # C[k + D] is the 2x2 coefficient of w^k, k = -D..D
    C = np.zeros((2 * D + 1, 2, 2), dtype=complex)
    for k in range(-L, L + 1):
        idx = 2 * k + D  # z^k = w^{2k}
        C[idx, 0, 0] = alpha[k + L]
        C[idx, 1, 0] = beta[k + L]
        # conj on the circle maps z^k to z^{-k}
        C[D - 2 * k, 0, 1] = -np.conj(beta[k + L])
        C[D - 2 * k, 1, 1] = np.conj(alpha[k + L])
    thetas = np.zeros(D + 1)
    phis = np.zeros(D + 2)
    for l in range(D, 0, -1):
        top, bot = C[D + l], C[D - l]
        M = top.conj().T @ top - bot.conj().T @ bot
        _, vecs = np.linalg.eigh(M)
        v1 = vecs[:, 0]
        th = 2.0 * math.atan2(abs(v1[0]), abs(v1[1]))
        ph = float(np.angle(v1[0]) - np.angle(v1[1])) if min(abs(v1[0]), abs(v1[1])) > 1e-15 else 0.0
        thetas[l], phis[l + 1] = th, ph
        Vdag = (gate_ry(th) @ gate_rz(ph)).conj().T
        C = C @ Vdag
        shifted = np.zeros_like(C)
        shifted[:-1, :, 0] = C[1:, :, 0]  # column 0 times w^{-1}
        shifted[1:, :, 1] = C[:-1, :, 1]  # column 1 times w
        C = shifted
        C[D + l] = 0.0
        C[D - l] = 0.0
    a0, b0, g0 = _zyz_angles(C[D])
    thetas[0] = b0
    phis[0], phis[1] = a0, g0
    return QnnParams(D, thetas, phis).normalized()


# ----------------------------------------------------------------- fallback


def _fit_params(T: TrigPoly1D, start: QnnParams | None, seed: int, n_starts: int) -> tuple[QnnParams, float]:
    D = 2 * T.degree
    G = max(64, 8 * (D + 1))
    x = default_grid(G, 1)
    target = eval_poly(T, x)

    def unpack(v):
        return QnnParams(D, v[: D + 1], v[D + 1 :])

    def resid(v):
        diff = single_qubit_amplitudes(unpack(v), x) - target
        return np.concatenate([diff.real, diff.imag])

    rng = np.random.default_rng(seed)
    starts = []
    if start is not None:
        starts.append(np.concatenate([start.theta, start.phi]))
    while len(starts) < n_starts:
        starts.append(rng.uniform(-np.pi, np.pi, size=2 * D + 3))
    best, best_res = None, math.inf
    for v0 in starts:
        sol = least_squares(resid, v0, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000 * (D + 2))
        cand = unpack(sol.x).normalized()
        r = verify_params(cand, T)
        if r < best_res:
            best, best_res = cand, r
        if best_res < 1e-12:
            break
    return best, best_res


# ---------------------------------------------------------------- public API


def _check_bounded(T: TrigPoly1D) -> float:
    sup = float(np.max(np.abs(eval_poly(T, default_grid(CHECK_GRID, 1)))))
    if sup > 1.0 + _ROUNDING:
        raise NotBounded(f"sup-grid |T| = {sup!r} exceeds 1")
    return sup


def compile_trig_poly(
    T: TrigPoly1D, tol: float = 1e-8, *, seed: int = 0, n_starts: int = 4
) -> tuple[QnnParams, CompileReport]:
    """Angles of a depth-``2L`` QNN whose ``<0|U(x)|0>`` reproduces ``T``.

    Raises :class:`NotBounded` when ``|T| > 1`` somewhere on a 4096-point
    grid and :class:`CompileFailed` when the best residual stays above 1e-4.
    """
    L = T.degree
    if L > MAX_DEGREE:
        raise ValueError(f"degree {L} exceeds the supported maximum {MAX_DEGREE}")
    sup = _check_bounded(T)
    target = T
    if sup > 1.0 - _EDGE:
        target = TrigPoly1D(T.coeffs * (1.0 - _EDGE))

    best, best_res, completion = None, math.inf, ""
    # near the edge the unscaled target is tried as well (exact for |c| = 1 monomials)
    attempts = [target] if target is T else [target, T]
    for tgt in attempts:
        try:
            beta, how, _ = complete_amplitude(tgt)
            cand = _peel(_z_coeffs(tgt), beta)
            res = verify_params(cand, T)
        except (np.linalg.LinAlgError, ValueError, FloatingPointError) as exc:
            log.warning("analytic compile failed for degree %d: %s", L, exc)
            continue
        if res < best_res:
            best, best_res, completion = cand, res, how

    if best_res <= tol:
        return best, CompileReport(best_res, "analytic", CHECK_GRID, completion)

    # fit the unscaled target: the pre-scaling is only needed by the completion
    fitted, fit_res = _fit_params(T, best, seed, n_starts)
    if fit_res < best_res:
        best, best_res, method = fitted, fit_res, "optimized"
    else:
        method = "analytic"
    if best_res > FAIL_RESIDUAL:
        raise CompileFailed(f"degree-{L} compile reached residual {best_res:.3e}", best_res)
    return best, CompileReport(best_res, method, CHECK_GRID, completion)


def compile_monomial(c: complex, n: int, tol: float = 1e-8) -> tuple[QnnParams, CompileReport]:
    """Angles whose amplitude is ``c * exp(i n x)`` (depth ``2|n|``).

    For ``n <= 0`` all interior rotations vanish and the circuit only
    accumulates phase: amplitude ``cos(theta_0/2) exp(-i(phi+phi_0)/2) exp(-i|n|x)``.
    """
    c = complex(c)
    mod = abs(c)
    if mod > 1.0 + 1e-12:
        raise NotBounded(f"|c| = {mod!r} exceeds 1")
    mod = min(mod, 1.0)
    if n > 0:
        return compile_trig_poly(TrigPoly1D.monomial(c, n), tol)
    D = 2 * abs(n)
    theta = np.zeros(D + 1)
    theta[0] = 2.0 * math.acos(mod)
    phi = np.zeros(D + 2)
    phi[0] = -2.0 * (np.angle(c) if mod > 0 else 0.0)
    p = QnnParams(D, theta, phi).normalized()
    res = verify_params(p, TrigPoly1D.monomial(c, n))
    return p, CompileReport(res, "analytic", CHECK_GRID, "closed")
