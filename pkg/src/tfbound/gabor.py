"""Gabor analysis and synthesis on the periodic grid.

Lattice points are (alpha k, beta n) with centred k in a range of K = T/alpha
values and n in a range of N = 1/(beta delta) values, so every sum is finite
and exact.  Coefficients use the convention <f, T_{alpha k} M_{beta n} g>,
which equals e^{2 pi i alpha beta k n} V_g f(alpha k, beta n).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spaces import Constant, Exponent, PowerWeight, Sequence2D, lp_weighted
from .tfr import GridSignal, centered, icdft, stft


class FrameError(RuntimeError):
    """The window does not generate a frame on the requested lattice."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class GaborLattice:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("lattice constants must be positive")

    @property
    def density(self) -> float:
        return self.alpha * self.beta

    def layout(self, f: GridSignal) -> tuple[int, int, int, int]:
        """(a, b, K, N): index strides in time and frequency and lattice sizes."""
        a_f = self.alpha / f.step
        b_f = self.beta * f.L * f.step
        a, b = int(round(a_f)), int(round(b_f))
        if a < 1 or b < 1 or abs(a - a_f) > 1e-9 * a_f or abs(b - b_f) > 1e-9 * b_f:
            raise ValueError("lattice is not grid-compatible: alpha/step and beta*L*step must be integers")
        if f.L % a or f.L % b:
            raise ValueError("lattice strides must divide L")
        return a, b, f.L // a, f.L // b

    def points(self, f: GridSignal) -> tuple[np.ndarray, np.ndarray]:
        _, _, K, N = self.layout(f)
        return centered(K), centered(N)


def analysis_array(f: GridSignal, g: GridSignal, lat: GaborLattice) -> np.ndarray:
    """c[k, n] for centred k (rows) and n (columns)."""
    a, b, K, N = lat.layout(f)
    k, n = lat.points(f)
    c = f.L // 2
    V = stft(f, g).samples[np.ix_(c + a * k, c + b * n)]
    phase = np.exp(2j * np.pi * lat.alpha * lat.beta * np.outer(k, n))
    return phase * V


def gabor_analysis(f: GridSignal, g: GridSignal, lat: GaborLattice) -> Sequence2D:
    arr = analysis_array(f, g, lat)
    k, n = lat.points(f)
    K, N = np.meshgrid(k, n, indexing="ij")
    return Sequence2D(np.column_stack([K.ravel(), N.ravel()]), arr.ravel())


def synthesis_array(c: np.ndarray, gamma: GridSignal, lat: GaborLattice) -> GridSignal:
    """sum_{k,n} c[k, n] T_{alpha k} M_{beta n} gamma."""
    a, b, K, N = lat.layout(gamma)
    c = np.asarray(c, dtype=complex)
    if c.shape != (K, N):
        raise ValueError(f"coefficient array must have shape {(K, N)}")
    L, mid = gamma.L, gamma.L // 2
    k, n = lat.points(gamma)
    spec = np.zeros((K, L), dtype=complex)
    spec[:, mid + b * n] = c * np.exp(-2j * np.pi * lat.alpha * lat.beta * np.outer(k, n))
    mods = L * icdft(spec, axes=1)
    j = np.arange(L)
    shifted = gamma.samples[(j[None, :] - a * k[:, None]) % L]
    return GridSignal(np.sum(mods * shifted, axis=0), gamma.step)


def gabor_synthesis(c: Sequence2D, gamma: GridSignal, lat: GaborLattice) -> GridSignal:
    _, _, K, N = lat.layout(gamma)
    arr = np.zeros((K, N), dtype=complex)
    k, n = c.k[:, 0], c.n[:, 0]
    if np.any((k < -K // 2) | (k >= K - K // 2) | (n < -N // 2) | (n >= N - N // 2)):
        raise ValueError("coefficients outside the torus lattice")
    np.add.at(arr, (k + K // 2, n + N // 2), c.values)
    return synthesis_array(arr, gamma, lat)


def frame_operator(f: GridSignal, g: GridSignal, lat: GaborLattice, gamma: GridSignal | None = None) -> GridSignal:
    """D_gamma C_g f (gamma defaults to g)."""
    return synthesis_array(analysis_array(f, g, lat), g if gamma is None else gamma, lat)


def walnut_bounds(g: GridSignal, alpha: float) -> tuple[float, float]:
    """min and max over the grid of the periodized sum sum_k |g(x - alpha k)|^2."""
    a_f = alpha / g.step
    a = int(round(a_f))
    if a < 1 or abs(a - a_f) > 1e-9 * a_f or g.L % a:
        raise ValueError("alpha is not grid-compatible")
    s = np.sum((np.abs(g.samples) ** 2).reshape(g.L // a, a), axis=0)
    return float(s.min()), float(s.max())


@dataclass
class CGResult:
    solution: GridSignal
    iterations: int
    residual: float
    ritz_min: float
    ritz_max: float


def _ritz_extremes(alphas, betas) -> tuple[float, float]:
    # Lanczos tridiagonal built from the CG coefficients
    n = len(alphas)
    T = np.zeros((n, n))
    for i in range(n):
        T[i, i] = 1 / alphas[i] + (betas[i - 1] / alphas[i - 1] if i else 0.0)
        if i + 1 < n:
            off = np.sqrt(betas[i]) / alphas[i]
            T[i, i + 1] = T[i + 1, i] = off
    ev = np.linalg.eigvalsh(T)
    return float(ev[0]), float(ev[-1])


def solve_frame(g: GridSignal, lat: GaborLattice, rhs: GridSignal, tol: float = 1e-10,
                max_iter: int | None = None) -> CGResult:
    """Conjugate gradients for S x = rhs with S = D_g C_g."""
    max_iter = 8 * g.L if max_iter is None else max_iter
    x = np.zeros(g.L, dtype=complex)
    r = rhs.samples.copy()
    p = r.copy()
    rr = np.vdot(r, r).real
    bnorm = np.sqrt(rr)
    if bnorm == 0:
        return CGResult(GridSignal(x, g.step), 0, 0.0, np.nan, np.nan)
    alphas, betas = [], []
    it = 0
    while it < max_iter and np.sqrt(rr) > tol * bnorm:
        Sp = frame_operator(GridSignal(p, g.step), g, lat).samples
        pSp = np.vdot(p, Sp).real
        if pSp <= 0:
            raise FrameError("frame operator is not positive definite", float(np.sqrt(rr) / bnorm))
        alpha = rr / pSp
        x += alpha * p
        r -= alpha * Sp
        rr_new = np.vdot(r, r).real
        beta = rr_new / rr
        alphas.append(alpha)
        betas.append(beta)
        p = r + beta * p
        rr = rr_new
        it += 1
    res = float(np.sqrt(rr) / bnorm)
    lo, hi = _ritz_extremes(alphas, betas) if alphas else (np.nan, np.nan)
    if alphas and lo <= 0:
        raise FrameError("non-positive Ritz value: frame operator is singular", res)
    if res > tol:
        raise FrameError(f"conjugate gradients did not converge in {max_iter} iterations", res)
    return CGResult(GridSignal(x, g.step), it, res, lo, hi)


def _require_frame(g: GridSignal, lat: GaborLattice) -> None:
    if lat.density > 1 + 1e-12:
        raise FrameError(f"alpha*beta = {lat.density} > 1: no Gabor frame exists at this density")
    A, _ = walnut_bounds(g, lat.alpha)
    if A <= 1e-300:
        raise FrameError("the translates of |g|^2 leave gaps: lower Walnut bound is 0")


def dual_window(g: GridSignal, lat: GaborLattice, tol: float = 1e-10, max_iter: int | None = None) -> GridSignal:
    """Canonical dual window S^{-1} g."""
    lat.layout(g)
    _require_frame(g, lat)
    return solve_frame(g, lat, g, tol, max_iter).solution


def modulation_norm(f: GridSignal, g: GridSignal, lat: GaborLattice, p, q,
                    weight: PowerWeight = Constant()) -> float:
    """Mixed l^{p,q} norm of the Gabor coefficients weighted by m(alpha k, beta n).

    The inner l^p sum runs over the time index k, the outer l^q over n.
    """
    _require_frame(g, lat)
    p, q = Exponent(p), Exponent(q)
    c = analysis_array(f, g, lat)
    k, n = lat.points(f)
    W = weight(lat.alpha * k[:, None], lat.beta * n[None, :])
    mag = np.abs(c) * W
    inner = np.array([lp_weighted(mag[:, j], p) for j in range(mag.shape[1])])
    return lp_weighted(inner, q)


def window(name: str, L: int, step: float | None = None) -> GridSignal:
    """Named windows: "gauss" (L^2-normalized), "cosine" cos(pi t/2) and
    "raised-cosine" cos^2(pi t/2), both supported in |t| < 1.

    With alpha = beta = 1/2 the cosine window gives a tight frame with bound 4.
    """
    if name == "gauss":
        return GridSignal.from_function(lambda t: 2 ** 0.25 * np.exp(-np.pi * t ** 2), L, step)
    if name == "cosine":
        return GridSignal.from_function(lambda t: np.where(np.abs(t) < 1, np.cos(np.pi * t / 2), 0.0), L, step)
    if name == "raised-cosine":
        return GridSignal.from_function(lambda t: np.where(np.abs(t) < 1, np.cos(np.pi * t / 2) ** 2, 0.0), L, step)
    raise ValueError(f"unknown window {name!r}")
