"""Grid models of signals and phase-space fields, STFTs and tau-Wigner distributions.

A signal of length L with step delta is sampled at t_j = (j - L/2) delta and
treated as periodic with period T = L delta.  Frequencies live on the
reciprocal grid with step 1/T.  Transforms use the e^{-2 pi i x xi} kernel
with Riemann-sum scaling, so continuous formulas hold without extra factors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from scipy import fft as sfft
from scipy import signal as ssignal

from .spaces import to_fraction

_REL = 1e-12


def default_step(L: int) -> float:
    """Self-dual step: time and frequency grids coincide."""
    return 1.0 / math.sqrt(L)


def _check_L(L: int) -> None:
    if L < 8 or L & (L - 1):
        raise ValueError(f"L must be a power of two >= 8, got {L}")


def centered(L: int) -> np.ndarray:
    return np.arange(L) - L // 2


def cdft(h: np.ndarray, axes=-1) -> np.ndarray:
    """DFT for arrays indexed by centred grids (index L/2 is the origin)."""
    axes = (axes,) if isinstance(axes, int) else tuple(axes)
    return sfft.fftshift(sfft.fftn(sfft.ifftshift(h, axes=axes), axes=axes), axes=axes)


def icdft(h: np.ndarray, axes=-1) -> np.ndarray:
    axes = (axes,) if isinstance(axes, int) else tuple(axes)
    return sfft.fftshift(sfft.ifftn(sfft.ifftshift(h, axes=axes), axes=axes), axes=axes)


@dataclass(frozen=True)
class GridSignal:
    samples: np.ndarray
    step: float

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=complex)
        if x.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        _check_L(x.size)
        if not self.step > 0:
            raise ValueError("step must be positive")
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "step", float(self.step))

    @classmethod
    def from_function(cls, fn: Callable, L: int, step: Optional[float] = None) -> "GridSignal":
        step = default_step(L) if step is None else step
        return cls(fn(centered(L) * step), step)

    @classmethod
    def zeros(cls, L: int, step: Optional[float] = None) -> "GridSignal":
        return cls(np.zeros(L, complex), default_step(L) if step is None else step)

    @property
    def L(self) -> int:
        return self.samples.size

    @property
    def t(self) -> np.ndarray:
        return centered(self.L) * self.step

    @property
    def period(self) -> float:
        return self.L * self.step

    @property
    def freq_step(self) -> float:
        return 1.0 / self.period

    def same_grid(self, other: "GridSignal") -> bool:
        return self.L == other.L and abs(self.step - other.step) <= _REL * self.step

    def inner(self, other: "GridSignal") -> complex:
        return complex(self.step * np.vdot(other.samples, self.samples))

    def norm(self) -> float:
        return float(np.sqrt(self.step) * np.linalg.norm(self.samples))

    def to_csv(self) -> str:
        rows = ["t,re,im"] + [f"{float(t)!r},{float(v.real)!r},{float(v.imag)!r}"
                              for t, v in zip(self.t, self.samples)]
        return "\n".join(rows) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "GridSignal":
        data = _read_csv(text, ["t", "re", "im"])
        t = data[:, 0]
        if t.size < 2:
            raise ValueError("need at least two samples")
        step = float(t[1] - t[0])
        sig = cls(data[:, 1] + 1j * data[:, 2], step)
        if not np.allclose(t, sig.t, rtol=0, atol=1e-9 * sig.period):
            raise ValueError("t column is not a centred uniform grid")
        return sig


@dataclass(frozen=True)
class GridField2D:
    """Samples F[m, n] = F(x_m, xi_n) on an L x L phase-space grid."""

    samples: np.ndarray
    steps: tuple

    def __post_init__(self):
        a = np.asarray(self.samples, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("samples must be a square array")
        _check_L(a.shape[0])
        dx, dxi = (float(s) for s in self.steps)
        if abs(dxi * a.shape[0] * dx - 1) > 1e-9:
            raise ValueError("frequency step must equal 1/(L * space step)")
        object.__setattr__(self, "samples", a)
        object.__setattr__(self, "steps", (dx, dxi))

    @classmethod
    def from_function(cls, fn: Callable, L: int, step: Optional[float] = None) -> "GridField2D":
        step = default_step(L) if step is None else step
        X, Xi = np.meshgrid(centered(L) * step, centered(L) / (L * step), indexing="ij")
        return cls(fn(X, Xi), (step, 1.0 / (L * step)))

    @property
    def L(self) -> int:
        return self.samples.shape[0]

    @property
    def x(self) -> np.ndarray:
        return centered(self.L) * self.steps[0]

    @property
    def xi(self) -> np.ndarray:
        return centered(self.L) * self.steps[1]

    def norm(self) -> float:
        return float(np.sqrt(self.steps[0] * self.steps[1]) * np.linalg.norm(self.samples))

    def to_csv(self) -> str:
        X, Xi = np.meshgrid(self.x, self.xi, indexing="ij")
        v = self.samples.ravel()
        body = np.column_stack([X.ravel(), Xi.ravel(), v.real, v.imag])
        lines = ["x,xi,re,im"] + [",".join(repr(float(c)) for c in row) for row in body]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "GridField2D":
        data = _read_csv(text, ["x", "xi", "re", "im"])
        L = int(round(math.sqrt(data.shape[0])))
        if L * L != data.shape[0]:
            raise ValueError("field CSV must hold L*L rows")
        vals = (data[:, 2] + 1j * data[:, 3]).reshape(L, L)
        dx = float(data[L, 0] - data[0, 0])
        return cls(vals, (dx, 1.0 / (L * dx)))


def _read_csv(text: str, header: list) -> np.ndarray:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines or [h.strip() for h in lines[0].split(",")] != header:
        raise ValueError(f"expected header {','.join(header)}")
    return np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]], dtype=float).reshape(-1, len(header))


def _require_same(f: GridSignal, g: GridSignal) -> None:
    if not f.same_grid(g):
        raise ValueError("signals live on different grids")


def fourier(f: GridSignal) -> GridSignal:
    """Fourier transform sampled on the reciprocal grid."""
    return GridSignal(f.step * cdft(f.samples), f.freq_step)


def stft(f: GridSignal, g: GridSignal) -> GridField2D:
    """V_g f(x_m, xi_n) = delta sum_j f(t_j) conj(g(t_j - x_m)) e^{-2 pi i t_j xi_n}."""
    _require_same(f, g)
    L, c = f.L, f.L // 2
    m = np.arange(L)
    shifted = g.samples[(m[None, :] - m[:, None] + c) % L]
    V = f.step * cdft(f.samples[None, :] * np.conj(shifted), axes=1)
    return GridField2D(V, (f.step, f.freq_step))


def decimated_indices(L: int, decimation: int) -> np.ndarray:
    """Grid indices kept by ``stft2``: multiples of the decimation factor."""
    return np.arange(0, L, decimation)


def stft2(F: GridField2D, G: GridField2D, decimation: int = 4) -> np.ndarray:
    """STFT of a phase-space field, on a sublattice.

    Returns V[i1, i2, j1, j2] = V_G F(z, zeta) with z = (x[D i1], xi[D i2])
    and zeta on the reciprocal grid at indices (D j1, D j2).
    """
    if F.L != G.L or not np.allclose(F.steps, G.steps, rtol=1e-12):
        raise ValueError("fields live on different grids")
    L, D = F.L, int(decimation)
    if D < 1 or L % D:
        raise ValueError("decimation factor must divide L")
    idx = decimated_indices(L, D)
    c = L // 2
    dA = F.steps[0] * F.steps[1]
    out = np.empty((idx.size,) * 4, dtype=complex)
    Gc = np.conj(G.samples)
    for a, m1 in enumerate(idx):
        g1 = np.roll(Gc, m1 - c, axis=0)
        for b, m2 in enumerate(idx):
            prod = F.samples * np.roll(g1, m2 - c, axis=1)
            out[a, b] = dA * cdft(prod, axes=(0, 1))[np.ix_(idx, idx)]
    return out


def _upsampled(samples: np.ndarray, factor: int) -> np.ndarray:
    return samples if factor == 1 else ssignal.resample(samples, factor * samples.size)


def upsample(f: GridSignal, factor: int) -> GridSignal:
    """Band-limited interpolation onto the grid with step delta/factor (factor a power of two)."""
    return GridSignal(_upsampled(f.samples, factor), f.step / factor)


def interpolate(f: GridSignal, points, periodic: bool = True, chunk: int = 4096) -> np.ndarray:
    """Evaluate the trigonometric interpolant of f at arbitrary real points.

    With ``periodic=False`` the interpolant is cut to the fundamental period
    [-T/2, T/2), which avoids wrap-around when the argument is rescaled.
    """
    pts = np.asarray(points, dtype=float)
    flat = pts.ravel()
    L, T = f.L, f.period
    coef = sfft.fft(sfft.ifftshift(f.samples)) / L
    k = sfft.fftfreq(L, 1.0 / L)
    nyq = np.nonzero(k == -L // 2)[0]
    out = np.empty(flat.size, dtype=complex)
    for lo in range(0, flat.size, chunk):
        x = flat[lo:lo + chunk]
        E = np.exp(2j * np.pi * np.outer(x, k) / T)
        if nyq.size:
            E[:, nyq[0]] = np.cos(np.pi * L * x / T)
        out[lo:lo + chunk] = E @ coef
    if not periodic:
        out[(flat < -T / 2) | (flat >= T / 2)] = 0
    return out.reshape(pts.shape)


def interpolate_affine(f: GridSignal, offsets, slope: float, t, periodic: bool = True) -> np.ndarray:
    """Matrix of interpolant values f(offsets[m] + slope * t[j]).

    The exponentials factor over the affine grid, so this costs one matrix
    product instead of a dense exponential table.
    """
    offsets = np.asarray(offsets, dtype=float)
    t = np.asarray(t, dtype=float)
    L, T = f.L, f.period
    coef = sfft.fft(sfft.ifftshift(f.samples)) / L
    k = sfft.fftfreq(L, 1.0 / L)
    nyq = int(np.nonzero(k == -L // 2)[0][0])
    coef = np.append(coef, coef[nyq] / 2)
    coef[nyq] /= 2
    k = np.append(k, L // 2)
    A = np.exp(2j * np.pi * np.outer(offsets, k) / T) * coef[None, :]
    B = np.exp(2j * np.pi * np.outer(slope * t, k) / T)
    vals = A @ B.T
    if not periodic:
        x = offsets[:, None] + slope * t[None, :]
        vals[(x < -T / 2) | (x >= T / 2)] = 0
    return vals


def _grid_denominator(tau: Fraction, limit: int = 8) -> Optional[int]:
    for P in range(1, limit + 1):
        if (tau * P).denominator == 1:
            return P
    return None


def tau_wigner(f1: GridSignal, f2: GridSignal, tau) -> GridField2D:
    """W_tau(f1, f2)(x, xi) = int f1(x + tau t) conj(f2(x - (1-tau) t)) e^{-2 pi i xi t} dt.

    For tau = k/P with P <= 8 the shifted samples fall on a P-times finer
    grid and are read off an upsampled copy; tau in {0, 1} is exact on the
    original grid and tau = 1/2 uses the half-step grid.  Other tau use the
    trigonometric interpolant directly.
    """
    _require_same(f1, f2)
    tau_f = to_fraction(tau)
    if not 0 <= tau_f <= 1:
        raise ValueError("tau must lie in [0, 1]")
    L, c, step = f1.L, f1.L // 2, f1.step
    rel = centered(L)
    P = _grid_denominator(tau_f)
    if P is not None:
        k = int(tau_f * P)
        u1, u2 = _upsampled(f1.samples, P), _upsampled(f2.samples, P)
        cu, Lu = P * c, P * L
        i1 = (P * rel[:, None] + k * rel[None, :] + cu) % Lu
        i2 = (P * rel[:, None] - (P - k) * rel[None, :] + cu) % Lu
        h = u1[i1] * np.conj(u2[i2])
    else:
        tv = float(tau_f)
        x = rel * step
        h = interpolate_affine(f1, x, tv, x) * np.conj(interpolate_affine(f2, x, -(1 - tv), x))
    W = step * cdft(h, axes=1)
    return GridField2D(W, (step, f1.freq_step))


def tau_wigner_via_stft(f1: GridSignal, f2: GridSignal, tau, oversample: int = 4) -> GridField2D:
    """Independent route: W_tau through an STFT with the dilated, reflected window.

    W_tau(f1,f2)(x, xi) = tau^{-1} e^{2 pi i x xi / tau} V_h f1(x/(1-tau), xi/tau),
    with h(t) = f2(-(1-tau) t / tau).  The STFT integral is summed on a grid
    ``oversample`` times finer than the signal grid because xi/tau reaches
    beyond the signal band; window values come from the trigonometric
    interpolant cut to one period.
    """
    _require_same(f1, f2)
    tv = float(to_fraction(tau))
    if not 0 < tv < 1:
        raise ValueError("tau must lie strictly between 0 and 1")
    lam = (1 - tv) / tv
    fine = upsample(f1, oversample)
    x = f1.t
    xi = centered(f1.L) * f1.freq_step
    t = fine.t
    E = np.exp(-2j * np.pi * np.outer(t, xi / tv))
    window = interpolate_affine(f2, lam * x / (1 - tv), -lam, t, periodic=False)
    V = fine.step * ((fine.samples[None, :] * np.conj(window)) @ E)
    W = np.exp(2j * np.pi * np.outer(x, xi) / tv) * V / tv
    return GridField2D(W, (f1.step, f1.freq_step))


def fourier_of_tau_wigner_check(f1: GridSignal, f2: GridSignal, tau) -> float:
    """max |F W_tau(f1,f2)(z) - e^{-2 pi i tau z1 z2} V_{f2} f1(-z2, z1)| over the grid."""
    _require_same(f1, f2)
    W = tau_wigner(f1, f2, tau)
    dx, dxi = W.steps
    lhs = dx * dxi * cdft(W.samples, axes=(0, 1))
    L, c = f1.L, f1.L // 2
    V = stft(f1, f2).samples
    n = np.arange(L)
    z1 = centered(L) / (L * dx)
    z2 = centered(L) / (L * dxi)
    rhs = np.exp(-2j * np.pi * float(to_fraction(tau)) * np.outer(z1, z2)) * V[(2 * c - n[None, :]) % L, n[:, None]]
    return float(np.max(np.abs(lhs - rhs)))


def chirp(lam: float, L: int, step: Optional[float] = None) -> GridField2D:
    """G_lambda(x, xi) = e^{2 pi i lambda x xi}."""
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    return GridField2D.from_function(lambda X, Xi: np.exp(2j * np.pi * lam * X * Xi), L, step)


def _landing(L: int, scale: Fraction) -> tuple:
    """Central-half indices r whose image scale*r is an integer in the central half."""
    c, q = L // 2, L // 4
    out_src, out_dst = [], []
    for i, r in enumerate(centered(L)):
        y = scale * r
        if -q <= r < q and y.denominator == 1 and -q <= y < q:
            out_src.append(i)
            out_dst.append(int(y) + c)
    return np.array(out_src, dtype=int), np.array(out_dst, dtype=int)


def linear_transform_stft_check(f: Callable, phi: Callable, L_matrix, L: int = 256,
                                step: Optional[float] = None, decimation: int = 4) -> float:
    """max |V_{phi_A} f_A(x, xi) - |det A|^{-1} V_phi f(A x, A^{-T} xi)|.

    Compared where both sides sit on lattice points of the central half of
    the grid, away from the Nyquist edge.

    ``L_matrix`` is a nonzero rational scalar (signals on R) or a 2x2 integer
    matrix with determinant +-1 (fields on R^2, passed as f(x1, x2)).
    """
    A = np.atleast_2d(np.asarray(L_matrix, dtype=object))
    if A.shape == (1, 1):
        lam = to_fraction(A[0, 0])
        if lam == 0:
            raise ValueError("singular transform")
        lv = float(lam)
        fs = GridSignal.from_function(f, L, step)
        ps = GridSignal.from_function(phi, L, fs.step)
        fa = GridSignal.from_function(lambda x: f(lv * x), L, fs.step)
        pa = GridSignal.from_function(lambda x: phi(lv * x), L, fs.step)
        lhs = stft(fa, pa).samples
        rhs = stft(fs, ps).samples / abs(lv)
        sx, dx_ = _landing(L, lam)
        sxi, dxi_ = _landing(L, 1 / lam)
        if sx.size == 0 or sxi.size == 0:
            return 0.0
        diff = lhs[np.ix_(sx, sxi)] - rhs[np.ix_(dx_, dxi_)]
        return float(np.max(np.abs(diff)))
    if A.shape != (2, 2):
        raise ValueError("transform must be 1x1 or 2x2")
    Ai = np.array([[int(v) for v in row] for row in A], dtype=np.int64)
    det = int(round(np.linalg.det(Ai.astype(float))))
    if det == 0:
        raise ValueError("singular transform")
    if abs(det) != 1 or not np.array_equal(Ai, A.astype(np.int64)):
        raise ValueError("2x2 transforms must be integer with determinant +-1")
    inv_t = np.round(np.linalg.inv(Ai.astype(float)).T).astype(np.int64)
    step = default_step(L) if step is None else step
    if abs(step * step * L - 1) > 1e-12:
        raise ValueError("2x2 transforms need the self-dual grid")

    def field(fn):
        return GridField2D.from_function(fn, L, step)

    def apply(fn):
        return lambda X, Y: fn(Ai[0, 0] * X + Ai[0, 1] * Y, Ai[1, 0] * X + Ai[1, 1] * Y)

    lhs = stft2(field(apply(f)), field(apply(phi)), decimation)
    rhs = stft2(field(f), field(phi), decimation)
    n = L // decimation
    half = n // 2
    r = np.arange(n) - half
    R = np.stack(np.meshgrid(r, r, indexing="ij")).reshape(2, -1)
    Z, Wd = Ai @ R, inv_t @ R

    quarter = n // 4

    def flat(P):
        ok = np.all((P >= -quarter) & (P < quarter), axis=0) & np.all((R >= -quarter) & (R < quarter), axis=0)
        return ok, (P[0] + half) * n + (P[1] + half)

    vz, zi = flat(Z)
    vw, wi = flat(Wd)
    lhs2, rhs2 = lhs.reshape(n * n, n * n), rhs.reshape(n * n, n * n)
    diff = lhs2[np.ix_(vz, vw)] - rhs2[np.ix_(zi[vz], wi[vw])]
    return float(np.max(np.abs(diff))) if diff.size else 0.0
