"""Numerical checks that tie the grid transforms and the oracle together.

Three groups live here: identity checks for the transforms, lower bounds for
the best constants of the discrete bilinear forms behind each boundedness
question, and consistency sweeps over the oracle itself.
"""
from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from . import oracle as orc
from .oracle import BmmQuery, BmwQuery, ConvQuery, Outcome
from .spaces import Exponent, INF, lp_weighted, to_fraction
from .tfr import (GridField2D, GridSignal, centered, chirp, default_step, fourier,
                  fourier_of_tau_wigner_check, linear_transform_stft_check, stft, stft2,
                  tau_wigner)

# ------------------------------------------------------------ identities


@dataclass(frozen=True)
class GaussAtom:
    """amp * exp(-pi (x - a)^2 / w^2) e^{2 pi i b x}, with its Fourier transform."""

    a: float = 0.0
    b: float = 0.0
    w: float = 1.0
    amp: float = 1.0

    def f(self, x):
        return self.amp * np.exp(-np.pi * ((x - self.a) / self.w) ** 2) * np.exp(2j * np.pi * self.b * x)

    def fhat(self, xi):
        return (self.amp * self.w * np.exp(-np.pi * (self.w * (xi - self.b)) ** 2)
                * np.exp(-2j * np.pi * self.a * (xi - self.b)))

    def sample(self, L: int, step: float | None = None) -> GridSignal:
        return GridSignal.from_function(self.f, L, step)


DEFAULT_ATOMS = (GaussAtom(0.4, -0.3, 1.0), GaussAtom(-0.5, 0.6, 1.2),
                 GaussAtom(0.2, 0.1, 0.9), GaussAtom(-0.1, -0.4, 1.1))

IDENTITY_TOLERANCES = {
    "rihaczek": 1e-10,
    "stft_of_tau_wigner": 1e-8,
    "fourier_of_tau_wigner": 1e-8,
    "fundamental_identity": 1e-8,
    "linear_transform": 1e-9,
    "chirp_magnitude": 1e-6,
}


@dataclass
class IdentityCheck:
    name: str
    error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.error < self.tolerance)


@dataclass
class IdentityReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {c.name: {"error": c.error, "tolerance": c.tolerance, "passed": c.passed} for c in self.checks}


def _rel(diff: np.ndarray, ref: np.ndarray) -> float:
    peak = float(np.max(np.abs(ref))) if ref.size else 0.0
    err = float(np.max(np.abs(diff))) if diff.size else 0.0
    return err / peak if peak > 0 else err


def rihaczek_error(f1: GaussAtom, f2: GaussAtom, L: int) -> float:
    """W_0(f1, f2)(x, xi) against e^{-2 pi i x xi} f1(x) conj(f2^(xi)) from closed forms."""
    s1, s2 = f1.sample(L), f2.sample(L)
    W = tau_wigner(s1, s2, 0)
    X, Xi = np.meshgrid(W.x, W.xi, indexing="ij")
    ref = np.exp(-2j * np.pi * X * Xi) * f1.f(X) * np.conj(f2.fhat(Xi))
    return float(np.max(np.abs(W.samples - ref)))


def stft_of_tau_wigner_error(atoms: Sequence[GaussAtom], tau, L: int = 256, decimation: int = 16) -> float:
    """Factorization of the STFT of W_tau(f1, f2) with window W_tau(g1, g2).

    Compared on a decimated lattice wherever every shifted argument stays on
    the grid; reported relative to the peak of the left side.
    """
    f1, f2, g1, g2 = (a.sample(L) for a in atoms)
    tv = float(to_fraction(tau))
    F = tau_wigner(f1, f2, tau)
    G = tau_wigner(g1, g2, tau)
    lhs = stft2(F, G, decimation)
    V1, V2 = stft(f1, g1).samples, stft(f2, g2).samples
    c = L // 2
    dx, dxi = F.steps
    r = np.arange(0, L, decimation) - c
    R1, R2, S1, S2 = np.meshgrid(r, r, r, r, indexing="ij")
    a1, b1 = R1 - tv * S2, R2 + (1 - tv) * S1
    a2, b2 = R1 + (1 - tv) * S2, R2 - tv * S1
    args = np.stack([a1, b1, a2, b2])
    ok = np.all((np.abs(args - np.round(args)) < 1e-9) & (np.abs(args) < c), axis=0)
    ia = [np.round(v[ok]).astype(int) + c for v in (a1, b1, a2, b2)]
    rhs = (np.exp(-2j * np.pi * (R2[ok] * dxi) * (S2[ok] * dx))
           * V1[ia[0], ia[1]] * np.conj(V2[ia[2], ia[3]]))
    return _rel(lhs[ok] - rhs, lhs)


def fundamental_identity_error(f: GaussAtom, g: GaussAtom, L: int, stft_fn: Callable = stft) -> float:
    """V_g f(x, xi) = e^{-2 pi i x xi} V_{g^} f^(xi, -x), relative to the peak."""
    fs, gs = f.sample(L), g.sample(L)
    lhs = stft_fn(fs, gs).samples
    Vh = stft_fn(fourier(fs), fourier(gs)).samples
    c = L // 2
    m = np.arange(L)
    x = centered(L) * fs.step
    xi = centered(L) * fs.freq_step
    rhs = np.exp(-2j * np.pi * np.outer(x, xi)) * Vh[m[None, :], (2 * c - m[:, None]) % L]
    return _rel(lhs - rhs, lhs)


def chirp_magnitude_error(L: int = 256, decimation: int = 16) -> float:
    """|V_Phi G_1| against 2^{-1/2} e^{-pi/2 (z1 - zeta2)^2} e^{-pi/2 (z2 - zeta1)^2}.

    Phi is the 2D Gaussian e^{-pi(x^2 + xi^2)}.  The torus wraps the chirp,
    so only the central quarter of every index is compared.
    """
    G = chirp(1.0, L)
    Phi = GridField2D.from_function(lambda X, Xi: np.exp(-np.pi * (X ** 2 + Xi ** 2)), L)
    V = stft2(G, Phi, decimation)
    dx, dxi = G.steps
    c = L // 2
    r = np.arange(0, L, decimation) - c
    R1, R2, S1, S2 = np.meshgrid(r, r, r, r, indexing="ij")
    z1, z2, w1, w2 = R1 * dx, R2 * dxi, S1 * dxi, S2 * dx
    ref = 2 ** -0.5 * np.exp(-np.pi / 2 * (z1 - w2) ** 2) * np.exp(-np.pi / 2 * (z2 - w1) ** 2)
    q = L // 4
    keep = (np.abs(R1) < q) & (np.abs(R2) < q) & (np.abs(S1) < q) & (np.abs(S2) < q)
    return _rel(np.abs(V[keep]) - ref[keep], ref[keep])


def identity_suite(L: int = 256, decimation: int = 16, atoms: Sequence[GaussAtom] = DEFAULT_ATOMS,
                   stft_fn: Callable = stft, zero: bool = False) -> IdentityReport:
    """Run the six transform identities.

    ``zero`` replaces the test signals by zeros (every error must then be 0).
    ``stft_fn`` lets a deliberately broken STFT be injected as a negative control.
    """
    if zero:
        atoms = tuple(GaussAtom(a.a, a.b, a.w, 0.0) for a in atoms)
    f1, f2 = atoms[0], atoms[1]
    errs = {}
    errs["rihaczek"] = rihaczek_error(f1, f2, L)
    errs["stft_of_tau_wigner"] = max(stft_of_tau_wigner_error(atoms, tau, L, decimation)
                                     for tau in (0, Fraction(1, 2), 1))
    s1, s2 = f1.sample(L), f2.sample(L)
    errs["fourier_of_tau_wigner"] = max(fourier_of_tau_wigner_check(s1, s2, tau)
                                        for tau in (0, Fraction(1, 2), 1))
    errs["fundamental_identity"] = fundamental_identity_error(f1, f2, L, stft_fn)
    errs["linear_transform"] = max(linear_transform_stft_check(f1.f, f2.f, lam, L)
                                   for lam in (2, -1, Fraction(1, 2)))
    errs["chirp_magnitude"] = 0.0 if zero else chirp_magnitude_error(L, decimation)
    return IdentityReport([IdentityCheck(k, v, IDENTITY_TOLERANCES[k]) for k, v in errs.items()])


# --------------------------------------------------------------- energy


def moyal_ratio(f: GridSignal, g: GridSignal) -> float:
    """||V_g f||_2^2 / (||f||_2 ||g||_2)^2 on the grid."""
    V = stft(f, g)
    e = V.steps[0] * V.steps[1] * np.sum(np.abs(V.samples) ** 2)
    return float(e / (f.norm() * g.norm()) ** 2)


def stft_direct(f: GridSignal, g: GridSignal) -> np.ndarray:
    """The STFT by explicit summation with a DFT matrix; an oracle for ``stft``."""
    L, c = f.L, f.L // 2
    t = f.t
    xi = centered(L) * f.freq_step
    E = np.exp(-2j * np.pi * np.outer(t, xi))
    out = np.empty((L, L), dtype=complex)
    for m in range(L):
        shifted = g.samples[(np.arange(L) - m + c) % L]
        out[m] = f.step * (f.samples * np.conj(shifted)) @ E
    return out


def moyal_ratio_direct(f: GridSignal, g: GridSignal) -> float:
    V = stft_direct(f, g)
    e = f.step * f.freq_step * np.sum(np.abs(V) ** 2)
    return float(e / (f.norm() * g.norm()) ** 2)


def random_gaussian_pair(rng: np.random.Generator, L: int) -> tuple[GridSignal, GridSignal]:
    """Two random sums of shifted, modulated Gaussians well inside the grid."""
    out = []
    for _ in range(2):
        m = int(rng.integers(1, 4))
        coef = rng.normal(size=m) + 1j * rng.normal(size=m)
        at = [GaussAtom(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.7, 1.4)) for _ in range(m)]
        out.append(GridSignal.from_function(lambda x, at=at, coef=coef: sum(c * a.f(x) for c, a in zip(coef, at)), L))
    return out[0], out[1]


@dataclass
class MoyalReport:
    ratios: list
    direct: list
    max_deviation: float
    max_oracle_gap: float

    @property
    def passed(self) -> bool:
        return self.max_deviation < 1e-6 and self.max_oracle_gap < 1e-9


def moyal_check(n_pairs: int = 50, L: int = 128, seed: int = 0, direct_pairs: int = 5) -> MoyalReport:
    """Energy identity for random pairs; the first ``direct_pairs`` are also summed directly."""
    rng = np.random.default_rng(seed)
    ratios, direct = [], []
    for i in range(n_pairs):
        f, g = random_gaussian_pair(rng, L)
        ratios.append(moyal_ratio(f, g))
        if i < direct_pairs:
            direct.append(moyal_ratio_direct(f, g))
    dev = max(abs(r - 1) for r in ratios)
    gap = max((abs(a - b) for a, b in zip(ratios, direct)), default=0.0)
    return MoyalReport(ratios, direct, dev, gap)


def wigner_l2_boundedness_demo(L: int = 128, n_pairs: int = 50, seed: int = 0) -> dict:
    """||W_{1/2}(f, g)||_2 / (||f|| ||g||): random pairs plus two fixed cases.

    The fixed cases are f = g = Gaussian and an even/odd (orthogonal) pair.
    A zero g makes the ratio undefined and is reported as skipped.
    """
    rng = np.random.default_rng(seed)
    half = Fraction(1, 2)

    def ratio(f, g):
        return tau_wigner(f, g, half).norm() / (f.norm() * g.norm())

    ratios = [ratio(*random_gaussian_pair(rng, L)) for _ in range(n_pairs)]
    gauss = GridSignal.from_function(lambda x: np.exp(-np.pi * x ** 2), L)
    odd = GridSignal.from_function(lambda x: x * np.exp(-np.pi * x ** 2), L)
    return {"max_ratio": float(max(ratios)), "min_ratio": float(min(ratios)),
            "max_deviation": float(max(abs(r - 1) for r in ratios)),
            "gaussian_ratio": float(ratio(gauss, gauss)),
            "even_odd_ratio": float(ratio(gauss, odd)),
            "zero_window": "skipped: ratio undefined"}


# ------------------------------------------------- bilinear form search
#
# Every boundedness question reduces to a discrete bilinear inequality on
# nonnegative sequences indexed by Z^2 (d = 1).  Candidates are truncated to
# [-N, N]^2; the best ratio found is a lower bound for the true constant.

@dataclass(frozen=True)
class Factor:
    """1D weight <c k>^s."""

    s: float = 0.0
    c: float = 1.0

    def __call__(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        return (1.0 + (self.c * k) ** 2) ** (self.s / 2)


@dataclass(frozen=True)
class Form:
    """One bilinear inequality.

    kind "product":  ||(sum_k |a_k b_{n-k}|^p)^{1/p}||_{l^q_W} <= C ||a|| ||b||
    kind "endpoint": ||(sum_{k1,k2} |a_{n1,k1} b_{k2,n2}|^p)^{1/p}||_{l^q_W} <= C ||a|| ||b||
    kind "conv":     ||a * b||_{l^q_W} <= C ||a|| ||b||  on Z

    Input norms are l^{pa,qa} with the inner sum over the first index.
    ``target_radial`` is the exponent of a radial <n>^s target; otherwise
    the target is the separable product of ``target``.
    """

    kind: str
    p: Exponent
    q: Exponent
    pa: Exponent
    qa: Exponent
    wa: tuple
    pb: Exponent
    qb: Exponent
    wb: tuple
    target: tuple = (Factor(), Factor())
    target_radial: Optional[float] = None


def form_for(query) -> Form:
    """The discrete inequality equivalent to a query (d = 1 only)."""
    if query.d != 1:
        raise ValueError("the harness works in dimension d = 1")
    f = float
    if isinstance(query, ConvQuery):
        return Form("conv", INF, query.q, query.q1, INF, (Factor(f(query.s1)), Factor()),
                    query.q2, INF, (Factor(f(query.s2)), Factor()), (Factor(f(query.s)), Factor()))
    wa = (Factor(f(query.s1)), Factor(f(query.t1)))
    wb = (Factor(f(query.s2)), Factor(f(query.t2)))
    if isinstance(query, BmmQuery):
        s = f(query.s)
        return Form("product", query.p, query.q, query.p1, query.q1, wa, query.p2, query.q2, wb,
                    target_radial=s if s else None)
    tau = Fraction(query.tau)
    target = (Factor(f(query.s)), Factor(f(query.t)))
    if tau == 0:
        return Form("endpoint", query.p, query.q, query.p1, query.q1, wa, query.p2, query.q2, wb, target)
    if tau == 1:
        return Form("endpoint", query.p, query.q, query.p2, query.q2, wb, query.p1, query.q1, wa, target)
    tv = f(tau)
    wbt = (Factor(f(query.s2), (1 - tv) / tv), Factor(f(query.t2), tv / (1 - tv)))
    tt = (Factor(f(query.s), 1 - tv), Factor(f(query.t), tv))
    return Form("product", query.p, query.q, query.p1, query.q1, wa, query.p2, query.q2, wbt, tt)


@dataclass
class Sep:
    """a[i, j] = u[i] v[j] on [-N, N]^2."""

    u: np.ndarray
    v: np.ndarray


@dataclass
class Sparse:
    pts: np.ndarray
    vals: np.ndarray

    def dense(self, N: int) -> np.ndarray:
        out = np.zeros((2 * N + 1, 2 * N + 1))
        np.add.at(out, (self.pts[:, 0] + N, self.pts[:, 1] + N), self.vals)
        return out


def _dense(x, N: int) -> np.ndarray:
    return np.outer(x.u, x.v) if isinstance(x, Sep) else x.dense(N)


def profiles(N: int) -> list:
    """Nonnegative 1D test profiles on [-N, N]."""
    k = np.arange(-N, N + 1)
    out = []

    def atom(j):
        e = np.zeros(2 * N + 1)
        e[j + N] = 1.0
        return e

    out += [("atom0", atom(0)), ("atom+N", atom(N)), ("atom-N", atom(-N))]
    M = 1
    while M <= N:
        out.append((f"box{M}", (np.abs(k) <= M).astype(float)))
        M *= 2
    out.append(("half", (k >= 0).astype(float)))
    for th in (0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0):
        out.append((f"decay{th}", (1.0 + k ** 2) ** (-th / 2)))
    return out


def candidates(N: int, seed: int, kind: str) -> list:
    """(label, a, b) pairs: axis, cross, atom, product, diagonal and random sparse families."""
    P = profiles(N)
    d0 = P[0][1]
    out = []
    if kind == "conv":
        for (nu, u), (nv, v) in itertools.product(P, P):
            out.append((f"{nu}|{nv}", u, v))
        rng = np.random.default_rng([seed, N, 1])
        for r in range(200):
            a = np.zeros(2 * N + 1)
            b = np.zeros(2 * N + 1)
            for x in (a, b):
                m = int(rng.integers(1, 9))
                x[rng.integers(0, 2 * N + 1, m)] = 10 ** rng.uniform(-2, 0, m)
            out.append((f"random{r}", a, b))
        return out
    for (nu, u), (nv, v) in itertools.product(P, P):
        out.append((f"axis1:{nu}|{nv}", Sep(u, d0), Sep(v, d0)))
        out.append((f"axis2:{nu}|{nv}", Sep(d0, u), Sep(d0, v)))
        out.append((f"cross12:{nu}|{nv}", Sep(u, d0), Sep(d0, v)))
        out.append((f"cross21:{nu}|{nv}", Sep(d0, u), Sep(v, d0)))
        out.append((f"a-atom:{nu}x{nv}", Sep(d0, d0), Sep(u, v)))
        out.append((f"b-atom:{nu}x{nv}", Sep(u, v), Sep(d0, d0)))
        out.append((f"same:{nu}x{nv}", Sep(u, v), Sep(u, v)))
        out.append((f"flip:{nu}x{nv}", Sep(u, v), Sep(u[::-1], v[::-1])))
    k = np.arange(-N, N + 1)
    diag = np.column_stack([k, k])
    anti = np.column_stack([k, -k])
    for (nu, u), (nv, v) in itertools.product(P, P):
        su, sv = u > 0, v > 0
        out.append((f"diag:{nu}|{nv}", Sparse(diag[su], u[su]), Sparse(diag[sv], v[sv])))
        out.append((f"anti:{nu}|{nv}", Sparse(anti[su], u[su]), Sparse(anti[sv], v[sv])))
    for nu, u in P:
        su = u > 0
        out.append((f"diag-atom:{nu}", Sparse(diag[su], u[su]), Sep(d0, d0)))
        out.append((f"atom-diag:{nu}", Sep(d0, d0), Sparse(diag[su], u[su])))
    rng = np.random.default_rng([seed, N])
    for r in range(200):
        seqs = []
        for _ in range(2):
            m = int(rng.integers(1, 9))
            pts = np.unique(rng.integers(-N, N + 1, size=(m, 2)), axis=0)
            seqs.append(Sparse(pts, 10 ** rng.uniform(-2, 0, len(pts))))
        out.append((f"random{r}", seqs[0], seqs[1]))
    return out


def _pow(x: np.ndarray, p: Exponent) -> np.ndarray:
    return x if p.is_inf else x ** p.value


def _root(x: np.ndarray, p: Exponent) -> np.ndarray:
    return x if p.is_inf else np.maximum(x, 0) ** (1 / p.value)


def _conv1d(u: np.ndarray, v: np.ndarray, p: Exponent) -> np.ndarray:
    """sum_k u_k^p v_{n-k}^p (max for p = inf), before the 1/p root."""
    if not p.is_inf:
        return np.convolve(u ** p.value, v ** p.value)
    M = np.outer(u, v)[:, ::-1]
    n = u.size + v.size - 1
    return np.array([np.max(np.diagonal(M, off)) for off in range(v.size - 1, v.size - 1 - n, -1)])


def _sep_norm(x: Sep, p: Exponent, q: Exponent, w: tuple, k: np.ndarray) -> float:
    return lp_weighted(x.u, p, w[0](k)) * lp_weighted(x.v, q, w[1](k))


def _sparse_norm(x: Sparse, p: Exponent, q: Exponent, w: tuple) -> float:
    vals = np.abs(x.vals) * w[0](x.pts[:, 0])
    cols, inv = np.unique(x.pts[:, 1], return_inverse=True)
    if p.is_inf:
        inner = np.zeros(cols.size)
        np.maximum.at(inner, inv, vals)
    else:
        scale = vals.max() if vals.size else 1.0
        scale = scale or 1.0
        inner = scale * np.bincount(inv, (vals / scale) ** p.value, cols.size) ** (1 / p.value)
    return lp_weighted(inner, q, w[1](cols))


def _input_norm(x, p, q, w, N) -> float:
    k = np.arange(-N, N + 1)
    return _sep_norm(x, p, q, w, k) if isinstance(x, Sep) else _sparse_norm(x, p, q, w)


class Evaluator:
    """Ratios of one form at one truncation, with per-profile caching."""

    def __init__(self, form: Form, N: int):
        self.form, self.N = form, N
        n = np.arange(-2 * N, 2 * N + 1)
        self.n = n
        if form.target_radial is not None:
            self.W2 = (1.0 + n[:, None] ** 2 + n[None, :] ** 2) ** (form.target_radial / 2)
        else:
            self.W2 = None

    def lhs(self, a, b) -> float:
        f = self.form
        if f.kind == "conv":
            return lp_weighted(_conv1d(a, b, Exponent(1)), f.q, f.target[0](self.n))
        if f.kind == "endpoint":
            return self._endpoint(a, b)
        if isinstance(a, Sep) and isinstance(b, Sep):
            C1 = _root(_conv1d(a.u, b.u, f.p), f.p)
            C2 = _root(_conv1d(a.v, b.v, f.p), f.p)
            if self.W2 is None:
                return (lp_weighted(C1, f.q, f.target[0](self.n))
                        * lp_weighted(C2, f.q, f.target[1](self.n)))
            return lp_weighted(np.outer(C1, C2), f.q, self.W2)
        return lp_weighted(_root(self._inner_dense(a, b), f.p), f.q, self._target_grid())

    def _target_grid(self) -> np.ndarray:
        if self.W2 is not None:
            return self.W2
        return np.outer(self.form.target[0](self.n), self.form.target[1](self.n))

    def _inner_dense(self, a, b) -> np.ndarray:
        """sum_k |a_k b_{n-k}|^p on [-2N, 2N]^2 when at least one input is sparse."""
        p, N = self.form.p, self.N
        if isinstance(a, Sep):
            a, b = b, a
        out = np.zeros((4 * N + 1, 4 * N + 1))
        if isinstance(b, Sparse):
            n = (a.pts[:, None, :] + b.pts[None, :, :]).reshape(-1, 2) + 2 * N
            v = np.abs(np.outer(a.vals, b.vals)).ravel()
            if p.is_inf:
                np.maximum.at(out, (n[:, 0], n[:, 1]), v)
            else:
                np.add.at(out, (n[:, 0], n[:, 1]), v ** p.value)
            return out
        B = _pow(_dense(b, N), p)
        for (k1, k2), val in zip(a.pts, np.abs(a.vals)):
            sl = out[k1 + N:k1 + 3 * N + 1, k2 + N:k2 + 3 * N + 1]
            if p.is_inf:
                np.maximum(sl, val * B, out=sl)
            else:
                sl += val ** p.value * B
        return out

    def _endpoint(self, a, b) -> float:
        f, N = self.form, self.N
        k = np.arange(-N, N + 1)
        if isinstance(a, Sep):
            A = a.u * lp_weighted(a.v, f.p)
        else:
            A = np.array([lp_weighted(r, f.p) for r in a.dense(N)])
        if isinstance(b, Sep):
            B = b.v * lp_weighted(b.u, f.p)
        else:
            B = np.array([lp_weighted(c, f.p) for c in b.dense(N).T])
        return lp_weighted(A, f.q, f.target[0](k)) * lp_weighted(B, f.q, f.target[1](k))

    def rhs(self, a, b) -> float:
        f, N = self.form, self.N
        if f.kind == "conv":
            k = np.arange(-N, N + 1)
            return lp_weighted(a, f.pa, f.wa[0](k)) * lp_weighted(b, f.pb, f.wb[0](k))
        return _input_norm(a, f.pa, f.qa, f.wa, N) * _input_norm(b, f.pb, f.qb, f.wb, N)

    def ratio(self, a, b) -> float:
        den = self.rhs(a, b)
        return self.lhs(a, b) / den if den > 0 else 0.0


def recompute_ratio(form: Form, N: int, a, b) -> float:
    """The same ratio from dense arrays with no factorization; a cross-check."""
    n = np.arange(-2 * N, 2 * N + 1)
    k = np.arange(-N, N + 1)
    if form.kind == "conv":
        lhs = lp_weighted(np.convolve(a, b), form.q, form.target[0](n))
        rhs = lp_weighted(a, form.pa, form.wa[0](k)) * lp_weighted(b, form.pb, form.wb[0](k))
        return lhs / rhs if rhs > 0 else 0.0
    A, B = _dense(a, N), _dense(b, N)

    def mixed(X, p, q, w):
        inner = np.array([lp_weighted(X[:, j], p, w[0](k)) for j in range(X.shape[1])])
        return lp_weighted(inner, q, w[1](k))

    rhs = mixed(A, form.pa, form.qa, form.wa) * mixed(B, form.pb, form.qb, form.wb)
    if rhs == 0:
        return 0.0
    p = form.p
    if form.kind == "endpoint":
        rows = np.array([lp_weighted(r, p) for r in A])
        cols = np.array([lp_weighted(c, p) for c in B.T])
        inner = np.outer(rows, cols)
        W = np.outer(form.target[0](k), form.target[1](k))
        return lp_weighted(inner, form.q, W) / rhs
    out = np.zeros((4 * N + 1, 4 * N + 1))
    Bp = _pow(B, p)
    for i, j in zip(*np.nonzero(A)):
        sl = out[i:i + 2 * N + 1, j:j + 2 * N + 1]
        if p.is_inf:
            np.maximum(sl, A[i, j] * Bp, out=sl)
        else:
            sl += A[i, j] ** p.value * Bp
    if form.target_radial is not None:
        W = (1.0 + n[:, None] ** 2 + n[None, :] ** 2) ** (form.target_radial / 2)
    else:
        W = np.outer(form.target[0](n), form.target[1](n))
    return lp_weighted(_root(out, p), form.q, W) / rhs


def _all_two(form: Form) -> bool:
    two = Exponent(2)
    return form.kind == "product" and all(e == two for e in (form.p, form.q, form.pa, form.qa, form.pb, form.qb))


def refine_all_two(form: Form, N: int, start: tuple = (0, 0, 0, 0), iters: int = 8) -> tuple:
    """Alternating maximization for the all-l^2 product form.

    There the form is diagonal in |a|^2 and |b|^2, so each half step is
    maximized by an atom; iterating is the power method for that pair.
    Returns (ratio, a_index, b_index).
    """
    k = np.arange(-N, N + 1)
    K1, K2 = np.meshgrid(k, k, indexing="ij")
    ma = form.wa[0](K1) * form.wa[1](K2)
    mb = form.wb[0](K1) * form.wb[1](K2)

    def W(n1, n2):
        if form.target_radial is not None:
            return (1.0 + n1 ** 2 + n2 ** 2) ** (form.target_radial / 2)
        return form.target[0](n1) * form.target[1](n2)

    a = (start[0], start[1])
    b = (start[2], start[3])
    best = W(a[0] + b[0], a[1] + b[1]) / (ma[a[0] + N, a[1] + N] * mb[b[0] + N, b[1] + N])
    for _ in range(iters):
        ra = W(K1 + b[0], K2 + b[1]) / ma
        i = np.unravel_index(np.argmax(ra), ra.shape)
        a = (int(k[i[0]]), int(k[i[1]]))
        rb = W(K1 + a[0], K2 + a[1]) / mb
        j = np.unravel_index(np.argmax(rb), rb.shape)
        b = (int(k[j[0]]), int(k[j[1]]))
        best = max(best, float(rb[j] / ma[a[0] + N, a[1] + N]))
    return float(best), a, b


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("TFA_THREADS", "")))
    except ValueError:
        return os.cpu_count() or 1


@dataclass
class SearchResult:
    constant: float
    label: str
    recomputed: float
    N: int
    n_candidates: int


def search_constant(query, N: int, seed: int = 0) -> SearchResult:
    """Largest ratio over the candidate families at truncation N."""
    form = form_for(query)
    ev = Evaluator(form, N)
    cands = candidates(N, seed, "conv" if form.kind == "conv" else "2d")
    nt = _threads()

    def run(chunk):
        return [ev.ratio(a, b) for _, a, b in chunk]

    if nt > 1:
        size = -(-len(cands) // nt)
        with ThreadPoolExecutor(nt) as pool:
            parts = list(pool.map(run, [cands[i:i + size] for i in range(0, len(cands), size)]))
        ratios = np.concatenate([np.asarray(p, dtype=float) for p in parts])
    else:
        ratios = np.asarray(run(cands), dtype=float)
    i = int(np.argmax(ratios))  # first index among ties
    label, a, b = cands[i]
    best = float(ratios[i])
    recomputed = recompute_ratio(form, N, a, b)
    if _all_two(form):
        r, ia, ib = refine_all_two(form, N)
        if r > best * (1 + 1e-12):
            best, label = r, f"refined:atoms{ia}|{ib}"
            recomputed = recompute_ratio(form, N, Sparse(np.array([ia]), np.array([1.0])),
                                         Sparse(np.array([ib]), np.array([1.0])))
    return SearchResult(best, label, float(recomputed), N, len(cands))


def bmm_bilinear_constant(query: BmmQuery, N: int, seed: int = 0) -> float:
    return search_constant(query, N, seed).constant


def bmw_endpoint_constant(query: BmwQuery, N: int, seed: int = 0) -> float:
    if Fraction(query.tau) not in (0, 1):
        raise ValueError("the endpoint form needs tau in {0, 1}")
    return search_constant(query, N, seed).constant


def conv_constant(query: ConvQuery, N: int, seed: int = 0) -> float:
    return search_constant(query, N, seed).constant


# ----------------------------------------------------------- growth study

PLATEAU_RATIO = 1.5
GROWTH_STEP = 1.3
GROWTH_TOTAL = 2.0


@dataclass
class GrowthStudy:
    query: object
    truncations: list
    constants: list
    raw: list
    labels: list
    classification: str
    seed: int

    def to_dict(self) -> dict:
        return {"query": orc.query_fields(self.query), "truncations": self.truncations,
                "constants": self.constants, "raw": self.raw, "argmax": self.labels,
                "classification": self.classification, "seed": self.seed}


def classify(constants: Sequence[float], plateau: float = PLATEAU_RATIO, step: float = GROWTH_STEP,
             total: float = GROWTH_TOTAL) -> str:
    c = list(constants)
    if len(c) < 2:
        raise ValueError("a growth study needs at least two truncations")
    if c[0] <= 0:
        return "Inconclusive"
    if c[-1] / c[0] <= plateau:
        return "Plateau"
    if c[-1] / c[0] >= total and all(b >= step * a for a, b in zip(c, c[1:])):
        return "Growing"
    return "Inconclusive"


def growth_study(query, Ns: Sequence[int] = (8, 16, 32, 64), seed: int = 0) -> GrowthStudy:
    """Best constants over increasing truncations, as a running maximum.

    A candidate supported in [-N, N]^2 is also admissible at every larger
    truncation, so the running maximum is still a valid lower bound.
    """
    Ns = [int(n) for n in Ns]
    if len(Ns) < 2:
        raise ValueError("a growth study needs at least two truncations")
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValueError("truncations must be strictly increasing")
    raw, labels, running = [], [], []
    for N in Ns:
        r = search_constant(query, N, seed)
        if r.constant > r.recomputed * (1 + 1e-9) + 1e-300:
            raise AssertionError(f"argmax recomputation disagrees at N={N}: {r.constant} vs {r.recomputed}")
        raw.append(r.constant)
        labels.append(r.label)
        running.append(max(running[-1], r.constant) if running else r.constant)
    return GrowthStudy(query, Ns, running, raw, labels, classify(running), seed)


# ------------------------------------------------------------ curated set

def curated_queries() -> list:
    """(name, query, expected bounded) for the six bounded and six unbounded tuples."""
    B, W = BmmQuery, BmwQuery
    return [
        ("bmm-all-two", B(2, 2, 2, 2, 2, 2), True),
        ("bmm-l2-to-l1inf", B(2, 2, 2, 2, 1, INF), True),
        ("bmm-l1-to-linf-l1", B(1, 1, 1, 1, INF, 1), True),
        ("bmm-weighted-2-inf", B(2, 2, 2, 2, 2, INF, s1=1, t1=2, s2=1, t2=2), True),
        ("bmw-tau0-l1", W(1, 1, 1, 1, INF, INF, tau=0), True),
        ("bmw-half-all-two", W(2, 2, 2, 2, 2, 2), True),
        ("bmm-l2-to-l1", B(2, 2, 2, 2, 1, 1), False),
        ("bmm-target-weight", B(2, 2, 2, 2, 2, 2, s=1), False),
        ("bmm-linf-to-l1inf", B(INF, INF, INF, INF, 1, INF), False),
        ("bmw-tau0-q1-inf", W(1, INF, 1, 1, 1, INF, tau=0), False),
        ("bmm-l4-to-l2", B(4, 4, 4, 4, 2, 2), False),
        ("bmw-half-negative", W(2, 2, 2, 2, 2, 2, s1=-1, t1=-1), False),
    ]


def decide(query) -> orc.Verdict:
    if isinstance(query, BmmQuery):
        return orc.decide_bmm(query)
    if isinstance(query, BmwQuery):
        return orc.decide_bmw(query)
    return orc.decide_weighted_convolution(query)


@dataclass
class CuratedOutcome:
    name: str
    expected_bounded: bool
    verdict: str
    classification: str
    constants: list

    @property
    def agrees(self) -> bool:
        want = "Plateau" if self.expected_bounded else "Growing"
        return self.classification == want


def curated_study(Ns: Sequence[int] = (8, 16, 32, 64), seed: int = 0) -> list:
    out = []
    for name, q, bounded in curated_queries():
        v = decide(q)
        g = growth_study(q, Ns, seed)
        out.append(CuratedOutcome(name, bounded, v.outcome.value, g.classification, g.constants))
    return out


# ------------------------------------------------------- oracle consistency

OVERLAP_EXPONENTS = (1, Fraction(4, 3), 2, 4, INF)
OVERLAP_WEIGHTS = (-2, -1, 0, 1, 2)


def exponent_grid(values=(1, Fraction(4, 3), Fraction(3, 2), 2, 4, INF)) -> list:
    return [Exponent(v) for v in values]


@dataclass
class OverlapReport:
    checked: int
    disagreements: int
    sampled: int
    sample_disagreements: int

    @property
    def ok(self) -> bool:
        return self.disagreements == 0 and self.sample_disagreements == 0

    def to_dict(self) -> dict:
        return {"checked": self.checked, "disagreements": self.disagreements,
                "sampled": self.sampled, "sample_disagreements": self.sample_disagreements, "ok": self.ok}


def _factor_tables(exps, in_weights, p: Exponent, q: Exponent, s: Fraction, d: int):
    """Truth tables of one factor (e1, e2, w1, w2) of a product query.

    E: l^{e1}_{w1} and l^{e2}_{w2} both embed in l^q_s (embedding branch).
    C: l^{e1/p}_{p w1} * l^{e2/p}_{p w2} in l^{q/p}_{p s} (convolution branch);
    where that verdict is undecided the branch is skipped, so C copies E.
    """
    factors = list(itertools.product(exps, exps, in_weights, in_weights))
    E = np.zeros(len(factors), bool)
    C = np.zeros(len(factors), bool)
    for i, (e1, e2, w1, w2) in enumerate(factors):
        E[i] = orc._embeds(e1.recip, w1, q.recip, s, d) and orc._embeds(e2.recip, w2, q.recip, s, d)
        v = orc._decide_conv(q.recip / p.recip, e1.recip / p.recip, e2.recip / p.recip,
                             orc._pw(p, s), orc._pw(p, w1), orc._pw(p, w2), d)
        C[i] = v.bounded if v.decided else E[i]
    return E, C


def overlap_consistency(exps=OVERLAP_EXPONENTS, weights=OVERLAP_WEIGHTS, d_values=(1, 2),
                        sample: int = 400, seed: int = 0) -> OverlapReport:
    """Count tuples where the embedding and convolution branches would disagree.

    Both branches apply when q <= p < inf.  A product query splits into an
    (p1, p2, s1, s2) factor and a (q1, q2, t1, t2) factor and each branch is
    the conjunction of its two factor answers, so comparing the outer
    products of per-factor tables covers every tuple of the grid.  Only
    target weights s >= 0 are swept: for s < 0 the branches are not claimed
    to be sharp and the oracle does not use them.  A random sample of full
    decisions (which raise on any internal disagreement) runs on top.
    """
    exps = [Exponent(e) for e in exps]
    ws = [to_fraction(w) for w in weights]
    checked = dis = 0
    for d in d_values:
        for p, q in itertools.product(exps, exps):
            if p.is_inf or not q <= p:
                continue
            for s in ws:
                if s < 0:
                    continue
                E, C = _factor_tables(exps, ws, p, q, s, d)
                both_e = np.logical_and.outer(E, E)
                both_c = np.logical_and.outer(C, C)
                checked += both_e.size
                dis += int(np.count_nonzero(both_e != both_c))
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(sample):
        e = [exps[i] for i in rng.integers(0, len(exps), 6)]
        w = [ws[i] for i in rng.integers(0, len(ws), 5)]
        d = int(rng.integers(1, 3))
        try:
            orc.decide_bmm(BmmQuery(*e, *w, d=d))
            orc.decide_bmw(BmwQuery(*e, *w, d=d))
        except orc.InternalInconsistency:
            bad += 1
    return OverlapReport(checked, dis, sample, bad)


TAUS = (0, Fraction(3, 10), Fraction(1, 2), 1)


def tau_independence(n: int = 2000, seed: int = 0, exps=OVERLAP_EXPONENTS, weights=OVERLAP_WEIGHTS) -> int:
    """Random product queries on the overlap grid whose verdict changes with tau (0 expected)."""
    rng = np.random.default_rng(seed)
    exps = [Exponent(e) for e in exps]
    ws = [to_fraction(w) for w in weights]
    bad = 0
    for _ in range(n):
        e = [exps[i] for i in rng.integers(0, len(exps), 6)]
        w = [ws[i] for i in rng.integers(0, len(ws), 5)]
        d = int(rng.integers(1, 3))
        vs = {orc.decide_bmm(BmmQuery(*e, *w, tau=t, d=d)).to_json() for t in TAUS}
        bad += len(vs) != 1
    return bad


def operator_region(kind: str, symbol: tuple, tau=Fraction(1, 2), exps=None) -> dict:
    """Verdicts for a fixed unweighted symbol over all (p1, q1, p2, q2) on the grid.

    ``kind`` is "bpm" (modulation-space symbol) or "bpw" (Wiener amalgam symbol).
    """
    exps = exponent_grid() if exps is None else [Exponent(e) for e in exps]
    decide_op = orc.decide_bpm if kind == "bpm" else orc.decide_bpw
    out = {}
    for p1, q1, p2, q2 in itertools.product(exps, repeat=4):
        oq = orc.OperatorQuery(tau, symbol, (p1, q1), (p2, q2))
        out[(p1, q1, p2, q2)] = decide_op(oq).outcome
    return out


def sjostrand_region_mismatches(exps=None) -> list:
    """Grid points where M^{inf,1} symbols disagree with {p1 <= p2 and q1 <= q2}."""
    tab = operator_region("bpm", (INF, 1, 0), exps=exps)
    return [k for k, v in tab.items()
            if (v is Outcome.BOUNDED_SHARP) != (k[0] <= k[2] and k[1] <= k[3])]


def wiener_region_mismatches(tau=Fraction(1, 2), exps=None) -> list:
    """Grid points where W(FL^1, L^inf) symbols disagree with {p1 = q1 = 1, p2 = q2 = inf}."""
    tab = operator_region("bpw", (1, INF, 0, 0), tau, exps)
    one = Exponent(1)
    return [k for k, v in tab.items()
            if (v is Outcome.BOUNDED_SHARP) != (k[0] == one and k[1] == one and k[2].is_inf and k[3].is_inf)]


def endpoint_test_grid(exps=(1, 2, INF), weights=(0, 1), d: int = 1) -> list:
    """tau in {0, 1} endpoint queries for the printed-table cross-check."""
    exps = [Exponent(e) for e in exps]
    out = []
    for tau in (0, 1):
        for e in itertools.product(exps, repeat=6):
            for w in itertools.product(weights, repeat=5):
                out.append(BmwQuery(*e, *w, tau=tau, d=d))
    return out


def oracle_consistency_suite(seed: int = 0) -> dict:
    overlap = overlap_consistency(seed=seed)
    tau_bad = tau_independence(seed=seed)
    sj = sjostrand_region_mismatches()
    wi = wiener_region_mismatches()
    rep = orc.endpoint_table_crosscheck(endpoint_test_grid())
    return {
        "overlap": overlap.to_dict(),
        "tau_independence": {"changed": tau_bad, "ok": tau_bad == 0},
        "sjostrand_region": {"mismatches": len(sj), "ok": not sj},
        "wiener_region": {"mismatches": len(wi), "ok": not wi},
        "endpoint_table": {"checked": rep.checked, "discrepancies": len(rep.discrepancies),
                           "unexplained": len(rep.unexplained), "ok": rep.ok},
        "ok": overlap.ok and tau_bad == 0 and not sj and not wi and rep.ok,
    }
