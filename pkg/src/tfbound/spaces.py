"""Extended exponents, power weights and weighted discrete mixed norms.

Exponents live in (0, inf] and are stored through their reciprocal as an
exact ``Fraction`` so that boundary comparisons never pass through floating
point.  Weights are the power family <k>^s <n>^t (separable) or <z>^s
(radial), with <z> = (1 + |z|^2)^(1/2).
"""
from __future__ import annotations

import enum
import functools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

import numpy as np

Real = Union[int, float, str, Fraction]


def to_fraction(x: Real) -> Fraction:
    """Exact rational from an int, a decimal/rational string or a float."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"not a finite real: {x}")
        return Fraction(repr(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"malformed real {x!r}") from exc
    return Fraction(x)


@functools.total_ordering
class Exponent:
    """A Lebesgue exponent p in (0, inf], kept as the exact reciprocal 1/p."""

    __slots__ = ("_recip",)

    def __init__(self, value: Union[Real, "Exponent"]):
        if isinstance(value, Exponent):
            recip = value._recip
        elif isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "oo"):
            recip = Fraction(0)
        elif isinstance(value, float) and math.isinf(value) and value > 0:
            recip = Fraction(0)
        else:
            v = to_fraction(value)
            if v <= 0:
                raise ValueError(f"exponent must lie in (0, inf], got {value!r}")
            recip = 1 / v
        object.__setattr__(self, "_recip", recip)

    def __setattr__(self, name, value):
        raise AttributeError("Exponent is immutable")

    @classmethod
    def from_reciprocal(cls, r: Real) -> "Exponent":
        r = to_fraction(r)
        if r < 0:
            raise ValueError("reciprocal must be >= 0")
        e = cls.__new__(cls)
        object.__setattr__(e, "_recip", r)
        return e

    @property
    def recip(self) -> Fraction:
        return self._recip

    @property
    def is_inf(self) -> bool:
        return self._recip == 0

    @property
    def value(self) -> float:
        return math.inf if self.is_inf else float(1 / self._recip)

    def is_banach(self) -> bool:
        return self._recip <= 1

    def conjugate(self) -> "Exponent":
        """Hoelder conjugate p' with 1/p + 1/p' = 1, defined for p >= 1."""
        if not self.is_banach():
            raise ValueError(f"conjugate undefined for p = {self} < 1")
        return Exponent.from_reciprocal(1 - self._recip)

    def over(self, p: "Exponent") -> "Exponent":
        """Scaled quotient self/p for finite p; inf/p = inf."""
        if p.is_inf:
            raise ValueError("scaled quotient needs a finite denominator")
        return Exponent.from_reciprocal(self._recip / p._recip)

    def __eq__(self, other):
        if not isinstance(other, Exponent):
            try:
                other = Exponent(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self._recip == other._recip

    def __lt__(self, other):
        if not isinstance(other, Exponent):
            other = Exponent(other)
        return self._recip > other._recip

    def __hash__(self):
        return hash(("Exponent", self._recip))

    def __str__(self):
        if self.is_inf:
            return "inf"
        v = 1 / self._recip
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"

    def __repr__(self):
        return f"Exponent({str(self)!r})"


INF = Exponent("inf")


def bracket(z) -> np.ndarray:
    """<z> = (1 + z^2)^(1/2), elementwise."""
    z = np.asarray(z, dtype=float)
    return np.sqrt(1.0 + z * z)


def _bracket_pow(sq, s: Fraction) -> np.ndarray:
    # <z>^s from |z|^2
    return np.power(1.0 + np.asarray(sq, dtype=float), float(s) / 2.0)


def _sqnorm(x, points: bool = False) -> np.ndarray:
    # points=True: trailing axis holds the d coordinates of each point
    x = np.asarray(x, dtype=float)
    return np.sum(x * x, axis=-1) if points else x * x


@dataclass(frozen=True)
class Weight1D:
    """The weight k -> <k>^s on Z^d."""

    s: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "s", to_fraction(self.s))

    def __call__(self, k) -> np.ndarray:
        return _bracket_pow(_sqnorm(k), self.s)

    def on_points(self, k) -> np.ndarray:
        return _bracket_pow(_sqnorm(k, True), self.s)


@dataclass(frozen=True)
class PowerWeight:
    """Power weight on phase space.

    ``kind`` is ``"separable"`` for <z1>^s <z2>^t and ``"radial"`` for
    <z>^s.  The constant weight is the separable one with s = t = 0.
    """

    kind: str
    s: Fraction = Fraction(0)
    t: Fraction = Fraction(0)

    def __post_init__(self):
        if self.kind not in ("separable", "radial"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        object.__setattr__(self, "s", to_fraction(self.s))
        t = Fraction(0) if self.kind == "radial" else to_fraction(self.t)
        object.__setattr__(self, "t", t)

    @property
    def is_constant(self) -> bool:
        return self.s == 0 and self.t == 0

    def __call__(self, z1, z2) -> np.ndarray:
        """Elementwise evaluation for d = 1."""
        return self._eval(_sqnorm(z1), _sqnorm(z2))

    def on_points(self, z1, z2) -> np.ndarray:
        """Evaluation on arrays whose trailing axis holds d coordinates."""
        return self._eval(_sqnorm(z1, True), _sqnorm(z2, True))

    def _eval(self, a, b):
        if self.kind == "radial":
            return _bracket_pow(a + b, self.s)
        return _bracket_pow(a, self.s) * _bracket_pow(b, self.t)


def Separable(s: Real = 0, t: Real = 0) -> PowerWeight:
    return PowerWeight("separable", to_fraction(s), to_fraction(t))


def Radial(s: Real = 0) -> PowerWeight:
    return PowerWeight("radial", to_fraction(s))


def Constant() -> PowerWeight:
    return PowerWeight("separable")


class Transform(enum.Enum):
    INVOLUTION = "involution"
    J_ROTATION = "j-rotation"
    ALPHA_RESTRICTION = "alpha"
    BETA_RESTRICTION = "beta"


def weight_transform(m: PowerWeight, which: Transform) -> Union[PowerWeight, Weight1D]:
    """Closed forms of m(-z), m(z2, -z1), m(z1, 0) and m(0, z2)."""
    if which is Transform.INVOLUTION:
        return m
    if which is Transform.J_ROTATION:
        return m if m.kind == "radial" else Separable(m.t, m.s)
    if which is Transform.ALPHA_RESTRICTION:
        return Weight1D(m.s)
    if which is Transform.BETA_RESTRICTION:
        return Weight1D(m.s if m.kind == "radial" else m.t)
    raise ValueError(which)


@dataclass(frozen=True)
class Sequence2D:
    """Finitely supported sequence a_{k,n} on Z^d x Z^d.

    ``points`` has shape (nnz, 2d): the first d columns are k, the last d are n.
    """

    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.int64)
        vals = np.asarray(self.values, dtype=complex).reshape(-1)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 2)
        if pts.shape[0] != vals.shape[0] or pts.shape[1] % 2:
            raise ValueError("points must have shape (nnz, 2d) matching values")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)

    @property
    def d(self) -> int:
        return self.points.shape[1] // 2

    @property
    def k(self) -> np.ndarray:
        return self.points[:, : self.d]

    @property
    def n(self) -> np.ndarray:
        return self.points[:, self.d:]

    @classmethod
    def from_dict(cls, entries: dict) -> "Sequence2D":
        if not entries:
            return cls(np.zeros((0, 2), dtype=np.int64), np.zeros(0, dtype=complex))
        keys = [tuple(np.atleast_1d(k)) for k in entries]
        return cls(np.array(keys), np.array(list(entries.values()), dtype=complex))

    @classmethod
    def from_dense(cls, arr, k0: int = 0, n0: int = 0) -> "Sequence2D":
        """arr[i, j] is a_{k0+i, n0+j}; zeros are dropped."""
        arr = np.asarray(arr, dtype=complex)
        i, j = np.nonzero(arr)
        return cls(np.column_stack([i + k0, j + n0]), arr[i, j])

    def scaled(self, lam: complex) -> "Sequence2D":
        return Sequence2D(self.points, lam * self.values)

    def to_csv(self) -> str:
        if self.d != 1:
            raise ValueError("CSV form is defined for d = 1")
        rows = ["k1,k2,re,im"]
        for (k, n), v in zip(self.points.tolist(), self.values):
            rows.append(f"{k},{n},{float(v.real)!r},{float(v.imag)!r}")
        return "\n".join(rows) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "Sequence2D":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines or lines[0].replace(" ", "") != "k1,k2,re,im":
            raise ValueError("expected header k1,k2,re,im")
        pts, vals = [], []
        for ln in lines[1:]:
            k, n, re, im = ln.split(",")
            pts.append((int(k), int(n)))
            vals.append(complex(float(re), float(im)))
        return cls(np.array(pts, dtype=np.int64).reshape(-1, 2), np.array(vals, dtype=complex))

    def to_json(self) -> str:
        return json.dumps({"points": self.points.tolist(),
                           "re": self.values.real.tolist(), "im": self.values.imag.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "Sequence2D":
        obj = json.loads(text)
        vals = np.array(obj["re"], dtype=float) + 1j * np.array(obj["im"], dtype=float)
        return cls(np.array(obj["points"], dtype=np.int64).reshape(len(vals), -1), vals)


class Order(enum.Enum):
    INNER_FIRST = "inner-first"    # l^{p,q}: inner sum over k
    INNER_SECOND = "inner-second"  # l^{(p,q)}: inner sum over n


@dataclass(frozen=True)
class SpaceSpec:
    p: Exponent
    q: Exponent
    weight: PowerWeight = Constant()
    order: Order = Order.INNER_FIRST


def _group_norm(groups: np.ndarray, vals: np.ndarray, p: Exponent) -> tuple[np.ndarray, np.ndarray]:
    """Per-group l^p norm of nonnegative vals; returns (group keys, norms)."""
    if vals.size == 0:
        return np.zeros((0,) + groups.shape[1:], dtype=groups.dtype), np.zeros(0)
    keys, inv = np.unique(groups, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    if p.is_inf:
        out = np.zeros(len(keys))
        np.maximum.at(out, inv, vals)
        return keys, out
    pv = p.value
    return keys, np.bincount(inv, weights=vals ** pv, minlength=len(keys)) ** (1.0 / pv)


def _lp(vals: np.ndarray, p: Exponent) -> float:
    if vals.size == 0:
        return 0.0
    if p.is_inf:
        return float(np.max(vals))
    pv = p.value
    return float(np.sum(vals ** pv) ** (1.0 / pv))


def mixed_norm(a: Sequence2D, spec: SpaceSpec) -> float:
    """Weighted mixed (quasi-)norm; inner/outer order from ``spec.order``."""
    mag = np.abs(a.values) * spec.weight.on_points(a.k, a.n)
    keep = mag > 0
    mag = mag[keep]
    if mag.size == 0:
        return 0.0
    scale = float(mag.max())
    mag = mag / scale
    if spec.order is Order.INNER_FIRST:
        _, inner = _group_norm(a.n[keep], mag, spec.p)
        return scale * _lp(inner, spec.q)
    _, inner = _group_norm(a.k[keep], mag, spec.q)
    return scale * _lp(inner, spec.p)


def sequence_norm_1d(b: Union[dict, Iterable], p: Exponent, weight: Weight1D = Weight1D()) -> float:
    """(sum_k |b_k|^p <k>^{sp})^{1/p}, sup form at p = inf.

    ``b`` is a dict {k: value} or an iterable of (k, value) pairs.
    """
    items = list(b.items()) if isinstance(b, dict) else list(b)
    if not items:
        return 0.0
    ks = np.array([k for k, _ in items], dtype=float)
    vals = np.abs(np.array([v for _, v in items], dtype=complex)) * weight(ks)
    scale = float(vals.max())
    if scale == 0:
        return 0.0
    return scale * _lp(vals / scale, p)


def lp_weighted(values: np.ndarray, p: Exponent, weights: np.ndarray | None = None) -> float:
    """l^p norm of a dense array, optionally weighted pointwise; used by the harness."""
    v = np.abs(np.asarray(values, dtype=float).reshape(-1))
    if weights is not None:
        v = v * np.asarray(weights, dtype=float).reshape(-1)
    scale = float(v.max()) if v.size else 0.0
    if scale == 0:
        return 0.0
    return scale * _lp(v / scale, p)
