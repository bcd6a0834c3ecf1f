"""Exact decision procedures for the power-weight boundedness characterizations.

All comparisons run on ``Fraction`` values: exponents through their
reciprocals, weights and weight/d ratios as rationals.  Every public decision
returns a :class:`Verdict` listing the named conditions it evaluated.

Two facts are used beyond the published characterizations, both provable by
testing against a unit atom:

* any convolution inclusion l^{q1}_{s1} * l^{q2}_{s2} in l^q_s forces
  l^{q1}_{s1} in l^q_s and l^{q2}_{s2} in l^q_s;
* the embedding conditions of the BMM/BMW characterizations are necessary
  for every target weight, while the converse direction needs the target
  weight to be submultiplicative (for the radial target <z>^s: s >= 0).
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional

from .spaces import Exponent, Real, to_fraction

ONE = Fraction(1)
ZERO = Fraction(0)


class Outcome(enum.Enum):
    BOUNDED_SHARP = "BoundedSharp"
    BOUNDED_SUFFICIENT = "BoundedSufficient"
    UNBOUNDED = "Unbounded"
    OUT_OF_SCOPE = "OutOfScope"


class InternalInconsistency(RuntimeError):
    """Two branches that must agree returned different answers."""


@dataclass(frozen=True)
class Condition:
    condition: str
    holds: bool


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    basis: tuple = ()
    witness: Optional[str] = None
    theorem: str = ""

    @property
    def bounded(self) -> bool:
        return self.outcome in (Outcome.BOUNDED_SHARP, Outcome.BOUNDED_SUFFICIENT)

    @property
    def decided(self) -> bool:
        """True when the outcome is a proven answer in both directions."""
        return self.outcome in (Outcome.BOUNDED_SHARP, Outcome.UNBOUNDED)

    def holds(self, name: str) -> Optional[bool]:
        for c in self.basis:
            if c.condition == name:
                return c.holds
        return None

    def to_dict(self) -> dict:
        return {"outcome": self.outcome.value,
                "basis": [{"condition": c.condition, "holds": c.holds} for c in self.basis],
                "witness": self.witness,
                "theorem": self.theorem}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, obj: dict) -> "Verdict":
        basis = tuple(Condition(b["condition"], bool(b["holds"])) for b in obj["basis"])
        return cls(Outcome(obj["outcome"]), basis, obj.get("witness"), obj.get("theorem", ""))

    @classmethod
    def from_json(cls, text: str) -> "Verdict":
        return cls.from_dict(json.loads(text))


def _sharp(ok: bool, basis, witness, theorem) -> Verdict:
    return Verdict(Outcome.BOUNDED_SHARP if ok else Outcome.UNBOUNDED,
                   tuple(basis), None if ok else witness, theorem)


# ----------------------------------------------------------------- queries

def _coerce(obj, exps: Iterable[str], reals: Iterable[str]):
    for name in exps:
        object.__setattr__(obj, name, Exponent(getattr(obj, name)))
    for name in reals:
        val = getattr(obj, name)
        if val is not None:
            object.__setattr__(obj, name, to_fraction(val))
    if int(obj.d) != obj.d or obj.d < 1:
        raise ValueError("d must be a positive integer")


@dataclass(frozen=True)
class ConvQuery:
    """l^{q1}_{s1} * l^{q2}_{s2} in l^q_s on Z^d."""

    q: Exponent
    q1: Exponent
    q2: Exponent
    s: Fraction = ZERO
    s1: Fraction = ZERO
    s2: Fraction = ZERO
    d: int = 1

    def __post_init__(self):
        _coerce(self, ("q", "q1", "q2"), ("s", "s1", "s2"))


@dataclass(frozen=True)
class BmmQuery:
    """W_tau: M^{p1,q1}_{v_{s1,t1}} x M^{p2,q2}_{v_{s2,t2}} -> M^{p,q}_{1 (x) v_s}."""

    p1: Exponent
    q1: Exponent
    p2: Exponent
    q2: Exponent
    p: Exponent
    q: Exponent
    s1: Fraction = ZERO
    t1: Fraction = ZERO
    s2: Fraction = ZERO
    t2: Fraction = ZERO
    s: Fraction = ZERO
    tau: Fraction = Fraction(1, 2)
    d: int = 1

    def __post_init__(self):
        _coerce(self, ("p1", "q1", "p2", "q2", "p", "q"), ("s1", "t1", "s2", "t2", "s", "tau"))
        if not 0 <= self.tau <= 1:
            raise ValueError("tau must lie in [0, 1]")

    @property
    def unweighted(self) -> bool:
        return not any((self.s1, self.t1, self.s2, self.t2, self.s))


@dataclass(frozen=True)
class BmwQuery:
    """W_tau: M^{p1,q1}_{v_{s1,t1}} x M^{p2,q2}_{v_{s2,t2}} -> W(FL^p, L^q_{v_{s,t}}).

    The target weight is <z1>^s <z2>^t on R^{2d}; ``t`` defaults to ``s``.
    For s, t >= 0 this gives the same conditions as the radial target <z>^s,
    since both share the axis restrictions.
    """

    p1: Exponent
    q1: Exponent
    p2: Exponent
    q2: Exponent
    p: Exponent
    q: Exponent
    s1: Fraction = ZERO
    t1: Fraction = ZERO
    s2: Fraction = ZERO
    t2: Fraction = ZERO
    s: Fraction = ZERO
    t: Optional[Fraction] = None
    tau: Fraction = Fraction(1, 2)
    d: int = 1

    def __post_init__(self):
        _coerce(self, ("p1", "q1", "p2", "q2", "p", "q"), ("s1", "t1", "s2", "t2", "s", "t", "tau"))
        if self.t is None:
            object.__setattr__(self, "t", self.s)
        if not 0 <= self.tau <= 1:
            raise ValueError("tau must lie in [0, 1]")

    @property
    def unweighted(self) -> bool:
        return not any((self.s1, self.t1, self.s2, self.t2, self.s, self.t))


# ------------------------------------------------------------- embeddings

@lru_cache(maxsize=None)
def _embeds(r1: Fraction, s1: Fraction, r2: Fraction, s2: Fraction, d: int) -> bool:
    return (s2 <= s1 and r2 + s2 / d < r1 + s1 / d) or (s2 == s1 and r2 == r1)


def decide_embedding(q1, s1, q2, s2, d: int = 1) -> bool:
    """True iff l^{q1}_{s1} is contained in l^{q2}_{s2} on Z^d."""
    return _embeds(Exponent(q1).recip, to_fraction(s1), Exponent(q2).recip, to_fraction(s2), d)


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _space(e: Exponent, w: Fraction) -> str:
    return f"l^{e}_{_fmt(w)}"


def _embedding_condition(label: str, e1: Exponent, w1: Fraction,
                         e2: Exponent, w2: Fraction, d: int) -> Condition:
    ok = _embeds(e1.recip, w1, e2.recip, w2, d)
    rel = "in" if ok else "not in"
    return Condition(f"{label} [{_space(e1, w1)} {rel} {_space(e2, w2)}]", ok)


# ------------------------------------------------------------ convolution

@lru_cache(maxsize=None)
def _unweighted_young(r: Fraction, r1: Fraction, r2: Fraction) -> bool:
    return 1 + r <= r1 + r2 and r <= r1 and r <= r2


@lru_cache(maxsize=None)
def _weighted_young_cases(r, r1, r2, s, s1, s2, d) -> tuple:
    u, u1, u2 = r + s / d, r1 + s1 / d, r2 + s2 / d

    def vee(x):
        return max(x, ZERO)

    c1 = (s <= s1 and s <= s2 and 0 <= s1 + s2
          and 1 + vee(u) < vee(u1) + vee(u2)
          and u <= u1 and u <= u2 and 1 <= u1 + u2
          and (u != u1 or (r, s) == (r1, s1))
          and (u != u2 or (r, s) == (r2, s2))
          and (u1 + u2 != 1 or (1 - r1, -s1) == (r2, s2)))
    c2 = (s == s1 == s2 == 0
          and ((r == r1 and r2 == 1) or (r == r2 and r1 == 1) or (r == 0 and r1 + r2 == 1)))
    c3 = (s <= s1 and s <= s2 and r1 + r2 == 1 and s1 + s2 == 0
          and u < 0 <= u1 and 0 <= u2)
    c4 = (s <= s1 and s <= s2 and 0 <= s1 + s2
          and 1 + u == u1 + u2 and r <= r1 + r2
          and u < u1 and u < u2 and u > 0
          and (not (s == s1 or s == s2) or (r != 0 and r1 != 1 and r2 != 1)))
    return c1, c2, c3, c4


def _abs_weight_transfer(s, s1, s2) -> bool:
    # l^{q1}_{|w|} * l^{q2}_w in l^q_w for some w in [s, s2] with |w| <= s1, or the mirror
    return s <= s1 and s <= s2 and s1 + s2 >= 0


def decide_unweighted_convolution(q, q1, q2, s: Real = 0, s1: Real = 0, s2: Real = 0,
                                  d: int = 1) -> Verdict:
    """l^{q1} * l^{q2} in l^q for any exponents in (0, inf].

    With nonzero weights the answer can only be a sufficient one: the weighted
    inclusion follows from the unweighted one when s <= s1, s <= s2 and
    s1 + s2 >= 0 (transfer of <j>^w <= <j-l>^{|w|} <l>^w).
    """
    q, q1, q2 = Exponent(q), Exponent(q1), Exponent(q2)
    s, s1, s2 = to_fraction(s), to_fraction(s1), to_fraction(s2)
    r, r1, r2 = q.recip, q1.recip, q2.recip
    basis = [Condition("1 + 1/q <= 1/q1 + 1/q2", 1 + r <= r1 + r2),
             Condition("1/q <= 1/q1", r <= r1),
             Condition("1/q <= 1/q2", r <= r2)]
    ok = _unweighted_young(r, r1, r2)
    if s == s1 == s2 == 0:
        witness = next((c.condition for c in basis if not c.holds), None)
        return _sharp(ok, basis, witness, "unweighted-young")
    transfer = _abs_weight_transfer(s, s1, s2)
    basis.append(Condition("weight transfer: s <= s1, s <= s2, s1 + s2 >= 0", transfer))
    if ok and transfer:
        return Verdict(Outcome.BOUNDED_SUFFICIENT, tuple(basis), None, "unweighted-young")
    return Verdict(Outcome.OUT_OF_SCOPE, tuple(basis),
                   "weighted inclusion not settled by the unweighted criterion", "unweighted-young")


@lru_cache(maxsize=None)
def _decide_conv(r, r1, r2, s, s1, s2, d) -> Verdict:
    q, q1, q2 = (Exponent.from_reciprocal(x) for x in (r, r1, r2))
    nec = [_embedding_condition("necessary l^{q1}_{s1} in l^q_s", q1, s1, q, s, d),
           _embedding_condition("necessary l^{q2}_{s2} in l^q_s", q2, s2, q, s, d)]
    nec_ok = all(c.holds for c in nec)
    unweighted = s == s1 == s2 == 0
    in_range = all(x <= 1 for x in (r, r1, r2))

    if in_range:
        cases = _weighted_young_cases(r, r1, r2, s, s1, s2, d)
        basis = [Condition(f"case{i + 1}", c) for i, c in enumerate(cases)]
        ok = any(cases)
        if ok and not nec_ok:
            raise InternalInconsistency(f"convolution cases hold but atom test fails: {basis}")
        if unweighted and ok != _unweighted_young(r, r1, r2):
            raise InternalInconsistency(f"weighted and unweighted criteria disagree at {q, q1, q2}")
        if not ok and _unweighted_young(r, r1, r2) and _abs_weight_transfer(s, s1, s2):
            raise InternalInconsistency(f"weight transfer contradicts the convolution cases: {basis}")
        witness = "no case holds" if nec_ok else next(c.condition for c in nec if not c.holds)
        return _sharp(ok, basis + nec, witness, "weighted-young")

    if unweighted:
        v = decide_unweighted_convolution(q, q1, q2)
        return replace(v, basis=v.basis + tuple(nec))
    if not nec_ok:
        witness = next(c.condition for c in nec if not c.holds)
        return Verdict(Outcome.UNBOUNDED, tuple(nec), witness, "weighted-young")
    v = decide_unweighted_convolution(q, q1, q2, s, s1, s2, d)
    return replace(v, basis=v.basis + tuple(nec), theorem="weighted-young")


def decide_weighted_convolution(cq: ConvQuery) -> Verdict:
    """Weighted discrete Young inclusion l^{q1}_{s1} * l^{q2}_{s2} in l^q_s.

    Exact characterization when q, q1, q2 >= 1.  Outside that range the
    unweighted criterion decides unweighted queries; weighted ones are
    Unbounded if an atom test fails, BoundedSufficient through weight
    transfer, and OutOfScope otherwise.
    """
    return _decide_conv(cq.q.recip, cq.q1.recip, cq.q2.recip, cq.s, cq.s1, cq.s2, cq.d)


# --------------------------------------------------------------- BMM / BMW

def _scaled(e: Exponent, p: Exponent) -> Exponent:
    return e.over(p)


def _pw(p: Exponent, w: Fraction) -> Fraction:
    return w / p.recip


def _unweighted_product_conditions(bq) -> list:
    p, q = bq.p, bq.q
    rp, rq = p.recip, q.recip
    out = [Condition(f"{name} <= q", e.recip >= rq)
           for name, e in (("p1", bq.p1), ("q1", bq.q1), ("p2", bq.p2), ("q2", bq.q2))]
    out.append(Condition("1/p1 + 1/p2 >= 1/p + 1/q", bq.p1.recip + bq.p2.recip >= rp + rq))
    out.append(Condition("1/q1 + 1/q2 >= 1/p + 1/q", bq.q1.recip + bq.q2.recip >= rp + rq))
    return out


def _product_core(bq, s_target: Fraction, t_target: Fraction, converse_valid: bool,
                  theorem: str, fallback) -> Verdict:
    """Shared routing for BMM and BMW with tau in (0,1).

    Embedding branch (p >= q): l^{p_i}_{s_i} in l^q_{s_target}, l^{q_i}_{t_i} in l^q_{t_target}.
    Convolution branch (p < inf): the two scaled convolution inclusions.
    ``converse_valid`` says whether these conditions are also sufficient.
    """
    d = bq.d
    p, q = bq.p, bq.q
    emb = [
        _embedding_condition("l^{p1}_{s1} in l^q_s", bq.p1, bq.s1, q, s_target, d),
        _embedding_condition("l^{p2}_{s2} in l^q_s", bq.p2, bq.s2, q, s_target, d),
        _embedding_condition("l^{q1}_{t1} in l^q_t", bq.q1, bq.t1, q, t_target, d),
        _embedding_condition("l^{q2}_{t2} in l^q_t", bq.q2, bq.t2, q, t_target, d),
    ]
    emb_ok = all(c.holds for c in emb)
    convs = []
    if not p.is_inf:
        rp = p.recip

        def conv(label, e1, w1, e2, w2, w):
            r, r1, r2 = q.recip / rp, e1.recip / rp, e2.recip / rp
            v = _decide_conv(r, r1, r2, _pw(p, w), _pw(p, w1), _pw(p, w2), d)
            spaces = [_space(Exponent.from_reciprocal(x), _pw(p, y)) for x, y in ((r1, w1), (r2, w2), (r, w))]
            return f"{label} [{spaces[0]} * {spaces[1]} in {spaces[2]}]", v

        convs = [
            conv("l^{p1/p}_{p s1} * l^{p2/p}_{p s2} in l^{q/p}_{p s}", bq.p1, bq.s1, bq.p2, bq.s2, s_target),
            conv("l^{q1/p}_{p t1} * l^{q2/p}_{p t2} in l^{q/p}_{p t}", bq.q1, bq.t1, bq.q2, bq.t2, t_target),
        ]
    conv_cond = [Condition(name, v.bounded) for name, v in convs]
    conv_decided = bool(convs) and all(v.decided for _, v in convs)
    conv_ok = all(v.bounded for _, v in convs)

    def first_failure(conds):
        return next((c.condition for c in conds if not c.holds), None)

    if converse_valid:
        branches = []
        if p >= q:
            branches.append(("embedding", emb_ok, emb))
        if conv_decided:
            branches.append(("convolution", conv_ok, conv_cond))
        if bq.unweighted:
            m5 = _unweighted_product_conditions(bq)
            branches.append(("unweighted-exponents", all(c.holds for c in m5), m5))
        if branches:
            answers = {ok for _, ok, _ in branches}
            if len(answers) > 1:
                raise InternalInconsistency(
                    f"branches disagree for {bq}: " + ", ".join(f"{n}={ok}" for n, ok, _ in branches))
            name, ok, conds = branches[0]
            basis = [Condition(f"branch:{n}", True) for n, _, _ in branches]
            for _, _, c in branches:
                basis.extend(c)
            return _sharp(ok, basis, first_failure(conds), theorem)

    # partial information: necessary conditions first
    basis = list(emb) + conv_cond
    for name, v in convs:
        if v.outcome is Outcome.UNBOUNDED:
            return Verdict(Outcome.UNBOUNDED, tuple(basis), name, theorem)
    if not emb_ok:
        return Verdict(Outcome.UNBOUNDED, tuple(basis), first_failure(emb), theorem)
    if converse_valid:
        if convs and conv_ok:
            return Verdict(Outcome.BOUNDED_SUFFICIENT, tuple(basis), None, theorem)
        return Verdict(Outcome.OUT_OF_SCOPE, tuple(basis),
                       "convolution conditions outside the decidable range", theorem)
    fb = fallback()
    basis.append(Condition("bounded with nonnegative target weight", fb.bounded))
    if fb.bounded:
        return Verdict(Outcome.BOUNDED_SUFFICIENT, tuple(basis), None, theorem)
    return Verdict(Outcome.OUT_OF_SCOPE, tuple(basis),
                   "negative target weight: only necessary conditions are available", theorem)


def decide_bmm(bq: BmmQuery) -> Verdict:
    """Boundedness of W_tau into M^{p,q}_{1 (x) v_s}; independent of tau."""
    return _decide_bmm_cached(replace(bq, tau=Fraction(1, 2)))


@lru_cache(maxsize=4096)
def _decide_bmm_cached(bq: BmmQuery) -> Verdict:
    return _product_core(bq, bq.s, bq.s, bq.s >= 0, "bmm-power-weights",
                         lambda: decide_bmm(replace(bq, s=ZERO)))


def _endpoint_conditions(bq: BmwQuery) -> list:
    d, p, q, s, t = bq.d, bq.p, bq.q, bq.s, bq.t
    if bq.tau == 0:
        a = (bq.p1, bq.q1, bq.s1, bq.t1, "1")
        b = (bq.p2, bq.q2, bq.s2, bq.t2, "2")
    else:
        a = (bq.p2, bq.q2, bq.s2, bq.t2, "2")
        b = (bq.p1, bq.q1, bq.s1, bq.t1, "1")
    pa, qa, sa, ta, i = a
    pb, qb, sb, tb, j = b
    return [
        _embedding_condition(f"l^{{q{i}}}_{{t{i}}} in l^p", qa, ta, p, ZERO, d),
        _embedding_condition(f"l^{{p{j}}}_{{s{j}}} in l^p", pb, sb, p, ZERO, d),
        _embedding_condition(f"l^{{p{i}}}_{{s{i}}} in l^q_s", pa, sa, q, s, d),
        _embedding_condition(f"l^{{q{i}}}_{{s{i}+t{i}}} in l^q_s", qa, sa + ta, q, s, d),
        _embedding_condition(f"l^{{q{j}}}_{{t{j}}} in l^q_t", qb, tb, q, t, d),
    ]


def decide_bmw(bq: BmwQuery) -> Verdict:
    """Boundedness of W_tau into W(FL^p, L^q_{v_{s,t}})."""
    if bq.tau in (0, 1):
        conds = _endpoint_conditions(bq)
        ok = all(c.holds for c in conds)
        basis = [Condition(f"branch:tau={bq.tau}", True)] + conds
        return _sharp(ok, basis, next((c.condition for c in conds if not c.holds), None),
                      "bmw-power-weights")
    converse = (bq.s >= 0 and bq.t >= 0) or bq.p < bq.q
    return _product_core(bq, bq.s, bq.t, converse, "bmw-power-weights",
                         lambda: decide_bmw(replace(bq, s=max(bq.s, ZERO), t=max(bq.t, ZERO))))


def decide_lqp_embedding(p1, q1, s: Real, t: Real, q, p, d: int = 1) -> bool:
    """l^{p1,q1} in l^{(q,p)}_{v_s (x) v_t}, via three one-dimensional embeddings."""
    p1, q1, q, p = Exponent(p1), Exponent(q1), Exponent(q), Exponent(p)
    s, t = to_fraction(s), to_fraction(t)
    return (_embeds(p1.recip, ZERO, q.recip, s, d)
            and _embeds(q1.recip, ZERO, p.recip, t, d)
            and _embeds(q1.recip, ZERO, q.recip, s + t, d))


# ------------------------------------------------------- printed endpoint table

def printed_endpoint_conditions(bq: BmwQuery) -> list:
    """The endpoint table with non-strict inequalities and a single target weight s."""
    if bq.tau not in (0, 1):
        raise ValueError("endpoint table needs tau in {0, 1}")
    d, p, q, s = bq.d, bq.p, bq.q, bq.s
    rp, rq = p.recip, q.recip
    if bq.tau == 0:
        (pa, qa, sa, ta), (pb, qb, sb, tb) = ((bq.p1, bq.q1, bq.s1, bq.t1),
                                              (bq.p2, bq.q2, bq.s2, bq.t2))
    else:
        (pa, qa, sa, ta), (pb, qb, sb, tb) = ((bq.p2, bq.q2, bq.s2, bq.t2),
                                              (bq.p1, bq.q1, bq.s1, bq.t1))

    def row(lhs, e, w, pair_ok):
        return lhs <= e.recip + w / d or pair_ok

    return [
        Condition("signs", s <= sa and s <= tb and 0 <= ta and 0 <= sb),
        Condition("row-qa-ta", row(rp, qa, ta, (qa, ta) == (p, 0))),
        Condition("row-pb-sb", row(rp, pb, sb, (pb, sb) == (p, 0))),
        Condition("row-pa-sa", row(rq + s / d, pa, sa, (q, s) == (pa, sa))),
        Condition("row-qa-sa+ta", row(rq + s / d, qa, sa + ta, (q, s) == (qa, sa + ta))),
        Condition("row-qb-tb", row(rq + s / d, qb, tb, (q, s) == (qb, tb))),
    ]


def endpoint_boundary_rows(bq: BmwQuery) -> list:
    """Rows where a non-strict inequality is met with equality across a positive weight gap."""
    d, p, q, s = bq.d, bq.p, bq.q, bq.s
    rp, rq = p.recip, q.recip
    if bq.tau == 0:
        (pa, qa, sa, ta), (pb, qb, sb, tb) = ((bq.p1, bq.q1, bq.s1, bq.t1),
                                              (bq.p2, bq.q2, bq.s2, bq.t2))
    else:
        (pa, qa, sa, ta), (pb, qb, sb, tb) = ((bq.p2, bq.q2, bq.s2, bq.t2),
                                              (bq.p1, bq.q1, bq.s1, bq.t1))
    rows = [("row-qa-ta", rp, ZERO, qa, ta), ("row-pb-sb", rp, ZERO, pb, sb),
            ("row-pa-sa", rq + s / d, s, pa, sa), ("row-qa-sa+ta", rq + s / d, s, qa, sa + ta),
            ("row-qb-tb", rq + s / d, s, qb, tb)]
    return [name for name, lhs, w_dst, e, w in rows
            if lhs == e.recip + w / d and w > w_dst]


@dataclass
class DiscrepancyReport:
    checked: int = 0
    discrepancies: list = field(default_factory=list)   # (query, boundary rows)
    unexplained: list = field(default_factory=list)     # differences not on a boundary row

    @property
    def ok(self) -> bool:
        return not self.unexplained


def endpoint_table_crosscheck(queries: Iterable[BmwQuery]) -> DiscrepancyReport:
    """Compare the printed endpoint table with the strict embedding criterion."""
    rep = DiscrepancyReport()
    for bq in queries:
        rep.checked += 1
        printed = all(c.holds for c in printed_endpoint_conditions(bq))
        strict = decide_bmw(replace(bq, t=bq.s)).bounded
        if printed == strict:
            continue
        rows = endpoint_boundary_rows(bq)
        rep.discrepancies.append((bq, rows))
        if not rows or not printed:
            rep.unexplained.append(bq)
    return rep


# ---------------------------------------------------------------- duality

@dataclass(frozen=True)
class OperatorQuery:
    """OP_tau(sigma): M^{p1,q1}_{v_{s1,t1}} -> M^{p2,q2}_{v_{s2,t2}}.

    ``symbol`` is (p, q, s) for M^{p,q}_{1 (x) v_s}, or (p, q, s, t) for
    W(FL^p, L^q_{v_{s,t}}) when used with :func:`decide_bpw`.
    """

    tau: Fraction
    symbol: tuple
    input: tuple
    output: tuple
    d: int = 1

    def __post_init__(self):
        def norm(spec, n_w):
            spec = tuple(spec)
            exps = tuple(Exponent(x) for x in spec[:2])
            ws = tuple(to_fraction(x) for x in spec[2:])
            ws = ws + (ZERO,) * (n_w - len(ws))
            return exps + ws
        sym_w = 2 if len(tuple(self.symbol)) >= 4 else 1
        object.__setattr__(self, "tau", to_fraction(self.tau))
        object.__setattr__(self, "symbol", norm(self.symbol, sym_w))
        object.__setattr__(self, "input", norm(self.input, 2))
        object.__setattr__(self, "output", norm(self.output, 2))

    def banach(self) -> bool:
        return all(e.is_banach() for e in self.symbol[:2] + self.input[:2] + self.output[:2])


def bpm_to_bmm(oq: OperatorQuery) -> BmmQuery:
    (p, q, s), (p1, q1, s1, t1), (p2, q2, s2, t2) = oq.symbol[:3], oq.input, oq.output
    return BmmQuery(p2.conjugate(), q2.conjugate(), p1, q1, p.conjugate(), q.conjugate(),
                    -s2, -t2, s1, t1, -s, oq.tau, oq.d)


def bmm_to_bpm(bq: BmmQuery) -> OperatorQuery:
    return OperatorQuery(bq.tau, (bq.p.conjugate(), bq.q.conjugate(), -bq.s),
                         (bq.p2, bq.q2, bq.s2, bq.t2),
                         (bq.p1.conjugate(), bq.q1.conjugate(), -bq.s1, -bq.t1), bq.d)


def bpw_to_bmw(oq: OperatorQuery) -> BmwQuery:
    p, q, s = oq.symbol[:3]
    t = oq.symbol[3] if len(oq.symbol) > 3 else s
    (p1, q1, s1, t1), (p2, q2, s2, t2) = oq.input, oq.output
    return BmwQuery(p2.conjugate(), q2.conjugate(), p1, q1, p.conjugate(), q.conjugate(),
                    -s2, -t2, s1, t1, -s, -t, oq.tau, oq.d)


def _dual_verdict(v: Verdict, mapping: str, theorem: str) -> Verdict:
    return Verdict(v.outcome, (Condition(mapping, True),) + v.basis, v.witness, theorem)


def decide_bpm(oq: OperatorQuery) -> Verdict:
    """Symbols in M^{p,q}_{1 (x) v_s}, decided through the dual W_tau problem."""
    if not oq.banach():
        return Verdict(Outcome.OUT_OF_SCOPE, (Condition("all exponents in [1, inf]", False),),
                       "duality needs exponents in [1, inf]", "bpm-duality")
    bq = bpm_to_bmm(oq)
    mapping = (f"dual: W_tau M^{{{bq.p1},{bq.q1}}}_{{{_fmt(bq.s1)},{_fmt(bq.t1)}}} x "
               f"M^{{{bq.p2},{bq.q2}}}_{{{_fmt(bq.s2)},{_fmt(bq.t2)}}} -> "
               f"M^{{{bq.p},{bq.q}}}_{{{_fmt(bq.s)}}}")
    return _dual_verdict(decide_bmm(bq), mapping, "bpm-duality")


def decide_bpw(oq: OperatorQuery) -> Verdict:
    """Symbols in W(FL^p, L^q_{v_{s,t}}), decided through the dual W_tau problem."""
    if not oq.banach():
        return Verdict(Outcome.OUT_OF_SCOPE, (Condition("all exponents in [1, inf]", False),),
                       "duality needs exponents in [1, inf]", "bpw-duality")
    bq = bpw_to_bmw(oq)
    mapping = (f"dual: W_tau M^{{{bq.p1},{bq.q1}}} x M^{{{bq.p2},{bq.q2}}} -> "
               f"W(FL^{bq.p}, L^{bq.q}_{{{_fmt(bq.s)},{_fmt(bq.t)}}})")
    return _dual_verdict(decide_bmw(bq), mapping, "bpw-duality")


def query_fields(q) -> dict:
    """Plain-string view of a query, for reports."""
    out = {}
    for f in fields(q):
        v = getattr(q, f.name)
        out[f.name] = str(v) if isinstance(v, Exponent) else (_fmt(v) if isinstance(v, Fraction) else v)
    return out
