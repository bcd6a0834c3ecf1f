"""Command-line front end.

Exit codes: 0 BoundedSharp, 10 BoundedSufficient, 20 Unbounded,
30 OutOfScope, 2 usage or input error, 1 a suite check failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

import numpy as np

from . import gabor, harness
from . import oracle as orc
from .oracle import Condition, Outcome, Verdict
from .spaces import Exponent, Separable, to_fraction
from .tfr import GridSignal, default_step, stft, tau_wigner

EXIT_CODES = {
    Outcome.BOUNDED_SHARP: 0,
    Outcome.BOUNDED_SUFFICIENT: 10,
    Outcome.UNBOUNDED: 20,
    Outcome.OUT_OF_SCOPE: 30,
}
EXIT_USAGE = 2
EXIT_FAILED = 1


class UsageError(Exception):
    pass


def exponent(text: str) -> Exponent:
    try:
        return Exponent(text.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise argparse.ArgumentTypeError(f"malformed exponent {text!r}: {e}") from None


def real(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"malformed number {text!r}") from None


def int_list(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


# ------------------------------------------------------------------ output

def _emit(obj, fmt: str, rows=None, header=None) -> None:
    if fmt == "json":
        print(json.dumps(obj, indent=2, default=str))
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        sys.stdout.write(buf.getvalue())
    else:
        print(_text(obj))


def _text(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        lines = []
        for k, v in obj.items():
            if isinstance(v, (dict, list)):
                lines.append(f"{pad}{k}:")
                lines.append(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {v}")
        return "\n".join(lines)
    if isinstance(obj, list):
        return "\n".join(_text(v, indent) if isinstance(v, (dict, list)) else f"{pad}- {v}" for v in obj)
    return f"{pad}{obj}"


# ------------------------------------------------------------------ decide

def _weights(ns, names):
    return {n: getattr(ns, n) for n in names}


def build_query(ns):
    t = ns.target
    if t == "conv":
        return orc.ConvQuery(ns.q, ns.q1, ns.q2, ns.s, ns.s1, ns.s2, ns.d)
    if t == "embed":
        return None
    if t in ("bmm", "bmw"):
        need = ("p1", "q1", "p2", "q2", "p", "q")
        missing = [n for n in need if getattr(ns, n) is None]
        if missing:
            raise UsageError("missing " + ", ".join("--" + m for m in missing))
        args = [getattr(ns, n) for n in need]
        w = _weights(ns, ("s1", "t1", "s2", "t2", "s"))
        if t == "bmm":
            return orc.BmmQuery(*args, **w, tau=ns.tau, d=ns.d)
        return orc.BmwQuery(*args, **w, t=ns.t, tau=ns.tau, d=ns.d)
    need = ("symbol_p", "symbol_q", "p1", "q1", "p2", "q2")
    missing = [n for n in need if getattr(ns, n) is None]
    if missing:
        raise UsageError("missing " + ", ".join("--" + m.replace("_", "-") for m in missing))
    sym = (ns.symbol_p, ns.symbol_q, ns.symbol_s)
    if t == "bpw":
        sym = sym + (ns.symbol_s if ns.symbol_t is None else ns.symbol_t,)
    return orc.OperatorQuery(ns.tau, sym, (ns.p1, ns.q1, ns.s1, ns.t1), (ns.p2, ns.q2, ns.s2, ns.t2), ns.d)


def decide_query(ns) -> Verdict:
    t = ns.target
    if t == "embed":
        if ns.q1 is None or ns.q2 is None:
            raise UsageError("embed needs --q1 and --q2")
        ok = orc.decide_embedding(ns.q1, ns.s1, ns.q2, ns.s2, ns.d)
        name = f"l^{ns.q1}_{ns.s1} in l^{ns.q2}_{ns.s2}"
        return Verdict(Outcome.BOUNDED_SHARP if ok else Outcome.UNBOUNDED,
                       (Condition(name, ok),), None if ok else name, "weighted-embedding")
    if t == "conv" and (ns.q is None or ns.q1 is None or ns.q2 is None):
        raise UsageError("conv needs --q, --q1 and --q2")
    q = build_query(ns)
    return {
        "conv": lambda: orc.decide_weighted_convolution(q),
        "bmm": lambda: orc.decide_bmm(q),
        "bmw": lambda: orc.decide_bmw(q),
        "bpm": lambda: orc.decide_bpm(q),
        "bpw": lambda: orc.decide_bpw(q),
    }[t]()


def cmd_decide(ns) -> int:
    v = decide_query(ns)
    if ns.format == "json":
        print(v.to_json(indent=2))
    elif ns.format == "csv":
        _emit(None, "csv", [[c.condition, c.holds] for c in v.basis], ["condition", "holds"])
    else:
        lines = [f"outcome: {v.outcome.value}", f"theorem: {v.theorem}"]
        if v.witness:
            lines.append(f"witness: {v.witness}")
        lines += [f"  [{'x' if c.holds else ' '}] {c.condition}" for c in v.basis]
        print("\n".join(lines))
    return EXIT_CODES[v.outcome]


# ----------------------------------------------------------------- compute

def _read_signal(path: str) -> GridSignal:
    try:
        with open(path) as fh:
            return GridSignal.from_csv(fh.read())
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    except ValueError as e:
        raise UsageError(f"malformed signal file {path}: {e}") from None


def _gaussian(L: int) -> GridSignal:
    return gabor.window("gauss", L)


def _input_signals(ns) -> tuple:
    f = _read_signal(ns.input) if ns.input else _gaussian(ns.L)
    g = _read_signal(ns.input2) if getattr(ns, "input2", None) else f
    if not f.same_grid(g):
        raise UsageError("inputs live on different grids")
    return f, g


def _write(text: str, path) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _field_summary(kind: str, F, path) -> dict:
    return {"transform": kind, "L": F.L, "steps": list(F.steps), "l2_norm": F.norm(),
            "max_abs": float(np.max(np.abs(F.samples))), "output": path}


def cmd_compute(ns) -> int:
    if ns.what == "wigner":
        f, g = _input_signals(ns)
        F = tau_wigner(f, g, ns.tau)
        summary = _field_summary("wigner", F, ns.output)
    elif ns.what == "stft":
        f = _read_signal(ns.input) if ns.input else _gaussian(ns.L)
        g = _read_signal(ns.window) if ns.window not in ("gauss", "cosine", "raised-cosine") \
            else gabor.window(ns.window, f.L, f.step)
        if not f.same_grid(g):
            raise UsageError("signal and window live on different grids")
        F = stft(f, g)
        summary = _field_summary("stft", F, ns.output)
    else:
        f = _read_signal(ns.input) if ns.input else _gaussian(ns.L)
        g = gabor.window(ns.window, f.L, f.step) if ns.window in ("gauss", "cosine", "raised-cosine") \
            else _read_signal(ns.window)
        if not f.same_grid(g):
            raise UsageError("signal and window live on different grids")
        lat = gabor.GaborLattice(ns.alpha, ns.beta)
        try:
            lat.layout(f)
            A, B = gabor.walnut_bounds(g, ns.alpha)
            val = gabor.modulation_norm(f, g, lat, ns.p, ns.q, Separable(ns.s, ns.t))
        except (ValueError, gabor.FrameError) as e:
            raise UsageError(str(e)) from None
        _emit({"norm": val, "p": str(ns.p), "q": str(ns.q), "s": str(ns.s), "t": str(ns.t),
               "alpha": ns.alpha, "beta": ns.beta, "walnut": [A, B], "signal_l2": f.norm(),
               "L": f.L, "step": f.step}, "json" if ns.format == "csv" else ns.format)
        return 0
    if ns.format == "csv" and not ns.output:
        _write(F.to_csv(), None)
        return 0
    if ns.output:
        _write(F.to_csv(), ns.output)
    _emit(summary, "json" if ns.format == "csv" else ns.format)
    return 0


# ------------------------------------------------------------------- suite

def cmd_suite(ns) -> int:
    if ns.which == "identities":
        rep = harness.identity_suite(ns.L, ns.decimation)
        obj = {"L": ns.L, "checks": rep.to_dict(), "passed": rep.passed}
        rows = [[c.name, c.error, c.tolerance, c.passed] for c in rep.checks]
        _emit(obj, ns.format, rows, ["identity", "error", "tolerance", "passed"])
        return 0 if rep.passed else EXIT_FAILED
    if ns.which == "energy":
        m = harness.moyal_check(seed=ns.seed)
        demo = harness.wigner_l2_boundedness_demo(seed=ns.seed)
        ok = m.passed and demo["max_deviation"] < 1e-6
        obj = {"moyal_max_deviation": m.max_deviation, "moyal_oracle_gap": m.max_oracle_gap,
               "wigner_l2": demo, "passed": ok}
        _emit(obj, "json" if ns.format == "csv" else ns.format)
        return 0 if ok else EXIT_FAILED
    if ns.which == "oracle-consistency":
        if ns.grid != "default":
            raise UsageError("only --grid default is available")
        obj = harness.oracle_consistency_suite(ns.seed)
        _emit(obj, "json" if ns.format == "csv" else ns.format)
        return 0 if obj["ok"] else EXIT_FAILED
    # growth
    cur = harness.curated_queries()
    if ns.set != "curated":
        cur = [c for c in cur if c[0] == ns.set]
        if not cur:
            raise UsageError(f"unknown set {ns.set!r}; use 'curated' or one of its tuple names")
    try:
        Ns = ns.Ns
        results = []
        for name, q, bounded in cur:
            g = harness.growth_study(q, Ns, ns.seed)
            v = harness.decide(q)
            want = "Plateau" if v.bounded else "Growing"
            results.append((name, v, g, g.classification == want))
    except ValueError as e:
        raise UsageError(str(e)) from None
    ok = all(r[3] for r in results)
    if ns.format == "csv":
        if len(results) == 1:
            rows = list(zip(results[0][2].truncations, results[0][2].constants))
            _emit(None, "csv", rows, ["N", "constant"])
        else:
            rows = [[name, N, c] for name, _, g, _ in results for N, c in zip(g.truncations, g.constants)]
            _emit(None, "csv", rows, ["name", "N", "constant"])
    else:
        studies = []
        for name, v, g, agree in results:
            d = g.to_dict()
            d.update({"name": name, "verdict": v.to_dict(), "agrees": agree})
            studies.append(d)
        _emit({"studies": studies, "matches": sum(r[3] for r in results), "total": len(results),
               "passed": ok}, ns.format)
    return 0 if ok else EXIT_FAILED


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tfbound", description=__doc__.splitlines()[0])
    ap.add_argument("--format", choices=("json", "csv", "text"), default="json")
    sub = ap.add_subparsers(dest="command", required=True)

    dp = sub.add_parser("decide", help="decide a boundedness question exactly")
    dp.add_argument("target", choices=("bmm", "bmw", "bpm", "bpw", "conv", "embed"))
    for n in ("p1", "q1", "p2", "q2", "p", "q", "symbol-p", "symbol-q"):
        dp.add_argument(f"--{n}", type=exponent)
    for n in ("s1", "t1", "s2", "t2", "s", "symbol-s"):
        dp.add_argument(f"--{n}", type=real, default=Fraction(0))
    dp.add_argument("--t", type=real, default=None, help="second target weight (bmw; defaults to --s)")
    dp.add_argument("--symbol-t", type=real, default=None)
    dp.add_argument("--tau", type=real, default=Fraction(1, 2))
    dp.add_argument("--d", type=int, default=1)

    cp = sub.add_parser("compute", help="evaluate a transform or a Gabor norm")
    cp.add_argument("what", choices=("wigner", "stft", "modnorm"))
    cp.add_argument("--input", help="signal CSV (t,re,im); a Gaussian if omitted")
    cp.add_argument("--input2", help="second signal for cross-Wigner")
    cp.add_argument("--window", default="gauss", help="gauss, cosine, raised-cosine or a CSV path")
    cp.add_argument("--L", type=int, default=256)
    cp.add_argument("--tau", type=real, default=Fraction(1, 2))
    cp.add_argument("--output", help="CSV destination")
    cp.add_argument("--p", type=exponent, default=Exponent(2))
    cp.add_argument("--q", type=exponent, default=Exponent(2))
    cp.add_argument("--s", type=real, default=Fraction(0))
    cp.add_argument("--t", type=real, default=Fraction(0))
    cp.add_argument("--alpha", type=float, default=0.5)
    cp.add_argument("--beta", type=float, default=0.5)

    sp = sub.add_parser("suite", help="run a check battery")
    sp.add_argument("which", choices=("identities", "energy", "oracle-consistency", "growth"))
    sp.add_argument("--L", type=int, default=256)
    sp.add_argument("--decimation", type=int, default=16)
    sp.add_argument("--grid", default="default")
    sp.add_argument("--set", default="curated")
    sp.add_argument("--Ns", type=int_list, default=[8, 16, 32, 64])
    sp.add_argument("--seed", type=int, default=42)
    return ap


def _hoist_format(argv: list) -> list:
    # allow --format anywhere on the line
    out, fmt = [], []
    it = iter(argv)
    for a in it:
        if a == "--format":
            fmt = [a, next(it, "")]
        elif a.startswith("--format="):
            fmt = [a]
        else:
            out.append(a)
    return fmt + out


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        ns = ap.parse_args(_hoist_format(argv))
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    try:
        if ns.command == "decide":
            return cmd_decide(ns)
        if ns.command == "compute":
            return cmd_compute(ns)
        return cmd_suite(ns)
    except UsageError as e:
        print(f"tfbound: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        print(f"tfbound: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
