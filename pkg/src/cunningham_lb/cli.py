"""Command-line entry point (``python -m cunningham_lb``).

    generate {parity|mdp|lp|auso}   write the construction for one n
    run {parity|mdp|lp|auso}        Cunningham's rule, JSON-lines trace
    verify {phases|switches|lengths|cross|uso|oracle}
    export {dot|lp}
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import family
from .cunningham import EdgeOrdering, RunTrace, first_divergence
from .numerics import rat_str

FORMALISMS = ("parity", "mdp", "lp", "auso")


def _fraction(text: str) -> Fraction:
    try:
        q = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not an exact fraction: {text!r}") from exc
    if "." in text or "e" in text.lower():
        raise argparse.ArgumentTypeError("give eps as an exact fraction such as 1/1000")
    return q


def _n(text: str) -> int:
    n = int(text)
    if n < 3:
        raise argparse.ArgumentTypeError("n must be at least 3")
    return n


def _faces(text: str):
    if text == "all":
        return "all"
    if text.startswith("sample"):
        text = text[len("sample"):].strip(" :=")
    return int(text)


def load_ordering(path: str | None, n: int) -> EdgeOrdering:
    if path is None:
        return family.build_ordering(n)
    names = Path(path).read_text().split()
    ordering = EdgeOrdering(names, name=Path(path).stem)
    missing = set(family.edge_targets(n)) - set(ordering.sequence)
    if missing:
        raise SystemExit(f"ordering file lacks {sorted(missing)[:5]}")
    return ordering


def golden_trace_text() -> str:
    return resources.files("cunningham_lb").joinpath("data/golden_n3.jsonl").read_text()


def _target(out: str | None, default_name: str) -> Path | None:
    """``--out`` names a file when it has a suffix, a directory otherwise."""
    if out is None:
        return None
    path = Path(out)
    if path.suffix and not path.is_dir():
        return path
    return path / default_name


def _emit(path: Path | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# -- generate ---------------------------------------------------------------------

def cmd_generate(args) -> int:
    n = args.n
    if args.what == "parity":
        g = family.build_game(n)
        path = _target(args.out, f"G_{n}.json")
        _emit(path, json.dumps(g.to_json(), indent=1) + "\n")
        if path is not None:
            _emit(path.with_suffix(".dot"), g.to_dot(family.initial_strategy(n)))
    elif args.what == "mdp":
        from .mdp import build_relaxed_mdp
        M = build_relaxed_mdp(n, args.bignum, args.eps)
        _emit(_target(args.out, f"M_{n}.json"), json.dumps(M.to_json(), indent=1) + "\n")
    elif args.what == "lp":
        from .lp import build_lp
        lp = build_lp(n, args.bignum, args.eps)
        path = _target(args.out, f"LP_{n}.lp")
        _emit(path, lp.to_lp_text(f"LP_{n}"))
        if path is not None:
            _emit(path.with_suffix(".json"), json.dumps(lp.to_json()) + "\n")
    else:
        from .auso import orient_hypercube
        o = orient_hypercube(n, args.bignum, args.eps)
        payload = {"header": o.header(), "bitmap": o.to_hex()}
        _emit(_target(args.out, f"A_{n}.json"), json.dumps(payload) + "\n")
    return 0


# -- run ----------------------------------------------------------------------------

def _certificate_json(kind: str):
    if kind in ("mdp", "lp"):
        return rat_str
    return None


def cmd_run(args) -> int:
    from .verify import formalism_trace
    n = args.n
    ordering = load_ordering(args.ordering, n)
    t = time.perf_counter()
    if args.what == "parity" and args.initial == "alternative":
        from .verify import parity_run
        trace = parity_run(n, ordering, args.pointer, family.alternative_initial_bits(n))
    else:
        trace = formalism_trace(args.what, n, args.bignum, args.eps, ordering, args.pointer)
    seconds = time.perf_counter() - t
    text = trace.to_jsonl(_certificate_json(args.what))
    if args.out:
        _emit(_target(args.out, f"{args.what}_n{n}.jsonl"), text)
    unit = {"lp": "pivots", "auso": "edges"}.get(args.what, "switches")
    print(f"{len(trace)} {unit}")
    last = trace.steps[-1].certificate if trace.steps else None
    if last is not None and args.what in ("mdp", "lp"):
        print(f"final certificate {rat_str(last)}")
    print(f"time {seconds:.2f}s", file=sys.stderr)
    status = 0
    if args.golden:
        status = _diff_golden(trace, args.golden)
    return status


def _diff_golden(trace: RunTrace, golden: str) -> int:
    text = golden_trace_text() if golden == "builtin" else Path(golden).read_text()
    ref = RunTrace.from_jsonl(text)
    problems = []
    if ref.n != trace.n:
        problems.append(f"golden trace is for n={ref.n}")
    d = first_divergence(trace.switches, ref.switches)
    if d is not None:
        problems.append(f"switch sequences diverge at step {d}")
    for a, b in zip(trace.steps, ref.steps):
        if a.improving != b.improving:
            problems.append(f"improving sets differ at step {a.index}")
            break
        if trace.formalism == ref.formalism == "parity" and a.response != b.response:
            problems.append(f"player-1 responses differ at step {a.index}")
            break
    print("golden: " + ("match" if not problems else "; ".join(problems)))
    return 1 if problems else 0


# -- verify -------------------------------------------------------------------------

def cmd_verify(args) -> int:
    from . import verify
    n = args.n
    suite = args.what
    if suite == "uso":
        checks = verify.check_uso(n, args.faces if args.faces is not None else
                                  ("all" if n == 3 else 100_000), args.seed)
    elif suite == "oracle":
        checks = verify.check_oracle(n, sample=args.sample, seed=args.seed)
    elif suite == "cross":
        checks = verify.check_cross(n) + verify.check_lp_conformance(n)
    else:
        checks = verify.SUITES[suite](n)
    report = {"suite": suite, "n": n, "ok": all(c.ok for c in checks),
              "checks": [c.to_json() for c in checks]}
    for c in checks:
        print(f"{'PASS' if c.ok else 'FAIL'}  {c.name}  ({c.detail})", file=sys.stderr)
    text = json.dumps(report, indent=1, default=str) + "\n"
    path = _target(args.out, f"verify_{suite}_n{n}.json")
    _emit(path, text)
    if path is not None:
        timings = {c.name: round(c.seconds, 3) for c in checks}
        _emit(path.with_suffix(".timings.json"), json.dumps(timings, indent=1) + "\n")
    return 0 if report["ok"] else 1


# -- export -------------------------------------------------------------------------

def cmd_export(args) -> int:
    n = args.n
    if args.what == "dot":
        from .parity import ParityInstance
        inst = ParityInstance(family.build_game(n), family.initial_strategy(n),
                              family.edge_targets(n), n)
        if args.step:
            from .verify import parity_run
            for name in parity_run(n).switches[:args.step]:
                inst.apply(name)
        improving = {inst.switch_edges[e] for e in inst.improving_set()}
        _emit(_target(args.out, f"G_{n}.dot"), inst.game.to_dot(inst.sigma, inst.tau, improving))
    else:
        from .lp import build_lp
        lp = build_lp(n, args.bignum, args.eps)
        _emit(_target(args.out, f"LP_{n}.lp"), lp.to_lp_text(f"LP_{n}"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cunningham_lb", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(q):
        q.add_argument("--n", type=_n, default=3, help="size parameter (n >= 3)")
        q.add_argument("--bignum", type=int, default=None, help="reward base N (default 2n+1)")
        q.add_argument("--eps", type=_fraction, default=None,
                       help="exact probability eps such as 1/1000 (default 1/N^(2n+10))")
        q.add_argument("--out", default=None, help="output file or directory")

    g = sub.add_parser("generate", help="write a construction")
    g.add_argument("what", choices=FORMALISMS)
    common(g)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="run Cunningham's rule and write the trace")
    r.add_argument("what", choices=FORMALISMS)
    common(r)
    r.add_argument("--ordering", default=None, help="file listing switch names in order")
    r.add_argument("--pointer", default=None, help="initial pointer (default: first switch)")
    r.add_argument("--initial", choices=("standard", "alternative"), default="standard",
                   help="alternative starts without e_1^1 (parity only)")
    r.add_argument("--golden", nargs="?", const="builtin", default=None,
                   help="diff against the committed n=3 trace or a given file")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("what", choices=("phases", "switches", "lengths", "cross", "uso", "oracle"))
    common(v)
    v.add_argument("--faces", type=_faces, default=None, help="'all' or 'sample K'")
    v.add_argument("--sample", type=int, default=None, help="oracle: number of sampled steps")
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("export", help="DOT picture or LP file")
    e.add_argument("what", choices=("dot", "lp"))
    common(e)
    e.add_argument("--step", type=int, default=0, help="dot: strategy after this many switches")
    e.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
