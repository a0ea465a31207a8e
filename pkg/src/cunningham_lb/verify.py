"""Verification suites shared by the command line and the acceptance tests.

Each suite returns a list of :class:`Check` entries; a suite never raises
on a failed claim, it reports it.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from . import family
from .cunningham import EdgeOrdering, RunTrace, run
from .parity import ParityInstance, best_response, brute_force_response


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""
    counterexample: Any = None
    seconds: float = 0.0

    def to_json(self) -> dict:
        return {"name": self.name, "ok": self.ok, "detail": self.detail,
                "counterexample": self.counterexample}


def timed(name: str, fn: Callable[[], tuple[bool, str, Any]]) -> Check:
    t = time.perf_counter()
    try:
        ok, detail, cex = fn()
    except Exception as exc:  # a crash is a failed check, not a crashed report
        ok, detail, cex = False, f"{type(exc).__name__}: {exc}", None
    return Check(name, ok, detail, cex, time.perf_counter() - t)


# -- runs ---------------------------------------------------------------------

def parity_run(n: int, ordering: EdgeOrdering | None = None, pointer: str | None = None,
               bits: Mapping[str, int] | None = None, check_monotone: bool = False) -> RunTrace:
    ordering = ordering or family.build_ordering(n)
    start = family.initial_bits(n) if bits is None else bits
    inst = ParityInstance(family.build_game(n), family.bits_to_strategy(n, start),
                          family.edge_targets(n), n)
    return run(inst, ordering, pointer, record_certificates=False, check_monotone=check_monotone)


def visited_states(n: int, trace: RunTrace, bits: Mapping[str, int] | None = None) -> list[dict]:
    """Bit maps of the strategies before each step, plus the final one."""
    cur = dict(family.initial_bits(n) if bits is None else bits)
    states = [dict(cur)]
    for name in trace.switches:
        u, b = family.split_switch(name)
        cur[u] = b
        states.append(dict(cur))
    return states


def increments(n: int, states: Sequence[Mapping[str, int]]) -> list[tuple[int, int, int]]:
    """(configuration value, first state, one past last state) per counter
    value, using :func:`family.classify_phase`."""
    labels = []
    for bits in states:
        pa = family.classify_phase(bits, n)
        labels.append(None if pa is None else pa.config.value)
    out = []
    start = 0
    for k in range(1, len(labels) + 1):
        if k == len(labels) or labels[k] != labels[start]:
            out.append((labels[start], start, k))
            start = k
    return out


# -- suites ---------------------------------------------------------------------

def check_phases(n: int, trace: RunTrace | None = None) -> list[Check]:
    trace = trace or parity_run(n)
    states = visited_states(n, trace)

    def classified():
        missing = [k for k, b in enumerate(states) if family.classify_phase(b, n) is None]
        return not missing, f"{len(states) - len(missing)}/{len(states)} strategies classified", missing[:5]

    def in_order():
        values = [v for v, _, _ in increments(n, states)]
        want = list(range(1, 2 ** n))
        return values == want, f"configurations {values[:4]}..{values[-2:]}", None if values == want else values

    def endpoints():
        first = family.classify_phase(states[0], n)
        last = family.classify_phase(states[-1], n)
        ok = (first is not None and (first.phase, first.config.value) == (1, 1)
              and last is not None and (last.phase, last.config.value) == (1, 2 ** n - 1)
              and states[-1] == family.terminal_bits(n))
        return ok, f"start {first and first.label()}, end {last and last.label()}", None

    return [timed(f"phases n={n}: every visited strategy classifies", classified),
            timed(f"phases n={n}: configurations 1..2^n-1 in order", in_order),
            timed(f"phases n={n}: initial and terminal phase", endpoints)]


def switch_table_mismatches(n: int, trace: RunTrace, literal: bool = False,
                            steps: Sequence[int] | None = None) -> list[tuple]:
    """(step, phase label, edge, 'missing'|'extra') for every visited
    strategy and every phase column it satisfies."""
    states = visited_states(n, trace)
    improving = [set(s.improving) for s in trace.steps] + [set()]
    out = []
    for k in (range(len(states)) if steps is None else steps):
        for pa in family.phase_matches(states[k], n):
            must_in, must_out = family.expected_switch_constraints(pa, states[k], n, literal)
            out += [(k, pa.label(), e, "missing") for e in sorted(must_in - improving[k])]
            out += [(k, pa.label(), e, "extra") for e in sorted(must_out & improving[k])]
    return out


def check_switches(n: int, trace: RunTrace | None = None) -> list[Check]:
    trace = trace or parity_run(n)

    def table():
        bad = switch_table_mismatches(n, trace)
        return not bad, f"{len(bad)} cells disagree over {len(trace) + 1} strategies", bad[:5]

    return [timed(f"switches n={n}: improving sets match the switch table", table)]


def check_lengths(n: int, trace: RunTrace | None = None) -> list[Check]:
    trace = trace or parity_run(n)
    ordering = family.build_ordering(n)

    def bound():
        return len(trace) >= 2 ** n, f"{len(trace)} switches, 2^n = {2 ** n}", None

    def proceeding():
        states = visited_states(n, trace)
        sw = trace.switches
        bad = []
        for value, lo, hi in increments(n, states):
            if value == 2 ** n - 1:
                continue
            want = family.proceeding_sequence(family.CounterConfig.from_int(value, n), n, ordering)
            if not family.is_subsequence(want, sw[lo:hi]):
                bad.append(value)
        return not bad, f"{2 ** n - 2 - len(bad)}/{2 ** n - 2} increments follow the outline", bad[:5]

    return [timed(f"lengths n={n}: at least 2^n switches", bound),
            timed(f"lengths n={n}: every increment follows the proceeding outline", proceeding)]


def formalism_trace(kind: str, n: int, N=None, eps=None, ordering=None, pointer=None,
                    orientation=None) -> RunTrace:
    ordering = ordering or family.build_ordering(n)
    if kind == "parity":
        return parity_run(n, ordering, pointer, check_monotone=True)
    if kind == "mdp":
        from .mdp import MdpInstance
        return run(MdpInstance(n, N, eps), ordering, pointer)
    if kind == "lp":
        from .lp import simplex_instance
        return run(simplex_instance(n, N, eps), ordering, pointer)
    if kind == "auso":
        from .auso import encode_vertex, orient_hypercube, path_follow
        o = orientation or orient_hypercube(n, N, eps)
        return path_follow(o, n, encode_vertex(family.initial_bits(n), n), ordering, pointer)[1]
    raise ValueError(f"unknown formalism {kind!r}")


def check_cross(n: int, auso: bool | None = None, orientation=None) -> list[Check]:
    """Switch sequences of every formalism equal the parity sequence; each
    run also enforces its own certificate monotonicity."""
    auso = n <= 4 if auso is None else auso
    base = timed(f"cross n={n}: parity run", lambda: (True, "", None))
    traces = {}

    def one(kind):
        def go():
            traces[kind] = formalism_trace(kind, n, orientation=orientation if kind == "auso" else None)
            if kind == "parity":
                return True, f"{len(traces[kind])} switches", None
            same = traces[kind].switches == traces["parity"].switches
            from .cunningham import first_divergence
            d = first_divergence(traces[kind].switches, traces["parity"].switches)
            return same, f"{len(traces[kind])} steps", None if same else {"first_divergence": d}
        return go

    kinds = ["parity", "mdp", "lp"] + (["auso"] if auso else [])
    out = [timed(f"cross n={n}: {k} trace" + ("" if k == "parity" else " equals parity"), one(k))
           for k in kinds]
    return out


def check_oracle(n: int, trace: RunTrace | None = None, sample: int | None = None,
                 seed: int = 0) -> list[Check]:
    trace = trace or parity_run(n)
    states = visited_states(n, trace)
    idx = list(range(len(states)))
    if sample is not None and sample < len(idx):
        rng = np.random.default_rng(seed)
        idx = sorted(int(k) for k in rng.choice(len(idx), size=sample, replace=False))
    game = family.build_game(n)

    def responses():
        bad = []
        count = 0
        for k in idx:
            sigma = family.bits_to_strategy(n, states[k])
            brute, count = brute_force_response(game, sigma)
            _, val = best_response(game, sigma)
            if brute != val:
                bad.append(k)
        return not bad, f"{len(idx)} strategies, {count} counter-strategies each", bad[:5]

    def table():
        bad = switch_table_mismatches(n, trace, steps=idx)
        return not bad, f"{len(bad)} cells disagree", bad[:5]

    return [timed(f"oracle n={n}: best response equals brute force", responses),
            timed(f"oracle n={n}: improving sets match the switch table", table)]


def check_uso(n: int, faces: str | int = "all", seed: int = 0, orientation=None) -> list[Check]:
    from .auso import (check_auso, check_consistency_with_Hn, decode_vertex, encode_vertex,
                       orient_hypercube, path_follow)
    from .mdp import build_relaxed_mdp, improving_switches_mdp, policy_values
    state = {}

    def axioms():
        o = state["o"] = orientation or orient_hypercube(n)
        r = check_auso(o, faces, seed)
        state["r"] = r
        return r.ok, (f"acyclic={r.acyclic} potential={r.potential_ok} "
                      f"faces={r.faces_checked} bad={r.bad_faces}"), r.first_violation

    def sink():
        r = state["r"]
        if len(r.sinks) != 1:
            return False, f"{len(r.sinks)} global sinks", r.sinks[:5]
        bits = decode_vertex(r.sinks[0], n)
        M = build_relaxed_mdp(n)
        sigma = family.bits_to_strategy(n, bits)
        optimal = not improving_switches_mdp(M, sigma, policy_values(M, sigma))
        ok = optimal and bits == family.terminal_bits(n)
        return ok, "global sink is the terminal, optimal policy" if ok else "sink is not optimal", None

    def consistency():
        trace = parity_run(n)
        bad = check_consistency_with_Hn(state["o"], n, visited_states(n, trace))
        return not bad, f"{len(bad)} disagreements over {len(trace) + 1} strategies", bad[:5]

    return [timed(f"uso n={n}: AUSO axioms", axioms),
            timed(f"uso n={n}: unique global sink", sink),
            timed(f"uso n={n}: consistent with improving switches", consistency)]


def check_lp_conformance(n: int) -> list[Check]:
    from .lp import build_lp, bfs_policy_roundtrip, lp_from_mn, row_equivalent, simplex_instance
    from .mdp import build_relaxed_mdp, policy_values

    def rows():
        ok, problems = row_equivalent(build_lp(n), lp_from_mn(n))
        return ok, "rows proportional" if ok else "; ".join(problems[:3]), problems[:5]

    def objective():
        a, b = build_lp(n), lp_from_mn(n)
        same = a.c == [b.c[b.var_index[v]] for v in a.var_names]
        return same, "objective coefficients equal" if same else "objectives differ", None

    def values():
        M = build_relaxed_mdp(n)
        inst = simplex_instance(n)
        ordering = family.build_ordering(n)
        bad = []
        steps = 0
        e = ordering.minimum
        from .cunningham import successor
        while True:
            sigma = bfs_policy_roundtrip(inst.lp, inst.basis, n)
            vals = policy_values(M, sigma)
            total = sum((vals[u] for u in M.controllers), Fraction(0))
            if inst.value != total:
                bad.append(steps)
            if any(inst.y[i] != vals[u] for i, u in enumerate(inst.lp.row_names)):
                bad.append(("dual", steps))
            I = inst.improving_set()
            if not I:
                break
            e = successor(e, I, ordering)
            inst.apply(e)
            steps += 1
        ok = not bad and inst.dual_feasible()
        return ok, f"{steps + 1} bases, dual feasible at the optimum: {inst.dual_feasible()}", bad[:5]

    return [timed(f"lp n={n}: LP_n rows match the MDP conservation rows", rows),
            timed(f"lp n={n}: LP_n objective matches the MDP rewards", objective),
            timed(f"lp n={n}: c^T x and duals equal policy values at every basis", values)]


SUITES = {
    "phases": check_phases,
    "switches": check_switches,
    "lengths": check_lengths,
    "cross": check_cross,
    "oracle": check_oracle,
    "uso": check_uso,
}
