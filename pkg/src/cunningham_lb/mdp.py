"""Relaxed Markov decision processes M_n under the expected total reward
criterion, and policy iteration on them.

A relaxed MDP may have controller->controller and randomizer->randomizer
edges and rewards on randomizer edges; :func:`expand_relaxed` rewrites it
into a proper bipartite MDP without changing the values of the original
nodes.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from . import family
from .numerics import RationalMatrix, rat, rat_str, solve_linear_system

CONTROLLER = "controller"
RANDOMIZER = "randomizer"


class UnichainError(RuntimeError):
    """The Markov chain of a policy does not reach the sink almost surely."""


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class MdpEdge:
    source: str
    target: str
    prob: Fraction | None
    reward: Fraction


@dataclass
class RelaxedMdp:
    nodes: list[str]
    owner: dict[str, str]
    out: dict[str, list[MdpEdge]]
    priority: dict[str, int] = field(default_factory=dict)
    N: int | None = None
    eps: Fraction | None = None
    sink: str = "t"
    aux: set[str] = field(default_factory=set)

    def __post_init__(self):
        for v in self.nodes:
            edges = self.out.get(v, [])
            if not edges:
                raise ValueError(f"{v} has no outgoing edge")
            if self.owner[v] == RANDOMIZER:
                total = sum(e.prob for e in edges)
                if total != 1:
                    raise ValueError(f"probabilities at {v} sum to {total}, not 1")

    @property
    def controllers(self) -> list[str]:
        return [v for v in self.nodes if self.owner[v] == CONTROLLER]

    @property
    def randomizers(self) -> list[str]:
        return [v for v in self.nodes if self.owner[v] == RANDOMIZER]

    def successors(self, v: str) -> list[str]:
        return [e.target for e in self.out[v]]

    def edge(self, u: str, v: str) -> MdpEdge:
        for e in self.out[u]:
            if e.target == v:
                return e
        raise KeyError((u, v))

    def edges(self) -> list[MdpEdge]:
        return [e for v in self.nodes for e in self.out[v]]

    def is_bipartite(self) -> bool:
        for e in self.edges():
            if self.owner[e.source] == self.owner[e.target]:
                if not (e.source == e.target == self.sink):
                    return False
            if self.owner[e.source] == RANDOMIZER and e.reward:
                return False
        return True

    def to_json(self) -> dict:
        return {
            "nodes": [{"id": v, "owner": self.owner[v], "priority": self.priority.get(v)}
                      for v in self.nodes],
            "edges": [{"from": e.source, "to": e.target,
                       "p": None if e.prob is None else rat_str(e.prob),
                       "r": rat_str(e.reward)} for e in self.edges()],
            "params": {"N": self.N, "eps": None if self.eps is None else rat_str(self.eps)},
        }

    def to_dot(self, sigma: Mapping[str, str] | None = None,
               improving: set[tuple[str, str]] | None = None) -> str:
        sigma = sigma or {}
        improving = improving or set()
        lines = ["digraph M {", "  rankdir=BT;"]
        for v in self.nodes:
            shape = "circle" if self.owner[v] == CONTROLLER else "box"
            label = v if v not in self.priority else f"{v}\\n{self.priority[v]}"
            lines.append(f'  "{v}" [shape={shape}, label="{label}"];')
        for e in self.edges():
            attrs = []
            if e.prob is not None and e.prob != 1:
                attrs.append(f'label="{rat_str(e.prob)}"')
            if sigma.get(e.source) == e.target:
                attrs.append("color=blue, penwidth=2")
            elif (e.source, e.target) in improving:
                attrs.append("color=green, style=dashed")
            elif self.owner[e.source] == CONTROLLER:
                attrs.append("style=dotted")
            lines.append(f'  "{e.source}" -> "{e.target}" [{", ".join(attrs)}];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def default_parameters(n: int) -> tuple[int, Fraction]:
    """N = 2n+1 and eps = 1/N^(2n+10)."""
    N = 2 * n + 1
    return N, Fraction(1, N ** (2 * n + 10))


def priority_reward(N: int, omega: int) -> Fraction:
    return Fraction(-N) ** omega


def build_relaxed_mdp(n: int, N: int | None = None, eps=None) -> RelaxedMdp:
    family._check_n(n)
    dN, deps = default_parameters(n)
    N = dN if N is None else N
    eps = deps if eps is None else rat(eps)
    if not isinstance(N, int) or N < 2:
        raise ParameterError(f"N must be an integer >= 2, got {N!r}")
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie strictly between 0 and 1, got {eps}")

    nodes: list[str] = []
    owner: dict[str, str] = {}
    out: dict[str, list[MdpEdge]] = {}
    priority: dict[str, int] = {}
    zero = Fraction(0)
    for v, (s0, s1) in family.player0_successors(n).items():
        nodes.append(v)
        owner[v] = CONTROLLER
        out[v] = [MdpEdge(v, s1, None, zero), MdpEdge(v, s0, None, zero)]

    def randomizer(v, targets, omega=None):
        nodes.append(v)
        owner[v] = RANDOMIZER
        r = zero if omega is None else priority_reward(N, omega)
        if omega is not None:
            priority[v] = omega
        out[v] = [MdpEdge(v, w, p, r) for w, p in targets]

    half = (1 - eps) / 2
    for i in range(1, n + 1):
        if i == 1:
            randomizer("F_1", [("h_1", eps), ("e_1", 1 - eps)])
        else:
            randomizer(f"F_{i}", [(f"h_{i}", eps), (f"d_{i}", half), (f"e_{i}", half)])
        randomizer(f"g_{i}", [(f"F_{i}", Fraction(1))], 2 * i - 1)
        randomizer(f"h_{i}", [(family.node("a", i + 1, n), Fraction(1))], 2 * i)
    randomizer("s", [(f"c_{n}", Fraction(1))], 0)
    randomizer("t", [("t", Fraction(1))])
    return RelaxedMdp(nodes, owner, out, priority, N, eps, "t")


def expand_relaxed(M: RelaxedMdp) -> RelaxedMdp:
    """Subdivide edges until the MDP is bipartite with reward-free randomizer
    edges.  New nodes are recorded in ``aux``."""
    if M.is_bipartite():
        return M
    nodes = list(M.nodes)
    owner = dict(M.owner)
    aux = set(M.aux)
    out: dict[str, list[MdpEdge]] = {v: [] for v in nodes}
    one, zero = Fraction(1), Fraction(0)

    def fresh(name, who):
        nodes.append(name)
        owner[name] = who
        aux.add(name)
        out[name] = []
        return name

    for e in M.edges():
        u, v = e.source, e.target
        if u == v == M.sink:
            out[u].append(e)
            continue
        if owner[u] == RANDOMIZER and e.reward:
            # randomizer -> new controller -> new randomizer -> target
            c = fresh(f"[{u}>{v}]", CONTROLLER)
            r = fresh(f"[{u}>{v}]'", RANDOMIZER)
            out[u].append(MdpEdge(u, c, e.prob, zero))
            out[c].append(MdpEdge(c, r, None, e.reward))
            out[r].append(MdpEdge(r, v, one, zero))
            if owner[v] == RANDOMIZER:
                c2 = fresh(f"[{r}>{v}]", CONTROLLER)
                out[r][-1] = MdpEdge(r, c2, one, zero)
                out[c2].append(MdpEdge(c2, v, None, zero))
        elif owner[u] == RANDOMIZER and owner[v] == RANDOMIZER:
            c = fresh(f"[{u}>{v}]", CONTROLLER)
            out[u].append(MdpEdge(u, c, e.prob, zero))
            out[c].append(MdpEdge(c, v, None, zero))
        elif owner[u] == CONTROLLER and owner[v] == CONTROLLER:
            r = fresh(f"[{u}>{v}]", RANDOMIZER)
            out[u].append(MdpEdge(u, r, None, e.reward))
            out[r].append(MdpEdge(r, v, one, zero))
        else:
            out[u].append(e)
    return RelaxedMdp(nodes, owner, out, dict(M.priority), M.N, M.eps, M.sink, aux)


def _choice(M: RelaxedMdp, sigma: Mapping[str, str], u: str) -> str:
    succ = M.out[u]
    if len(succ) == 1:
        return succ[0].target
    return sigma[u]


def reaches_sink(M: RelaxedMdp, sigma: Mapping[str, str]) -> set[str]:
    """Nodes from which the chain of ``sigma`` reaches the sink with positive
    probability; the chain is unichain iff this is every node."""
    preds: dict[str, list[str]] = {v: [] for v in M.nodes}
    for v in M.nodes:
        if M.owner[v] == CONTROLLER:
            preds[_choice(M, sigma, v)].append(v)
        else:
            for e in M.out[v]:
                if e.prob:
                    preds[e.target].append(v)
    seen = {M.sink}
    stack = [M.sink]
    while stack:
        w = stack.pop()
        for u in preds[w]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return seen


def is_unichain(M: RelaxedMdp, sigma: Mapping[str, str]) -> bool:
    return len(reaches_sink(M, sigma)) == len(M.nodes)


def policy_values(M: RelaxedMdp, sigma: Mapping[str, str]) -> dict[str, Fraction]:
    """Exact values of ``sigma``, with the sink pinned to 0.

    Controllers only copy a successor's value plus a reward, so they are
    folded into the first randomizer on their policy path and the linear
    system is solved over randomizers alone.
    """
    missing = set(M.nodes) - reaches_sink(M, sigma)
    if missing:
        raise UnichainError(f"the sink is unreachable from {sorted(missing)}")
    anchor: dict[str, tuple[str, Fraction]] = {}
    for v in M.randomizers:
        anchor[v] = (v, Fraction(0))
    for u in M.controllers:
        path = []
        w, acc = u, Fraction(0)
        while M.owner[w] == CONTROLLER and w not in anchor:
            if w in path:
                raise UnichainError(f"controller cycle through {w}")
            path.append(w)
            nxt = _choice(M, sigma, w)
            w = nxt
        base, offset = anchor[w]
        # assign back along the path
        for x in reversed(path):
            nxt = _choice(M, sigma, x)
            offset = offset + M.edge(x, nxt).reward
            anchor[x] = (base, offset)
    rands = M.randomizers
    index = {v: k for k, v in enumerate(rands)}
    A = RationalMatrix(len(rands), len(rands))
    b = [Fraction(0)] * len(rands)
    for v in rands:
        k = index[v]
        A[k, k] = 1
        if v == M.sink:
            continue
        for e in M.out[v]:
            base, offset = anchor[e.target]
            A[k, index[base]] -= e.prob
            b[k] += e.prob * (e.reward + offset)
    x = solve_linear_system(A, b)
    vals = {v: x[index[v]] for v in rands}
    for u in M.controllers:
        base, offset = anchor[u]
        vals[u] = vals[base] + offset
    return vals


def improving_switches_mdp(M: RelaxedMdp, sigma: Mapping[str, str],
                           vals: Mapping[str, Fraction]) -> set[tuple[str, str]]:
    """Edges (u, v') off the policy with val(v') + r(u, v') > val(u)."""
    out = set()
    for u in M.controllers:
        if len(M.out[u]) < 2:
            continue
        for e in M.out[u]:
            if e.target != sigma[u] and vals[e.target] + e.reward > vals[u]:
                out.add((u, e.target))
    return out


@dataclass
class ScaleReport:
    ok: bool
    max_abs_sum: Fraction
    min_gap: Fraction | None
    violations: list[str] = field(default_factory=list)


def validate_priority_scale(M: RelaxedMdp, limit: int = 18) -> ScaleReport:
    """Check that priority rewards behave like parity priorities.

    Grouping the subsets of priority nodes by their top element, a subset
    with a smaller top must have a smaller absolute sum than every subset
    with a larger top; in addition eps times the largest absolute sum must
    stay below the smallest gap between distinct sums.
    """
    pnodes = sorted(M.priority, key=M.priority.__getitem__)
    if len(pnodes) > limit:
        raise ValueError(f"{len(pnodes)} priority nodes exceed the exhaustive limit {limit}")
    rewards = [M.out[v][0].reward for v in pnodes]
    lo: list[Fraction] = []
    hi: list[Fraction] = []
    sums: set[Fraction] = {Fraction(0)}
    for top, r in enumerate(rewards):
        below = [Fraction(0)]
        for x in rewards[:top]:
            below += [s + x for s in below]
        group = [abs(r + s) for s in below]
        lo.append(min(group))
        hi.append(max(group))
        sums.update(r + s for s in below)
    violations = []
    for k in range(1, len(pnodes)):
        if not hi[k - 1] < lo[k]:
            violations.append(f"subsets topped by {pnodes[k - 1]} reach |sum| {hi[k - 1]}, "
                              f"subsets topped by {pnodes[k]} go down to {lo[k]}")
    ordered = sorted(sums)
    gaps = [b - a for a, b in zip(ordered, ordered[1:])]
    min_gap = min(gaps) if gaps else None
    max_abs = max(abs(s) for s in ordered)
    if M.eps is not None and min_gap is not None and not M.eps * max_abs < min_gap:
        violations.append(f"eps * {max_abs} is not below the smallest gap {min_gap}")
    return ScaleReport(not violations, max_abs, min_gap, violations)


def all_policies(M: RelaxedMdp):
    """Every policy over the controllers with a real choice."""
    choosers = [u for u in M.controllers if len(M.out[u]) > 1]
    for combo in itertools.product(*(M.successors(u) for u in choosers)):
        yield dict(zip(choosers, combo))


class MdpInstance:
    """Policy iteration on M_n with switches named like the parity edges."""

    formalism = "mdp"

    def __init__(self, n: int, N: int | None = None, eps=None,
                 bits: Mapping[str, int] | None = None):
        self.n = n
        self.mdp = build_relaxed_mdp(n, N, eps)
        self.switch_edges = family.edge_targets(n)
        self.edge_names = {e: name for name, e in self.switch_edges.items()}
        bits = family.initial_bits(n) if bits is None else bits
        self.sigma = family.bits_to_strategy(n, bits)
        self._evaluate()

    def _evaluate(self) -> None:
        self.vals = policy_values(self.mdp, self.sigma)
        self._improving = {self.edge_names[e]
                           for e in improving_switches_mdp(self.mdp, self.sigma, self.vals)}

    def improving_set(self) -> set[str]:
        return set(self._improving)

    def is_terminal(self) -> bool:
        return not self._improving

    def apply(self, switch: str) -> dict:
        if switch not in self._improving:
            raise ValueError(f"{switch} is not an improving switch")
        u, w = self.switch_edges[switch]
        self.sigma[u] = w
        self._evaluate()
        return {}

    def certificate(self) -> Fraction:
        return sum((self.vals[u] for u in self.mdp.controllers), Fraction(0))

    def certificate_increased(self, before: Fraction, after: Fraction) -> bool:
        return after > before


def mdp_instance(n: int, N: int | None = None, eps=None) -> MdpInstance:
    return MdpInstance(n, N, eps)
