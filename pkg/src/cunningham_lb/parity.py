"""Parity games, play valuations and the valuation orderings used by
discrete strategy improvement."""
from __future__ import annotations

import enum
import itertools
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

PLAYER0 = 0
PLAYER1 = 1


class Cmp(enum.Enum):
    LESS = "<"
    GREATER = ">"
    EQUAL = "="
    INCOMPARABLE = "~"

    def flip(self) -> "Cmp":
        if self is Cmp.LESS:
            return Cmp.GREATER
        if self is Cmp.GREATER:
            return Cmp.LESS
        return self


class IncomparableError(RuntimeError):
    """A decision had to be taken on two incomparable valuations."""


class ValuationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ParityGame:
    nodes: tuple[str, ...]
    owner: Mapping[str, int]
    priority: Mapping[str, int]
    successors: Mapping[str, tuple[str, ...]]
    labels: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for v in self.nodes:
            if not self.successors.get(v):
                raise ValueError(f"node {v} has no successor (graph must be total)")
            if self.owner[v] not in (PLAYER0, PLAYER1):
                raise ValueError(f"node {v} has invalid owner {self.owner[v]}")
            for w in self.successors[v]:
                if w not in self.owner:
                    raise ValueError(f"edge {v}->{w} leaves the node set")

    @property
    def player0_nodes(self) -> list[str]:
        return [v for v in self.nodes if self.owner[v] == PLAYER0]

    @property
    def player1_nodes(self) -> list[str]:
        return [v for v in self.nodes if self.owner[v] == PLAYER1]

    def edges(self) -> list[tuple[str, str]]:
        return [(v, w) for v in self.nodes for w in self.successors[v]]

    # -- serialization -----------------------------------------------------
    def to_json(self) -> dict:
        return {
            "nodes": [{"id": v, "owner": self.owner[v], "priority": self.priority[v],
                       "label": self.labels.get(v, v)} for v in self.nodes],
            "edges": [[v, w] for v, w in self.edges()],
        }

    @classmethod
    def from_json(cls, data: dict | str) -> "ParityGame":
        if isinstance(data, str):
            data = json.loads(data)
        nodes = tuple(d["id"] for d in data["nodes"])
        succ: dict[str, list[str]] = {v: [] for v in nodes}
        for v, w in data["edges"]:
            succ[v].append(w)
        return cls(nodes=nodes,
                   owner={d["id"]: int(d["owner"]) for d in data["nodes"]},
                   priority={d["id"]: int(d["priority"]) for d in data["nodes"]},
                   successors={v: tuple(ws) for v, ws in succ.items()},
                   labels={d["id"]: d.get("label", d["id"]) for d in data["nodes"]})

    def to_dot(self, sigma: Mapping[str, str] | None = None,
               tau: Mapping[str, str] | None = None,
               improving: Iterable[tuple[str, str]] = ()) -> str:
        """Player 0 nodes as circles, player 1 nodes as boxes; strategy edges
        bold (blue for player 0, red for player 1), improving edges dashed green."""
        sigma = sigma or {}
        tau = tau or {}
        improving = set(improving)
        lines = ["digraph G {"]
        for v in self.nodes:
            shape = "circle" if self.owner[v] == PLAYER0 else "box"
            label = f"{self.labels.get(v, v)}\\n{self.priority[v]}"
            lines.append(f'  "{v}" [shape={shape}, label="{label}"];')
        for v, w in self.edges():
            attrs = []
            if sigma.get(v) == w:
                attrs.append("color=blue, penwidth=2")
            elif tau.get(v) == w:
                attrs.append("color=red, penwidth=2")
            elif (v, w) in improving:
                attrs.append("color=green, style=dashed")
            elif len(self.successors[v]) > 1:
                attrs.append("style=dotted")
            attr = f" [{', '.join(attrs)}]" if attrs else ""
            lines.append(f'  "{v}" -> "{w}"{attr};')
        lines.append("}")
        return "\n".join(lines)


def reward(game: ParityGame, v: str) -> int:
    p = game.priority[v]
    return p if p % 2 == 0 else -p


# -- valuations --------------------------------------------------------------

@dataclass(frozen=True)
class NodeValuation:
    cycle: str
    path: frozenset
    length: int

    def sorted_path(self) -> list[str]:
        return sorted(self.path)

    def __repr__(self) -> str:
        return f"({self.cycle}, {{{', '.join(sorted(self.path))}}}, {self.length})"


GameValuation = dict  # node -> NodeValuation


def compare_path_sets(game: ParityGame, M: Iterable[str], N: Iterable[str]) -> Cmp:
    M, N = frozenset(M), frozenset(N)
    if M == N:
        return Cmp.EQUAL
    diff: Counter = Counter()
    for v in M - N:
        diff[game.priority[v]] += 1
    for v in N - M:
        diff[game.priority[v]] -= 1
    for p in sorted(diff, reverse=True):
        d = diff[p]
        if d == 0:
            continue
        # more odd priorities, or fewer even ones, makes M the smaller set
        if (d > 0) == (p % 2 == 1):
            return Cmp.LESS
        return Cmp.GREATER
    return Cmp.INCOMPARABLE


def compare_valuations(game: ParityGame, a: NodeValuation, b: NodeValuation) -> Cmp:
    ra, rb = reward(game, a.cycle), reward(game, b.cycle)
    if ra != rb:
        return Cmp.LESS if ra < rb else Cmp.GREATER
    c = compare_path_sets(game, a.path, b.path)
    if c is not Cmp.EQUAL:
        return c
    if a.length == b.length:
        return Cmp.EQUAL if a.cycle == b.cycle else Cmp.INCOMPARABLE
    shorter_is_less = game.priority[a.cycle] % 2 == 1
    if (a.length < b.length) == shorter_is_less:
        return Cmp.LESS
    return Cmp.GREATER


def _next(game: ParityGame, sigma: Mapping[str, str], tau: Mapping[str, str], v: str) -> str:
    succ = game.successors[v]
    if len(succ) == 1:
        return succ[0]
    choice = sigma.get(v) if game.owner[v] == PLAYER0 else tau.get(v)
    if choice is None:
        raise ValueError(f"no strategy choice at {v}")
    return choice


def play_decomposition(game: ParityGame, sigma, tau, v: str) -> tuple[list[str], list[str]]:
    """Split the unique play from ``v`` into a loop-free prefix and a cycle
    rotated to start at its most relevant node."""
    seen: dict[str, int] = {}
    walk = []
    u = v
    while u not in seen:
        seen[u] = len(walk)
        walk.append(u)
        u = _next(game, sigma, tau, u)
    loop = walk[seen[u]:]
    top = max(game.priority[w] for w in loop)
    heads = [i for i, w in enumerate(loop) if game.priority[w] == top]
    if len(heads) > 1:
        raise ValuationError(f"cycle {loop} repeats its maximal priority {top}")
    h = heads[0]
    w1 = loop[h]
    prefix = walk[:seen[u]] + loop[:h]
    return prefix, loop[h:] + loop[:h]


def node_valuation(game: ParityGame, sigma, tau, v: str) -> NodeValuation:
    prefix, cycle = play_decomposition(game, sigma, tau, v)
    w1 = cycle[0]
    bound = game.priority[w1]
    return NodeValuation(w1, frozenset(u for u in prefix if game.priority[u] > bound), len(prefix))


def game_valuation(game: ParityGame, sigma, tau) -> GameValuation:
    """Valuations of every node for a pair of positional strategies."""
    val: dict[str, NodeValuation] = {}
    for start in game.nodes:
        if start in val:
            continue
        walk = []
        index: dict[str, int] = {}
        u = start
        while u not in val and u not in index:
            index[u] = len(walk)
            walk.append(u)
            u = _next(game, sigma, tau, u)
        if u in index:
            loop = walk[index[u]:]
            top = max(game.priority[w] for w in loop)
            heads = [i for i, w in enumerate(loop) if game.priority[w] == top]
            if len(heads) > 1:
                raise ValuationError(f"cycle {loop} repeats its maximal priority {top}")
            h = heads[0]
            w1 = loop[h]
            size = len(loop)
            for i, w in enumerate(loop):
                val[w] = NodeValuation(w1, frozenset(), (h - i) % size)
            walk = walk[:index[u]]
        for w in reversed(walk):
            nxt = val[_next(game, sigma, tau, w)]
            path = nxt.path
            if game.priority[w] > game.priority[nxt.cycle]:
                path = path | {w}
            val[w] = NodeValuation(nxt.cycle, path, nxt.length + 1)
    return val


# -- best response ----------------------------------------------------------

def _argmin(game: ParityGame, candidates: list[str], val: GameValuation, where: str) -> str:
    best = candidates[0]
    for w in candidates[1:]:
        c = compare_valuations(game, val[w], val[best])
        if c is Cmp.INCOMPARABLE:
            raise IncomparableError(f"{where}: {w} {val[w]} vs {best} {val[best]}")
        if c is Cmp.LESS:
            best = w
    return best


def initial_counter_strategy(game: ParityGame) -> dict[str, str]:
    return {v: game.successors[v][0] for v in game.player1_nodes
            if len(game.successors[v]) > 1}


def best_response(game: ParityGame, sigma: Mapping[str, str],
                  tau0: Mapping[str, str] | None = None,
                  max_rounds: int = 10_000) -> tuple[dict[str, str], GameValuation]:
    """Optimal counter-strategy of player 1 against ``sigma`` and its valuation.

    Player-1 local improvement: every round, each player-1 node whose
    current successor is not ≺-minimal among its successors switches to the
    minimal one.  Ties keep the current choice, so warm-starting from the
    previous counter-strategy yields minimal changes.
    """
    tau = dict(tau0) if tau0 is not None else initial_counter_strategy(game)
    choosers = [v for v in game.player1_nodes if len(game.successors[v]) > 1]
    for _ in range(max_rounds):
        val = game_valuation(game, sigma, tau)
        changed = False
        for v in choosers:
            cur = tau[v]
            better = [w for w in game.successors[v]
                      if w != cur and compare_valuations(game, val[w], val[cur]) is Cmp.LESS]
            if better:
                tau[v] = _argmin(game, better, val, f"best response at {v}")
                changed = True
        if not changed:
            return tau, val
    raise ValuationError("player 1 local improvement did not converge")


def counter_strategies(game: ParityGame):
    """Every positional player-1 strategy (choice nodes only)."""
    choosers = [v for v in game.player1_nodes if len(game.successors[v]) > 1]
    for combo in itertools.product(*(game.successors[v] for v in choosers)):
        yield dict(zip(choosers, combo))


def brute_force_response(game: ParityGame, sigma: Mapping[str, str]) -> tuple[GameValuation, int]:
    """Pointwise ≺-minimum of the valuations over all player-1 strategies,
    and the number of strategies enumerated."""
    best: dict[str, NodeValuation] = {}
    count = 0
    for tau in counter_strategies(game):
        count += 1
        val = game_valuation(game, sigma, tau)
        for v, x in val.items():
            cur = best.get(v)
            if cur is None:
                best[v] = x
                continue
            c = compare_valuations(game, x, cur)
            if c is Cmp.INCOMPARABLE:
                raise IncomparableError(f"brute force at {v}: {x} vs {cur}")
            if c is Cmp.LESS:
                best[v] = x
    return best, count


def improving_switches(game: ParityGame, sigma: Mapping[str, str],
                       val: GameValuation) -> set[tuple[str, str]]:
    out = set()
    for v in game.player0_nodes:
        cur = sigma[v]
        for w in game.successors[v]:
            if w == cur:
                continue
            c = compare_valuations(game, val[cur], val[w])
            if c is Cmp.INCOMPARABLE:
                raise IncomparableError(f"switch {v}->{w}: {val[cur]} vs {val[w]}")
            if c is Cmp.LESS:
                out.add((v, w))
    return out


def valuation_improves(game: ParityGame, old: GameValuation, new: GameValuation) -> bool:
    """``old ⊲ new``: pointwise ⪯ and not identical."""
    if old == new:
        return False
    for v in game.nodes:
        if compare_valuations(game, old[v], new[v]) is Cmp.GREATER:
            return False
    return True


def filtered_valuation(game: ParityGame, val: GameValuation, v: str, r: str) -> frozenset:
    bound = game.priority[r]
    return frozenset(u for u in val[v].path if game.priority[u] > bound)


# -- sink games ---------------------------------------------------------------

@dataclass
class SinkReport:
    ok: bool
    sink: str | None
    problems: list[str]


def _reaches(game: ParityGame, target: str) -> set[str]:
    pred: dict[str, list[str]] = {v: [] for v in game.nodes}
    for v, w in game.edges():
        pred[w].append(v)
    seen = {target}
    stack = [target]
    while stack:
        w = stack.pop()
        for v in pred[w]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def validate_sink_game(game: ParityGame, theta: Mapping[str, str]) -> SinkReport:
    problems = []
    candidates = [v for v in game.nodes
                  if game.priority[v] == 1 and v in game.successors[v]]
    if len(candidates) != 1:
        problems.append(f"sink existence: {len(candidates)} self-loop nodes of priority 1")
        return SinkReport(False, None, problems)
    sink = candidates[0]
    low = [v for v in game.nodes if v != sink and game.priority[v] <= 1]
    if low:
        problems.append(f"sink existence: other nodes with priority <= 1: {low}")
    unreached = set(game.nodes) - _reaches(game, sink)
    if unreached:
        problems.append(f"sink existence: sink unreachable from {sorted(unreached)}")
    if problems:
        return SinkReport(False, sink, problems)
    _, val = best_response(game, theta)
    bad = sorted(v for v in game.nodes if val[v].cycle != sink)
    if bad:
        problems.append(f"sink seeking: cycle component differs from {sink} at {bad}")
    return SinkReport(not problems, sink, problems)


class ParityInstance:
    """Strategy improvement on a parity game, driven by switch names."""

    formalism = "parity"

    def __init__(self, game: ParityGame, sigma: Mapping[str, str],
                 switch_edges: Mapping[str, tuple[str, str]], n: int = 0):
        self.game = game
        self.n = n
        self.sigma = dict(sigma)
        self.switch_edges = dict(switch_edges)
        self.edge_names = {e: name for name, e in self.switch_edges.items()}
        self.tau, self.val = best_response(game, self.sigma)
        self._improving: set[str] | None = None

    def improving_set(self) -> set[str]:
        if self._improving is None:
            edges = improving_switches(self.game, self.sigma, self.val)
            self._improving = {self.edge_names[e] for e in edges}
        return set(self._improving)

    def is_terminal(self) -> bool:
        return not self.improving_set()

    def apply(self, switch: str) -> dict:
        if switch not in self.improving_set():
            raise ValueError(f"{switch} is not an improving switch")
        v, w = self.switch_edges[switch]
        self.sigma[v] = w
        old_tau = self.tau
        self.tau, self.val = best_response(self.game, self.sigma, old_tau)
        self._improving = None
        return {u: self.tau[u] for u in self.tau if self.tau[u] != old_tau.get(u)}

    def certificate(self) -> GameValuation:
        return self.val

    def certificate_increased(self, before: GameValuation, after: GameValuation) -> bool:
        return valuation_improves(self.game, before, after)
