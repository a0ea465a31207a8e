"""The lower-bound family: the games G_n, the switch ordering, the designated
strategies, binary-counter helpers and the phase tables used to check runs."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

from .cunningham import EdgeOrdering
from .parity import PLAYER0, PLAYER1, ParityGame

LETTERS = "abcde"


def _check_n(n: int) -> None:
    if not isinstance(n, int) or n < 3:
        raise ValueError(f"the construction needs n >= 3, got {n!r}")


def node(letter: str, i: int, n: int) -> str:
    """Name of ``letter_i`` after resolving a_{n+1} = t and b_1 = c_1 = g_1."""
    if letter == "a" and i == n + 1:
        return "t"
    if letter in "bc" and i == 1:
        return "g_1"
    return f"{letter}_{i}"


def indices(letter: str, n: int) -> range:
    """Index range of the player-0 nodes of one kind."""
    if letter == "b":
        return range(2, n)
    if letter == "e":
        return range(1, n + 1)
    return range(2, n + 1)


def player0_node_order(n: int) -> list[str]:
    """Canonical order: a_2..a_n, b_2..b_{n-1}, c_2..c_n, d_2..d_n, e_1..e_n."""
    return [f"{x}_{i}" for x in LETTERS for i in indices(x, n)]


def edge_targets(n: int) -> dict[str, tuple[str, str]]:
    """Switch name -> (player-0 node, successor)."""
    out = {}
    for i in indices("a", n):
        out[f"a_{i}^1"] = (f"a_{i}", f"g_{i}")
        out[f"a_{i}^0"] = (f"a_{i}", node("a", i + 1, n))
    for i in indices("b", n):
        out[f"b_{i}^1"] = (f"b_{i}", f"g_{i}")
        out[f"b_{i}^0"] = (f"b_{i}", node("b", i - 1, n))
    for i in indices("c", n):
        out[f"c_{i}^1"] = (f"c_{i}", f"g_{i}")
        out[f"c_{i}^0"] = (f"c_{i}", node("c", i - 1, n))
    for i in indices("d", n):
        out[f"d_{i}^1"] = (f"d_{i}", f"F_{i}")
        out[f"d_{i}^0"] = (f"d_{i}", node("b", i - 1, n))
    for i in indices("e", n):
        out[f"e_{i}^1"] = (f"e_{i}", f"F_{i}")
        out[f"e_{i}^0"] = (f"e_{i}", "s")
    return out


def player0_successors(n: int) -> dict[str, tuple[str, str]]:
    """Player-0 node -> (bit-0 successor, bit-1 successor)."""
    t = edge_targets(n)
    return {v: (t[f"{v}^0"][1], t[f"{v}^1"][1]) for v in player0_node_order(n)}


def build_game(n: int) -> ParityGame:
    _check_n(n)
    nodes: list[str] = []
    owner: dict[str, int] = {}
    prio: dict[str, int] = {}
    succ: dict[str, tuple[str, ...]] = {}

    def add(v, who, p, targets):
        nodes.append(v)
        owner[v] = who
        prio[v] = p
        succ[v] = tuple(targets)

    for v, (s0, s1) in player0_successors(n).items():
        add(v, PLAYER0, 3 if v[0] in "abc" else 5, (s1, s0))
    for i in range(1, n + 1):
        add(f"F_{i}", PLAYER1, 6,
            [f"h_{i}"] + ([f"d_{i}"] if i > 1 else []) + [f"e_{i}"])
        add(f"g_{i}", PLAYER1, 2 * i + 7, [f"F_{i}"])
        add(f"h_{i}", PLAYER1, 2 * i + 8, [node("a", i + 1, n)])
    add("s", PLAYER1, 8, [f"c_{n}"])
    add("t", PLAYER1, 1, ["t"])
    return ParityGame(tuple(nodes), owner, prio, succ, {v: v for v in nodes})


def build_ordering(n: int) -> EdgeOrdering:
    _check_n(n)
    seq = ["e_1^1"]
    for i in range(2, n):
        seq += [f"d_{i}^0", f"e_{i}^1", f"b_{i}^1", f"b_{i}^0"]
    seq += [f"d_{n}^0", f"e_{n}^1"]
    for i in range(2, n + 1):
        seq += [f"c_{i}^0", f"c_{i}^1"]
    seq += [f"e_{i}^0" for i in range(1, n + 1)]
    seq += [f"d_{i}^1" for i in range(2, n + 1)]
    for i in range(n, 1, -1):
        seq += [f"a_{i}^1", f"a_{i}^0"]
    return EdgeOrdering(seq, name=f"cunningham-lb-{n}")


# -- strategies as bit maps --------------------------------------------------

Bits = dict  # player-0 node -> 0/1


def initial_bits(n: int) -> Bits:
    """{a_*^0, b_*^0, c_*^0, d_*^1, e_1^1, e_{*>1}^0}"""
    _check_n(n)
    bits = {v: 0 for v in player0_node_order(n)}
    for i in indices("d", n):
        bits[f"d_{i}"] = 1
    bits["e_1"] = 1
    return bits


def alternative_initial_bits(n: int) -> Bits:
    """{a_*^0, b_*^0, c_*^0, d_*^1, e_*^0}: the variant without e_1^1."""
    bits = initial_bits(n)
    bits["e_1"] = 0
    return bits


def terminal_bits(n: int) -> Bits:
    """{a_*^1, b_*^0, c_*^0, d_*^1, e_*^1}"""
    _check_n(n)
    bits = {}
    for v in player0_node_order(n):
        bits[v] = 0 if v[0] in "bc" else 1
    return bits


def bits_to_strategy(n: int, bits: Mapping[str, int]) -> dict[str, str]:
    succ = player0_successors(n)
    return {v: succ[v][bits[v]] for v in player0_node_order(n)}


def strategy_to_bits(n: int, sigma: Mapping[str, str]) -> Bits:
    succ = player0_successors(n)
    return {v: succ[v].index(sigma[v]) for v in player0_node_order(n)}


def initial_strategy(n: int) -> dict[str, str]:
    return bits_to_strategy(n, initial_bits(n))


def terminal_strategy(n: int) -> dict[str, str]:
    return bits_to_strategy(n, terminal_bits(n))


def switch_name(v: str, bit: int) -> str:
    return f"{v}^{bit}"


def split_switch(name: str) -> tuple[str, int]:
    v, b = name.split("^")
    return v, int(b)


def strategy_switch_names(bits: Mapping[str, int]) -> set[str]:
    """The edges contained in a strategy, by name."""
    return {switch_name(v, b) for v, b in bits.items()}


# -- binary counter ----------------------------------------------------------

@dataclass(frozen=True)
class CounterConfig:
    """Bit vector b_1 (least significant), b_2, ...; zero beyond ``len(bits)``."""
    bits: tuple[int, ...]

    @classmethod
    def from_int(cls, value: int, n: int) -> "CounterConfig":
        if value < 0:
            raise ValueError("negative counter value")
        width = max(n, value.bit_length())
        return cls(tuple((value >> k) & 1 for k in range(width)))

    @classmethod
    def from_string(cls, s: str) -> "CounterConfig":
        """Most significant bit first, as printed ("001" has b_1 = 1)."""
        return cls(tuple(int(c) for c in reversed(s)))

    def __getitem__(self, i: int) -> int:
        if i < 1:
            raise IndexError("counter bits are indexed from 1")
        return self.bits[i - 1] if i <= len(self.bits) else 0

    @property
    def value(self) -> int:
        return sum(b << k for k, b in enumerate(self.bits))

    def increment(self) -> "CounterConfig":
        return CounterConfig.from_int(self.value + 1, len(self.bits))

    def nu0(self) -> int:
        """Least unset bit."""
        i = 1
        while self[i]:
            i += 1
        return i

    def nu1(self) -> int:
        """Least set bit; undefined on the all-zero configuration."""
        for i, b in enumerate(self.bits, start=1):
            if b:
                return i
        raise ValueError("the zero configuration has no set bit")

    def with_nu0(self) -> "CounterConfig":
        k = self.nu0()
        width = max(len(self.bits), k)
        bits = list(self.bits) + [0] * (width - len(self.bits))
        bits[k - 1] = 1
        return CounterConfig(tuple(bits))

    def __str__(self) -> str:
        return "".join(str(b) for b in reversed(self.bits))


def counter_ops(b: CounterConfig) -> dict:
    out = {"value": b.value, "increment": b.increment(), "nu0": b.nu0(), "nu_vector": b.with_nu0()}
    out["nu1"] = b.nu1() if b.value else None
    return out


# -- phase tables ------------------------------------------------------------

@dataclass(frozen=True)
class PhaseAssignment:
    phase: int
    config: CounterConfig
    witness: tuple[int, ...] = ()

    def label(self) -> str:
        w = f" {self.witness}" if self.witness else ""
        return f"phase {self.phase} b={self.config}{w}"


def _allowed(phase: int, b: CounterConfig, n: int, j: int | None, k: int | None):
    """Allowed bit values per player-0 node for one column of the phase table."""
    bp = b.increment()
    bn = b.with_nu0()
    nu0, nu1 = b.nu0(), b.nu1()
    allowed: dict[str, frozenset] = {}
    one = frozenset({1})

    def ind(cond: bool) -> frozenset:
        return frozenset({1 if cond else 0})

    for i in indices("a", n):
        if phase == 5:
            allowed[f"a_{i}"] = frozenset({b[i] if i <= j else bp[i]})
        else:
            allowed[f"a_{i}"] = frozenset({b[i]})
    for i in indices("b", n):
        if phase == 1:
            allowed[f"b_{i}"] = ind(i == nu0) if j > i else ind(i == nu1)
        else:
            allowed[f"b_{i}"] = ind(i == nu0)
    for i in indices("c", n):
        allowed[f"c_{i}"] = ind(i == nu1) if phase in (1, 2) else ind(i == nu0)
    for i in indices("d", n):
        if phase == 1:
            allowed[f"d_{i}"] = frozenset({bn[i]}) if (j > i or (j == i and k > 1)) else one
        elif phase in (2, 3):
            allowed[f"d_{i}"] = frozenset({bn[i]})
        elif phase == 4:
            allowed[f"d_{i}"] = frozenset({1, bn[i]})
        else:
            allowed[f"d_{i}"] = one
    for i in indices("e", n):
        if phase == 1:
            allowed[f"e_{i}"] = one if (j > i or (j == i and k > 2)) else frozenset({b[i]})
        elif phase == 2:
            allowed[f"e_{i}"] = one
        elif phase == 3:
            allowed[f"e_{i}"] = frozenset({1, bp[i]})
        else:
            allowed[f"e_{i}"] = frozenset({bp[i]})
    return allowed


def _witnesses(phase: int, b: CounterConfig, n: int):
    if phase == 1:
        for j in range(b.nu0(), n + 2):
            for k in (1, 2, 3):
                yield (j, k)
    elif phase == 5:
        for j in range(b.nu0(), 0, -1):
            yield (j,)
    else:
        yield ()


def satisfies_phase(bits: Mapping[str, int], n: int, phase: int, b: CounterConfig,
                    witness: tuple[int, ...]) -> bool:
    j = witness[0] if witness else None
    k = witness[1] if len(witness) > 1 else None
    allowed = _allowed(phase, b, n, j, k)
    return all(bits[v] in allowed[v] for v in allowed)


@lru_cache(maxsize=16)
def _columns(n: int) -> dict[tuple, list]:
    """All phase-table columns, indexed by the a-bits they force (every
    column pins each a_i to a single value)."""
    a_nodes = [f"a_{i}" for i in indices("a", n)]
    index: dict[tuple, list] = {}
    for value in range(1, 2 ** n):
        b = CounterConfig.from_int(value, n)
        # phases 2-5 move towards b+, which the full counter does not have
        for phase in (range(1, 6) if value < 2 ** n - 1 else (1,)):
            for w in sorted(_witnesses(phase, b, n)):
                j = w[0] if w else None
                k = w[1] if len(w) > 1 else None
                allowed = _allowed(phase, b, n, j, k)
                key = tuple(next(iter(allowed[v])) for v in a_nodes)
                rest = tuple((v, s) for v, s in allowed.items()
                             if v not in a_nodes and len(s) == 1)
                index.setdefault(key, []).append((PhaseAssignment(phase, b, w), rest))
    return index


def phase_matches(bits: Mapping[str, int], n: int) -> list[PhaseAssignment]:
    """Every (phase, configuration) column the strategy satisfies.

    For each (phase, configuration) only the lexicographically least witness
    is reported.  The all-ones configuration only has phase 1.
    """
    key = tuple(bits[f"a_{i}"] for i in indices("a", n))
    out = []
    seen = set()
    for pa, rest in _columns(n).get(key, ()):
        tag = (pa.phase, pa.config)
        if tag not in seen and all(bits[v] in s for v, s in rest):
            seen.add(tag)
            out.append(pa)
    return out


def classify_phase(bits: Mapping[str, int], n: int) -> PhaseAssignment | None:
    """The most advanced matching column: largest configuration first, then
    the latest phase, which is how the simulation table labels boundary
    strategies (a finished phase-1 strategy already counts as phase 2)."""
    matches = phase_matches(bits, n)
    if not matches:
        return None
    return max(matches, key=lambda m: (m.config.value, m.phase))


def expected_switch_constraints(pa: PhaseAssignment, bits: Mapping[str, int], n: int,
                                literal: bool = False) -> tuple[set[str], set[str]]:
    """Membership constraints on the improving set from the improving-switch
    table; edges already in the strategy are never improving.

    Conditions on nodes that do not exist (b_1, which is g_1, or b_n) hold
    vacuously.  Two cells are read as their proofs use them unless
    ``literal`` is set: the phase-1 d_i^0 cell only concerns the bits that
    are still zero in b^nu (the others keep d_i on F_i), and the phase-5
    a_i^0 cell compares a_{i+1} with b+_{i+1}.
    """
    b, p = pa.config, pa.phase
    nu0 = b.nu0()
    nu1 = b.nu1()
    bp = b.increment()
    bn = b.with_nu0()
    must_in: set[str] = set()
    must_out: set[str] = set()

    def holds(v: str, value: int) -> bool:
        return v not in bits or bits[v] == value

    def rule(name: str, cond: bool) -> None:
        v, bit = split_switch(name)
        if bits[v] == bit:
            return
        (must_in if cond else must_out).add(name)

    for i in indices("a", n):
        if p == 5:
            rule(f"a_{i}^1", i == nu0)
            above = bp[i] if literal else bp[i + 1]
            rule(f"a_{i}^0", i < nu0 and holds(f"a_{i + 1}", above))
    for i in indices("b", n):
        if p == 1:
            rule(f"b_{i}^1", i == nu0 and bits[f"e_{i}"] == 1)
            rule(f"b_{i}^0", i > nu0 and holds(f"e_{nu0}", 1))
    for i in indices("c", n):
        if p == 2:
            rule(f"c_{i}^1", i == nu0)
            rule(f"c_{i}^0", i != nu0)
    for i in indices("d", n):
        if p == 4:
            rule(f"d_{i}^1", True)
        if p == 1:
            if literal:
                rule(f"d_{i}^0", holds(f"b_{nu0}", 1) and holds(f"b_{nu1}", 0))
            elif bn[i] == 0:
                # d_i^0 descends the b-chain from b_{i-1}: it must bottom out
                # at g_{nu0} with e_{nu0} already on F, and a stale b_{nu1}
                # only matters when it lies on that chain
                rule(f"d_{i}^0", holds(f"b_{nu0}", 1) and holds(f"e_{nu0}", 1)
                     and (nu1 >= i or holds(f"b_{nu1}", 0)))
    for i in indices("e", n):
        if p == 1:
            rule(f"e_{i}^1", True)
        if p == 3:
            rule(f"e_{i}^0", bp[i] == 0)
    return must_in, must_out


def proceeding_sequence(b: CounterConfig, n: int, ordering: EdgeOrdering) -> list[str]:
    """The switches a counter increment is known to contain, from ``b`` to
    its successor.

    The list is an outline: the run interleaves resets of stale b and c
    edges that it does not mention, so it is checked as a subsequence.
    """
    zeros = [i for i in range(1, n + 1) if b[i] == 0]
    bp = b.increment()
    bn = b.with_nu0()
    seq = [f"e_{zeros[0]}^1"]
    if zeros[0] in indices("b", n):
        seq.append(f"b_{zeros[0]}^1")
    for i in zeros[1:]:
        seq += [f"d_{i}^0", f"e_{i}^1"]
    if zeros[0] in indices("c", n):
        seq.append(f"c_{zeros[0]}^1")
    seq += ordering.sort(f"e_{i}^0" for i in indices("e", n) if bp[i] == 0)
    seq += ordering.sort(f"d_{i}^1" for i in indices("d", n) if bn[i] == 0)
    top = zeros[0]
    for i in range(top, 1, -1):
        seq.append(f"a_{i}^{bp[i]}")
    return seq


def is_subsequence(small: Iterable[str], big: Iterable[str]) -> bool:
    it = iter(big)
    return all(any(x == y for y in it) for x in small)


def outline(n: int, ordering: EdgeOrdering | None = None) -> list[str]:
    """Concatenated proceeding outlines for the configurations 1 .. 2^n - 2."""
    ordering = ordering or build_ordering(n)
    seq: list[str] = []
    for value in range(1, 2 ** n - 1):
        seq += proceeding_sequence(CounterConfig.from_int(value, n), n, ordering)
    return seq
