"""The strategy hypercube of LP_n oriented by the objective, the AUSO checks
and least-recently-considered path following.

Coordinate ``i`` of a vertex is the bit of the i-th player-0 node in the
canonical order; the vertex itself is an integer bit mask.  Ties in the
objective are broken lexicographically by the basic feasible solution,
which is a symbolic perturbation of the objective.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import family
from .cunningham import EdgeOrdering
from .lp import StandardFormLP, basic_solution, basis_from_bits, build_lp
from .mdp import build_relaxed_mdp, improving_switches_mdp, policy_values


class OrientationError(RuntimeError):
    pass


def dimension(n: int) -> int:
    return 5 * (n - 1)


def encode_vertex(bits: Mapping[str, int], n: int) -> int:
    order = family.player0_node_order(n)
    return sum(bits[u] << i for i, u in enumerate(order))


def decode_vertex(v: int, n: int) -> dict[str, int]:
    order = family.player0_node_order(n)
    if not 0 <= v < 1 << len(order):
        raise ValueError(f"vertex {v} outside the {len(order)}-cube")
    return {u: (v >> i) & 1 for i, u in enumerate(order)}


def vertex_string(v: int, d: int) -> str:
    """Coordinates in canonical order, first coordinate first."""
    return "".join(str((v >> i) & 1) for i in range(d))


Potential = tuple  # (objective, x_0, x_1, ...)


class LpPotential:
    """Exact, cached (objective, BFS) key of every policy vertex of LP_n."""

    def __init__(self, n: int, lp: StandardFormLP | None = None):
        self.n = n
        self.lp = lp or build_lp(n)
        self.cache: dict[int, Potential] = {}

    def __call__(self, v: int) -> Potential:
        key = self.cache.get(v)
        if key is None:
            bits = decode_vertex(v, self.n)
            x = basic_solution(self.lp, basis_from_bits(self.lp, bits))
            key = (self.lp.objective(x), *x)
            self.cache[v] = key
        return key


class HypercubeOrientation:
    """One bit per (vertex, coordinate): set when the edge leaves the vertex."""

    def __init__(self, d: int, outmask: np.ndarray, node_order: Sequence[str] | None = None,
                 potential=None, params: dict | None = None):
        self.d = d
        self.outmask = np.asarray(outmask, dtype=np.int64)
        if self.outmask.shape != (1 << d,):
            raise ValueError("outmask needs one entry per vertex")
        self.node_order = list(node_order) if node_order else [f"x{i}" for i in range(d)]
        self.potential = potential
        self.params = params or {}

    def points_out(self, v: int, i: int) -> bool:
        return bool((self.outmask[v] >> i) & 1)

    def antisymmetric(self) -> bool:
        verts = np.arange(1 << self.d)
        for i in range(self.d):
            here = (self.outmask >> i) & 1
            there = (self.outmask[verts ^ (1 << i)] >> i) & 1
            if np.any(here == there):
                return False
        return True

    def sinks(self) -> list[int]:
        return [int(v) for v in np.flatnonzero(self.outmask == 0)]

    def to_hex(self) -> str:
        """Vertex-major bitmap: bit v*d + i, least significant bit first."""
        bits = ((self.outmask[:, None] >> np.arange(self.d)) & 1).astype(np.uint8).ravel()
        return np.packbits(bits, bitorder="little").tobytes().hex()

    def header(self) -> dict:
        return {"dimension": self.d, "node_order": self.node_order,
                "layout": "vertex-major, bit v*d+i, little-endian bytes", **self.params}


def orient_hypercube(n: int, N: int | None = None, eps=None) -> HypercubeOrientation:
    """Materialize A_n by ranking every vertex by its potential."""
    d = dimension(n)
    lp = build_lp(n, N, eps)
    pot = LpPotential(n, lp)
    verts = range(1 << d)
    keys = [pot(v) for v in verts]
    order = sorted(verts, key=keys.__getitem__)
    rank = np.empty(1 << d, dtype=np.int64)
    for r, v in enumerate(order):
        if r and keys[order[r - 1]] == keys[v]:
            raise OrientationError(f"vertices {order[r - 1]} and {v} share a potential")
        rank[v] = r
    outmask = np.zeros(1 << d, dtype=np.int64)
    idx = np.arange(1 << d)
    for i in range(d):
        outmask |= (rank[idx ^ (1 << i)] > rank).astype(np.int64) << i
    o = HypercubeOrientation(d, outmask, family.player0_node_order(n), pot,
                             {"n": n, "N": lp_params(lp, n, N, eps)[0],
                              "eps": lp_params(lp, n, N, eps)[1]})
    o.rank = rank
    return o


def lp_params(lp, n, N, eps) -> tuple[int, str]:
    from .mdp import default_parameters
    from .numerics import rat_str
    dN, deps = default_parameters(n)
    return (dN if N is None else N), rat_str(deps if eps is None else Fraction(eps))


class LazyOrientation:
    """Orientation evaluated on demand from the cached potential (n >= 4)."""

    def __init__(self, n: int, N: int | None = None, eps=None):
        self.n = n
        self.d = dimension(n)
        self.potential = LpPotential(n, build_lp(n, N, eps))
        self.node_order = family.player0_node_order(n)

    def points_out(self, v: int, i: int) -> bool:
        a, b = self.potential(v), self.potential(v ^ (1 << i))
        if a == b:
            raise OrientationError(f"vertices {v} and {v ^ (1 << i)} share a potential")
        return b > a

    def out_mask(self, v: int) -> int:
        return sum(1 << i for i in range(self.d) if self.points_out(v, i))


# -- checks ---------------------------------------------------------------------

@dataclass
class AusoReport:
    ok: bool
    acyclic: bool
    faces_checked: int
    bad_faces: int
    first_violation: tuple[int, int] | None = None  # (free mask, fixed bits)
    sinks: list[int] = field(default_factory=list)
    potential_ok: bool | None = None


def topological_order(o: HypercubeOrientation) -> list[int] | None:
    """Kahn's algorithm; None when a directed cycle exists."""
    d = o.d
    indeg = np.zeros(1 << d, dtype=np.int64)
    verts = np.arange(1 << d)
    for i in range(d):
        indeg += ((o.outmask[verts ^ (1 << i)] >> i) & 1)
    queue = deque(int(v) for v in np.flatnonzero(indeg == 0))
    order = []
    while queue:
        v = queue.popleft()
        order.append(v)
        m = int(o.outmask[v])
        for i in range(d):
            if (m >> i) & 1:
                w = v ^ (1 << i)
                indeg[w] -= 1
                if indeg[w] == 0:
                    queue.append(w)
    return order if len(order) == 1 << d else None


def potential_certifies(o: HypercubeOrientation) -> bool:
    """Every directed edge climbs the potential."""
    if o.potential is None:
        return False
    for v in range(1 << o.d):
        pv = o.potential(v)
        m = int(o.outmask[v])
        for i in range(o.d):
            if (m >> i) & 1 and not pv < o.potential(v ^ (1 << i)):
                return False
    return True


def face_sweep(o: HypercubeOrientation) -> tuple[int, int, tuple[int, int] | None]:
    """Count sinks in all 3^d faces.

    For a free-coordinate set S, v is a sink of its face exactly when no
    out-edge lies in S; every face of that shape needs exactly one.
    """
    d = o.d
    full = (1 << d) - 1
    verts = np.arange(1 << d)
    checked = bad = 0
    first = None
    for S in range(1 << d):
        faces = 1 << (d - bin(S).count("1"))
        fixed = verts[(o.outmask & S) == 0] & (full ^ S)
        counts = np.bincount(fixed, minlength=1 << d)
        # only fixed patterns (no bit inside S) name a face
        patterns = counts[(verts & S) == 0]
        wrong = int(np.count_nonzero(patterns != 1))
        checked += faces
        if wrong:
            bad += wrong
            if first is None:
                fx = int(verts[(verts & S) == 0][np.flatnonzero(patterns != 1)[0]])
                first = (S, fx)
    return checked, bad, first


def sample_faces(orient, count: int, seed: int = 0) -> tuple[int, int, tuple[int, int] | None]:
    """Unique-sink check on ``count`` uniformly random faces."""
    rng = np.random.default_rng(seed)
    d = orient.d
    bad = 0
    first = None
    out_of = orient.out_mask if hasattr(orient, "out_mask") else (lambda v: int(orient.outmask[v]))
    cache: dict[int, int] = {}
    for _ in range(count):
        kind = rng.integers(0, 3, size=d)  # 0: fixed 0, 1: fixed 1, 2: free
        S = sum(1 << i for i in range(d) if kind[i] == 2)
        fx = sum(1 << i for i in range(d) if kind[i] == 1)
        free = [i for i in range(d) if (S >> i) & 1]
        sinks = 0
        for k in range(1 << len(free)):
            v = fx
            for t, i in enumerate(free):
                if (k >> t) & 1:
                    v |= 1 << i
            m = cache.get(v)
            if m is None:
                m = cache[v] = out_of(v)
            if not m & S:
                sinks += 1
        if sinks != 1:
            bad += 1
            if first is None:
                first = (S, fx)
    return count, bad, first


def check_auso(o: HypercubeOrientation, faces: str | int = "all", seed: int = 0) -> AusoReport:
    acyclic = topological_order(o) is not None
    if faces == "all":
        checked, bad, first = face_sweep(o)
    else:
        checked, bad, first = sample_faces(o, int(faces), seed)
    pot = potential_certifies(o) if o.potential is not None else None
    ok = acyclic and bad == 0 and o.antisymmetric() and pot is not False
    return AusoReport(ok, acyclic, checked, bad, first, o.sinks(), pot)


def check_consistency_with_Hn(orient, n: int, strategies: Iterable[Mapping[str, int]],
                              N: int | None = None, eps=None) -> list[str]:
    """Disagreements between the orientation and MDP switch directions at
    the given strategies (as bit maps): improving edges must point out,
    worsening edges in."""
    M = build_relaxed_mdp(n, N, eps)
    succ = family.player0_successors(n)
    problems = []
    for bits in strategies:
        sigma = family.bits_to_strategy(n, bits)
        vals = policy_values(M, sigma)
        v = encode_vertex(bits, n)
        improving = improving_switches_mdp(M, sigma, vals)
        for i, u in enumerate(family.player0_node_order(n)):
            w = succ[u][1 - bits[u]]
            gain = vals[w] + M.edge(u, w).reward - vals[u]
            out = orient.points_out(v, i)
            if (u, w) in improving and not out:
                problems.append(f"{vertex_string(v, orient.d)}: {u} improving but oriented inward")
            elif gain < 0 and out:
                problems.append(f"{vertex_string(v, orient.d)}: {u} worsening but oriented outward")
    return problems


def flip_name(v: int, i: int, node_order: Sequence[str]) -> str:
    """u^1 sets the coordinate, u^0 clears it."""
    return f"{node_order[i]}^{1 - ((v >> i) & 1)}"


class AusoInstance:
    """Path following on an oriented cube as an improvement instance."""

    formalism = "auso"

    def __init__(self, orient, n: int, start: int):
        self.orient = orient
        self.n = n
        self.v = start
        self.order = orient.node_order
        self.coord = {u: i for i, u in enumerate(self.order)}
        self.path = [start]

    def improving_set(self) -> set[str]:
        return {flip_name(self.v, i, self.order) for i in range(self.orient.d)
                if self.orient.points_out(self.v, i)}

    def is_terminal(self) -> bool:
        return not self.improving_set()

    def apply(self, name: str) -> dict:
        u, bit = family.split_switch(name)
        i = self.coord[u]
        if ((self.v >> i) & 1) == bit or not self.orient.points_out(self.v, i):
            raise ValueError(f"{name} is not an outgoing flip")
        self.v ^= 1 << i
        self.path.append(self.v)
        return {}

    def certificate(self):
        pot = self.orient.potential
        return pot(self.v) if pot is not None else None

    def certificate_increased(self, before, after) -> bool:
        return before is None or after > before


def path_follow(orient, n: int, start: int, ord: EdgeOrdering, v0: str | None = None,
                cap: int | None = None):
    """Vertex path and trace of the least-recently-considered rule."""
    from .cunningham import run
    inst = AusoInstance(orient, n, start)
    trace = run(inst, ord, v0, cap, record_certificates=False,
                check_monotone=orient.potential is not None)
    return inst.path, trace
