"""LP_n, the primal LP of an MDP, and the revised simplex method with
Cunningham's entering rule over exact rationals."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from . import family
from .mdp import CONTROLLER, RelaxedMdp, build_relaxed_mdp, expand_relaxed, priority_reward
from .numerics import RationalMatrix, SingularMatrixError, rat, rat_str, solve_linear_system


class SimplexError(RuntimeError):
    pass


class DegeneratePivot(SimplexError):
    pass


class RatioTie(SimplexError):
    pass


class Unbounded(SimplexError):
    pass


class BasisShapeError(ValueError):
    pass


@dataclass
class StandardFormLP:
    """max c^T x subject to A x = b, x >= 0."""
    A: RationalMatrix
    b: list[Fraction]
    c: list[Fraction]
    var_names: list[str]
    row_names: list[str]

    def __post_init__(self):
        if self.A.rows != len(self.b) or self.A.cols != len(self.c):
            raise ValueError("inconsistent LP dimensions")
        if len(self.var_names) != self.A.cols or len(self.row_names) != self.A.rows:
            raise ValueError("names do not match the matrix shape")
        self.var_index = {v: j for j, v in enumerate(self.var_names)}
        self.row_index = {r: i for i, r in enumerate(self.row_names)}

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.rows, self.A.cols

    def objective(self, x: Sequence[Fraction]) -> Fraction:
        return sum((ci * xi for ci, xi in zip(self.c, x) if ci and xi), Fraction(0))

    def is_feasible(self, x: Sequence[Fraction]) -> bool:
        return all(v >= 0 for v in x) and self.A.matvec(list(x)) == list(self.b)

    def to_json(self) -> dict:
        return {"rows": self.row_names, "vars": self.var_names,
                "A": [[rat_str(q) for q in self.A.row(i)] for i in range(self.A.rows)],
                "b": [rat_str(q) for q in self.b], "c": [rat_str(q) for q in self.c]}

    def to_lp_text(self, title: str = "LP") -> str:
        """Human-readable LP file with exact fractional coefficients."""

        def terms(coeffs):
            parts = []
            for name, q in coeffs:
                if not q:
                    continue
                sign = "-" if q < 0 else "+"
                mag = abs(q)
                parts.append(f"{sign} {name}" if mag == 1 else f"{sign} {rat_str(mag)} {name}")
            if not parts:
                return "0"
            text = " ".join(parts)
            return text[2:] if text.startswith("+ ") else text

        lines = [f"\\ {title}", "Maximize", " obj: " + terms(zip(self.var_names, self.c)),
                 "Subject To"]
        for i, r in enumerate(self.row_names):
            lines.append(f" {r}: {terms(zip(self.var_names, self.A.row(i)))} = {rat_str(self.b[i])}")
        lines.append("Bounds")
        lines += [f" {v} >= 0" for v in self.var_names]
        lines.append("End")
        return "\n".join(lines) + "\n"


def lp_variables(n: int) -> list[str]:
    """Edge variables in canonical node order, bit 0 before bit 1."""
    return [f"{u}^{b}" for u in family.player0_node_order(n) for b in (0, 1)]


def build_lp(n: int, N: int | None = None, eps=None, objective: str = "completed") -> StandardFormLP:
    """LP_n with its constraints as displayed.

    ``objective="printed"`` keeps the displayed objective verbatim, in which
    b_2^0, c_2^0 and d_2^0 earn nothing although they lead into g_1;
    ``"completed"`` (the default) adds their reward <g_1> + eps <h_1> so that
    c^T x equals the sum of the policy values.
    """
    if objective not in ("completed", "printed"):
        raise ValueError(f"unknown objective variant {objective!r}")
    family._check_n(n)
    M = build_relaxed_mdp(n, N, eps)
    N, eps = M.N, M.eps
    names = lp_variables(n)
    rows = family.player0_node_order(n)
    col = {v: j for j, v in enumerate(names)}
    A = RationalMatrix(len(rows), len(names))
    half = (1 - eps) / 2

    def put(r, coeffs):
        i = rows.index(r)
        for v, q in coeffs:
            if v in col:  # non-existent variables are zero
                A[i, col[v]] += q

    def ones(vs, q):
        return [(v, q) for v in vs]

    def lhs(u):
        return [(f"{u}^0", 1), (f"{u}^1", 1)]

    def gadget(i):
        return [f"a_{i}^1", f"b_{i}^1", f"c_{i}^1", f"d_{i}^1", f"e_{i}^1"]

    put("a_2", lhs("a_2") + ones(["b_2^0", "c_2^0", "d_2^0", "e_1^1"], -eps))
    for i in range(3, n + 1):
        put(f"a_{i}", lhs(f"a_{i}") + [(f"a_{i - 1}^0", -1)] + ones(gadget(i - 1), -eps))
    for i in range(2, n):
        put(f"b_{i}", lhs(f"b_{i}") + [(f"b_{i + 1}^0", -1), (f"d_{i + 1}^0", -1)])
        put(f"c_{i}", lhs(f"c_{i}") + [(f"c_{i + 1}^0", -1)])
    put(f"c_{n}", lhs(f"c_{n}") + ones([f"e_{j}^0" for j in range(1, n + 1)], -1))
    for i in range(2, n + 1):
        put(f"d_{i}", lhs(f"d_{i}") + ones(gadget(i), -half))
        put(f"e_{i}", lhs(f"e_{i}") + ones(gadget(i), -half))
    put("e_1", lhs("e_1") + ones(["b_2^0", "c_2^0", "d_2^0", "e_1^1"], -(1 - eps)))

    g = {i: priority_reward(N, 2 * i - 1) for i in range(1, n + 1)}
    h = {i: priority_reward(N, 2 * i) for i in range(1, n + 1)}
    c = [Fraction(0)] * len(names)

    def add(v, q):
        if v in col:
            c[col[v]] += q

    for i in range(1, n + 1):
        for x in ("a", "b", "c"):
            add(f"{x}_{i}^1", g[i] + eps * h[i])
        add(f"d_{i}^1", eps * h[i])
        add(f"e_{i}^1", eps * h[i])
        add(f"e_{i}^0", priority_reward(N, 0))
    if objective == "completed":
        for v in ("b_2^0", "c_2^0", "d_2^0"):
            add(v, g[1] + eps * h[1])
    return StandardFormLP(A, [Fraction(1)] * len(rows), c, names, rows)


def _collapse(M: RelaxedMdp, start: str, keep: set[str]) -> tuple[dict[str, Fraction], Fraction]:
    """Distribution over ``keep`` nodes (or the sink) first reached from
    ``start``, and the expected reward collected on the way.

    Only acyclic chains of randomizers and single-successor controllers are
    followed, which is all the subdivided edges of an MDP produce."""
    dist: dict[str, Fraction] = {}
    reward = Fraction(0)
    frontier = [(start, Fraction(1), 0)]
    while frontier:
        v, p, depth = frontier.pop()
        if depth > len(M.nodes):
            raise ValueError(f"cycle of pass-through nodes at {v}")
        if v in keep or v == M.sink:
            dist[v] = dist.get(v, Fraction(0)) + p
            continue
        edges = M.out[v]
        if M.owner[v] == CONTROLLER and len(edges) != 1:
            raise ValueError(f"{v} is a choice node outside the kept set")
        for e in edges:
            q = p if e.prob is None else p * e.prob
            reward += q * e.reward
            frontier.append((e.target, q, depth + 1))
    return dist, reward


def lp_from_mdp(M: RelaxedMdp, var_name=None) -> StandardFormLP:
    """The conservation LP (P) of an MDP, over its original controllers.

    Subdivision nodes (``M.aux``) and randomizers are passed through: each
    controller edge becomes one variable whose column records the expected
    one-step inflow into every original controller.
    """
    rows = [u for u in M.controllers if u not in M.aux]
    keep = set(rows)
    edges = [e for u in rows for e in M.out[u]]
    var_name = var_name or (lambda e: f"{e.source}->{e.target}")
    names = [var_name(e) for e in edges]
    A = RationalMatrix(len(rows), len(edges))
    c = []
    ridx = {u: i for i, u in enumerate(rows)}
    for j, e in enumerate(edges):
        A[ridx[e.source], j] += 1
        dist, r = _collapse(M, e.target, keep)
        for w, p in dist.items():
            if w in ridx:
                A[ridx[w], j] -= p
        c.append(e.reward + r)
    return StandardFormLP(A, [Fraction(1)] * len(rows), c, names, rows)


def lp_from_mn(n: int, N: int | None = None, eps=None, expand: bool = True) -> StandardFormLP:
    """lp_from_mdp on M_n (expanded by default) with LP_n variable names."""
    M = build_relaxed_mdp(n, N, eps)
    if expand:
        M = expand_relaxed(M)
    targets = {v: k for k, v in family.edge_targets(n).items()}

    def name(e):
        # an expanded controller->controller edge points at its subdivision node
        if (e.source, e.target) in targets:
            return targets[(e.source, e.target)]
        (nxt,) = M.successors(e.target)
        return targets[(e.source, nxt)]

    return lp_from_mdp(M, name)


def row_equivalent(P: StandardFormLP, Q: StandardFormLP) -> tuple[bool, list[str]]:
    """Each row of ``P`` is a rational multiple of the same-named row of
    ``Q`` (with the right-hand side), after aligning variables by name."""
    problems = []
    if set(P.var_names) != set(Q.var_names):
        problems.append(f"variables differ: {sorted(set(P.var_names) ^ set(Q.var_names))}")
    if set(P.row_names) != set(Q.row_names):
        problems.append(f"rows differ: {sorted(set(P.row_names) ^ set(Q.row_names))}")
    if problems:
        return False, problems
    for r in P.row_names:
        i, k = P.row_index[r], Q.row_index[r]
        u = [P.A[i, P.var_index[v]] for v in P.var_names] + [P.b[i]]
        w = [Q.A[k, Q.var_index[v]] for v in P.var_names] + [Q.b[k]]
        pivot = next((t for t, x in enumerate(u) if x), None)
        if pivot is None or not w[pivot]:
            problems.append(f"row {r}: zero pattern differs")
            continue
        scale = w[pivot] / u[pivot]
        if any(x * scale != y for x, y in zip(u, w)):
            problems.append(f"row {r}: not proportional")
    return not problems, problems


# -- bases and policies --------------------------------------------------------

def basis_from_bits(lp: StandardFormLP, bits: Mapping[str, int]) -> list[int]:
    return [lp.var_index[f"{u}^{b}"] for u, b in bits.items()]


def starting_basis(n: int, lp: StandardFormLP | None = None) -> list[int]:
    """Columns of the initial strategy {a*0, b*0, c*0, d*1, e_1^1, e_{>1}^0}."""
    lp = lp or build_lp(n)
    basis = basis_from_bits(lp, family.initial_bits(n))
    x = basic_solution(lp, basis)
    if any(v < 0 for v in x):
        raise SimplexError("starting basis is infeasible")
    return basis


def basis_to_bits(lp: StandardFormLP, basis: Sequence[int], n: int) -> dict[str, int]:
    chosen: dict[str, list[int]] = {}
    for j in basis:
        u, b = family.split_switch(lp.var_names[j])
        chosen.setdefault(u, []).append(b)
    bits = {}
    for u in family.player0_node_order(n):
        if len(chosen.get(u, [])) != 1:
            raise BasisShapeError(f"node {u} has basic columns {chosen.get(u, [])}")
        bits[u] = chosen[u][0]
    return bits


def bfs_policy_roundtrip(lp: StandardFormLP, basis: Sequence[int], n: int) -> dict[str, str]:
    """Policy of a policy-shaped basis; raises unless mapping back gives the
    same basis."""
    bits = basis_to_bits(lp, basis, n)
    if sorted(basis_from_bits(lp, bits)) != sorted(basis):
        raise BasisShapeError("basis does not round-trip through its policy")
    return family.bits_to_strategy(n, bits)


def basic_solution(lp: StandardFormLP, basis: Sequence[int]) -> list[Fraction]:
    """Full primal vector of a basis (nonbasic entries zero)."""
    xb = solve_linear_system(lp.A.select_columns(list(basis)), lp.b)
    x = [Fraction(0)] * lp.A.cols
    for j, v in zip(basis, xb):
        x[j] = v
    return x


def dual_solution(lp: StandardFormLP, basis: Sequence[int]) -> list[Fraction]:
    AB = lp.A.select_columns(list(basis))
    return solve_linear_system(AB.transpose(), [lp.c[j] for j in basis])


def reduced_costs(lp: StandardFormLP, y: Sequence[Fraction]) -> list[Fraction]:
    At = lp.A.transpose()
    return [cj - aty for cj, aty in zip(lp.c, At.matvec(list(y)))]


@dataclass
class PivotRecord:
    entering: str
    leaving: str
    objective_before: Fraction
    objective_after: Fraction

    @property
    def degenerate(self) -> bool:
        return self.objective_after == self.objective_before

    def to_json(self) -> dict:
        return {"entering": self.entering, "leaving": self.leaving,
                "objective_before": rat_str(self.objective_before),
                "objective_after": rat_str(self.objective_after)}


class SimplexInstance:
    """Revised simplex as an improvement instance: the improving switches are
    the nonbasic columns with positive reduced cost."""

    formalism = "lp"

    def __init__(self, lp: StandardFormLP, basis: Sequence[int], n: int,
                 check_siblings: bool = True):
        self.lp = lp
        self.n = n
        self.basis = list(basis)
        self.check_siblings = check_siblings
        self.pivots: list[PivotRecord] = []
        self._evaluate()
        if any(v < 0 for v in self.x):
            raise SimplexError("initial basis is infeasible")

    def _evaluate(self) -> None:
        AB = self.lp.A.select_columns(self.basis)
        try:
            xb = solve_linear_system(AB, self.lp.b)
            self.y = solve_linear_system(AB.transpose(), [self.lp.c[j] for j in self.basis])
        except SingularMatrixError as exc:
            raise SimplexError(f"singular basis: {exc}") from exc
        self.x = [Fraction(0)] * self.lp.A.cols
        for j, v in zip(self.basis, xb):
            self.x[j] = v
        self.d = reduced_costs(self.lp, self.y)
        inb = set(self.basis)
        self._improving = {self.lp.var_names[j] for j, dj in enumerate(self.d)
                           if dj > 0 and j not in inb}

    @property
    def value(self) -> Fraction:
        return self.lp.objective(self.x)

    def improving_set(self) -> set[str]:
        return set(self._improving)

    def is_terminal(self) -> bool:
        return not self._improving

    def apply(self, name: str) -> dict:
        if name not in self._improving:
            raise SimplexError(f"{name} does not have positive reduced cost")
        j = self.lp.var_index[name]
        AB = self.lp.A.select_columns(self.basis)
        w = solve_linear_system(AB, self.lp.A.column(j))
        best = None
        ties = []
        for pos, (bj, wi) in enumerate(zip(self.basis, w)):
            if wi > 0:
                ratio = self.x[bj] / wi
                if best is None or ratio < best[0]:
                    best = (ratio, pos)
                    ties = []
                elif ratio == best[0]:
                    ties.append(pos)
        if best is None:
            raise Unbounded(f"entering {name} gives an unbounded ray")
        if ties:
            names = [self.lp.var_names[self.basis[p]] for p in [best[1]] + ties]
            raise RatioTie(f"ratio-test tie entering {name}: {names}")
        if best[0] == 0:
            raise DegeneratePivot(f"degenerate pivot entering {name}")
        leaving = self.lp.var_names[self.basis[best[1]]]
        if self.check_siblings and family.split_switch(leaving)[0] != family.split_switch(name)[0]:
            raise SimplexError(f"{leaving} leaves for {name}: not a policy switch")
        before = self.value
        self.basis[best[1]] = j
        self._evaluate()
        rec = PivotRecord(name, leaving, before, self.value)
        if rec.degenerate:
            raise DegeneratePivot(f"objective unchanged entering {name}")
        self.pivots.append(rec)
        return {"leaving": leaving, "objective": rat_str(rec.objective_after)}

    def certificate(self) -> Fraction:
        return self.value

    def certificate_increased(self, before: Fraction, after: Fraction) -> bool:
        return after > before

    def dual_feasible(self) -> bool:
        """A^T y >= c, i.e. no reduced cost is positive."""
        return all(dj <= 0 for dj in self.d)

    def tight_columns(self) -> list[str]:
        return [self.lp.var_names[j] for j, dj in enumerate(self.d) if dj == 0]

    def policy(self) -> dict[str, str]:
        return bfs_policy_roundtrip(self.lp, self.basis, self.n)


def simplex_instance(n: int, N: int | None = None, eps=None,
                     objective: str = "completed") -> SimplexInstance:
    lp = build_lp(n, N, eps, objective)
    return SimplexInstance(lp, starting_basis(n, lp), n)


def lp_json(lp: StandardFormLP) -> str:
    return json.dumps(lp.to_json(), indent=1)
