import pytest

from cunningham_lb import family
from cunningham_lb.cunningham import run
from cunningham_lb.lp import (
    BasisShapeError, SimplexError, basic_solution, basis_from_bits, basis_to_bits,
    bfs_policy_roundtrip, build_lp, lp_from_mn, row_equivalent, simplex_instance,
    starting_basis,
)
from cunningham_lb.mdp import build_relaxed_mdp, policy_values
from cunningham_lb.verify import formalism_trace


@pytest.fixture(scope="module")
def lp3():
    return build_lp(3)


def test_shape(lp3):
    assert lp3.shape == (10, 20)
    assert all(q == 1 for q in lp3.b)
    assert build_lp(5).shape == (20, 40)


def test_row_d2(lp3):
    eps = build_relaxed_mdp(3).eps
    half = (1 - eps) / 2
    row = lp3.A.row(lp3.row_index["d_2"])
    got = {v: row[j] for j, v in enumerate(lp3.var_names) if row[j]}
    want = {"d_2^0": 1, "d_2^1": 1 - half, "a_2^1": -half, "b_2^1": -half,
            "c_2^1": -half, "e_2^1": -half}
    assert got == want


def test_objective_coefficients(lp3):
    M = build_relaxed_mdp(3)
    N, eps = M.N, M.eps
    c = dict(zip(lp3.var_names, lp3.c))
    for i in (1, 2, 3):
        assert c[f"e_{i}^0"] == 1
    assert c["a_3^1"] == -N ** 5 + eps * N ** 6
    assert c["e_2^1"] == eps * N ** 4
    assert c["b_2^0"] == c["c_2^0"] == c["d_2^0"] == -N + eps * N ** 2
    assert dict(zip(lp3.var_names, build_lp(3, objective="printed").c))["b_2^0"] == 0


def test_unknown_objective_variant():
    with pytest.raises(ValueError):
        build_lp(3, objective="other")


def test_starting_basis(lp3):
    names = {lp3.var_names[j] for j in starting_basis(3, lp3)}
    assert names == set("a_2^0 a_3^0 b_2^0 c_2^0 c_3^0 d_2^1 d_3^1 e_1^1 e_2^0 e_3^0".split())


def test_policy_bfs_support(lp3):
    bits = family.initial_bits(3)
    basis = basis_from_bits(lp3, bits)
    x = basic_solution(lp3, basis)
    assert lp3.is_feasible(x)
    chosen = {f"{u}^{b}" for u, b in bits.items()}
    assert all(v in chosen for v, xv in zip(lp3.var_names, x) if xv > 0)
    assert basis_to_bits(lp3, basis, 3) == bits
    assert bfs_policy_roundtrip(lp3, basis, 3) == family.initial_strategy(3)


def test_non_policy_basis_rejected(lp3):
    basis = basis_from_bits(lp3, family.initial_bits(3))
    basis[0] = lp3.var_index["a_3^1"]  # a_2 loses its column, a_3 gets two
    with pytest.raises(BasisShapeError):
        basis_to_bits(lp3, basis, 3)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_rows_match_mdp_construction(n):
    a, b = build_lp(n), lp_from_mn(n)
    ok, problems = row_equivalent(a, b)
    assert ok, problems
    assert a.c == [b.c[b.var_index[v]] for v in a.var_names]


def test_unexpanded_mdp_gives_same_rows():
    ok, problems = row_equivalent(build_lp(3), lp_from_mn(3, expand=False))
    assert ok, problems


def test_row_equivalence_detects_a_changed_coefficient(lp3):
    other = build_lp(3)
    other.A[0, 0] += 1
    assert not row_equivalent(lp3, other)[0]


def test_objective_is_sum_of_values_along_the_run():
    inst = simplex_instance(3)
    M = build_relaxed_mdp(3)
    order = family.build_ordering(3)
    from cunningham_lb.cunningham import successor
    e = order.minimum
    while True:
        vals = policy_values(M, inst.policy())
        assert inst.value == sum(vals[u] for u in M.controllers)
        assert [vals[u] for u in inst.lp.row_names] == inst.y
        if inst.is_terminal():
            break
        e = successor(e, inst.improving_set(), order)
        inst.apply(e)
    assert inst.dual_feasible()
    assert inst.policy() == family.terminal_strategy(3)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_pivots_follow_parity_and_are_never_degenerate(n):
    inst = simplex_instance(n)
    trace = run(inst, family.build_ordering(n))
    assert trace.switches == formalism_trace("parity", n).switches
    assert all(p.objective_after > p.objective_before for p in inst.pivots)
    assert all(family.split_switch(p.leaving)[0] == family.split_switch(p.entering)[0]
               for p in inst.pivots)


def test_printed_objective_does_not_reproduce_the_run():
    """Without rewards on b_2^0, c_2^0, d_2^0 the pivots stop matching."""
    inst = simplex_instance(3, objective="printed")
    try:
        trace = run(inst, family.build_ordering(3))
        switches = trace.switches
    except SimplexError:
        switches = None
    assert switches != formalism_trace("parity", 3).switches


def test_entering_a_non_improving_column_raises():
    inst = simplex_instance(3)
    with pytest.raises(SimplexError):
        inst.apply("a_2^1")


def test_lp_text(lp3):
    text = lp3.to_lp_text("LP_3")
    assert text.startswith("\\ LP_3\nMaximize")
    assert text.count(" >= 0") == 20
    assert sum(1 for line in text.splitlines() if line.endswith("= 1")) == 10
    assert "/" in text and "." not in text  # exact fractions, no decimals
