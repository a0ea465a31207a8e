from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cunningham_lb import family
from cunningham_lb.mdp import (
    CONTROLLER, RANDOMIZER, MdpInstance, ParameterError, RelaxedMdp, UnichainError,
    all_policies, build_relaxed_mdp, default_parameters, expand_relaxed,
    improving_switches_mdp, is_unichain, policy_values, priority_reward,
    validate_priority_scale,
)
from cunningham_lb.numerics import RationalMatrix, solve_linear_system
from cunningham_lb.verify import formalism_trace


@pytest.fixture(scope="module")
def m3():
    return build_relaxed_mdp(3)


def _dense_values(M, sigma, exact=True):
    """Independent evaluation: one unknown per node, no folding of
    controller chains.  ``exact=False`` uses floating point."""
    nodes = list(M.nodes)
    idx = {v: k for k, v in enumerate(nodes)}
    size = len(nodes)
    if exact:
        A, b = RationalMatrix(size, size), [Fraction(0)] * size
    else:
        A, b = np.zeros((size, size)), np.zeros(size)
    for v in nodes:
        k = idx[v]
        A[k, k] = 1
        if v == M.sink:
            continue
        if M.owner[v] == CONTROLLER:
            succ = M.out[v][0].target if len(M.out[v]) == 1 else sigma[v]
            e = M.edge(v, succ)
            A[k, idx[succ]] -= 1
            b[k] += e.reward if exact else float(e.reward)
        else:
            for e in M.out[v]:
                p = e.prob if exact else float(e.prob)
                A[k, idx[e.target]] -= p
                b[k] += p * (e.reward if exact else float(e.reward))
    x = solve_linear_system(A, b) if exact else np.linalg.solve(A, b)
    return dict(zip(nodes, x))


def test_rewards_and_probabilities(m3):
    N, eps = m3.N, m3.eps
    assert (N, eps) == default_parameters(3) == (7, Fraction(1, 7 ** 16))
    assert m3.edge("s", "c_3").reward == 1
    assert m3.edge("g_2", "F_2").reward == -N ** 3
    assert m3.edge("h_3", "t").reward == N ** 6
    assert sum(e.prob for e in m3.out["F_2"]) == 1
    assert m3.edge("F_2", "h_2").prob == eps
    assert m3.edge("F_2", "d_2").prob == (1 - eps) / 2
    assert m3.edge("F_1", "e_1").prob == 1 - eps
    assert priority_reward(3, 4) == 81 and priority_reward(3, 5) == -243


def test_parameter_validation():
    with pytest.raises(ParameterError):
        build_relaxed_mdp(3, N=1)
    with pytest.raises(ParameterError):
        build_relaxed_mdp(3, eps=Fraction(3, 2))
    with pytest.raises(ValueError):
        RelaxedMdp(["x"], {"x": RANDOMIZER}, {"x": []})


def test_expansion_rules(m3):
    E = expand_relaxed(m3)
    assert E.is_bipartite() and not m3.is_bipartite()
    # controller -> controller gets a fresh randomizer
    r = "[a_2>a_3]"
    assert E.owner[r] == RANDOMIZER and E.out[r][0].target == "a_3" and E.out[r][0].prob == 1
    # a rewarded randomizer edge moves its reward onto a new controller edge
    c = "[g_2>F_2]"
    assert E.owner[c] == CONTROLLER
    assert E.out[c][0].reward == -m3.N ** 3
    assert all(not e.reward for e in E.edges() if E.owner[e.source] == RANDOMIZER)
    assert expand_relaxed(E) is E


def _lift(M, E, sigma):
    return {u: (w if w in E.successors(u) else f"[{u}>{w}]") for u, w in sigma.items()}


def test_expansion_keeps_values_for_every_policy():
    M = build_relaxed_mdp(3, 7, Fraction(1, 100))
    E = expand_relaxed(M)
    for sigma in all_policies(M):
        a = policy_values(M, sigma)
        b = policy_values(E, _lift(M, E, sigma))
        assert all(a[v] == b[v] for v in M.nodes)


def test_every_policy_is_unichain(m3):
    assert all(is_unichain(m3, sigma) for sigma in all_policies(m3))


def test_broken_chain_raises():
    M = build_relaxed_mdp(3)
    out = dict(M.out)
    out["h_3"] = [type(e)(e.source, "F_3", e.prob, e.reward) for e in M.out["h_3"]]
    out["F_3"] = [type(e)(e.source, "h_3", Fraction(1), e.reward) for e in M.out["F_3"][:1]]
    broken = RelaxedMdp(M.nodes, M.owner, out, M.priority, M.N, M.eps)
    with pytest.raises(UnichainError):
        policy_values(broken, family.initial_strategy(3))


def test_initial_values_match_dense_exact_solve(m3):
    sigma = family.initial_strategy(3)
    got = policy_values(m3, sigma)
    want = _dense_values(m3, sigma)
    assert got == want
    assert got["t"] == 0


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=10, max_size=10))
def test_values_match_float_solve(bits):
    M = build_relaxed_mdp(3, 7, Fraction(1, 10))
    sigma = family.bits_to_strategy(3, dict(zip(family.player0_node_order(3), bits)))
    got = policy_values(M, sigma)
    approx = _dense_values(M, sigma, exact=False)
    for v in M.nodes:
        assert float(got[v]) == pytest.approx(approx[v], rel=1e-9, abs=1e-6)


def test_improving_switches(m3):
    inst = MdpInstance(3)
    assert inst.improving_set() == {"e_2^1", "e_3^1"}
    sigma = family.terminal_strategy(3)
    assert improving_switches_mdp(m3, sigma, policy_values(m3, sigma)) == set()


def test_priority_scale(m3):
    rep = validate_priority_scale(m3)
    assert rep.ok, rep.violations
    assert abs(priority_reward(7, 0)) < abs(priority_reward(7, 3))


def test_priority_scale_detects_bad_parameters():
    assert not validate_priority_scale(build_relaxed_mdp(3, N=2)).ok
    assert not validate_priority_scale(build_relaxed_mdp(3, eps=Fraction(1, 2))).ok


@pytest.mark.parametrize("n", [3, 4, 5])
def test_sum_of_values_strictly_increases(n):
    formalism_trace("mdp", n)  # the driver raises when a certificate fails to grow


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_trace_equals_parity(n):
    assert formalism_trace("mdp", n).switches == formalism_trace("parity", n).switches


def test_json_and_dot(m3):
    data = m3.to_json()
    assert data["params"] == {"N": 7, "eps": f"1/{7 ** 16}"}
    assert len(data["nodes"]) == len(m3.nodes)
    assert m3.to_dot().startswith("digraph")
