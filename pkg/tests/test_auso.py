import numpy as np
import pytest
from hypothesis import given, strategies as st

from cunningham_lb import family
from cunningham_lb.auso import (
    HypercubeOrientation, check_auso, check_consistency_with_Hn, decode_vertex, dimension,
    encode_vertex, face_sweep, orient_hypercube, path_follow, sample_faces,
    topological_order, vertex_string,
)
from cunningham_lb.verify import formalism_trace, visited_states


@pytest.fixture(scope="module")
def a3():
    return orient_hypercube(3)


def test_dimension():
    assert [dimension(n) for n in (3, 4, 5)] == [10, 15, 20]


def test_initial_vertex_encoding():
    v = encode_vertex(family.initial_bits(3), 3)
    # canonical order a_2 a_3 | b_2 | c_2 c_3 | d_2 d_3 | e_1 e_2 e_3
    assert vertex_string(v, 10) == "00" + "0" + "00" + "11" + "100"


@given(st.integers(0, 2 ** 15 - 1))
def test_encode_decode_roundtrip(v):
    assert encode_vertex(decode_vertex(v, 4), 4) == v


def test_decode_out_of_range():
    with pytest.raises(ValueError):
        decode_vertex(1 << 10, 3)


def test_directed_four_cycle_is_rejected():
    o = HypercubeOrientation(2, np.array([1, 2, 2, 1]))
    assert o.antisymmetric()
    assert topological_order(o) is None
    rep = check_auso(o)
    assert not rep.ok and not rep.acyclic and rep.bad_faces > 0


def test_square_with_two_sinks_is_not_unique_sink():
    # both edges at 0 and 3 point in: 0 and 3 are sinks
    o = HypercubeOrientation(2, np.array([0, 3, 3, 0]))
    assert o.antisymmetric()
    checked, bad, first = face_sweep(o)
    assert checked == 9 and bad > 0 and first is not None


def test_A3_is_an_auso(a3):
    rep = check_auso(a3, "all")
    assert rep.faces_checked == 3 ** 10
    assert rep.bad_faces == 0
    assert rep.acyclic and rep.potential_ok and rep.ok
    assert a3.antisymmetric()


def test_A3_sink_is_the_terminal_strategy(a3):
    assert a3.sinks() == [encode_vertex(family.terminal_bits(3), 3)]


def test_sampled_faces_agree_with_sweep(a3):
    _, bad, _ = sample_faces(a3, 2000, seed=1)
    assert bad == 0


def test_initial_edge_points_towards_e2(a3):
    v = encode_vertex(family.initial_bits(3), 3)
    i = family.player0_node_order(3).index("e_2")
    assert a3.points_out(v, i)


def test_consistency_with_switches(a3, trace3):
    assert check_consistency_with_Hn(a3, 3, visited_states(3, trace3)) == []


def test_path_following(a3, trace3):
    start = encode_vertex(family.initial_bits(3), 3)
    path, trace = path_follow(a3, 3, start, family.build_ordering(3))
    assert len(trace) == 36 >= 2 ** 3
    assert trace.switches == trace3.switches
    assert path[-1] == a3.sinks()[0]
    assert len(set(path)) == len(path)


def test_path_from_sink_is_empty(a3):
    path, trace = path_follow(a3, 3, a3.sinks()[0], family.build_ordering(3))
    assert path == [a3.sinks()[0]] and len(trace) == 0


def test_bitmap_size(a3):
    assert len(bytes.fromhex(a3.to_hex())) == 10 * 2 ** 10 // 8
    assert a3.header()["dimension"] == 10


def test_auso_trace_helper_matches_parity(a3):
    assert formalism_trace("auso", 3, orientation=a3).switches == formalism_trace("parity", 3).switches
