"""
The cube A_3
============

LP_3 orients the 10-dimensional cube of strategies; the orientation is an
acyclic unique sink orientation and the run is a path in it.
"""

from cunningham_lb import family
from cunningham_lb.auso import (check_auso, decode_vertex, encode_vertex, orient_hypercube,
                                path_follow, vertex_string)

n = 3
cube = orient_hypercube(n)

# the full sweep visits all 3^10 faces
rep = check_auso(cube, "all")
print(f"acyclic={rep.acyclic} potential certificate={rep.potential_ok} "
      f"faces={rep.faces_checked} bad={rep.bad_faces}")

# the unique global sink is the optimal (terminal) strategy
(sink,) = cube.sinks()
print("sink", vertex_string(sink, cube.d), decode_vertex(sink, n) == family.terminal_bits(n))

# following the rule from the initial vertex
start = encode_vertex(family.initial_bits(n), n)
path, trace = path_follow(cube, n, start, family.build_ordering(n))
for v, name in zip(path[1:], trace.switches):
    print(f"{name:6s} -> {vertex_string(v, cube.d)}")

# out-degrees along the path: how many switches were improving each time
print([bin(int(cube.outmask[v])).count("1") for v in path])
