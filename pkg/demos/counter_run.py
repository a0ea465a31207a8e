"""
Watching the binary counter on G_3
==================================

Cunningham's rule on the smallest game of the family, one line per switch.
"""

from cunningham_lb import family
from cunningham_lb.verify import parity_run, visited_states

# the run starts at the strategy encoding counter value 001
n = 3
trace = parity_run(n)
states = visited_states(n, trace)

# each row: phase label of the strategy before the switch, the improving
# set, the switch the rule picks, and how player 1 reacts
for step, bits in zip(trace.steps, states):
    pa = family.classify_phase(bits, n)
    answer = ", ".join(f"{u}->{w}" for u, w in step.response.items())
    print(f"{step.index:2d}  {pa.label():28s} {' '.join(step.improving):40s} "
          f"{step.applied:6s} {answer}")

# every counter value from 001 to 111 is visited once, in order
print(len(trace), "switches; final strategy is terminal:",
      states[-1] == family.terminal_bits(n))
