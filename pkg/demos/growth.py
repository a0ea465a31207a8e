"""
Run lengths against 2^n
=======================

The number of switches grows exponentially with the size of G_n.
"""

import time

from cunningham_lb.verify import check_lengths, parity_run

# G_n has 8n-3 nodes, so n=9 is still a small game
for n in range(3, 10):
    t = time.perf_counter()
    trace = parity_run(n)
    sec = time.perf_counter() - t
    outline_ok = all(c.ok for c in check_lengths(n, trace))
    print(f"n={n}  switches={len(trace):6d}  2^n={2 ** n:4d}  "
          f"ratio={len(trace) / 2 ** n:5.1f}  outline={outline_ok}  {sec:.1f}s")

# the ratio itself grows roughly linearly: each increment of the counter
# resets O(n) edges besides the ones that flip bits
