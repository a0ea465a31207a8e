"""
One run, three formalisms
=========================

Policy iteration on the MDP M_3 and the simplex method on LP_3 take the
same switches as strategy improvement on G_3.
"""

from cunningham_lb import family
from cunningham_lb.cunningham import run
from cunningham_lb.lp import simplex_instance
from cunningham_lb.mdp import MdpInstance
from cunningham_lb.numerics import rat_str
from cunningham_lb.verify import parity_run

n = 3
order = family.build_ordering(n)
parity = parity_run(n)

# the MDP certificate is the sum of the controller values
mdp = run(MdpInstance(n), order)

# the LP certificate is the objective at the current basis
inst = simplex_instance(n)
lp = run(inst, order)

print("same switches:", parity.switches == mdp.switches == lp.switches)

# with the default eps = 1/7^16 the values are exact rationals with large
# denominators; the float view is only for reading
for p, m in list(zip(inst.pivots, mdp.steps))[:8]:
    print(f"{p.entering:6s} leaves {p.leaving:6s} objective {float(p.objective_after):14.6f}"
          f"  value sum {float(m.certificate):14.6f}")

# objective and value sum coincide at every step
print("objective == value sum:",
      all(p.objective_after == m.certificate for p, m in zip(inst.pivots, mdp.steps)))
print("final objective:", rat_str(inst.value))
