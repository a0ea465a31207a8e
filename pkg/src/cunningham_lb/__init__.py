"""Cunningham's least-recently-considered rule on the binary-counter family:
sink parity games G_n, relaxed MDPs M_n, linear programs LP_n and the
acyclic unique sink orientations A_n they realize."""

from .cunningham import EdgeOrdering, RunTrace, run, successor
from .family import build_game, build_ordering, initial_strategy, terminal_strategy
from .parity import ParityGame, ParityInstance

__version__ = "0.1.0"


def parity_instance(n: int) -> ParityInstance:
    """G_n with the designated initial strategy."""
    from .family import edge_targets
    return ParityInstance(build_game(n), initial_strategy(n), edge_targets(n), n)


__all__ = [
    "EdgeOrdering", "RunTrace", "run", "successor", "build_game", "build_ordering",
    "initial_strategy", "terminal_strategy", "ParityGame", "ParityInstance", "parity_instance",
]
