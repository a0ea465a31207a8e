"""Cunningham's least-recently-considered rule as a generic driver.

Any local improvement process that can list its improving switches by name
and apply one of them plugs in through :class:`ImprovementInstance`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Protocol, Sequence


class RuleError(RuntimeError):
    pass


class IterationCapExceeded(RuleError):
    pass


class EdgeOrdering:
    """A total order on switch identifiers."""

    def __init__(self, sequence: Iterable[str], name: str = "custom"):
        self.sequence = tuple(sequence)
        self.name = name
        self.rank = {e: i for i, e in enumerate(self.sequence)}
        if len(self.rank) != len(self.sequence):
            raise ValueError("ordering lists a switch twice")

    def __len__(self) -> int:
        return len(self.sequence)

    def __contains__(self, e: str) -> bool:
        return e in self.rank

    def __iter__(self):
        return iter(self.sequence)

    @property
    def minimum(self) -> str:
        return self.sequence[0]

    def sort(self, switches: Iterable[str]) -> list[str]:
        return sorted(switches, key=self.rank.__getitem__)


def successor(e: str, F: Iterable[str], ord: EdgeOrdering) -> str:
    """First element of ``F`` at or after ``e`` in the cyclic order."""
    F = list(F)
    if not F:
        raise RuleError("successor of an empty switch set")
    for x in F:
        if x not in ord:
            raise RuleError(f"switch {x!r} is not in the ordering")
    if e not in ord:
        raise RuleError(f"pointer {e!r} is not in the ordering")
    r = ord.rank[e]
    ahead = [x for x in F if ord.rank[x] >= r]
    return min(ahead or F, key=ord.rank.__getitem__)


class ImprovementInstance(Protocol):
    formalism: str
    n: int

    def improving_set(self) -> set[str]: ...

    def apply(self, switch: str) -> dict: ...

    def is_terminal(self) -> bool: ...

    def certificate(self) -> Any: ...

    def certificate_increased(self, before: Any, after: Any) -> bool: ...


@dataclass
class Step:
    index: int
    applied: str
    improving: list[str]
    response: dict = field(default_factory=dict)
    certificate: Any = None

    def to_json(self) -> dict:
        return {"step": self.index, "applied": self.applied, "improving": self.improving,
                "response": self.response, "certificate": self.certificate}


@dataclass
class RunTrace:
    n: int
    formalism: str
    ordering: str
    initial_pointer: str
    steps: list[Step] = field(default_factory=list)
    final_pointer: str | None = None

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def switches(self) -> list[str]:
        return [s.applied for s in self.steps]

    def header(self) -> dict:
        return {"type": "header", "n": self.n, "formalism": self.formalism,
                "ordering": self.ordering, "initial_pointer": self.initial_pointer,
                "length": len(self.steps)}

    def to_jsonl(self, certificate_to_json: Callable[[Any], Any] | None = None) -> str:
        lines = [json.dumps(self.header(), sort_keys=True)]
        for s in self.steps:
            d = s.to_json()
            if certificate_to_json is not None and s.certificate is not None:
                d["certificate"] = certificate_to_json(s.certificate)
            elif not isinstance(d["certificate"], (str, int, type(None))):
                d["certificate"] = None
            lines.append(json.dumps(d, sort_keys=True))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "RunTrace":
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        head, body = rows[0], rows[1:]
        if head.get("type") != "header":
            raise ValueError("trace does not start with a header record")
        trace = cls(head["n"], head["formalism"], head["ordering"], head["initial_pointer"])
        for d in body:
            trace.steps.append(Step(d["step"], d["applied"], d["improving"],
                                    d.get("response") or {}, d.get("certificate")))
        return trace


def default_cap(n: int) -> int:
    """Generous bound: runs on the family grow like n * 2^n, not 2^n."""
    return n * 2 ** (n + 4)


def run(instance: ImprovementInstance, ord: EdgeOrdering, e0: str | None = None,
        cap: int | None = None, record_certificates: bool = True,
        check_monotone: bool = True) -> RunTrace:
    """Cunningham's improvement loop: ``e <- succ(e, I); apply(e)`` until
    no improving switch remains."""
    e = ord.minimum if e0 is None else e0
    if e not in ord:
        raise RuleError(f"initial pointer {e!r} is not in the ordering")
    cap = default_cap(instance.n) if cap is None else cap
    trace = RunTrace(instance.n, instance.formalism, ord.name, e)
    cert = instance.certificate() if check_monotone else None
    while True:
        improving = instance.improving_set()
        if not improving:
            break
        if len(trace.steps) >= cap:
            raise IterationCapExceeded(f"more than {cap} steps")
        e = successor(e, improving, ord)
        response = instance.apply(e)
        step = Step(len(trace.steps), e, ord.sort(improving), response or {})
        if check_monotone:
            new = instance.certificate()
            if not instance.certificate_increased(cert, new):
                raise RuleError(f"certificate did not increase at step {step.index} ({e})")
            cert = new
            if record_certificates:
                step.certificate = new
        trace.steps.append(step)
    trace.final_pointer = e
    return trace


def leadsto_check(trace: RunTrace, i: int, j: int) -> bool:
    for k in (i, j):
        if not 0 <= k <= len(trace.steps):
            raise IndexError(k)
    return i < j


def replay_pointers(trace: RunTrace, ord: EdgeOrdering) -> bool:
    """Re-derive every choice from the recorded improving sets."""
    e = trace.initial_pointer
    for s in trace.steps:
        e = successor(e, s.improving, ord)
        if e != s.applied:
            return False
    return True


def first_divergence(a: Sequence[str], b: Sequence[str]) -> int | None:
    for i, (x, y) in enumerate(zip(a, b)):
        if x != y:
            return i
    if len(a) != len(b):
        return min(len(a), len(b))
    return None
