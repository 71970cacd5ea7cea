"""COHDA agents over a continuous objective.

Each agent owns one coordinate. Its working memory holds the configuration
it believes the others have chosen (value plus a version counter per agent)
and the best complete candidate it has seen so far.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .benchmarks import ObjectiveFunction, evaluate

DEFAULT_BUDGET = 100


@dataclass
class Candidate:
    assignment: np.ndarray
    fitness: float
    creator: int

    def beats(self, other: Optional["Candidate"]) -> bool:
        """Strict total order: lower fitness, then lower creator id."""
        if other is None:
            return True
        if self.fitness != other.fitness:
            return self.fitness < other.fitness
        return self.creator < other.creator

    def same_as(self, other: Optional["Candidate"]) -> bool:
        return (
            other is not None
            and self.creator == other.creator
            and self.fitness == other.fitness
            and np.array_equal(self.assignment, other.assignment)
        )

    def to_dict(self) -> dict:
        return {
            "assignment": self.assignment.tolist(),
            "fitness": self.fitness,
            "creator": self.creator,
        }


@dataclass
class WorkingMemory:
    agent_id: int
    values: np.ndarray
    counters: np.ndarray
    candidate: Optional[Candidate] = None

    @classmethod
    def initial(cls, agent_id: int, start: np.ndarray) -> "WorkingMemory":
        return cls(agent_id, np.array(start, dtype=float), np.zeros(len(start), dtype=np.int64))

    @property
    def own_counter(self) -> int:
        return int(self.counters[self.agent_id])

    def snapshot(self) -> "WorkingMemory":
        # candidates are never mutated in place, so sharing the object is safe
        return WorkingMemory(self.agent_id, self.values.copy(), self.counters.copy(), self.candidate)

    def to_wire(self) -> dict:
        return {
            "agent_id": self.agent_id,
            "entries": [[i, float(v), int(c)] for i, (v, c) in enumerate(zip(self.values, self.counters))],
            "candidate": None if self.candidate is None else self.candidate.to_dict(),
        }

    @classmethod
    def from_wire(cls, data: dict) -> "WorkingMemory":
        entries = data["entries"]
        n = len(entries)
        ids = [int(e[0]) for e in entries]
        if sorted(ids) != list(range(n)):
            raise ValueError("snapshot entries must cover agent ids 0..n-1 exactly once")
        values = np.empty(n)
        counters = np.empty(n, dtype=np.int64)
        for i, v, c in entries:
            if int(c) < 0:
                raise ValueError("negative version counter in snapshot")
            values[int(i)] = float(v)
            counters[int(i)] = int(c)
        cand = data.get("candidate")
        candidate = None
        if cand is not None:
            assignment = np.asarray(cand["assignment"], dtype=float)
            if assignment.shape != (n,):
                raise ValueError("candidate assignment length does not match entries")
            candidate = Candidate(assignment, float(cand["fitness"]), int(cand["creator"]))
        return cls(int(data["agent_id"]), values, counters, candidate)


def perceive(memory: WorkingMemory, incoming: WorkingMemory) -> bool:
    """Merge a neighbour's snapshot into ``memory``; return whether anything changed."""
    newer = incoming.counters > memory.counters
    changed = bool(newer.any())
    if changed:
        memory.values[newer] = incoming.values[newer]
        memory.counters[newer] = incoming.counters[newer]
    if incoming.candidate is not None and incoming.candidate.beats(memory.candidate):
        if not incoming.candidate.same_as(memory.candidate):
            memory.candidate = incoming.candidate
            changed = True
    return changed


def local_search_1d(
    f: ObjectiveFunction,
    base: np.ndarray,
    index: int,
    budget: int,
    rng: np.random.Generator,
) -> float:
    """Best of the current value and ``budget`` uniform draws for one coordinate.

    Ties go to the current value, so the result never worsens ``base``.
    """
    if budget <= 0:
        return float(base[index])
    points = np.repeat(base[None, :], budget + 1, axis=0)
    points[1:, index] = rng.uniform(f.lower[index], f.upper[index], size=budget)
    return float(points[int(np.argmin(f.batch(points))), index])


def decide(
    memory: WorkingMemory,
    f: ObjectiveFunction,
    budget: int,
    rng: np.random.Generator,
) -> bool:
    """Re-optimize the agent's own coordinate against the perceived configuration.

    A result better than the stored candidate becomes the new candidate and
    bumps the agent's version counter.
    """
    i = memory.agent_id
    config = memory.values.copy()
    config[i] = local_search_1d(f, config, i, budget, rng)
    fitness = evaluate(f, config)
    if memory.candidate is not None and not fitness < memory.candidate.fitness:
        return False
    memory.values[i] = config[i]
    memory.counters[i] += 1
    memory.candidate = Candidate(config, fitness, i)
    return True
