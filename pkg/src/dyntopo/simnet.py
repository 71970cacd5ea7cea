"""Deterministic discrete-event simulation of a COHDA run.

Time advances in logical ticks. A message sent at tick ``t`` is delivered at
``t + 1``; deliveries within a tick are ordered by (sender id, per-sender
sequence number). Topology transitions happen only between ticks.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from typing import Callable, Optional, TextIO

import numpy as np

from . import topology as topo
from .benchmarks import make_function
from .cohda import DEFAULT_BUDGET, WorkingMemory, decide, perceive

DYNAMIC = "dynamic"
DEFAULT_ALPHAS = (0.1, 0.3, 0.7, 1.0)
MAX_TICKS_PER_AGENT = 5000


@dataclass(frozen=True)
class RunConfig:
    function: str
    dimension: int
    topology: str
    alpha: Optional[float] = None
    topology_seed: int = 0
    start_seed: int = 0
    budget: int = DEFAULT_BUDGET
    max_ticks: Optional[int] = None

    def __post_init__(self):
        if self.topology == DYNAMIC:
            if self.alpha is None or not 0.0 < self.alpha <= 1.0:
                raise ValueError("dynamic runs need alpha in (0, 1]")
        elif self.topology not in topo.STATIC_KINDS:
            raise ValueError(f"unknown topology {self.topology!r}")
        if self.budget < 0:
            raise ValueError("budget must be non-negative")

    @property
    def label(self) -> str:
        return f"dynamic_{self.alpha:g}" if self.topology == DYNAMIC else self.topology

    @property
    def tick_cap(self) -> int:
        return self.max_ticks if self.max_ticks is not None else MAX_TICKS_PER_AGENT * self.dimension


@dataclass
class RunRecord:
    config: RunConfig
    error_raw: float
    fitness: float
    convergence_ticks: int
    messages: int
    messages_sent: int
    local_searches: int
    converged: bool
    schedule_trace: list[tuple[int, int]] = field(default_factory=list)


@dataclass
class Event:
    tick: int
    type: str
    src: int
    dst: int
    fitness: Optional[float]

    def to_json(self) -> str:
        return json.dumps(
            {"tick": self.tick, "type": self.type, "src": self.src, "dst": self.dst, "fitness": self.fitness}
        )


@dataclass
class TransitionObserver:
    """Counts local searches since the last topology transition."""

    n: int
    count: int = 0
    step: int = 0

    @property
    def due(self) -> bool:
        return self.count > self.n


def trigger_transition(
    observer: TransitionObserver,
    schedule: topo.RemovalSchedule,
    current: topo.Topology,
    rng: np.random.Generator,
) -> topo.Topology:
    """Advance one schedule step if the observer has seen more than n searches."""
    if not observer.due:
        return current
    observer.count = 0
    if observer.step + 1 >= len(schedule.steps):
        return current
    observer.step += 1
    return topo.adapt(current, schedule.steps[observer.step], rng)


def check_convergence(memories: list[WorkingMemory], in_flight: int) -> bool:
    if in_flight:
        return False
    first = memories[0].candidate
    if first is None:
        return False
    return all(first.same_as(m.candidate) for m in memories[1:])


def _agent_rngs(start_seed: int, n: int) -> tuple[np.ndarray, list[np.random.Generator]]:
    ss = np.random.SeedSequence(start_seed)
    init_ss, *agent_ss = ss.spawn(n + 1)
    return init_ss, [np.random.default_rng(s) for s in agent_ss]


class Simulation:
    """One run's state plus its event loop."""

    def __init__(self, cfg: RunConfig, on_event: Optional[Callable[[Event], None]] = None):
        self.cfg = cfg
        self.f = make_function(cfg.function, cfg.dimension)
        n = self.n = cfg.dimension
        self.on_event = on_event

        topo_ss = np.random.SeedSequence(cfg.topology_seed)
        build_ss, adapt_ss = topo_ss.spawn(2)
        self.adapt_rng = np.random.default_rng(adapt_ss)
        build_seed = int(build_ss.generate_state(1)[0])
        if cfg.topology == DYNAMIC:
            self.topology = topo.build_static("complete", n, build_seed)
            self.schedule: Optional[topo.RemovalSchedule] = topo.removal_schedule(n, cfg.alpha)
        else:
            self.topology = topo.build_static(cfg.topology, n, build_seed)
            self.schedule = None
        self._install(self.topology, 0, initial=True)

        init_ss, self.rngs = _agent_rngs(cfg.start_seed, n)
        start = np.random.default_rng(init_ss).uniform(self.f.lower, self.f.upper)
        self.memories = [WorkingMemory.initial(i, start) for i in range(n)]

        self.observer = TransitionObserver(n)
        self.queue: list[tuple[int, int, int, int, WorkingMemory]] = []
        self.seq = [0] * n
        self.now = 0
        self.messages = 0
        self.sent = 0
        self.local_searches = 0

    def _install(self, t: topo.Topology, tick: int, initial: bool = False) -> None:
        problem = topo.validate(t)
        if problem is not None:
            raise RuntimeError(f"invalid topology installed at tick {tick}: {problem}")
        self.topology = t
        self.adjacency = t.neighbors()
        if initial:
            self.schedule_trace = [(tick, t.edge_count)]
        else:
            self.schedule_trace.append((tick, t.edge_count))
        if self.on_event is not None and not initial:
            self.on_event(Event(tick, "transition", -1, -1, float(t.edge_count)))

    def _decide(self, i: int) -> bool:
        self.local_searches += 1
        self.observer.count += 1
        return decide(self.memories[i], self.f, self.cfg.budget, self.rngs[i])

    def _broadcast(self, i: int) -> None:
        snap = self.memories[i].snapshot()
        when = self.now + 1
        for j in self.adjacency[i]:
            heapq.heappush(self.queue, (when, i, self.seq[i], j, snap))
            self.seq[i] += 1
            self.sent += 1

    def _emit(self, kind: str, src: int, dst: int) -> None:
        if self.on_event is not None:
            cand = self.memories[dst].candidate
            self.on_event(Event(self.now, kind, src, dst, None if cand is None else cand.fitness))

    def bootstrap(self) -> None:
        # every agent searches once at t=0 and tells its neighbours
        for i in range(self.n):
            self._decide(i)
            self._emit("decide", i, i)
        for i in range(self.n):
            self._broadcast(i)

    def run(self) -> RunRecord:
        self.bootstrap()
        cap = self.cfg.tick_cap
        queue = self.queue
        while queue and queue[0][0] <= cap:
            tick = queue[0][0]
            if self.schedule is not None and self.observer.due:
                new = trigger_transition(self.observer, self.schedule, self.topology, self.adapt_rng)
                if new is not self.topology:
                    self._install(new, tick)
            self.now = tick
            inbox_changed: dict[int, bool] = {}
            while queue and queue[0][0] == tick:
                _, src, _, dst, snap = heapq.heappop(queue)
                self.messages += 1
                changed = perceive(self.memories[dst], snap)
                inbox_changed[dst] = inbox_changed.get(dst, False) or changed
                self._emit("deliver", src, dst)
            # each agent that heard something this tick reacts exactly once
            for dst in sorted(inbox_changed):
                changed = self._decide(dst) or inbox_changed[dst]
                self._emit("decide", dst, dst)
                if changed:
                    self._broadcast(dst)
        return self.record()

    def record(self) -> RunRecord:
        converged = check_convergence(self.memories, len(self.queue))
        best = min((m.candidate for m in self.memories if m.candidate is not None),
                   key=lambda c: (c.fitness, c.creator))
        fitness = best.fitness
        error = fitness - self.f.optimum_value if self.f.optimum_value is not None else fitness
        return RunRecord(
            config=self.cfg,
            error_raw=error,
            fitness=fitness,
            convergence_ticks=self.now,
            messages=self.messages,
            messages_sent=self.sent,
            local_searches=self.local_searches,
            converged=converged,
            schedule_trace=list(self.schedule_trace),
        )


def run(cfg: RunConfig, trace: Optional[TextIO] = None,
        on_event: Optional[Callable[[Event], None]] = None) -> RunRecord:
    """Execute one run to quiescence (or the tick cap)."""
    if trace is None:
        return Simulation(cfg, on_event).run()

    def write_and_forward(ev: Event) -> None:
        trace.write(ev.to_json() + "\n")
        if on_event is not None:
            on_event(ev)

    return Simulation(cfg, write_and_forward).run()
