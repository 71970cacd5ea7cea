import copy

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from dyntopo.benchmarks import evaluate, make_function
from dyntopo.cohda import Candidate, WorkingMemory, decide, local_search_1d, perceive

N = 4


@st.composite
def memories(draw, n=N):
    values = np.array(draw(st.lists(st.floats(-5, 5), min_size=n, max_size=n)))
    counters = np.array(draw(st.lists(st.integers(0, 6), min_size=n, max_size=n)), dtype=np.int64)
    cand = None
    if draw(st.booleans()):
        assignment = np.array(draw(st.lists(st.floats(-5, 5), min_size=n, max_size=n)))
        cand = Candidate(assignment, draw(st.sampled_from([0.0, 1.0, 2.0])), draw(st.integers(0, n - 1)))
    return WorkingMemory(draw(st.integers(0, n - 1)), values, counters, cand)


def consistent(*mems):
    """Counters must identify values: equal (agent, counter) means equal value."""
    seen = {}
    for m in mems:
        for i, (v, c) in enumerate(zip(m.values, m.counters)):
            if seen.setdefault((i, int(c)), v) != v:
                return False
    return True


def state(m):
    c = m.candidate
    cand = None if c is None else (tuple(c.assignment), c.fitness, c.creator)
    return tuple(m.values), tuple(m.counters), cand


def test_candidate_order():
    a = Candidate(np.zeros(2), 1.0, 3)
    assert a.beats(None)
    assert Candidate(np.zeros(2), 0.5, 9).beats(a)
    assert Candidate(np.zeros(2), 1.0, 1).beats(a)
    assert not a.beats(a)


@settings(max_examples=200)
@given(memories(), memories(), memories())
def test_merge_order_does_not_matter(base, x, y):
    if not consistent(base, x, y):
        return
    if x.candidate and y.candidate and x.candidate.fitness == y.candidate.fitness \
            and x.candidate.creator == y.candidate.creator:
        return  # the order only breaks ties between distinct candidates
    a, b = copy.deepcopy(base), copy.deepcopy(base)
    perceive(a, x), perceive(a, y)
    perceive(b, y), perceive(b, x)
    assert state(a) == state(b)


@settings(max_examples=200)
@given(memories(), memories())
def test_merge_is_idempotent(base, x):
    m = copy.deepcopy(base)
    perceive(m, x)
    once = state(m)
    assert perceive(m, x) is False
    assert state(m) == once


@settings(max_examples=200)
@given(memories(), memories())
def test_merge_never_lowers_counters_or_worsens_candidate(base, x):
    m = copy.deepcopy(base)
    perceive(m, x)
    assert np.all(m.counters >= base.counters)
    assert np.all(m.counters >= x.counters)
    if base.candidate is not None:
        assert not base.candidate.beats(m.candidate)


def test_perceive_reports_change():
    m = WorkingMemory.initial(0, np.zeros(3))
    other = WorkingMemory.initial(1, np.zeros(3))
    assert perceive(m, other) is False
    other.values[1] = 2.0
    other.counters[1] = 1
    assert perceive(m, other) is True and m.values[1] == 2.0


@settings(max_examples=100)
@given(memories())
def test_wire_roundtrip(m):
    back = WorkingMemory.from_wire(m.to_wire())
    assert state(back) == state(m) and back.agent_id == m.agent_id


def test_from_wire_rejects():
    good = WorkingMemory.initial(0, np.zeros(2)).to_wire()
    bad = dict(good, entries=[[0, 0.0, -1], [1, 0.0, 0]])
    with pytest.raises(ValueError):
        WorkingMemory.from_wire(bad)
    with pytest.raises(ValueError):
        WorkingMemory.from_wire(dict(good, entries=[[0, 0.0, 0], [0, 0.0, 0]]))
    with pytest.raises(ValueError):
        WorkingMemory.from_wire(dict(good, candidate={"assignment": [0.0], "fitness": 0.0, "creator": 0}))


def test_snapshot_is_independent():
    m = WorkingMemory.initial(0, np.zeros(3))
    snap = m.snapshot()
    m.values[0] = 9.0
    m.counters[0] = 5
    assert snap.values[0] == 0.0 and snap.counters[0] == 0


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10**6), budget=st.integers(0, 30))
def test_local_search_never_worsens(seed, budget):
    f = make_function("rastrigin", 5)
    rng = np.random.default_rng(seed)
    base = rng.uniform(f.lower, f.upper)
    x = base.copy()
    x[2] = local_search_1d(f, base, 2, budget, rng)
    assert evaluate(f, x) <= evaluate(f, base)
    assert f.lower[2] <= x[2] <= f.upper[2]


def test_local_search_zero_budget_returns_incumbent():
    f = make_function("ackley", 3)
    base = np.array([1.0, 2.0, 3.0])
    assert local_search_1d(f, base, 1, 0, np.random.default_rng(0)) == 2.0


def test_local_search_matches_bounded_minimizer_on_quadratic_slice():
    # sargan is a convex quadratic, so each coordinate slice has one minimum
    f = make_function("sargan", 4)
    base = np.array([3.0, -7.0, 11.0, 2.0])

    def slice_value(v):
        x = base.copy()
        x[0] = v
        return evaluate(f, x)

    oracle = minimize_scalar(slice_value, bounds=(-100, 100), method="bounded", options={"xatol": 1e-10})
    got = local_search_1d(f, base, 0, 100_000, np.random.default_rng(1))
    assert slice_value(got) <= oracle.fun * 1.005 + 1e-9


def test_local_search_matches_grid_oracle_on_rastrigin_slice():
    f = make_function("rastrigin", 3)
    base = np.array([0.0, 0.0, 4.3])
    grid = np.linspace(-5.12, 5.12, 200_001)
    pts = np.repeat(base[None, :], grid.size, axis=0)
    pts[:, 2] = grid
    best = f.batch(pts).min()
    x = base.copy()
    x[2] = local_search_1d(f, base, 2, 100_000, np.random.default_rng(2))
    assert evaluate(f, x) <= best + 1e-3


def test_decide_updates_only_on_improvement():
    f = make_function("sargan", 3)
    m = WorkingMemory.initial(1, np.array([5.0, 5.0, 5.0]))
    rng = np.random.default_rng(0)
    assert decide(m, f, 50, rng) is True
    assert m.own_counter == 1 and m.candidate.creator == 1
    assert m.candidate.fitness == evaluate(f, m.candidate.assignment)
    first = m.candidate
    # an unbeatable stored candidate blocks further updates
    m.candidate = Candidate(np.zeros(3), -1.0, 0)
    assert decide(m, f, 50, rng) is False
    assert m.own_counter == 1 and first is not m.candidate
