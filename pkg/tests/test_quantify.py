import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fmr.formula import Literal, Scenario, ScenarioFormula
from fmr.modes import F, H, L, M, MODES, SignalType
from fmr.quantify import (
    INDEPENDENCE_NOTE, MAX_EXACT_SCENARIOS, FailureData, QuantError, aggregate, scenario_probability,
)

TGT = Literal("o", F)


def formula(*texts):
    return ScenarioFormula(tuple(Scenario.parse(t) for t in texts), TGT)


def data(**kw):
    return FailureData.from_json(kw)


def enumerate_exact(f, d):
    """Sum the joint probability of every full mode assignment that satisfies f."""
    names = sorted(f.variables)
    total = 0.0
    for combo in itertools.product(*(MODES[SignalType.REAL] for _ in names)):
        asg = dict(zip(names, combo))
        if f.satisfied_by(asg):
            p = 1.0
            for v, m in asg.items():
                p *= d.probability(v, m) if m is M or m in d.entries[v] else 0.0
            total += p
    return total


def test_scenario_probability_examples():
    d = data(i1={"l": 1e-3}, i2={"l": 1e-3})
    assert scenario_probability(Scenario.parse("i1=l"), d) == 1e-3
    assert scenario_probability(Scenario.parse("i1=l & i2=l"), d) == pytest.approx(1e-6, abs=1e-18)
    assert scenario_probability(Scenario.parse("true"), d) == 1.0
    assert scenario_probability(Scenario.parse("i1=m"), d) == pytest.approx(0.999)


def test_missing_entry_names_literal():
    with pytest.raises(QuantError, match="i2=h"):
        scenario_probability(Scenario.parse("i2=h"), data(i2={"l": 0.1}))
    with pytest.raises(QuantError, match="i9=l"):
        scenario_probability(Scenario.parse("i9=l"), data(i2={"l": 0.1}))


def test_aggregate_t_avg():
    d = data(i1={"l": 1e-3}, i2={"l": 1e-3})
    r = aggregate(formula("i1=l", "i2=l"), d)
    assert abs(r.exact - 1.999e-3) <= 1e-9
    assert abs(r.rare_event - 2.000e-3) <= 1e-9
    assert INDEPENDENCE_NOTE in r.notes
    assert aggregate(formula("i1=l", "i2=l"), d, "rare_event").exact is None


def test_empty_formula():
    r = aggregate(formula(), data())
    assert r.exact == 0.0 and r.rare_event == 0.0


def test_exclusive_modes_of_one_variable():
    d = data(a={"l": 0.2, "h": 0.3})
    r = aggregate(formula("a=l", "a=h"), d)
    assert r.exact == pytest.approx(0.5) and r.rare_event == pytest.approx(0.5)


def test_rare_event_clamped():
    d = data(a={"l": 0.6}, b={"l": 0.7})
    r = aggregate(formula("a=l", "b=l"), d)
    assert r.rare_event == 1.0 and r.rare_event_clamped
    assert r.exact == pytest.approx(1 - 0.4 * 0.3)
    assert any("clamped" in n for n in r.notes)


def test_exact_bound():
    f = formula(*(f"v{k}=l" for k in range(MAX_EXACT_SCENARIOS + 1)))
    d = FailureData.from_json({f"v{k}": {"l": 0.01} for k in range(MAX_EXACT_SCENARIOS + 1)})
    with pytest.raises(QuantError, match="at most"):
        aggregate(f, d)
    assert aggregate(f, d, "rare_event").rare_event == pytest.approx(0.21)
    with pytest.raises(QuantError):
        aggregate(f, d, "monte_carlo")


def test_twenty_scenarios_allowed():
    f = formula(*(f"v{k}=l" for k in range(MAX_EXACT_SCENARIOS)))
    d = FailureData.from_json({f"v{k}": {"l": 0.01} for k in range(MAX_EXACT_SCENARIOS)})
    assert aggregate(f, d).exact == pytest.approx(1 - 0.99 ** 20)


@pytest.mark.parametrize("obj", [
    {"a": {"l": 1.5}}, {"a": {"l": -0.1}}, {"a": {"l": 0.6, "h": 0.6}}, {"a": {"m": 0.1}},
    {"a": {"q": 0.1}}, {"a": 0.1}, [1], {"a": {"l": True}},
])
def test_bad_failure_data(obj):
    with pytest.raises(QuantError):
        FailureData.from_json(obj)


def test_load(tmp_path):
    p = tmp_path / "d.json"
    p.write_text(json.dumps({"i1": {"l": 0.01}}))
    assert FailureData.load(p).probability("i1", L) == 0.01
    p.write_text("{bad")
    with pytest.raises(QuantError, match=":1:2:"):
        FailureData.load(p)


lits = st.tuples(st.sampled_from(["a", "b", "c", "d"]), st.sampled_from([L, M, H]))
scenarios = st.lists(lits, min_size=0, max_size=3).map(lambda xs: Scenario(frozenset(Literal(*x) for x in xs)))
probs = st.fixed_dictionaries({
    v: st.tuples(st.floats(0, 0.5), st.floats(0, 0.5)) for v in "abcd"
})


@settings(max_examples=150, deadline=None)
@given(st.lists(scenarios, max_size=6), probs)
def test_exact_matches_enumeration(scs, ps):
    d = FailureData({v: {L: p[0], H: p[1]} for v, p in ps.items()})
    f = ScenarioFormula(tuple(scs), TGT)
    r = aggregate(f, d)
    assert r.exact == pytest.approx(enumerate_exact(f, d), abs=1e-12)
    live = [p for _, p in r.scenario_probabilities]
    if all(p < 1 for p in live):
        assert r.exact <= r.rare_event + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.lists(scenarios, max_size=5), scenarios, probs)
def test_monotone_in_scenarios(scs, extra, ps):
    d = FailureData({v: {L: p[0], H: p[1]} for v, p in ps.items()})
    a = aggregate(ScenarioFormula(tuple(scs), TGT), d)
    b = aggregate(ScenarioFormula(tuple(scs) + (extra,), TGT), d)
    assert b.exact >= a.exact - 1e-12 and b.rare_event >= a.rare_event - 1e-12


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 0.3), min_size=1, max_size=5))
def test_bonferroni_gap_on_disjoint_scenarios(ps):
    names = [f"v{k}" for k in range(len(ps))]
    d = FailureData({n: {L: p} for n, p in zip(names, ps)})
    r = aggregate(formula(*(f"{n}=l" for n in names)), d)
    pair_sum = sum(a * b for a, b in itertools.combinations(ps, 2))
    assert 0 <= sum(ps) - r.exact <= pair_sum + 1e-12 or r.rare_event_clamped
