import itertools

import pytest

from fmr.formula import Literal, Scenario, ScenarioFormula, expand, simplify
from fmr.modes import F, H, L, M, MODES, SignalType

REAL = SignalType.REAL


def formula(*texts, target=Literal("o", F)):
    return ScenarioFormula(tuple(Scenario.parse(t) for t in texts), target)


def test_parse_and_render():
    s = Scenario.parse("i2=h & i1=l")
    assert str(s) == "i1=l & i2=h"
    assert s.as_dict() == {"i1": L, "i2": H}
    assert str(Scenario.parse("true")) == "true"
    assert str(formula()) == "false"
    assert str(formula("i1=l", "i2=l")) == "(i1=l) | (i2=l)"


def test_parse_rejects_garbage():
    for bad in ("i1", "i1=q", "=l", "i1=l &"):
        with pytest.raises(ValueError):
            Scenario.parse(bad)


def test_contradiction_detection():
    assert Scenario.parse("i1=l & i1=h").is_contradiction
    assert not Scenario.parse("i1=l & i2=h").is_contradiction


def test_absorption():
    out = simplify(formula("i1=l", "i1=l & i2=h"))
    assert [str(s) for s in out] == ["i1=l"]


def test_contradiction_removed():
    out = simplify(formula("i1=l & i1=h", "i2=h"))
    assert [str(s) for s in out] == ["i2=h"]


def test_idempotence():
    out = simplify(formula("i1=l", "i1=l"))
    assert [str(s) for s in out] == ["i1=l"]


def test_true_absorbs_everything():
    out = simplify(formula("i1=l", "true", "i2=h & i3=l"))
    assert [str(s) for s in out] == ["true"]


def test_deterministic_order():
    out = simplify(formula("i2=l", "i1=h", "i1=l & i3=m", "i1=l & i2=h"))
    assert [str(s) for s in out] == ["i1=l & i2=h", "i1=l & i3=m", "i1=h", "i2=l"]


def test_simplify_keeps_provenance_and_notes():
    s = Scenario.parse("i1=l")
    f = ScenarioFormula((s, s), Literal("o", F), ("n",), {s: ("step",)})
    out = simplify(f)
    assert out.provenance[s] == ("step",) and out.notes == ("n",)


def test_expand_fill_modes():
    f = formula("i1=l")
    tys = {"i1": REAL, "i2": REAL}
    assert expand(f, tys) == {(L, m) for m in MODES[REAL]}
    assert expand(f, tys, fill="match") == {(L, M)}
    with pytest.raises(ValueError):
        expand(formula("i9=l"), tys)


def test_satisfaction():
    f = formula("i1=l & i2=h", "i3=m")
    assert f.satisfied_by({"i1": L, "i2": H, "i3": L})
    assert f.satisfied_by({"i1": H, "i2": H, "i3": M})
    assert not f.satisfied_by({"i1": L, "i2": L, "i3": H})


def test_scenario_faults_drops_match():
    assert str(Scenario.parse("i1=m & i2=l").faults()) == "i2=l"


def test_exhaustive_equivalence_small():
    tys = {"a": REAL, "b": REAL}
    f = formula("a=l", "a=l & b=h", "b=m", "a=h & a=l")
    g = simplify(f)
    for combo in itertools.product(MODES[REAL], repeat=2):
        asg = dict(zip(tys, combo))
        assert f.satisfied_by(asg) == g.satisfied_by(asg)
