import time

import pytest

from fmr.engine import AnalysisError, AnalysisOptions, backward_analyze
from fmr.formula import expand
from fmr.modes import F, H, L, M, ModeError, T
from fmr.program import parse_program


def scen(f):
    return [str(s) for s in f]


def prog(body, decl):
    return parse_program("fmrprog v1\n" + decl + body)


def test_t_avg_false(t_avg):
    t0 = time.perf_counter()
    f = backward_analyze(t_avg, "o", F)
    assert time.perf_counter() - t0 < 1.0
    assert scen(f) == ["i1=l", "i2=l"]
    assert str(f.target) == "o=f" and f.notes == ()


def test_t_avg_true(t_avg):
    assert scen(backward_analyze(t_avg, "o", T)) == ["i1=h", "i2=h"]


def test_t_or_practical(t_or):
    assert scen(backward_analyze(t_or, "o", F)) == ["i1=l & i2=l"]


def test_t_or_with_uncertain_rows(t_or):
    f = backward_analyze(t_or, "o", F, AnalysisOptions.exhaustive())
    # the uncertain rows let one low transmitter suffice
    assert scen(f) == ["i1=l", "i2=l"]


def test_single_comparison():
    g = prog("block c: o = GcomK[K=3](i)\n", "input i : real\noutput o : bool\n")
    assert scen(backward_analyze(g, "o", F)) == ["i=l"]


def test_provenance_chain(t_avg):
    f = backward_analyze(t_avg, "o", F)
    steps = [str(s) for s in f.provenance[f.scenarios[0]]]
    assert steps == ["{w=l} cmp1:Gcom {o=f}", "{i1=l} avg1:Avg {w=l}"]
    d = f.provenance[f.scenarios[1]][1].to_dict()
    assert d == {"block": "avg1", "kind": "Avg", "consequent": {"var": "w", "mode": "l"},
                 "antecedent": [{"var": "i2", "mode": "l"}]}


def test_target_errors(t_avg):
    with pytest.raises(AnalysisError):
        backward_analyze(t_avg, "w", L)
    with pytest.raises(AnalysisError):
        backward_analyze(t_avg, "i1", L)
    with pytest.raises(AnalysisError):
        backward_analyze(t_avg, "nope", F)
    with pytest.raises(ModeError):
        backward_analyze(t_avg, "o", H)
    with pytest.raises(AnalysisError):
        AnalysisOptions("fancy")


def test_unreachable_target_gives_empty_formula_with_note():
    g = prog("block n: na = Not(a)\nblock c: o = And(a, na)\n",
             "input a : bool\ninternal na : bool\noutput o : bool\n")
    f = backward_analyze(g, "o", T)
    assert f.is_empty and str(f) == "false"
    assert "unreachable" in f.notes[0]


def test_fanout_unifies_modes():
    g = prog("block s: o = Gcom[K=0](w)\nblock a: w = Add(i, i)\n",
             "input i : real\ninternal w : real\noutput o : bool\n")
    assert scen(backward_analyze(g, "o", F)) == ["i=l"]


def test_fanout_drops_conflicts():
    # Avg(i, j) low needs a low input; And of two comparisons on the same i
    g = prog("block g: p = Gcom[K=0](i)\nblock l: q = Lcom[K=0](i)\nblock a: o = And(p, q)\n",
             "input i : real\ninternal p, q : bool\noutput o : bool\n")
    f = backward_analyze(g, "o", T)
    # p=t needs i=h, q=t needs i=l: no single mode of i does both
    assert f.is_empty


def test_prune_match_off_keeps_m_literals(t_avg):
    f = backward_analyze(t_avg, "o", F, AnalysisOptions(prune_match=False))
    assert scen(f) == ["i1=l", "i2=l"]
    g = prog("block a: o = And(x, y)\n", "input x, y : bool\noutput o : bool\n")
    assert scen(backward_analyze(g, "o", F)) == ["x=f", "y=f"]
    assert scen(backward_analyze(g, "o", F, AnalysisOptions(prune_match=False))) == \
        ["x=f & y=f", "x=f & y=m", "x=m & y=f"]


def test_match_target(t_avg):
    assert scen(backward_analyze(t_avg, "o", M)) == ["true"]


def test_result_mentions_inputs_only(t_or):
    for opts in (AnalysisOptions(), AnalysisOptions.exhaustive()):
        for mode in (F, T, M):
            f = backward_analyze(t_or, "o", mode, opts)
            assert f.variables <= {"i1", "i2"}


def test_deterministic(t_or):
    a = backward_analyze(t_or, "o", F, AnalysisOptions.exhaustive())
    b = backward_analyze(t_or, "o", F, AnalysisOptions.exhaustive())
    assert scen(a) == scen(b)


def test_practical_result_within_exhaustive(t_avg, t_or):
    for g in (t_avg, t_or):
        tys = {v.name: v.ty for v in g.inputs}
        for mode in (F, T):
            prac = expand(backward_analyze(g, "o", mode), tys, fill="match")
            full = expand(backward_analyze(g, "o", mode, AnalysisOptions.exhaustive()), tys)
            assert prac <= full


def test_options_dict():
    assert AnalysisOptions().to_dict() == {"fmb_variant": "practical", "prune_match": True,
                                           "include_uncertain": False}
