"""Rendering analysis results as JSON reports or plain text."""

from __future__ import annotations

import json
from importlib import resources

from .engine import AnalysisOptions
from .formula import Literal, Scenario, ScenarioFormula
from .quantify import QuantResult

REPORT_FORMAT = "fmr-report v1"


def load_schema() -> dict:
    """The JSON Schema that every report produced here validates against."""
    text = resources.files("fmr").joinpath("schemas/report.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _lit(l: Literal) -> dict:
    return {"var": l.var, "mode": l.mode.value}


def _scenario(s: Scenario) -> list[dict]:
    return [_lit(l) for l in s.sorted_literals()]


def build_report(
    formula: ScenarioFormula,
    opts: AnalysisOptions,
    program: str | None = None,
    label: str | None = None,
    quant: QuantResult | None = None,
) -> dict:
    report = {
        "format": REPORT_FORMAT,
        "program": program,
        "target": _lit(formula.target),
        "label": label,
        "options": opts.to_dict(),
        "scenarios": [_scenario(s) for s in formula.scenarios],
        "provenance": [[step.to_dict() for step in formula.provenance.get(s, ())] for s in formula.scenarios],
        "notes": list(formula.notes),
    }
    if quant is not None:
        report["quantification"] = quant.to_dict()
    return report


def dumps_report(report: dict) -> str:
    """Deterministic serialization: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def render_text(formula: ScenarioFormula, quant: QuantResult | None = None, label: str | None = None) -> str:
    head = f"target {formula.target}" + (f" [{label}]" if label else "")
    lines = [head, f"{len(formula)} scenario(s)"]
    probs = dict(quant.scenario_probabilities) if quant else {}
    for i, s in enumerate(formula.scenarios, 1):
        tail = f"  p={probs[s]:.6g}" if s in probs else ""
        lines.append(f"  {i}. {s}{tail}")
    if quant is not None:
        lines.append(f"rare-event: {quant.rare_event:.6g}" + (" (clamped)" if quant.rare_event_clamped else ""))
        if quant.exact is not None:
            lines.append(f"exact:      {quant.exact:.6g}")
        lines.extend(f"note: {n}" for n in quant.notes)
    lines.extend(f"note: {n}" for n in formula.notes)
    return "\n".join(lines) + "\n"


def render_explain(formula: ScenarioFormula) -> str:
    """Each scenario followed by the chain of substitutions that produced it,
    innermost block first, ending at the target."""
    lines = [f"target {formula.target}"]
    if formula.is_empty:
        lines.append("no scenarios")
    for i, s in enumerate(formula.scenarios, 1):
        lines.append(f"scenario {i}: {s}")
        for step in reversed(formula.provenance.get(s, ())):
            lines.append(f"    {step}")
    lines.extend(f"note: {n}" for n in formula.notes)
    return "\n".join(lines) + "\n"
