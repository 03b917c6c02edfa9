"""Probability of a scenario formula from per-input failure mode probabilities.

Input failure events of distinct variables are taken to be independent. The
modes of one variable partition its states, so they are mutually exclusive.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping

from .formula import Scenario, ScenarioFormula
from .modes import M, Mode, ModeError, parse_mode

RARE_EVENT = "rare_event"
INCLUSION_EXCLUSION = "inclusion_exclusion"
METHODS = (RARE_EVENT, INCLUSION_EXCLUSION)
MAX_EXACT_SCENARIOS = 20
INDEPENDENCE_NOTE = "input failure events are assumed statistically independent"


class QuantError(ValueError):
    pass


@dataclass(frozen=True)
class FailureData:
    """Fault-mode probabilities per input variable; ``m`` takes the remainder."""

    entries: Mapping[str, Mapping[Mode, float]]

    def __post_init__(self):
        for var, modes in self.entries.items():
            total = 0.0
            for mode, p in modes.items():
                if mode is M:
                    raise QuantError(f"{var}: the probability of m is implied, do not list it")
                if not (isinstance(p, (int, float)) and not isinstance(p, bool)) or not 0.0 <= p <= 1.0:
                    raise QuantError(f"{var}={mode}: probability {p!r} is not in [0, 1]")
                total += p
            if total > 1.0 + 1e-12:
                raise QuantError(f"{var}: fault-mode probabilities sum to {total:g} > 1")

    @classmethod
    def from_json(cls, obj) -> "FailureData":
        if not isinstance(obj, dict):
            raise QuantError("failure data must be a JSON object keyed by variable")
        entries = {}
        for var, modes in obj.items():
            if not isinstance(modes, dict):
                raise QuantError(f"{var}: expected an object of mode probabilities")
            try:
                entries[var] = {parse_mode(k): v for k, v in modes.items()}
            except ModeError as exc:
                raise QuantError(f"{var}: {exc}") from None
        return cls(entries)

    @classmethod
    def load(cls, path) -> "FailureData":
        with open(path, encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise QuantError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
        return cls.from_json(obj)

    def probability(self, var: str, mode: Mode) -> float:
        modes = self.entries.get(var)
        if modes is None or (mode is not M and mode not in modes):
            raise QuantError(f"no failure probability for {var}={mode}")
        if mode is M:
            return max(0.0, 1.0 - sum(modes.values()))
        return float(modes[mode])


@dataclass(frozen=True)
class QuantResult:
    scenario_probabilities: tuple[tuple[Scenario, float], ...]
    rare_event: float
    exact: float | None
    rare_event_clamped: bool = False
    notes: tuple[str, ...] = field(default=(INDEPENDENCE_NOTE,))

    def to_dict(self) -> dict:
        return {
            "scenarios": [
                {"scenario": [{"var": l.var, "mode": l.mode.value} for l in s.sorted_literals()], "probability": p}
                for s, p in self.scenario_probabilities
            ],
            "rare_event": self.rare_event,
            "rare_event_clamped": self.rare_event_clamped,
            "exact": self.exact,
            "notes": list(self.notes),
        }


def scenario_probability(s: Scenario, d: FailureData) -> float:
    """Product of literal probabilities; 0 for a contradictory scenario."""
    if s.is_contradiction:
        return 0.0
    return math.prod(d.probability(l.var, l.mode) for l in s.sorted_literals())


def _exact(scenarios: list[Scenario], d: FailureData) -> float:
    # Inclusion-exclusion over scenario subsets. An intersection that assigns
    # two modes to one variable is impossible, and so is every superset of it,
    # which prunes the search.
    total = 0.0
    n = len(scenarios)

    def visit(start: int, assigned: dict, depth: int):
        nonlocal total
        for i in range(start, n):
            merged = dict(assigned)
            ok = True
            for l in scenarios[i].literals:
                if merged.setdefault(l.var, l.mode) is not l.mode:
                    ok = False
                    break
            if not ok:
                continue
            p = math.prod(d.probability(v, m) for v, m in merged.items())
            total += p if depth % 2 == 0 else -p
            if p > 0.0:
                visit(i + 1, merged, depth + 1)

    visit(0, {}, 0)
    return min(1.0, max(0.0, total))


def aggregate(f: ScenarioFormula, d: FailureData, method: str = INCLUSION_EXCLUSION) -> QuantResult:
    """Scenario probabilities plus the rare-event sum and, unless ``method`` is
    ``rare_event``, the exact probability of the disjunction."""
    if method not in METHODS:
        raise QuantError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    scenarios = [s for s in f.scenarios if not s.is_contradiction]
    probs = tuple((s, scenario_probability(s, d)) for s in scenarios)
    raw = sum(p for _, p in probs)
    clamped = raw > 1.0
    notes = [INDEPENDENCE_NOTE]
    if clamped:
        notes.append(f"rare-event sum {raw:g} exceeds 1 and was clamped")
    exact = None
    if method == INCLUSION_EXCLUSION:
        if len(scenarios) > MAX_EXACT_SCENARIOS:
            raise QuantError(
                f"exact aggregation supports at most {MAX_EXACT_SCENARIOS} scenarios, got {len(scenarios)};"
                " use the rare_event method"
            )
        exact = _exact(scenarios, d)
    return QuantResult(probs, min(raw, 1.0), exact, clamped, tuple(notes))
