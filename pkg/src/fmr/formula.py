"""Scenario formulas: disjunctions of conjunctions of (variable, mode) literals."""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
import re
from typing import Iterable, Mapping, NamedTuple

from .modes import MODES, Mode, SignalType, parse_mode

_VAR_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")


class Literal(NamedTuple):
    var: str
    mode: Mode

    def __str__(self) -> str:
        return f"{self.var}={self.mode}"


def _literal_key(lit: Literal):
    return (lit.var, lit.mode.order)


@dataclass(frozen=True)
class Scenario:
    """A conjunction of mode literals; an unmentioned variable is unconstrained."""

    literals: frozenset[Literal] = frozenset()

    @classmethod
    def of(cls, assignment: Mapping[str, Mode] | Iterable[tuple[str, Mode]] = ()) -> "Scenario":
        items = assignment.items() if isinstance(assignment, Mapping) else assignment
        return cls(frozenset(Literal(v, m) for v, m in items))

    @classmethod
    def parse(cls, text: str) -> "Scenario":
        """Parse ``"i1=l & i2=h"``; ``"true"`` is the empty conjunction."""
        text = text.strip()
        if text in ("", "true"):
            return cls()
        lits = []
        for part in text.split("&"):
            var, eq, mode = part.partition("=")
            var = var.strip()
            if not eq or not _VAR_RE.match(var):
                raise ValueError(f"expected VAR=MODE, got {part.strip()!r}")
            lits.append(Literal(var, parse_mode(mode)))
        return cls(frozenset(lits))

    @property
    def is_contradiction(self) -> bool:
        seen: dict[str, Mode] = {}
        for lit in self.literals:
            if seen.setdefault(lit.var, lit.mode) is not lit.mode:
                return True
        return False

    def as_dict(self) -> dict[str, Mode]:
        if self.is_contradiction:
            raise ValueError(f"contradictory scenario {self}")
        return {lit.var: lit.mode for lit in self.literals}

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(lit.var for lit in self.literals)

    def sorted_literals(self) -> list[Literal]:
        return sorted(self.literals, key=_literal_key)

    def sort_key(self):
        return [_literal_key(lit) for lit in self.sorted_literals()]

    def faults(self) -> "Scenario":
        return Scenario(frozenset(lit for lit in self.literals if lit.mode.is_fault))

    def satisfied_by(self, assignment: Mapping[str, Mode]) -> bool:
        return all(assignment.get(lit.var) is lit.mode for lit in self.literals)

    def __len__(self) -> int:
        return len(self.literals)

    def __str__(self) -> str:
        if not self.literals:
            return "true"
        return " & ".join(str(lit) for lit in self.sorted_literals())


@dataclass(frozen=True)
class ScenarioFormula:
    """A disjunction of scenarios that cause ``target``."""

    scenarios: tuple[Scenario, ...]
    target: Literal
    notes: tuple[str, ...] = ()
    provenance: Mapping[Scenario, tuple] = field(default_factory=dict, compare=False, hash=False)

    def __iter__(self):
        return iter(self.scenarios)

    def __len__(self) -> int:
        return len(self.scenarios)

    @property
    def is_empty(self) -> bool:
        return not self.scenarios

    @property
    def variables(self) -> frozenset[str]:
        return frozenset().union(*(s.variables for s in self.scenarios))

    def satisfied_by(self, assignment: Mapping[str, Mode]) -> bool:
        return any(s.satisfied_by(assignment) for s in self.scenarios)

    def __str__(self) -> str:
        if not self.scenarios:
            return "false"
        return " | ".join(f"({s})" for s in self.scenarios)


def _absorb(scenarios: list[Scenario]) -> list[Scenario]:
    """Drop every scenario whose literal set strictly contains a kept one."""
    kept: list[Scenario] = []
    postings: dict[Literal, list[int]] = defaultdict(list)
    has_true = False
    for s in sorted(scenarios, key=len):
        if has_true:
            break
        hits: dict[int, int] = defaultdict(int)
        absorbed = False
        for lit in s.literals:
            for k in postings.get(lit, ()):
                hits[k] += 1
                if hits[k] == len(kept[k]):
                    absorbed = True
                    break
            if absorbed:
                break
        if absorbed:
            continue
        if not s.literals:
            has_true = True
        for lit in s.literals:
            postings[lit].append(len(kept))
        kept.append(s)
    return kept


def simplify(formula: ScenarioFormula) -> ScenarioFormula:
    """Remove contradictions, duplicates and absorbed scenarios; sort the rest.

    The result has the same satisfying assignments as the input.
    """
    unique = {s for s in formula.scenarios if not s.is_contradiction}
    kept = sorted(_absorb(list(unique)), key=Scenario.sort_key)
    prov = {s: formula.provenance[s] for s in kept if s in formula.provenance}
    return ScenarioFormula(tuple(kept), formula.target, formula.notes, prov)


def expand(
    formula: ScenarioFormula,
    variables: Mapping[str, SignalType],
    fill: str = "any",
) -> set[tuple[Mode, ...]]:
    """Enumerate the full mode tuples (ordered like ``variables``) covered by ``formula``.

    ``fill="any"`` lets unmentioned variables take every mode; ``fill="match"``
    pins them to ``m``, the reading used for fault-only shortlists.
    """
    if fill not in ("any", "match"):
        raise ValueError(f"unknown fill {fill!r}")
    names = list(variables)
    unknown = formula.variables - set(names)
    if unknown:
        raise ValueError(f"formula mentions variables outside the tuple: {sorted(unknown)}")
    out: set[tuple[Mode, ...]] = set()
    for s in formula.scenarios:
        if s.is_contradiction:
            continue
        fixed = s.as_dict()
        choices = []
        for name in names:
            if name in fixed:
                choices.append((fixed[name],))
            elif fill == "match":
                choices.append((Mode.MATCH,))
            else:
                choices.append(MODES[variables[name]])
        out.update(itertools.product(*choices))
    return out
