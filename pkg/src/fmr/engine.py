"""Backward failure mode reasoning over a program graph.

Starting from one output literal, every literal on a block output is replaced
by the block's inverse failure transformer, walking blocks in reverse
topological order so all uses of a variable are unified before it is expanded.
The result is a simplified DNF over input variables.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

from .catalog import PRACTICAL, THEORETICAL, VARIANTS, Catalog, inverse_modes
from .formula import Literal, Scenario, ScenarioFormula, _absorb, simplify
from .modes import Mode, ModeError
from .program import ProgramGraph, Role

__all__ = ["AnalysisError", "AnalysisOptions", "Step", "backward_analyze", "simplify"]

log = logging.getLogger(__name__)

# absorb partial scenarios once the working set grows past this size
_ABSORB_AT = 256


class AnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class AnalysisOptions:
    fmb_variant: str = PRACTICAL
    prune_match: bool = True
    include_uncertain: bool = False

    def __post_init__(self):
        if self.fmb_variant not in VARIANTS:
            raise AnalysisError(f"unknown FMB variant {self.fmb_variant!r}")

    @classmethod
    def exhaustive(cls) -> "AnalysisOptions":
        """Theoretical tables, every row, no pruning: the complete setting."""
        return cls(THEORETICAL, prune_match=False, include_uncertain=True)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Step:
    """One substitution: ``antecedent`` on the block inputs causes ``consequent``.

    ``antecedent`` is None when a match literal was pruned rather than expanded.
    """

    block: str
    kind: str
    consequent: Literal
    antecedent: Scenario | None

    def __str__(self) -> str:
        pre = "{" + str(self.antecedent) + "}" if self.antecedent is not None else "(not tracked)"
        return f"{pre} {self.block}:{self.kind} {{{self.consequent}}}"

    def to_dict(self) -> dict:
        return {
            "block": self.block,
            "kind": self.kind,
            "consequent": {"var": self.consequent.var, "mode": self.consequent.mode.value},
            "antecedent": None
            if self.antecedent is None
            else [{"var": l.var, "mode": l.mode.value} for l in self.antecedent.sorted_literals()],
        }


def backward_analyze(
    g: ProgramGraph,
    target_var: str,
    target_mode: Mode,
    opts: AnalysisOptions | None = None,
    catalog: Catalog | None = None,
) -> ScenarioFormula:
    """Input failure-mode scenarios that can cause ``target_var`` to show ``target_mode``.

    An unreachable target yields an empty formula with an explanatory note.
    """
    opts = opts or AnalysisOptions()
    catalog = catalog or Catalog.default()
    if target_var not in g:
        raise AnalysisError(f"no variable named {target_var!r}")
    var = g.var(target_var)
    if var.role is not Role.OUTPUT:
        raise AnalysisError(f"{target_var!r} is {var.role.value}, not an output variable")
    if not target_mode.legal_for(var.ty):
        raise ModeError(f"mode {target_mode} is not legal for {var.ty} output {target_var!r}")

    blocks, _ = g.cone(target_var)
    target = Literal(target_var, target_mode)
    # scenario literals -> provenance steps; literal sets never hold contradictions
    work: dict[frozenset, tuple[Step, ...]] = {frozenset([target]): ()}

    for b in reversed(blocks):
        v = b.out_var
        fmb = catalog.lookup(b.kind, opts.fmb_variant)
        nxt: dict[frozenset, tuple[Step, ...]] = {}
        for lits, prov in work.items():
            mu = next((l.mode for l in lits if l.var == v), None)
            if mu is None:
                nxt.setdefault(lits, prov)
                continue
            rest = lits - {Literal(v, mu)}
            if opts.prune_match and mu is Mode.MATCH:
                nxt.setdefault(rest, prov + (Step(b.id, b.kind.name, Literal(v, mu), None),))
                continue
            assigned = {l.var: l.mode for l in rest}
            for conj in inverse_modes(fmb, mu, opts.include_uncertain):
                merged = dict(assigned)
                antecedent = []
                for slot_lit in conj.sorted_literals():
                    name = b.in_vars[_slot_index(slot_lit.var)]
                    antecedent.append((name, slot_lit.mode))
                    prev = merged.setdefault(name, slot_lit.mode)
                    if prev is not slot_lit.mode:
                        break
                else:
                    step = Step(b.id, b.kind.name, Literal(v, mu), Scenario.of(antecedent))
                    key = frozenset(Literal(n, m) for n, m in merged.items())
                    nxt.setdefault(key, prov + (step,))
        if len(nxt) > _ABSORB_AT:
            kept = _absorb([Scenario(k) for k in nxt])
            nxt = {s.literals: nxt[s.literals] for s in kept}
        work = nxt
        log.debug("block %s: %d partial scenarios", b.id, len(work))

    scenarios: dict[Scenario, tuple[Step, ...]] = {}
    for lits, prov in work.items():
        if opts.prune_match:
            lits = frozenset(l for l in lits if l.mode is not Mode.MATCH)
        scenarios.setdefault(Scenario(lits), prov)

    notes = []
    if not scenarios:
        notes.append(
            f"target {target} is unreachable under the {opts.fmb_variant} tables"
            + ("" if opts.include_uncertain else " without uncertain rows")
        )
    formula = ScenarioFormula(tuple(scenarios), target, tuple(notes), scenarios)
    return simplify(formula)


def _slot_index(slot: str) -> int:
    return 0 if slot == "x" else int(slot[1:]) - 1
