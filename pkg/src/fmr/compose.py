"""Forward composition of FMBs with union (Kleisli) semantics.

A block abstraction maps input modes to a set of output modes. Composing two of
them feeds every possible intermediate mode into the second block and unites
the results. This is independent of the backward engine and serves as its
reference on programs without shared subexpressions.
"""

from __future__ import annotations

import itertools
from typing import Mapping

from .catalog import PRACTICAL, Catalog, forward_modes
from .modes import MODES, Mode
from .program import ProgramGraph, topo_order


def kleisli_forward(
    g: ProgramGraph,
    input_modes: Mapping[str, Mode],
    variant: str = PRACTICAL,
    include_uncertain: bool = False,
    catalog: Catalog | None = None,
) -> dict[str, frozenset[Mode]]:
    """Reachable mode set of every variable given one mode per input."""
    catalog = catalog or Catalog.default()
    reach: dict[str, frozenset[Mode]] = {v.name: frozenset([input_modes[v.name]]) for v in g.inputs}
    for b in topo_order(g):
        fmb = catalog.lookup(b.kind, variant)
        out: set[Mode] = set()
        for combo in itertools.product(*(sorted(reach[v]) for v in b.in_vars)):
            out |= forward_modes(fmb, combo, include_uncertain).modes
        reach[b.out_var] = frozenset(out)
    return reach


def kleisli_inverse(
    g: ProgramGraph,
    target_var: str,
    target_mode: Mode,
    variant: str = PRACTICAL,
    include_uncertain: bool = False,
    catalog: Catalog | None = None,
) -> set[tuple[Mode, ...]]:
    """Input-mode tuples (ordered like ``g.inputs``) whose composed forward
    image at ``target_var`` contains ``target_mode``."""
    names = [v.name for v in g.inputs]
    hits = set()
    for combo in itertools.product(*(MODES[v.ty] for v in g.inputs)):
        reach = kleisli_forward(g, dict(zip(names, combo)), variant, include_uncertain, catalog)
        if target_mode in reach[target_var]:
            hits.add(combo)
    return hits

