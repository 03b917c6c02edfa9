"""Brute-force verification against concrete block semantics.

Everything here runs the blocks forward on (reported, actual) value pairs drawn
from a finite witness grid and classifies the results. Nothing in this module
consults inverse transformers or the reasoning engine.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .catalog import THEORETICAL, BlockKind, Catalog, FMB
from .modes import MODE_BY_RANK, MODES, Mode, SignalType, classify_array
from .program import ProgramGraph

DEFAULT_DELTA = 0.5
BASE_VALUES = (-1.0, 0.0, 1.0)
MAX_PROGRAM_INPUTS = 8
_CHUNK = 1 << 18


class GridError(ValueError):
    pass


class EnumerationError(ValueError):
    pass


def default_delta() -> float:
    """Grid spacing; the ``FMR_GRID_DELTA`` environment variable overrides it."""
    raw = os.environ.get("FMR_GRID_DELTA")
    if raw is None:
        return DEFAULT_DELTA
    try:
        delta = float(raw)
    except ValueError:
        raise GridError(f"FMR_GRID_DELTA={raw!r} is not a number") from None
    if not delta > 0:
        raise GridError("FMR_GRID_DELTA must be positive")
    return delta


@dataclass(frozen=True)
class WitnessGrid:
    """Finite sample values for real signals; booleans always use {False, True}."""

    values: tuple[float, ...]
    thresholds: tuple[float, ...] = (0.0,)
    delta: float = DEFAULT_DELTA
    per_var: Mapping[str, tuple[float, ...]] = field(default_factory=dict, compare=False, hash=False)

    @classmethod
    def default(cls, thresholds: Sequence[float] = (0.0,), delta: float | None = None) -> "WitnessGrid":
        delta = default_delta() if delta is None else delta
        thresholds = tuple(sorted(set(thresholds))) or (0.0,)
        vals = set(BASE_VALUES)
        for k in thresholds:
            vals.update(k + j * delta for j in (-2, -1, 0, 1, 2))
        return cls(tuple(sorted(vals)), thresholds, delta)

    @classmethod
    def for_program(cls, g: ProgramGraph, delta: float | None = None) -> "WitnessGrid":
        """Default grid for the program's thresholds.

        Abs folds negative values onto positive ones, so when the program uses
        it the grid is closed under negation to keep threshold-adjacent
        magnitudes reachable from both signs.
        """
        grid = cls.default(g.thresholds() or (0.0,), delta)
        if any(b.kind.name == "Abs" for b in g.blocks):
            vals = tuple(sorted(set(grid.values) | {-v for v in grid.values}))
            grid = cls(vals, grid.thresholds, grid.delta)
        return grid

    def densified(self) -> "WitnessGrid":
        """Same grid with every gap halved."""
        vals = sorted(self.values)
        mids = [(a + b) / 2 for a, b in zip(vals, vals[1:])]
        return WitnessGrid(tuple(sorted(set(vals) | set(mids))), self.thresholds, self.delta / 2)

    def real_values(self, var: str | None = None) -> tuple[float, ...]:
        return self.per_var.get(var, self.values) if var is not None else self.values

    def check_coverage(self) -> None:
        vals = sorted(set(self.values))
        if len(vals) < 2:
            raise GridError("a witness grid needs two distinct real values to realise l and h")
        for k in self.thresholds:
            below = sum(v < k for v in vals)
            above = sum(v > k for v in vals)
            if below < 2 or above < 2:
                raise GridError(f"grid needs two values strictly on each side of threshold {k}")

    def pairs(self, ty: SignalType, var: str | None = None) -> tuple[np.ndarray, np.ndarray]:
        """All (reported, actual) combinations for one signal."""
        if ty is SignalType.BOOL:
            base = np.array([False, True])
        else:
            base = np.array(self.real_values(var), dtype=float)
        rep, act = np.meshgrid(base, base, indexing="ij")
        return rep.ravel(), act.ravel()


@dataclass(frozen=True)
class Violation:
    inputs: tuple[Mode, ...]
    output: Mode
    problem: str  # "unsound": claimed row without witness; "incomplete": observed row missing
    witness: dict | None = None

    def to_dict(self) -> dict:
        return {
            "inputs": [m.value for m in self.inputs],
            "output": self.output.value,
            "problem": self.problem,
            "witness": self.witness,
        }


@dataclass(frozen=True)
class ConformanceReport:
    kind: str
    sound: bool
    complete: bool
    violations: tuple[Violation, ...]
    observed: Mapping[tuple[Mode, ...], frozenset[Mode]] = field(compare=False, hash=False)
    uncertain: frozenset = field(default=frozenset(), compare=False, hash=False)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "sound": self.sound,
            "complete": self.complete,
            "violations": [v.to_dict() for v in self.violations],
            "observed": [
                {
                    "inputs": [m.value for m in combo],
                    "outputs": [
                        m.value + ("_u" if (combo, m) in self.uncertain else "")
                        for m in sorted(outs)
                    ],
                }
                for combo, outs in self.observed.items()
            ],
        }

    def render_table(self) -> str:
        """Observed mode table in the layout of a truth table: no., inputs, output."""
        arity = len(next(iter(self.observed))) if self.observed else 0
        heads = ["x"] if arity == 1 else [f"x{i + 1}" for i in range(arity)]
        lines = [f"{self.kind}: " + ("sound and complete" if self.ok else "FAILED"),
                 " no. | " + " | ".join(f"{h:>3}" for h in heads) + " |   y"]
        for n, (combo, outs) in enumerate(self.observed.items(), 1):
            if combo and combo[0].legal_for(SignalType.REAL) and outs == frozenset(MODES[SignalType.REAL]):
                y = "a"
            else:
                y = ",".join(
                    m.value + ("_u" if (combo, m) in self.uncertain else "")
                    for m in sorted(outs)
                )
            lines.append(f"{n:>4} | " + " | ".join(f"{m.value:>3}" for m in combo) + f" | {y:>3}")
        for v in self.violations:
            lines.append(f"  {v.problem}: {' '.join(m.value for m in v.inputs)} -> {v.output}"
                         + (f"  witness {v.witness}" if v.witness else ""))
        return "\n".join(lines)


def _product_indices(sizes: Sequence[int]):
    """Yield index arrays (one per dimension) covering the product in chunks."""
    total = int(np.prod(sizes, dtype=np.int64)) if sizes else 1
    for start in range(0, total, _CHUNK):
        flat = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        yield np.unravel_index(flat, sizes) if sizes else ()


def _py(x):
    return x.item() if hasattr(x, "item") else x


def observe_block(kind: BlockKind, grid: WitnessGrid, threshold: float | None = None):
    """Forward-simulate one block over the grid.

    Returns ``{(input modes, output mode): witness}`` with the first witness
    found for each observation.
    """
    slot_pairs = [grid.pairs(ty) for ty in kind.in_types]
    slot_modes = [classify_array(r, a, ty) for (r, a), ty in zip(slot_pairs, kind.in_types)]
    sizes = [len(r) for r, _ in slot_pairs]
    found: dict[tuple, dict] = {}
    for idx in _product_indices(sizes):
        reps = [slot_pairs[i][0][ix] for i, ix in enumerate(idx)]
        acts = [slot_pairs[i][1][ix] for i, ix in enumerate(idx)]
        out_rep = np.asarray(kind.evaluate(reps, threshold))
        out_act = np.asarray(kind.evaluate(acts, threshold))
        out_modes = classify_array(out_rep, out_act, kind.out_type)
        code = out_modes.astype(np.int64)
        for i, ix in enumerate(idx):
            code = code * 5 + slot_modes[i][ix]
        uniq, first = np.unique(code, return_index=True)
        for c, j in zip(uniq, first):
            c = int(c)
            ins = []
            for _ in kind.in_types:
                ins.append(MODE_BY_RANK[c % 5])
                c //= 5
            key = (tuple(reversed(ins)), MODE_BY_RANK[c])
            if key not in found:
                found[key] = {
                    "reported": [_py(r[j]) for r in reps],
                    "actual": [_py(a[j]) for a in acts],
                    "output": [_py(out_rep[j]), _py(out_act[j])],
                    "K": threshold,
                }
    return found


def verify_fmb(
    kind: BlockKind | str,
    grid: WitnessGrid | None = None,
    fmb: FMB | None = None,
    catalog: Catalog | None = None,
) -> ConformanceReport:
    """Check an FMB sound and complete against its block's concrete semantics.

    Sound: every row has a grid witness. Complete: every grid observation is
    a row (uncertain rows count). Threshold blocks are checked at every grid
    threshold.
    """
    catalog = catalog or Catalog.default()
    if isinstance(kind, str):
        kind = catalog.kind(kind)
    fmb = fmb or catalog.lookup(kind, THEORETICAL)
    grid = grid or WitnessGrid.default()
    grid.check_coverage()

    observations: dict[tuple, dict] = {}
    for k in (grid.thresholds if kind.thresholded else (None,)):
        for key, w in observe_block(kind, grid, k).items():
            observations.setdefault(key, w)
    covered = {combo for combo, _ in observations}
    missing = set(fmb.input_space()) - covered
    if missing:
        raise GridError(f"grid does not realise input modes {sorted(map(str, missing))}")

    claimed = {(r.inputs, r.output) for r in fmb.rows}
    violations = []
    for r in fmb.rows:
        if (r.inputs, r.output) not in observations:
            violations.append(Violation(r.inputs, r.output, "unsound"))
    for (combo, out), w in observations.items():
        if (combo, out) not in claimed:
            violations.append(Violation(combo, out, "incomplete", w))
    violations.sort(key=lambda v: (v.problem, [m.order for m in v.inputs], v.output.order))

    observed: dict[tuple, set] = {}
    for combo in fmb.input_space():
        outs = frozenset(o for (c, o) in observations if c == combo)
        observed[combo] = outs
    uncertain = frozenset((r.inputs, r.output) for r in fmb.rows if r.uncertain)
    return ConformanceReport(
        kind.name,
        sound=not any(v.problem == "unsound" for v in violations),
        complete=not any(v.problem == "incomplete" for v in violations),
        violations=tuple(violations),
        observed=observed,
        uncertain=uncertain,
    )


def verify_catalog(grid: WitnessGrid | None = None, catalog: Catalog | None = None) -> list[ConformanceReport]:
    catalog = catalog or Catalog.default()
    grid = grid or WitnessGrid.default((-1.0, 0.0, 1.5))
    return [verify_fmb(name, grid, catalog=catalog) for name in catalog.names()
            if catalog.kind(name).semantics is not None]


def simulate(g: ProgramGraph, blocks, values: dict) -> dict:
    """Run ``blocks`` (in topological order) on one value vector, in place."""
    for b in blocks:
        values[b.out_var] = b.kind.evaluate([values[v] for v in b.in_vars], b.threshold)
    return values


def brute_force_program(
    g: ProgramGraph,
    target_var: str,
    target_mode: Mode,
    grid: WitnessGrid | None = None,
    max_evaluations: int = 20_000_000,
    witnesses: bool = False,
):
    """Input-mode tuples (ordered like ``g.inputs``) for which some grid witness
    drives ``target_var`` into ``target_mode``.

    Inputs outside the target's cone of influence take every mode. With
    ``witnesses`` on, returns a dict from tuple to one concrete witness.
    """
    grid = grid or WitnessGrid.for_program(g)
    if len(g.inputs) > MAX_PROGRAM_INPUTS:
        raise EnumerationError(f"{len(g.inputs)} inputs exceed the enumeration bound of {MAX_PROGRAM_INPUTS}")
    target = g.var(target_var)
    blocks, cone_inputs = g.cone(target_var)
    pairs = [grid.pairs(v.ty, v.name) for v in cone_inputs]
    modes = [classify_array(r, a, v.ty) for (r, a), v in zip(pairs, cone_inputs)]
    sizes = [len(r) for r, _ in pairs]
    total = int(np.prod(sizes, dtype=np.int64)) if sizes else 1
    if total > max_evaluations:
        raise EnumerationError(f"{total} grid combinations exceed the budget of {max_evaluations}")

    hits: dict[tuple[Mode, ...], dict | None] = {}
    for idx in _product_indices(sizes):
        rep = {v.name: pairs[i][0][ix] for i, (v, ix) in enumerate(zip(cone_inputs, idx))}
        act = {v.name: pairs[i][1][ix] for i, (v, ix) in enumerate(zip(cone_inputs, idx))}
        simulate(g, blocks, rep)
        simulate(g, blocks, act)
        out = classify_array(np.asarray(rep[target_var]), np.asarray(act[target_var]), target.ty)
        mask = np.broadcast_to(out == target_mode.rank, (len(idx[0]) if idx else 1,))
        if not mask.any():
            continue
        code = np.zeros(mask.shape, dtype=np.int64)
        for i, ix in enumerate(idx):
            code = code * 5 + modes[i][ix]
        uniq, first = np.unique(code[mask], return_index=True)
        where = np.flatnonzero(mask)[first]
        for c, j in zip(uniq, where):
            c = int(c)
            combo = []
            for _ in cone_inputs:
                combo.append(MODE_BY_RANK[c % 5])
                c //= 5
            combo = tuple(reversed(combo))
            if combo not in hits:
                hits[combo] = {
                    v.name: (_py(pairs[i][0][idx[i][j]]), _py(pairs[i][1][idx[i][j]]))
                    for i, v in enumerate(cone_inputs)
                } if witnesses else None

    names = [v.name for v in cone_inputs]
    result: dict[tuple[Mode, ...], dict | None] = {}
    choices = [MODES[v.ty] if v.name not in names else None for v in g.inputs]
    for combo, w in hits.items():
        fixed = dict(zip(names, combo))
        axes = [c if c is not None else (fixed[v.name],) for v, c in zip(g.inputs, choices)]
        for full in itertools.product(*axes):
            result.setdefault(full, w)
    return result if witnesses else set(result)
