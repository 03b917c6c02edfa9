"""Built-in function blocks with their concrete semantics and failure mode blocks.

A failure mode block (FMB) is stored as a truth table over modes: one row per
(input modes, output mode) pair, with a flag marking uncertain outcomes. The
built-in tables are written in the same text format accepted for user tables::

    fmbtable v1
    kind Max : real real -> real
    l l -> l
    l h -> a          # 'a' abbreviates l,m,h
    t m -> t u        # trailing 'u' flags an uncertain outcome

A ``threshold`` suffix on the ``kind`` line declares a block parameter ``K``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .formula import Literal, Scenario, ScenarioFormula
from .modes import MODES, Mode, ModeError, ModeSet, SignalType, parse_mode, parse_mode_set

THEORETICAL = "theoretical"
PRACTICAL = "practical"
VARIANTS = (THEORETICAL, PRACTICAL)


class CatalogError(ValueError):
    pass


class TableSyntaxError(CatalogError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class BlockKind:
    name: str
    in_types: tuple[SignalType, ...]
    out_type: SignalType
    thresholded: bool = False
    semantics: Callable | None = field(default=None, compare=False, repr=False)

    @property
    def arity(self) -> int:
        return len(self.in_types)

    def slot_names(self) -> tuple[str, ...]:
        if self.arity == 1:
            return ("x",)
        return tuple(f"x{i + 1}" for i in range(self.arity))

    def evaluate(self, inputs: Sequence, threshold: float | None = None):
        """Apply the concrete function; works on scalars and numpy arrays alike."""
        if self.semantics is None:
            raise CatalogError(f"block kind {self.name} has no concrete semantics")
        if len(inputs) != self.arity:
            raise CatalogError(f"{self.name} takes {self.arity} inputs, got {len(inputs)}")
        if self.thresholded:
            if threshold is None:
                raise CatalogError(f"{self.name} needs a threshold K")
            out = self.semantics(*inputs, threshold)
        else:
            out = self.semantics(*inputs)
        if np.ndim(out) == 0:
            return bool(out) if self.out_type is SignalType.BOOL else float(out)
        return out

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Row:
    inputs: tuple[Mode, ...]
    output: Mode
    uncertain: bool = False

    def __str__(self) -> str:
        flag = " u" if self.uncertain else ""
        return f"{' '.join(map(str, self.inputs))} -> {self.output}{flag}"


@dataclass(frozen=True)
class FMB:
    """Failure mode block: the mode-level abstraction of one block kind.

    Every input combination needs at least one row unless ``partial`` is set,
    which is meant for candidate tables under verification.
    """

    kind: BlockKind
    rows: tuple[Row, ...]
    partial: bool = field(default=False, compare=False)

    def __post_init__(self):
        seen: dict[tuple, Row] = {}
        for row in self.rows:
            if len(row.inputs) != self.kind.arity:
                raise CatalogError(f"{self.kind.name}: row {row} has wrong arity")
            for mode, ty in zip(row.inputs, self.kind.in_types):
                if not mode.legal_for(ty):
                    raise CatalogError(f"{self.kind.name}: mode {mode} illegal for {ty} input")
            if not row.output.legal_for(self.kind.out_type):
                raise CatalogError(f"{self.kind.name}: output mode {row.output} illegal")
            key = (row.inputs, row.output)
            if key in seen:
                raise CatalogError(f"{self.kind.name}: duplicate row {row}")
            seen[key] = row
        if not self.partial:
            for combo in self.missing_inputs():
                raise CatalogError(
                    f"{self.kind.name}: no row for inputs {' '.join(map(str, combo))}"
                )

    @classmethod
    def from_rows(cls, kind: BlockKind, rows: Iterable[Row], partial: bool = False) -> "FMB":
        """Build an FMB, merging repeated rows (certain wins over uncertain)."""
        merged: dict[tuple, bool] = {}
        for row in rows:
            key = (row.inputs, row.output)
            merged[key] = merged.get(key, True) and row.uncertain
        return cls(kind, tuple(Row(i, o, u) for (i, o), u in merged.items()), partial)

    def input_space(self):
        return itertools.product(*(MODES[ty] for ty in self.kind.in_types))

    def missing_inputs(self) -> list[tuple[Mode, ...]]:
        covered = {r.inputs for r in self.rows}
        return [c for c in self.input_space() if c not in covered]

    def with_rows(self, add: Iterable[Row] = (), drop: Iterable[Row] = ()) -> "FMB":
        """A modified copy; the result may be partial."""
        drop_keys = {(r.inputs, r.output) for r in drop}
        kept = [r for r in self.rows if (r.inputs, r.output) not in drop_keys]
        return FMB.from_rows(self.kind, [*kept, *add], partial=True)

    def active_rows(self, include_uncertain: bool) -> tuple[Row, ...]:
        return tuple(r for r in self.rows if include_uncertain or not r.uncertain)

    def rows_for(self, output: Mode, include_uncertain: bool = False) -> frozenset:
        """Input mode tuples that may produce ``output``."""
        return frozenset(r.inputs for r in self.active_rows(include_uncertain) if r.output is output)

    def without_uncertain(self) -> "FMB":
        return FMB(self.kind, self.active_rows(False), self.partial)

    @property
    def has_uncertain(self) -> bool:
        return any(r.uncertain for r in self.rows)


def forward_modes(fmb: FMB, input_modes: Sequence[Mode], include_uncertain: bool = False) -> ModeSet:
    """Output modes reachable from one input-mode combination.

    Uncertain outcomes appear in ``ModeSet.uncertain`` either way; they are
    members of the set only when ``include_uncertain`` is on.
    """
    combo = tuple(input_modes)
    if len(combo) != fmb.kind.arity:
        raise CatalogError(f"{fmb.kind.name} takes {fmb.kind.arity} inputs, got {len(combo)}")
    for mode, ty in zip(combo, fmb.kind.in_types):
        if not mode.legal_for(ty):
            raise ModeError(f"mode {mode} is not legal for a {ty} input of {fmb.kind.name}")
    certain = {r.output for r in fmb.rows if r.inputs == combo and not r.uncertain}
    uncertain = {r.output for r in fmb.rows if r.inputs == combo and r.uncertain} - certain
    modes = certain | uncertain if include_uncertain else certain
    return ModeSet(frozenset(modes), fmb.kind.out_type, frozenset(uncertain))


def prime_cubes(
    rows: frozenset, domains: Sequence[tuple[Mode, ...]]
) -> list[tuple[Mode | None, ...]]:
    """Maximal cubes (``None`` = any mode in that slot) contained in ``rows``.

    Their union is exactly ``rows``.
    """
    cubes = []
    for cube in itertools.product(*((*dom, None) for dom in domains)):
        points = itertools.product(*((dom if c is None else (c,)) for c, dom in zip(cube, domains)))
        if all(p in rows for p in points):
            cubes.append(cube)

    def within(a, b):  # cube a is a subset of cube b
        return a != b and all(cb is None or ca == cb for ca, cb in zip(a, b))

    return [c for c in cubes if not any(within(c, other) for other in cubes)]


@lru_cache(maxsize=None)
def inverse_modes(fmb: FMB, output_mode: Mode, include_uncertain: bool = False) -> ScenarioFormula:
    """Input-slot scenarios that can cause ``output_mode``; exactly the table rows."""
    if not output_mode.legal_for(fmb.kind.out_type):
        raise ModeError(f"mode {output_mode} is not legal for the {fmb.kind.out_type} output of {fmb.kind.name}")
    rows = fmb.rows_for(output_mode, include_uncertain)
    domains = [MODES[ty] for ty in fmb.kind.in_types]
    slots = fmb.kind.slot_names()
    scenarios = [
        Scenario.of((slot, mode) for slot, mode in zip(slots, cube) if mode is not None)
        for cube in prime_cubes(rows, domains)
    ]
    scenarios.sort(key=Scenario.sort_key)
    return ScenarioFormula(tuple(scenarios), Literal("y", output_mode))


# ---------------------------------------------------------------------------
# table text format

_KIND_RE = re.compile(
    r"kind\s+(?P<name>[A-Za-z_]\w*)\s*:\s*(?P<ins>[a-z\s]+?)\s*->\s*(?P<out>[a-z]+)"
    r"(?P<thr>\s+threshold)?\s*$"
)


def _parse_type(word: str, line: int, col: int) -> SignalType:
    try:
        return SignalType(word)
    except ValueError:
        raise TableSyntaxError(f"unknown signal type {word!r}", line, col) from None


def parse_fmb_tables(
    text: str, semantics: Mapping[str, Callable] | None = None, partial: bool = False
) -> dict[str, FMB]:
    """Parse one or more FMB tables from the ``fmbtable v1`` text format.

    With ``partial`` on, tables may leave input combinations without a row.
    """
    semantics = semantics or {}
    tables: dict[str, FMB] = {}
    kind: BlockKind | None = None
    rows: list[Row] = []
    kind_line = 0

    def finish():
        if kind is None:
            return
        if kind.name in tables:
            raise TableSyntaxError(f"duplicate kind {kind.name}", kind_line)
        try:
            tables[kind.name] = FMB.from_rows(kind, rows, partial)
        except CatalogError as exc:
            raise TableSyntaxError(str(exc), kind_line) from None

    lines = text.splitlines()
    first = next((i for i, raw in enumerate(lines) if raw.split("#")[0].strip()), None)
    if first is not None and lines[first].split("#")[0].split() != ["fmbtable", "v1"]:
        raise TableSyntaxError("expected header 'fmbtable v1'", first + 1)
    for lineno, raw in enumerate(lines, 1):
        if first is not None and lineno == first + 1:
            continue
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        col = len(line) - len(line.lstrip()) + 1
        stripped = line.strip()
        if stripped.startswith("kind"):
            finish()
            m = _KIND_RE.match(stripped)
            if not m:
                raise TableSyntaxError("malformed kind line", lineno, col)
            ins = tuple(_parse_type(w, lineno, col) for w in m["ins"].split())
            kind = BlockKind(
                m["name"], ins, _parse_type(m["out"], lineno, col),
                bool(m["thr"]), semantics.get(m["name"]),
            )
            rows, kind_line = [], lineno
            continue
        if kind is None:
            raise TableSyntaxError("row before any kind line", lineno, col)
        lhs, arrow, rhs = stripped.partition("->")
        if not arrow:
            raise TableSyntaxError("expected '->' in row", lineno, col)
        words = rhs.split()
        uncertain = len(words) == 2 and words[1] == "u"
        if not words or len(words) > 2 or (len(words) == 2 and not uncertain):
            raise TableSyntaxError("row output must be a mode optionally followed by 'u'", lineno, col)
        try:
            ins = tuple(parse_mode(w, ty) for w, ty in zip(lhs.split(), kind.in_types))
            if len(lhs.split()) != kind.arity:
                raise TableSyntaxError(f"{kind.name} rows need {kind.arity} input modes", lineno, col)
            outs = parse_mode_set(words[0], kind.out_type)
        except ModeError as exc:
            raise TableSyntaxError(str(exc), lineno, col) from None
        rows.extend(Row(ins, o, uncertain) for o in outs)
    finish()
    return tables


def render_fmb_table(fmb: FMB) -> str:
    k = fmb.kind
    ins = " ".join(str(t) for t in k.in_types)
    head = f"kind {k.name} : {ins} -> {k.out_type}" + (" threshold" if k.thresholded else "")
    return "\n".join([head, *(str(r) for r in fmb.rows)]) + "\n"


# ---------------------------------------------------------------------------
# built-in catalog

_SEMANTICS: dict[str, Callable] = {
    "Avg": lambda x1, x2: (x1 + x2) / 2,
    "Add": lambda x1, x2: x1 + x2,
    "Sub": lambda x1, x2: x1 - x2,
    "Abs": lambda x: np.abs(x),
    "Gcom": lambda x, k: np.greater(x, k),
    "Lcom": lambda x, k: np.less(x, k),
    "Not": np.logical_not,
    "And": np.logical_and,
    "Or": np.logical_or,
}

_BUILTIN_TABLES = """\
fmbtable v1
kind Avg : real real -> real
l l -> l
l m -> l
l h -> a
m l -> l
m m -> m
m h -> h
h l -> a
h m -> h
h h -> h

kind Add : real real -> real
l l -> l
l m -> l
l h -> a
m l -> l
m m -> m
m h -> h
h l -> a
h m -> h
h h -> h

kind Sub : real real -> real
l l -> a
l m -> l
l h -> l
m l -> h
m m -> m
m h -> l
h l -> h
h m -> h
h h -> a

kind Abs : real -> real
l -> l
m -> m
h -> h
l -> h
m -> m            # m = a < 0 gives |m| = |a|, hence m
h -> l
l -> a
h -> a

kind Gcom : real -> bool threshold
l -> m
m -> m
h -> m
l -> f
h -> t
l -> m
m -> m
h -> m

kind Lcom : real -> bool threshold
h -> m
m -> m
l -> m
h -> f
l -> t
h -> m
m -> m
l -> m

kind Not : bool -> bool
m -> m
f -> t
t -> f
m -> m

kind And : bool bool -> bool
m m -> m
m f -> m
m t -> m
m m -> m
f m -> m
f f -> f
f t -> m
f m -> f
t m -> m
t f -> m
t t -> t
t m -> t u
m m -> m
m f -> f
m t -> t u
m m -> m

kind Or : bool bool -> bool
m m -> m
m f -> f u
m t -> t
m m -> m
f m -> f u
f f -> f
f t -> m
f m -> m
t m -> t
t f -> m
t t -> t
t m -> m
m m -> m
m f -> m
m t -> m
m m -> m
"""

_ALIASES = {"GcomK": "Gcom", "LcomK": "Lcom"}


@dataclass(frozen=True)
class Catalog:
    fmbs: Mapping[str, FMB]

    @classmethod
    def default(cls) -> "Catalog":
        return _DEFAULT

    def extend(self, tables: Mapping[str, FMB]) -> "Catalog":
        clash = set(tables) & (set(self.fmbs) | set(_ALIASES))
        if clash:
            raise CatalogError(f"block kinds already defined: {sorted(clash)}")
        for name, fmb in tables.items():
            if fmb.partial and fmb.missing_inputs():
                raise CatalogError(f"{name}: a partial table cannot be used for analysis")
        return Catalog({**self.fmbs, **tables})

    def resolve(self, name: str) -> str:
        name = _ALIASES.get(name, name)
        if name not in self.fmbs:
            raise CatalogError(f"unknown block kind {name!r}")
        return name

    def kind(self, name: str) -> BlockKind:
        return self.fmbs[self.resolve(name)].kind

    def __contains__(self, name: str) -> bool:
        return _ALIASES.get(name, name) in self.fmbs

    def names(self) -> list[str]:
        return list(self.fmbs)

    def lookup(self, kind: BlockKind | str, variant: str = THEORETICAL) -> FMB:
        if variant not in VARIANTS:
            raise CatalogError(f"unknown FMB variant {variant!r}")
        name = kind.name if isinstance(kind, BlockKind) else kind
        fmb = self.fmbs[self.resolve(name)]
        return fmb.without_uncertain() if variant == PRACTICAL else fmb


_DEFAULT = Catalog(parse_fmb_tables(_BUILTIN_TABLES, _SEMANTICS))
BUILTIN_KINDS = tuple(_DEFAULT.names())
BUILTIN_SEMANTICS: Mapping[str, Callable] = dict(_SEMANTICS)


def fmb_lookup(kind: BlockKind | str, variant: str = THEORETICAL, catalog: Catalog | None = None) -> FMB:
    """The FMB of ``kind``; the practical variant drops uncertain rows."""
    return (catalog or _DEFAULT).lookup(kind, variant)


def load_fmb_tables(
    path, semantics: Mapping[str, Callable] | None = None, partial: bool = False
) -> dict[str, FMB]:
    with open(path, encoding="utf-8") as fh:
        return parse_fmb_tables(fh.read(), semantics, partial)
