"""Function block programs as acyclic typed dataflow graphs, and their text format.

Program files are line oriented::

    fmrprog v1
    # variables: role name[, name...] : type
    input i1, i2 : real
    internal w : real
    output o : bool
    # blocks: block id: out = Kind[K=value](in, ...)
    block avg1: w = Avg(i1, i2)
    block cmp1: o = Gcom[K=10](w)

``#`` starts a comment. Declarations may appear in any order.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from .catalog import BlockKind, Catalog, CatalogError
from .modes import SignalType

HEADER = "fmrprog v1"


class Role(Enum):
    INPUT = "input"
    INTERNAL = "internal"
    OUTPUT = "output"


class ProgramError(ValueError):
    """A program violates the format or a graph invariant; carries a position."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        where = f"{line}:{column}: " if line is not None else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class Variable:
    name: str
    ty: SignalType
    role: Role


@dataclass(frozen=True)
class BlockInstance:
    id: str
    kind: BlockKind
    in_vars: tuple[str, ...]
    out_var: str
    threshold: float | None = None

    def __str__(self) -> str:
        param = f"[K={_fmt_num(self.threshold)}]" if self.threshold is not None else ""
        return f"{self.out_var} = {self.kind.name}{param}({', '.join(self.in_vars)})"


def _fmt_num(x: float) -> str:
    return repr(float(x)) if x != int(x) else str(int(x))


@dataclass(frozen=True)
class ProgramGraph:
    variables: tuple[Variable, ...]
    blocks: tuple[BlockInstance, ...]
    _vars: dict = field(init=False, repr=False, compare=False, hash=False)
    _writers: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_vars", {v.name: v for v in self.variables})
        object.__setattr__(self, "_writers", {b.out_var: b for b in self.blocks})

    def var(self, name: str) -> Variable:
        try:
            return self._vars[name]
        except KeyError:
            raise KeyError(f"no variable named {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._vars

    def writer(self, name: str) -> BlockInstance | None:
        return self._writers.get(name)

    def with_role(self, role: Role) -> list[Variable]:
        return [v for v in self.variables if v.role is role]

    @property
    def inputs(self) -> list[Variable]:
        return self.with_role(Role.INPUT)

    @property
    def outputs(self) -> list[Variable]:
        return self.with_role(Role.OUTPUT)

    def thresholds(self) -> list[float]:
        return sorted({b.threshold for b in self.blocks if b.threshold is not None})

    def cone(self, var: str) -> tuple[list[BlockInstance], list[Variable]]:
        """Blocks and input variables that ``var`` transitively depends on."""
        blocks: dict[str, BlockInstance] = {}
        inputs: set[str] = set()
        stack = [var]
        seen = set()
        while stack:
            name = stack.pop()
            if name in seen:
                continue
            seen.add(name)
            b = self.writer(name)
            if b is None:
                if self.var(name).role is Role.INPUT:
                    inputs.add(name)
                continue
            blocks[b.id] = b
            stack.extend(b.in_vars)
        order = [b for b in topo_order(self) if b.id in blocks]
        return order, [v for v in self.inputs if v.name in inputs]


def topo_order(g: ProgramGraph) -> list[BlockInstance]:
    """Blocks ordered so writers precede readers; ties broken by ascending id."""
    by_id = {b.id: b for b in g.blocks}
    deps: dict[str, set[str]] = {}
    readers: dict[str, list[str]] = {b.id: [] for b in g.blocks}
    for b in g.blocks:
        deps[b.id] = {w.id for v in b.in_vars if (w := g.writer(v)) is not None}
        for d in deps[b.id]:
            readers[d].append(b.id)
    ready = [bid for bid, d in deps.items() if not d]
    heapq.heapify(ready)
    out = []
    while ready:
        bid = heapq.heappop(ready)
        out.append(by_id[bid])
        for r in readers[bid]:
            deps[r].discard(bid)
            if not deps[r]:
                heapq.heappush(ready, r)
    if len(out) != len(g.blocks):
        raise ProgramError("program contains a cycle")
    return out


# ---------------------------------------------------------------------------
# parsing

_IDENT = r"[A-Za-z_][A-Za-z0-9_.]*"
_DECL_RE = re.compile(rf"^(input|internal|output)\s+(.+?)\s*:\s*(\w+)\s*$")
_BLOCK_RE = re.compile(
    rf"^block\s+(?P<id>{_IDENT})\s*:\s*(?P<out>{_IDENT})\s*=\s*(?P<kind>{_IDENT})"
    r"\s*(?:\[\s*K\s*=\s*(?P<k>[^\]]*?)\s*\])?\s*\((?P<args>[^)]*)\)\s*$"
)
_NAME_RE = re.compile(rf"^{_IDENT}$")


def parse_program(text: str, catalog: Catalog | None = None) -> ProgramGraph:
    """Parse and validate a ``fmrprog v1`` document.

    Raises :class:`ProgramError` with the line and column of the first problem.
    """
    catalog = catalog or Catalog.default()
    variables: dict[str, Variable] = {}
    var_pos: dict[str, tuple[int, int]] = {}
    blocks: list[BlockInstance] = []
    block_pos: dict[str, tuple[int, int]] = {}
    writers: dict[str, str] = {}
    header_seen = False

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        col = len(line) - len(line.lstrip()) + 1
        stmt = line.strip()
        if not header_seen:
            if stmt.split() != HEADER.split():
                raise ProgramError(f"expected header '{HEADER}'", lineno, col)
            header_seen = True
            continue

        if m := _DECL_RE.match(stmt):
            role, names, ty_word = m.groups()
            try:
                ty = SignalType(ty_word)
            except ValueError:
                raise ProgramError(f"unknown signal type {ty_word!r}", lineno, col + m.start(3)) from None
            for name in names.split(","):
                name = name.strip()
                ncol = col + stmt.find(name, m.start(2)) if name else col
                if not _NAME_RE.match(name):
                    raise ProgramError(f"invalid variable name {name!r}", lineno, ncol)
                if name in variables:
                    first = var_pos[name][0]
                    raise ProgramError(f"variable {name!r} already declared on line {first}", lineno, ncol)
                variables[name] = Variable(name, ty, Role(role))
                var_pos[name] = (lineno, ncol)
            continue

        if m := _BLOCK_RE.match(stmt):
            bid, out, kind_name = m["id"], m["out"], m["kind"]
            if bid in block_pos:
                raise ProgramError(f"duplicate block id {bid!r}", lineno, col + m.start("id"))
            try:
                kind = catalog.kind(kind_name)
            except CatalogError:
                raise ProgramError(f"unknown block kind {kind_name!r}", lineno, col + m.start("kind")) from None
            threshold = None
            if m["k"] is not None:
                try:
                    threshold = float(m["k"])
                except ValueError:
                    raise ProgramError(f"invalid threshold {m['k']!r}", lineno, col + m.start("k")) from None
                if threshold != threshold or threshold in (float("inf"), float("-inf")):
                    raise ProgramError("threshold must be finite", lineno, col + m.start("k"))
            if kind.thresholded and threshold is None:
                raise ProgramError(f"{kind.name} needs a threshold, e.g. {kind.name}[K=0]", lineno, col + m.start("kind"))
            if not kind.thresholded and threshold is not None:
                raise ProgramError(f"{kind.name} takes no threshold", lineno, col + m.start("k"))
            args = [a.strip() for a in m["args"].split(",")] if m["args"].strip() else []
            for a in args:
                if not _NAME_RE.match(a):
                    raise ProgramError(f"invalid argument {a!r}", lineno, col + m.start("args"))
            if out in writers:
                raise ProgramError(
                    f"variable {out!r} is already written by block {writers[out]!r}",
                    lineno, col + m.start("out"),
                )
            writers[out] = bid
            blocks.append(BlockInstance(bid, kind, tuple(args), out, threshold))
            block_pos[bid] = (lineno, col)
            continue

        raise ProgramError(f"cannot parse statement {stmt!r}", lineno, col)

    if not header_seen:
        raise ProgramError(f"empty document; expected header '{HEADER}'", 1, 1)
    return _validate(variables, var_pos, blocks, block_pos)


def _validate(variables, var_pos, blocks, block_pos) -> ProgramGraph:
    for b in blocks:
        line, col = block_pos[b.id]
        k = b.kind
        if len(b.in_vars) != k.arity:
            raise ProgramError(f"{k.name} takes {k.arity} inputs, got {len(b.in_vars)}", line, col)
        for name, ty in zip(b.in_vars, k.in_types):
            if name not in variables:
                raise ProgramError(f"block {b.id!r} reads undeclared variable {name!r}", line, col)
            if variables[name].ty is not ty:
                raise ProgramError(
                    f"block {b.id!r}: {name!r} is {variables[name].ty}, {k.name} expects {ty}", line, col
                )
        if b.out_var not in variables:
            raise ProgramError(f"block {b.id!r} writes undeclared variable {b.out_var!r}", line, col)
        out = variables[b.out_var]
        if out.role is Role.INPUT:
            raise ProgramError(f"block {b.id!r} writes input variable {out.name!r}", line, col)
        if out.ty is not k.out_type:
            raise ProgramError(
                f"block {b.id!r}: {out.name!r} is {out.ty}, {k.name} produces {k.out_type}", line, col
            )
    written = {b.out_var for b in blocks}
    for v in variables.values():
        if v.role is not Role.INPUT and v.name not in written:
            line, col = var_pos[v.name]
            raise ProgramError(f"{v.role.value} variable {v.name!r} is never written", line, col)

    g = ProgramGraph(tuple(variables.values()), tuple(blocks))
    try:
        topo_order(g)
    except ProgramError:
        bid = _cycle_member(g)
        line, col = block_pos[bid]
        raise ProgramError(f"cycle detected through block {bid!r}", line, col) from None
    for v in g.outputs:
        if not g.cone(v.name)[1]:
            line, col = var_pos[v.name]
            raise ProgramError(f"output {v.name!r} is not reachable from any input", line, col)
    return g


def _cycle_member(g: ProgramGraph) -> str:
    """Id of the first block (by id) lying on a cycle."""
    succ = {b.id: [r.id for r in g.blocks if b.out_var in r.in_vars] for b in g.blocks}
    for start in sorted(succ):
        stack, seen = list(succ[start]), set()
        while stack:
            n = stack.pop()
            if n == start:
                return start
            if n not in seen:
                seen.add(n)
                stack.extend(succ[n])
    raise AssertionError("no cycle found")


def build_program(
    variables: Iterable[Variable], blocks: Iterable[BlockInstance], catalog: Catalog | None = None
) -> ProgramGraph:
    """Validate an in-memory program by rendering and re-parsing it."""
    g = ProgramGraph(tuple(variables), tuple(blocks))
    return parse_program(render_program(g), catalog)


def render_program(g: ProgramGraph) -> str:
    lines = [HEADER]
    for v in g.variables:
        lines.append(f"{v.role.value} {v.name} : {v.ty.value}")
    for b in g.blocks:
        lines.append(f"block {b.id}: {b}")
    return "\n".join(lines) + "\n"


def load_program(path, catalog: Catalog | None = None) -> ProgramGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_program(fh.read(), catalog)
