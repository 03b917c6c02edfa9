"""Random and synthetic program generators for property checks and scaling runs."""

from __future__ import annotations

import numpy as np

from .catalog import BUILTIN_KINDS, Catalog
from .modes import SignalType
from .program import BlockInstance, ProgramGraph, Role, Variable, build_program

REAL, BOOL = SignalType.REAL, SignalType.BOOL
DYADIC_THRESHOLDS = (-0.5, 0.0, 0.5, 1.0)


def random_program(
    rng: np.random.Generator,
    max_inputs: int = 4,
    max_blocks: int = 6,
    kinds=BUILTIN_KINDS,
    thresholds=DYADIC_THRESHOLDS,
    fanout: bool = True,
) -> ProgramGraph:
    """A random acyclic program over the catalog.

    With ``fanout`` off every variable is read at most once, so the program is
    a forest. Thresholds default to dyadic values so float arithmetic on grid
    samples stays exact.
    """
    catalog = Catalog.default()
    n_inputs = int(rng.integers(1, max_inputs + 1))
    variables = [Variable(f"i{k + 1}", REAL if rng.random() < 0.6 else BOOL, Role.INPUT)
                 for k in range(n_inputs)]
    pool = {REAL: [v.name for v in variables if v.ty is REAL],
            BOOL: [v.name for v in variables if v.ty is BOOL]}
    types = {v.name: v.ty for v in variables}
    read: set[str] = set()
    blocks: list[BlockInstance] = []
    n_blocks = int(rng.integers(1, max_blocks + 1))
    for j in range(n_blocks):
        usable = []
        for name in kinds:
            k = catalog.kind(name)
            need = {ty: k.in_types.count(ty) for ty in set(k.in_types)}
            if all(len(pool[ty]) >= (n if not fanout else 1) for ty, n in need.items()):
                usable.append(k)
        if not usable:
            break
        kind = usable[int(rng.integers(len(usable)))]
        args = []
        for ty in kind.in_types:
            choices = [v for v in pool[ty] if fanout or v not in args]
            # prefer fresh variables so most programs stay connected
            fresh = [v for v in choices if v not in read]
            src = fresh if fresh and rng.random() < 0.7 else choices
            arg = src[int(rng.integers(len(src)))]
            args.append(arg)
        if not fanout:
            for a in args:
                pool[types[a]].remove(a)
        read.update(args)
        out = f"w{j + 1}"
        types[out] = kind.out_type
        pool[kind.out_type].append(out)
        k_val = float(thresholds[int(rng.integers(len(thresholds)))]) if kind.thresholded else None
        blocks.append(BlockInstance(f"b{j + 1}", kind, tuple(args), out, k_val))
    if not blocks:
        return random_program(rng, max_inputs, max_blocks, kinds, thresholds, fanout)
    for b in blocks:
        role = Role.INTERNAL if b.out_var in read else Role.OUTPUT
        variables.append(Variable(b.out_var, b.kind.out_type, role))
    return build_program(variables, blocks)


def random_chain(rng: np.random.Generator, kinds=BUILTIN_KINDS, thresholds=DYADIC_THRESHOLDS) -> ProgramGraph:
    """Two blocks ``f;g`` where ``g`` reads ``f``'s output in a random slot.

    Remaining inputs of both blocks are fresh program inputs.
    """
    catalog = Catalog.default()
    while True:
        f = catalog.kind(kinds[int(rng.integers(len(kinds)))])
        candidates = [catalog.kind(n) for n in kinds if f.out_type in catalog.kind(n).in_types]
        if candidates:
            break
    g = candidates[int(rng.integers(len(candidates)))]
    slots = [i for i, ty in enumerate(g.in_types) if ty is f.out_type]
    slot = slots[int(rng.integers(len(slots)))]
    variables, n = [], 0

    def fresh(ty):
        nonlocal n
        n += 1
        variables.append(Variable(f"i{n}", ty, Role.INPUT))
        return f"i{n}"

    f_args = tuple(fresh(ty) for ty in f.in_types)
    g_args = tuple("w" if i == slot else fresh(ty) for i, ty in enumerate(g.in_types))
    variables += [Variable("w", f.out_type, Role.INTERNAL), Variable("o", g.out_type, Role.OUTPUT)]

    def k_for(kind):
        return float(thresholds[int(rng.integers(len(thresholds)))]) if kind.thresholded else None

    blocks = [BlockInstance("f", f, f_args, "w", k_for(f)), BlockInstance("g", g, g_args, "o", k_for(g))]
    return build_program(variables, blocks)


def synthetic_plant(
    seed: int = 0,
    n_inputs: int = 100,
    n_outputs: int = 25,
    blocks_per_output: int = 84,
    window: int = 6,
) -> ProgramGraph:
    """A large safety-logic-like program for scaling runs.

    Each output is one protective function. It reads a handful of the shared
    transmitters, conditions them through a deep chain of arithmetic blocks
    (each reading from a sliding window of recent signals), compares several
    conditioned signals against trip levels and votes the trips down to one
    boolean. Transmitters are shared between functions.
    """
    rng = np.random.default_rng(seed)
    catalog = Catalog.default()
    kind = catalog.kind
    variables = [Variable(f"tx{k:03d}", REAL, Role.INPUT) for k in range(n_inputs)]
    blocks: list[BlockInstance] = []
    n_trips = 8
    n_real = blocks_per_output - n_trips - (n_trips - 1) - 2

    def emit(prefix, kname, args, out_ty, threshold=None):
        out = f"{prefix}_{len(blocks):05d}"
        variables.append(Variable(out, out_ty, Role.INTERNAL))
        blocks.append(BlockInstance(f"b{len(blocks):05d}", kind(kname), tuple(args), out, threshold))
        return out

    for s in range(n_outputs):
        prefix = f"sif{s:02d}"
        picks = rng.choice(n_inputs, size=int(rng.integers(3, 7)), replace=False)
        reals = [f"tx{k:03d}" for k in sorted(picks)]
        for _ in range(n_real):
            recent = reals[-window:]
            kname = ("Avg", "Avg", "Add", "Sub", "Abs")[int(rng.integers(5))]
            args = [recent[int(rng.integers(len(recent)))] for _ in range(kind(kname).arity)]
            reals.append(emit(prefix, kname, args, REAL))
        trips = []
        for _ in range(n_trips):
            src = reals[-1 - int(rng.integers(min(len(reals), 3 * window)))]
            cmp = "Gcom" if rng.random() < 0.5 else "Lcom"
            trips.append(emit(prefix, cmp, [src], BOOL, float(rng.integers(-4, 5)) / 2))
        if rng.random() < 0.3:
            trips[0] = emit(prefix, "Not", [trips[0]], BOOL)
        while len(trips) > 1:
            a, b = trips.pop(0), trips.pop(0)
            trips.append(emit(prefix, "Or" if rng.random() < 0.5 else "And", [a, b], BOOL))
        out = emit(prefix, "Not", [trips[0]], BOOL)
        variables[-1] = Variable(out, BOOL, Role.OUTPUT)
    return ProgramGraph(tuple(variables), tuple(blocks))
