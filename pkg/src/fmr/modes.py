"""Failure modes, mode sets and the classification of (reported, actual) pairs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Union

import numpy as np

Value = Union[float, int, bool]


class ModeError(ValueError):
    """Raised for illegal modes, mixed signal types or non-finite values."""


class SignalType(Enum):
    REAL = "real"
    BOOL = "bool"

    def __str__(self) -> str:
        return self.value


class Mode(Enum):
    LOW = "l"
    MATCH = "m"
    HIGH = "h"
    FALSE = "f"
    TRUE = "t"

    def __str__(self) -> str:
        return self.value

    def __repr__(self) -> str:
        return f"Mode.{self.name}"

    @property
    def rank(self) -> int:
        """Stable integer code, unique per mode."""
        return _RANK[self]

    @property
    def order(self) -> tuple[int, int]:
        """Display order: the low-side fault, then m, then the high-side fault."""
        return _ORDER[self], _RANK[self]

    def __lt__(self, other: "Mode") -> bool:
        if not isinstance(other, Mode):
            return NotImplemented
        return self.order < other.order

    @property
    def is_fault(self) -> bool:
        return self is not Mode.MATCH

    def legal_for(self, ty: SignalType) -> bool:
        return self in MODES[ty]


L, M, H, F, T = Mode.LOW, Mode.MATCH, Mode.HIGH, Mode.FALSE, Mode.TRUE

MODES: dict[SignalType, tuple[Mode, ...]] = {
    SignalType.REAL: (L, M, H),
    SignalType.BOOL: (F, M, T),
}
_RANK = {mode: i for i, mode in enumerate(Mode)}
_ORDER = {L: 0, F: 0, M: 1, H: 2, T: 2}


def parse_mode(text: str, ty: SignalType | None = None) -> Mode:
    try:
        mode = Mode(text.strip().lower())
    except ValueError:
        raise ModeError(f"unknown failure mode {text!r}") from None
    if ty is not None and not mode.legal_for(ty):
        raise ModeError(f"mode {mode} is not legal for {ty} signals")
    return mode


@dataclass(frozen=True)
class FailureState:
    """A (reported, actual) value pair carried by one signal."""

    reported: Value
    actual: Value

    @property
    def is_failure(self) -> bool:
        return self.reported != self.actual


def _check_value(value, ty: SignalType) -> None:
    is_bool = isinstance(value, (bool, np.bool_))
    if ty is SignalType.BOOL:
        if not is_bool:
            raise ModeError(f"expected a boolean value, got {value!r}")
        return
    if is_bool or not isinstance(value, (int, float, np.integer, np.floating)):
        raise ModeError(f"expected a real value, got {value!r}")
    if not math.isfinite(value):
        raise ModeError(f"non-finite real value {value!r}")


def classify(state: FailureState, ty: SignalType) -> Mode:
    """Return the failure mode containing ``state``.

    Reals: reported below actual is ``l``, above is ``h``. Booleans: reported
    False where True was due is ``f``, the converse ``t``. Equal values are ``m``.
    """
    _check_value(state.reported, ty)
    _check_value(state.actual, ty)
    if state.reported == state.actual:
        return M
    if ty is SignalType.REAL:
        return L if state.reported < state.actual else H
    return T if state.reported else F


def classify_array(reported: np.ndarray, actual: np.ndarray, ty: SignalType) -> np.ndarray:
    """Vectorised :func:`classify` returning mode ranks (see ``Mode.rank``)."""
    out = np.full(np.shape(reported), M.rank, dtype=np.int8)
    if ty is SignalType.REAL:
        out[reported < actual] = L.rank
        out[reported > actual] = H.rank
    else:
        out[reported & ~actual] = T.rank
        out[~reported & actual] = F.rank
    return out


MODE_BY_RANK = tuple(Mode)


@dataclass(frozen=True)
class ModeSet:
    """A nonempty set of modes of one signal type.

    ``uncertain`` lists outcomes reachable only through uncertain table rows.
    They are members of ``modes`` only when uncertain outcomes were requested.
    """

    modes: frozenset[Mode]
    ty: SignalType
    uncertain: frozenset[Mode] = field(default_factory=frozenset)

    def __post_init__(self):
        if not self.modes:
            raise ModeError("a mode set must be nonempty")
        for mode in self.modes | self.uncertain:
            if not mode.legal_for(self.ty):
                raise ModeError(f"mode {mode} is not legal for {self.ty} signals")

    @classmethod
    def of(cls, modes: Iterable[Mode], ty: SignalType | None = None) -> "ModeSet":
        modes = frozenset(modes)
        if ty is None:
            ty = infer_type(modes)
        return cls(modes, ty)

    @property
    def is_all(self) -> bool:
        return self.modes == frozenset(MODES[self.ty])

    def __contains__(self, mode: Mode) -> bool:
        return mode in self.modes

    def __iter__(self):
        return iter(sorted(self.modes))

    def __len__(self) -> int:
        return len(self.modes)

    def union(self, other: "ModeSet") -> "ModeSet":
        return mode_set_union(self, other)

    def __str__(self) -> str:
        if self.ty is SignalType.REAL and self.is_all and not self.uncertain:
            return "a"
        parts = [f"{m}_u" if m in self.uncertain else str(m) for m in self]
        return "{" + ",".join(parts) + "}"


def infer_type(modes: Iterable[Mode]) -> SignalType:
    """Signal type implied by a collection of modes; ``m`` alone is ambiguous."""
    kinds = {ty for mode in modes for ty in SignalType if mode.legal_for(ty) and mode is not M}
    if len(kinds) > 1:
        raise ModeError("modes mix real and boolean signal types")
    if not kinds:
        raise ModeError("cannot infer a signal type from {m} alone")
    return kinds.pop()


def mode_set_union(a: ModeSet, b: ModeSet) -> ModeSet:
    if a.ty is not b.ty:
        raise ModeError(f"cannot unite {a.ty} and {b.ty} mode sets")
    return ModeSet(a.modes | b.modes, a.ty, a.uncertain | b.uncertain)


def parse_mode_set(text: str, ty: SignalType) -> ModeSet:
    """Parse ``"a"`` or a comma-separated mode list such as ``"l,m"``."""
    text = text.strip()
    if text == "a":
        if ty is not SignalType.REAL:
            raise ModeError("'a' abbreviates {l,m,h} and needs a real signal")
        return ModeSet(frozenset(MODES[ty]), ty)
    return ModeSet(frozenset(parse_mode(p, ty) for p in text.strip("{}").split(",")), ty)
