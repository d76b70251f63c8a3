"""Memory actions and the ordering lattice that governs their reordering.

A memory action is a read, write, fence, atomic read-modify-write, or the
no-op ``delta``.  Every action except ``delta`` carries a memory ordering
tag.  The lattice of tags and the ``memory_ordered`` relation defined here
drive relaxed sequential composition: two program-order adjacent actions
stay ordered only when this module says they must.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Union


class MemOrder(enum.Enum):
    """The six memory ordering tags."""

    NA = "na"
    RLX = "rlx"
    REL = "rel"
    ACQ = "acq"
    AR = "ar"
    SC = "sc"

    def __str__(self) -> str:
        return self.value


NA = MemOrder.NA
RLX = MemOrder.RLX
REL = MemOrder.REL
ACQ = MemOrder.ACQ
AR = MemOrder.AR
SC = MemOrder.SC

MEM_ORDERS = (NA, RLX, REL, ACQ, AR, SC)

# Covering edges of the strength lattice.  acq and rel are incomparable;
# everything else follows by reflexive-transitive closure.
_COVERS = {
    (NA, RLX),
    (RLX, ACQ),
    (RLX, REL),
    (ACQ, AR),
    (REL, AR),
    (AR, SC),
}


def _close() -> frozenset:
    pairs = {(m, m) for m in MEM_ORDERS} | set(_COVERS)
    changed = True
    while changed:
        changed = False
        for (a, b) in list(pairs):
            for (c, d) in list(pairs):
                if b is c and (a, d) not in pairs:
                    pairs.add((a, d))
                    changed = True
    return frozenset(pairs)


_LEQ = _close()


def mo_leq(m1: MemOrder, m2: MemOrder) -> bool:
    """True iff ``m1`` is at most as strong as ``m2`` in the lattice."""
    return (m1, m2) in _LEQ


def mo_lt(m1: MemOrder, m2: MemOrder) -> bool:
    return m1 is not m2 and mo_leq(m1, m2)


@dataclass(frozen=True)
class Delta:
    """The no-op action.  Carries no ordering and no identifier."""


@dataclass(frozen=True)
class Write:
    order: MemOrder
    ident: str
    value: int

    def __post_init__(self):
        if self.order in (ACQ, AR):
            raise ValueError(f"write cannot use order {self.order}")


@dataclass(frozen=True)
class Read:
    order: MemOrder
    ident: str
    value: int

    def __post_init__(self):
        if self.order in (REL, AR):
            raise ValueError(f"read cannot use order {self.order}")


@dataclass(frozen=True)
class Fence:
    order: MemOrder

    def __post_init__(self):
        if not mo_lt(RLX, self.order):
            raise ValueError(f"fence order must exceed rlx, got {self.order}")


@dataclass(frozen=True)
class Rmw:
    """Atomic read-modify-write: reads ``read_value`` and writes
    ``written_value`` as one indivisible action."""

    order: MemOrder
    ident: str
    read_value: int
    written_value: int

    def __post_init__(self):
        if self.order is NA:
            raise ValueError("rmw requires an atomic order")


DELTA = Delta()

Action = Union[Delta, Write, Read, Fence, Rmw]


def mo(a: Action) -> Optional[MemOrder]:
    """Ordering projection; undefined (None) on delta."""
    return None if isinstance(a, Delta) else a.order


def ide(a: Action) -> Optional[str]:
    """Identifier projection; defined exactly on reads, writes and rmws."""
    return a.ident if isinstance(a, (Write, Read, Rmw)) else None


def is_reading(a: Action) -> bool:
    return isinstance(a, (Read, Rmw))


def is_writing(a: Action) -> bool:
    return isinstance(a, (Write, Rmw))


def is_fence(a: Action) -> bool:
    return isinstance(a, Fence)


def is_acq(a: Action) -> bool:
    """Reads, rmws, and fences whose order is at least acq."""
    return (is_reading(a) or is_fence(a)) and mo_leq(ACQ, a.order)


def is_rel(a: Action) -> bool:
    """Writes, rmws, and fences whose order is at least rel."""
    return (is_writing(a) or is_fence(a)) and mo_leq(REL, a.order)


def memory_ordered(a: Action, b: Action, strict_sc: bool = True) -> bool:
    """Must ``a`` stay sequenced before ``b`` under the memory model?

    Holds when both act on the same identifier, when ``a`` is an acquire,
    or when ``b`` is a release.  With ``strict_sc`` (the default), any
    pair involving an sc action is also ordered; without it, an sc write
    followed by an sc read of a different location would be free to
    reorder.  Delta is ordered with nothing.
    """
    if isinstance(a, Delta) or isinstance(b, Delta):
        return False
    ia, ib = ide(a), ide(b)
    if ia is not None and ia == ib:
        return True
    if is_acq(a) or is_rel(b):
        return True
    if strict_sc and (a.order is SC or b.order is SC):
        return True
    return False


def render_action(a: Action) -> str:
    """Fixed textual rendering used in DOT output and footprint dumps."""
    if isinstance(a, Delta):
        return "delta"
    if isinstance(a, Write):
        return f"W^{a.order} {a.ident}={a.value}"
    if isinstance(a, Read):
        return f"R^{a.order} {a.ident}={a.value}"
    if isinstance(a, Fence):
        return f"F^{a.order}"
    if isinstance(a, Rmw):
        return f"RMW^{a.order} {a.ident}:{a.read_value}->{a.written_value}"
    raise TypeError(f"not an action: {a!r}")
