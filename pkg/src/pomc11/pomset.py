"""Finite action-labelled strict partial orders and their algebra.

A pomset stores its elements as indices 0..n-1, a label per element, and
a strict order kept transitively closed.  Keeping the closure makes
restriction and delta-deletion order-preserving: deleting a middle
element of a chain keeps its endpoints ordered.

Pomsets are compared up to label-preserving order-isomorphism after
deleting no-op (delta) elements; ``canonicalize`` plus ``iso_equal``
implement that identification.  DOT output draws the transitive
reduction so diagrams stay readable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Tuple

from .actions import DELTA, Action, Delta, memory_ordered, render_action


@dataclass(frozen=True)
class Pomset:
    labels: Tuple[Action, ...]
    order: frozenset  # frozenset[tuple[int, int]], transitively closed

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def elements(self) -> range:
        return range(len(self.labels))

    def label(self, i: int) -> Action:
        return self.labels[i]


def empty() -> Pomset:
    return Pomset((), frozenset())


def singleton(a: Action) -> Pomset:
    return Pomset((a,), frozenset())


def _close(n: int, pairs: Iterable[tuple]) -> frozenset:
    # Reachability closure via successor bitmasks.
    succ = [0] * n
    for a, b in pairs:
        succ[a] |= 1 << b
    changed = True
    while changed:
        changed = False
        for i in range(n):
            acc = succ[i]
            rest = acc
            while rest:
                j = (rest & -rest).bit_length() - 1
                rest &= rest - 1
                acc |= succ[j]
            if acc != succ[i]:
                succ[i] = acc
                changed = True
    out = set()
    for i in range(n):
        rest = succ[i]
        while rest:
            j = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            out.add((i, j))
    return frozenset(out)


def from_parts(labels: Iterable[Action], edges: Iterable[tuple]) -> Pomset:
    """Build a pomset from labels and generating edges.

    The order stored is the transitive closure of ``edges``; a cycle is
    an error since the order must be a strict partial order.
    """
    labels = tuple(labels)
    closed = _close(len(labels), edges)
    for i, j in closed:
        if i == j:
            raise ValueError(f"order has a cycle through element {i}")
        if not (0 <= i < len(labels) and 0 <= j < len(labels)):
            raise ValueError(f"edge ({i}, {j}) out of range")
    return Pomset(labels, closed)


# ---------------------------------------------------------------------------
# Composition


def seq_compose(p1: Pomset, p2: Pomset) -> Pomset:
    """Disjoint union with everything in ``p1`` before everything in ``p2``."""
    n1 = len(p1)
    order = set(p1.order)
    order.update((a + n1, b + n1) for a, b in p2.order)
    order.update((i, j + n1) for i in range(n1) for j in range(len(p2)))
    return Pomset(p1.labels + p2.labels, frozenset(order))


def par_compose(p1: Pomset, p2: Pomset) -> Pomset:
    """Disjoint union with no order between the two sides."""
    n1 = len(p1)
    order = set(p1.order)
    order.update((a + n1, b + n1) for a, b in p2.order)
    return Pomset(p1.labels + p2.labels, frozenset(order))


def relaxed_compose(p1: Pomset, p2: Pomset, strict_sc: bool = True) -> Pomset:
    """Sequence ``p1`` before ``p2`` only where the memory model insists.

    A cross edge runs from an element of ``p1`` to an element of ``p2``
    exactly when their labels are memory-ordered; the stored order is
    the transitive closure of both internal orders plus those edges.
    """
    n1, n2 = len(p1), len(p2)
    edges = set(p1.order)
    edges.update((a + n1, b + n1) for a, b in p2.order)
    for i in range(n1):
        la = p1.labels[i]
        for j in range(n2):
            if memory_ordered(la, p2.labels[j], strict_sc):
                edges.add((i, j + n1))
    return Pomset(p1.labels + p2.labels, _close(n1 + n2, edges))


# ---------------------------------------------------------------------------
# Restriction, substitution, canonical form


def restrict_to_indices(p: Pomset, keep: Iterable[int]) -> Pomset:
    keep = sorted(set(keep))
    index = {old: new for new, old in enumerate(keep)}
    labels = tuple(p.labels[i] for i in keep)
    order = frozenset(
        (index[a], index[b]) for a, b in p.order if a in index and b in index
    )
    return Pomset(labels, order)


def restrict(p: Pomset, keep: Callable[[Action], bool]) -> Pomset:
    """Discard elements whose label fails the predicate; order follows."""
    return restrict_to_indices(p, (i for i in p.elements if keep(p.labels[i])))


def substitute(p: Pomset, targets: Callable[[Action], bool], replacement: Action) -> Pomset:
    """Relabel every element matching ``targets``; elements and order stay."""
    labels = tuple(replacement if targets(l) else l for l in p.labels)
    return Pomset(labels, p.order)


def canonicalize(p: Pomset) -> Pomset:
    """Delete all delta elements, collapsing an all-delta pomset to one delta.

    The empty pomset is its own canonical form; a non-empty pomset never
    canonicalizes to empty, keeping it distinct from the unit.
    """
    keep = [i for i in p.elements if not isinstance(p.labels[i], Delta)]
    if not keep and len(p) > 0:
        return singleton(DELTA)
    return restrict_to_indices(p, keep)


# ---------------------------------------------------------------------------
# Isomorphism


def _signature(p: Pomset):
    preds = {i: set() for i in p.elements}
    succs = {i: set() for i in p.elements}
    for a, b in p.order:
        succs[a].add(b)
        preds[b].add(a)
    node_sig = tuple(
        sorted(
            (render_action(p.labels[i]), len(preds[i]), len(succs[i]))
            for i in p.elements
        )
    )
    return (len(p), len(p.order), node_sig), preds, succs


def iso_equal(p: Pomset, q: Pomset) -> bool:
    """Is there a label-preserving order-isomorphism between ``p`` and ``q``?

    Cheap isomorphism invariants (label multiset with in/out degrees) are
    compared first; survivors go through backtracking matching.
    """
    sig_p, preds_p, succs_p = _signature(p)
    sig_q, preds_q, succs_q = _signature(q)
    if sig_p != sig_q:
        return False
    n = len(p)
    if n == 0:
        return True

    def node_key(labels, preds, succs, i):
        return (render_action(labels[i]), len(preds[i]), len(succs[i]))

    candidates = {}
    for i in p.elements:
        key = node_key(p.labels, preds_p, succs_p, i)
        candidates[i] = [
            j for j in q.elements if node_key(q.labels, preds_q, succs_q, j) == key
        ]

    # Assign most-constrained elements first.
    order_of_assignment = sorted(p.elements, key=lambda i: len(candidates[i]))
    mapping = {}
    used = set()

    def assign(k: int) -> bool:
        if k == n:
            return True
        i = order_of_assignment[k]
        for j in candidates[i]:
            if j in used:
                continue
            ok = True
            for i2, j2 in mapping.items():
                if ((i, i2) in p.order) != ((j, j2) in q.order):
                    ok = False
                    break
                if ((i2, i) in p.order) != ((j2, j) in q.order):
                    ok = False
                    break
            if ok:
                mapping[i] = j
                used.add(j)
                if assign(k + 1):
                    return True
                del mapping[i]
                used.remove(j)
        return False

    return assign(0)


def sort_key(p: Pomset):
    """Deterministic ordering key for listings; structural, not iso-invariant."""
    return (
        len(p),
        tuple(sorted(render_action(l) for l in p.labels)),
        len(p.order),
        tuple(render_action(l) for l in p.labels),
        tuple(sorted(p.order)),
    )


def dedup_iso(pomsets: Iterable[Pomset]) -> tuple:
    """Keep one representative per isomorphism class, deterministically sorted."""
    buckets: dict = {}
    for p in sorted(pomsets, key=sort_key):
        sig = _signature(p)[0]
        kept = buckets.setdefault(sig, [])
        if not any(iso_equal(p, q) for q in kept):
            kept.append(p)
    out = [p for kept in buckets.values() for p in kept]
    out.sort(key=sort_key)
    return tuple(out)


# ---------------------------------------------------------------------------
# Splits


def _pred_masks(p: Pomset) -> list:
    preds = [0] * len(p)
    for a, b in p.order:
        preds[b] |= 1 << a
    return preds


def downclosed_masks(p: Pomset) -> list:
    """All downward-closed element subsets, as bitmasks (including 0 and full)."""
    preds = _pred_masks(p)
    n = len(p)
    full = (1 << n) - 1
    out = []
    sub = full
    while True:
        ok = True
        rest = sub
        while rest:
            i = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            if preds[i] & ~sub:
                ok = False
                break
        if ok:
            out.append(sub)
        if sub == 0:
            break
        sub = (sub - 1) & full
    out.reverse()
    return out


def prefix_splits(p: Pomset) -> Iterator[tuple]:
    """All (prefix, suffix) pairs with the prefix downward-closed, both nonempty."""
    n = len(p)
    full = (1 << n) - 1
    for mask in downclosed_masks(p):
        if mask == 0 or mask == full:
            continue
        keep1 = [i for i in range(n) if mask >> i & 1]
        keep2 = [i for i in range(n) if not mask >> i & 1]
        yield restrict_to_indices(p, keep1), restrict_to_indices(p, keep2)


def component_masks(p: Pomset) -> list:
    """Weakly-connected components of the order, as bitmasks."""
    n = len(p)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a, b in p.order:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    comps: dict = {}
    for i in range(n):
        comps.setdefault(find(i), 0)
        comps[find(i)] |= 1 << i
    return sorted(comps.values())


def par_splits(p: Pomset) -> Iterator[tuple]:
    """Unordered two-way partitions of the components, each yielded once."""
    comps = component_masks(p)
    k = len(comps)
    if k < 2:
        return
    n = len(p)
    # Component 0 stays on the left: that enumerates unordered partitions.
    for choice in range(1 << (k - 1)):
        left = comps[0]
        right = 0
        for idx in range(1, k):
            if choice >> (idx - 1) & 1:
                left |= comps[idx]
            else:
                right |= comps[idx]
        if right == 0:
            continue
        keep1 = [i for i in range(n) if left >> i & 1]
        keep2 = [i for i in range(n) if right >> i & 1]
        yield restrict_to_indices(p, keep1), restrict_to_indices(p, keep2)


# ---------------------------------------------------------------------------
# DOT output


def transitive_reduction(p: Pomset) -> set:
    reduced = set()
    for a, b in p.order:
        if not any((a, c) in p.order and (c, b) in p.order for c in p.elements):
            reduced.add((a, b))
    return reduced


def to_dot(p: Pomset, name: str = "pomset") -> str:
    lines = [f"digraph {name} {{"]
    for i in p.elements:
        lines.append(f'  n{i} [label="{render_action(p.labels[i])}"];')
    for a, b in sorted(transitive_reduction(p)):
        lines.append(f"  n{a} -> n{b};")
    lines.append("}")
    return "\n".join(lines)
