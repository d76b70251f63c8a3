"""Shared test utilities.

``naive_footprint`` is a deliberately independent implementation of the
footstep rules: direct recursion over the public split enumerations with
its own state representation (frozensets with a "bot" marker), no
memoization, no bitmask tricks.  Tests compare the engine against it on
small pomsets.
"""

from __future__ import annotations

import random

from pomc11 import actions as act
from pomc11.actions import ACQ, AR, DELTA, NA, REL, RLX, SC
from pomc11.execution import TOP
from pomc11.pomset import Pomset, from_parts, par_splits, prefix_splits

# ---------------------------------------------------------------------------
# Independent state algebra (frozenset-of-pairs states, "bot"/"TOP" markers)

NTOP = "TOP"


def n_state(mapping):
    return frozenset(mapping.items())


def n_dom(s):
    return {x for x, _ in s}


def n_get(s, x):
    for k, v in s:
        if k == x:
            return v
    return None


def n_scons(s1, s2):
    if s1 == NTOP or s2 == NTOP:
        return False
    for x in n_dom(s1) & n_dom(s2):
        v, w = n_get(s1, x), n_get(s2, x)
        if v != "bot" and w != "bot" and v != w:
            return False
    return True


def n_join(s1, s2):
    out = {}
    for x in n_dom(s1) | n_dom(s2):
        v = n_get(s1, x) if x in n_dom(s1) else "bot"
        w = n_get(s2, x) if x in n_dom(s2) else "bot"
        out[x] = w if v == "bot" else v
        if v != "bot" and w != "bot":
            assert v == w, "join of inconsistent states"
    return n_state(out)


def n_supd(s1, s2):
    if s1 == NTOP or s2 == NTOP:
        return NTOP
    out = dict(s1)
    out.update(dict(s2))
    return n_state(out)


def n_minus(s, names):
    if s == NTOP:
        return NTOP
    return frozenset((x, v) for x, v in s if x not in names)


def n_racy_product(s1, s2, raced):
    out = dict(n_join(s1, s2))
    for x in raced:
        if x in n_dom(s1) and x in n_dom(s2):
            v, w = n_get(s1, x), n_get(s2, x)
            out[x] = "bot" if (v == "bot" or w == "bot") else v
    return n_state(out)


def n_action_footsteps(a):
    if isinstance(a, act.Read):
        return {(n_state({a.ident: a.value}), n_state({}))}
    if isinstance(a, act.Write):
        return {(n_state({a.ident: "bot"}), n_state({a.ident: a.value}))}
    if isinstance(a, act.Rmw):
        return {(n_state({a.ident: a.read_value}), n_state({a.ident: a.written_value}))}
    return {(n_state({}), n_state({}))}


def _n_sides(labels):
    has_sc = any(act.mo(a) is SC for a in labels)
    na_w = {act.ide(a) for a in labels if act.is_writing(a) and act.mo(a) is NA}
    na_any = {act.ide(a) for a in labels if act.ide(a) is not None and act.mo(a) is NA}
    w_all = {act.ide(a) for a in labels if act.is_writing(a)}
    w_at = {act.ide(a) for a in labels if act.is_writing(a) and act.mo(a) is not NA}
    return has_sc, na_w, na_any, w_all, w_at


def naive_footprint(p: Pomset):
    """Fixpoint of the six footstep rules, straight off their statements."""
    if len(p) == 0:
        return {(n_state({}), n_state({}))}
    if len(p) == 1:
        return n_action_footsteps(p.labels[0])

    out = set()
    for p1, p2 in prefix_splits(p):
        f1s, f2s = naive_footprint(p1), naive_footprint(p2)
        for s1, t1 in f1s:
            if t1 == NTOP:
                out.add((s1, NTOP))  # RaceP
                continue
            for s2, t2 in f2s:
                if not n_scons(n_supd(s1, t1), s2):
                    continue
                initial = n_join(s1, n_minus(s2, n_dom(t1)))
                if t2 == NTOP:
                    out.add((initial, NTOP))  # RaceS
                else:
                    out.add((initial, n_supd(t1, t2)))  # Seq

    for p1, p2 in par_splits(p):
        sc1, naw1, naa1, w1, aw1 = _n_sides(p1.labels)
        sc2, naw2, naa2, w2, aw2 = _n_sides(p2.labels)
        if sc1 and sc2:
            continue
        raced = (naw1 & naa2) | (naw2 & naa1)
        f1s, f2s = naive_footprint(p1), naive_footprint(p2)
        if not raced and not (w1 & w2):  # Par
            for s1, t1 in f1s:
                if t1 == NTOP:
                    continue
                for s2, t2 in f2s:
                    if t2 == NTOP or not n_scons(s1, s2):
                        continue
                    out.add((n_join(s1, s2), n_join(t1, t2)))
        if raced and not (aw1 & aw2):  # Race
            for s1, t1 in f1s:
                if t1 == NTOP:
                    continue
                for s2, t2 in f2s:
                    if t2 == NTOP or not n_scons(s1, s2):
                        continue
                    out.add((n_racy_product(s1, s2, raced), NTOP))
    return out


def engine_footsteps_as_naive(footsteps):
    """Convert engine footsteps to the naive representation for comparison."""
    out = set()
    for s, t in footsteps:
        ns = frozenset((x, "bot" if v is None else v) for x, v in s)
        if t is TOP:
            out.add((ns, NTOP))
        else:
            out.add((ns, frozenset((x, "bot" if v is None else v) for x, v in t)))
    return out


# ---------------------------------------------------------------------------
# Random pomsets


def random_action(rng: random.Random, idents=("x", "y", "z"), values=(0, 1, 2)):
    kind = rng.choice(("read", "write", "fence", "rmw", "delta"))
    if kind == "delta":
        return DELTA
    if kind == "fence":
        return act.Fence(rng.choice((REL, ACQ, AR, SC)))
    ident = rng.choice(idents)
    if kind == "read":
        return act.Read(rng.choice((NA, RLX, ACQ, SC)), ident, rng.choice(values))
    if kind == "write":
        return act.Write(rng.choice((NA, RLX, REL, SC)), ident, rng.choice(values))
    return act.Rmw(
        rng.choice((RLX, REL, ACQ, AR, SC)), ident, rng.choice(values), rng.choice(values)
    )


def random_pomset(
    rng: random.Random,
    max_size: int = 8,
    edge_prob: float = 0.35,
    idents=("x", "y", "z"),
    values=(0, 1, 2),
) -> Pomset:
    n = rng.randint(0, max_size)
    labels = [random_action(rng, idents, values) for _ in range(n)]
    edges = [
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < edge_prob
    ]
    return from_parts(labels, edges)


def permuted(p: Pomset, rng: random.Random) -> Pomset:
    """A structurally shuffled but isomorphic copy."""
    n = len(p)
    perm = list(range(n))
    rng.shuffle(perm)
    labels = [None] * n
    for old, new in enumerate(perm):
        labels[new] = p.labels[old]
    edges = [(perm[a], perm[b]) for a, b in p.order]
    return from_parts(labels, edges)
