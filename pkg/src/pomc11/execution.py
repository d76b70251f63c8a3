"""Executional interpretation of pomsets: footsteps, footprints, races.

A footstep is a pair (initial, effect): a minimal piece of state that
lets part of a pomset run, and what running it does.  The effect is
either a proper state or TOP, the overdefined state produced by a data
race on a non-atomic location.  The footprint of a pomset is the closure
of its single-action footsteps under six rules: sequencing through a
downward-closed prefix, parallel composition of consistent halves, the
racy variant of parallel composition, and the two rules that propagate a
race out of a prefix or a suffix.

States are finite partial maps from identifiers to an integer or BOT
(``None``), where BOT marks a location that must exist but whose value
does not matter.  They are stored as identifier-sorted tuples so that
footstep sets can be hashed and compared.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, Iterable, Optional, Tuple

from . import actions as act
from . import syntax as syn
from .actions import SC, Action, Delta, render_action
from .denote import DenoteConfig, denote_prog
from .pomset import Pomset


class _Top:
    """The overdefined state: the result of a race."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "TOP"


TOP = _Top()

BOT = None  # unconstrained value inside a proper state

State = Tuple[Tuple[str, Optional[int]], ...]
Footstep = Tuple[State, object]  # effect is a State or TOP


class PomsetSizeError(RuntimeError):
    """Raised when a pomset exceeds the footprint enumeration cap."""


class ExecutionError(RuntimeError):
    """Internal invariant violation inside the footstep rules."""


@dataclass(frozen=True)
class ExecConfig:
    max_pomset_size: int = 14
    strict_sc: bool = True

    def __post_init__(self):
        if self.max_pomset_size < 1:
            raise ValueError("max_pomset_size must be >= 1")


@dataclass(frozen=True)
class ExecResult:
    finals: FrozenSet[State]
    racy: bool
    truncated: bool = False


# ---------------------------------------------------------------------------
# State operations

_MISSING = object()

EMPTY_STATE: State = ()


def proper(mapping) -> State:
    """Build a proper state from a mapping; ``None`` values mean BOT."""
    return tuple(sorted(mapping.items()))


def dom(s: State) -> frozenset:
    return frozenset(x for x, _ in s)


def scons(s1, s2) -> bool:
    """Do two states agree wherever both pin a concrete value?

    TOP is consistent with nothing.
    """
    if s1 is TOP or s2 is TOP:
        return False
    d2 = dict(s2)
    for x, v in s1:
        w = d2.get(x, _MISSING)
        if w is _MISSING:
            continue
        if v is not None and w is not None and v != w:
            return False
    return True


def join(s1: State, s2: State) -> State:
    """Pointwise least upper bound; callers must ensure consistency."""
    d = dict(s1)
    for x, w in s2:
        v = d.get(x, _MISSING)
        if v is _MISSING or v is None:
            d[x] = w
        elif w is not None and v != w:
            raise ExecutionError(f"join of inconsistent states at {x}")
    return proper(d)


def supd(s1, s2):
    """Update: bindings of the second state win; TOP absorbs."""
    if s1 is TOP or s2 is TOP:
        return TOP
    d = dict(s1)
    d.update(dict(s2))
    return proper(d)


def minus(s, idents):
    """Drop the given identifiers; TOP stays TOP."""
    if s is TOP:
        return TOP
    idents = set(idents)
    return tuple((x, v) for x, v in s if x not in idents)


def leq(s1: State, s2: State) -> bool:
    """Pointwise order: BOT below everything, integers only below themselves."""
    d2 = dict(s2)
    for x, v in s1:
        w = d2.get(x, _MISSING)
        if w is _MISSING:
            return False
        if v is not None and v != w:
            return False
    return True


def racy_product(s1: State, s2: State, raced: Iterable[str]) -> State:
    """Join everywhere except raced shared locations, where the meet wins.

    On a raced location known to both sides the result is BOT whenever
    either side is BOT: a racing write does not need the prior value.
    """
    raced = set(raced)
    d = dict(join(s1, s2))
    d1, d2 = dict(s1), dict(s2)
    for x in raced:
        if x in d1 and x in d2:
            d[x] = None if (d1[x] is None or d2[x] is None) else d1[x]
    return proper(d)


def render_state(s) -> str:
    if s is TOP:
        return "TOP"
    inner = ", ".join(
        f"{x}:{'bot' if v is None else v}" for x, v in s
    )
    return f"[{inner}]"


def render_footstep(f: Footstep) -> str:
    initial, effect = f
    return f"{render_state(initial)} => {render_state(effect)}"


# ---------------------------------------------------------------------------
# Footprints of single actions


def footprint_of_action(a: Action) -> frozenset:
    """One footstep per action; the ordering tag plays no role here."""
    if isinstance(a, act.Read):
        return frozenset({(proper({a.ident: a.value}), EMPTY_STATE)})
    if isinstance(a, act.Write):
        return frozenset({(proper({a.ident: None}), proper({a.ident: a.value}))})
    if isinstance(a, act.Rmw):
        return frozenset(
            {(proper({a.ident: a.read_value}), proper({a.ident: a.written_value}))}
        )
    if isinstance(a, (Delta, act.Fence)):
        return frozenset({(EMPTY_STATE, EMPTY_STATE)})
    raise TypeError(f"not an action: {a!r}")


# ---------------------------------------------------------------------------
# Structural side conditions for concurrent execution


def _summary(labels):
    """Per-side facts: sc presence and the identifier sets the races need."""
    has_sc = False
    na_w, na_any, w_any, w_atomic = set(), set(), set(), set()
    for a in labels:
        m = act.mo(a)
        if m is SC:
            has_sc = True
        x = act.ide(a)
        if x is None:
            continue
        if act.is_writing(a):
            w_any.add(x)
            if m is act.NA:
                na_w.add(x)
            else:
                w_atomic.add(x)
        if m is act.NA:
            na_any.add(x)
    return has_sc, frozenset(na_w), frozenset(na_any), frozenset(w_any), frozenset(w_atomic)


def rloc(p1: Pomset, p2: Pomset) -> frozenset:
    """Non-atomic locations written by one side and touched by the other."""
    _, na_w1, na_any1, _, _ = _summary(p1.labels)
    _, na_w2, na_any2, _, _ = _summary(p2.labels)
    return (na_w1 & na_any2) | (na_w2 & na_any1)


def dr(p1: Pomset, p2: Pomset) -> bool:
    return bool(rloc(p1, p2))


def rsc(p1: Pomset, p2: Pomset) -> bool:
    """At most one side performs sc actions."""
    return not (_summary(p1.labels)[0] and _summary(p2.labels)[0])


def co(p1: Pomset, p2: Pomset) -> bool:
    """No race, sc respected, and write sets disjoint: safe to run in parallel."""
    s1, s2 = _summary(p1.labels), _summary(p2.labels)
    if s1[0] and s2[0]:
        return False
    if (s1[1] & s2[2]) or (s2[1] & s1[2]):
        return False
    return not (s1[3] & s2[3])


def rc(p1: Pomset, p2: Pomset) -> bool:
    """A race is reachable: data race, sc respected, atomic writes disjoint."""
    s1, s2 = _summary(p1.labels), _summary(p2.labels)
    if s1[0] and s2[0]:
        return False
    if not ((s1[1] & s2[2]) or (s2[1] & s1[2])):
        return False
    return not (s1[4] & s2[4])


# ---------------------------------------------------------------------------
# Pomset footprints


def footprint(p: Pomset, cfg: ExecConfig = ExecConfig()) -> frozenset:
    """The footstep set of a pomset, closed under the six footstep rules.

    Computed by memoized recursion over element subsets of ``p``; raises
    PomsetSizeError when the pomset exceeds the configured cap.
    """
    n = len(p)
    if n > cfg.max_pomset_size:
        raise PomsetSizeError(
            f"pomset with {n} elements exceeds the cap of "
            f"{cfg.max_pomset_size}: "
            + ", ".join(render_action(l) for l in p.labels)
        )

    labels = p.labels
    preds = [0] * n
    undirected = [0] * n
    for a, b in p.order:
        preds[b] |= 1 << a
        undirected[a] |= 1 << b
        undirected[b] |= 1 << a

    action_steps = [footprint_of_action(l) for l in labels]
    summaries: dict = {}
    memo: dict = {}

    def bits(mask):
        while mask:
            low = mask & -mask
            yield low.bit_length() - 1
            mask &= mask - 1

    def summary(mask):
        got = summaries.get(mask)
        if got is None:
            got = _summary([labels[i] for i in bits(mask)])
            summaries[mask] = got
        return got

    def downclosed(mask):
        out = []
        sub = mask
        while True:
            ok = True
            for i in bits(sub):
                if preds[i] & mask & ~sub:
                    ok = False
                    break
            if ok and sub != 0 and sub != mask:
                out.append(sub)
            if sub == 0:
                return out
            sub = (sub - 1) & mask

    def components(mask):
        seen = 0
        comps = []
        for i in bits(mask):
            if seen >> i & 1:
                continue
            frontier = 1 << i
            comp = 0
            while frontier:
                comp |= frontier
                nxt = 0
                for j in bits(frontier):
                    nxt |= undirected[j] & mask & ~comp
                frontier = nxt
            comps.append(comp)
            seen |= comp
        return comps

    def check(footstep):
        initial, effect = footstep
        if effect is not TOP and not dom(effect) <= dom(initial):
            raise ExecutionError(
                f"footstep allocates state: {render_footstep(footstep)}"
            )
        return footstep

    def fp(mask) -> frozenset:
        got = memo.get(mask)
        if got is not None:
            return got
        if mask == 0:
            result = frozenset({(EMPTY_STATE, EMPTY_STATE)})
            memo[mask] = result
            return result
        if mask & (mask - 1) == 0:
            result = action_steps[mask.bit_length() - 1]
            memo[mask] = result
            return result

        out = set()

        # Sequencing through every downward-closed prefix.
        for sub in downclosed(mask):
            f1s = fp(sub)
            f2s = fp(mask & ~sub)
            for s1, t1 in f1s:
                if t1 is TOP:
                    # A race in the prefix is a race of the whole.
                    out.add((s1, TOP))
                    continue
                after = supd(s1, t1)
                dom_t1 = dom(t1)
                for s2, t2 in f2s:
                    if not scons(after, s2):
                        continue
                    initial = join(s1, minus(s2, dom_t1))
                    if t2 is TOP:
                        out.add(check((initial, TOP)))
                    else:
                        out.add(check((initial, supd(t1, t2))))

        # Parallel composition of component groups.
        comps = components(mask)
        if len(comps) >= 2:
            for choice in range(1 << (len(comps) - 1)):
                left = comps[0]
                right = 0
                for idx in range(1, len(comps)):
                    if choice >> (idx - 1) & 1:
                        left |= comps[idx]
                    else:
                        right |= comps[idx]
                if right == 0:
                    continue
                hs1, naw1, naa1, w1, aw1 = summary(left)
                hs2, naw2, naa2, w2, aw2 = summary(right)
                if hs1 and hs2:
                    continue
                raced = (naw1 & naa2) | (naw2 & naa1)
                if not raced:
                    if w1 & w2:
                        continue
                    for s1, t1 in fp(left):
                        if t1 is TOP:
                            continue
                        for s2, t2 in fp(right):
                            if t2 is TOP or not scons(s1, s2):
                                continue
                            if dom(t1) & dom(t2):
                                # Single writer per location is what keeps
                                # coherence; the write-disjointness guard
                                # above must have ensured it.
                                raise ExecutionError(
                                    "parallel halves affected a shared location"
                                )
                            out.add(check((join(s1, s2), join(t1, t2))))
                else:
                    if aw1 & aw2:
                        continue
                    for s1, t1 in fp(left):
                        if t1 is TOP:
                            continue
                        for s2, t2 in fp(right):
                            if t2 is TOP or not scons(s1, s2):
                                continue
                            out.add(check((racy_product(s1, s2, raced), TOP)))

        result = frozenset(out)
        memo[mask] = result
        return result

    return fp((1 << n) - 1)


# ---------------------------------------------------------------------------
# Executions


def _idents_of(p: Pomset) -> set:
    return {act.ide(l) for l in p.labels if act.ide(l) is not None}


def executions(p: Pomset, initial: State, cfg: ExecConfig = ExecConfig()) -> ExecResult:
    """Run a pomset from a concrete total state.

    ``initial`` must bind every identifier the pomset touches to a real
    value.  The finals are the initial state updated by each applicable
    proper effect; the pomset is racy from here when some applicable
    footstep ends in TOP.
    """
    bound = dom(initial)
    for x, v in initial:
        if v is None:
            raise ValueError(f"initial state binds {x} to bot; executions need values")
    missing = _idents_of(p) - bound
    if missing:
        raise ValueError(f"initial state misses identifiers: {sorted(missing)}")

    finals = set()
    racy = False
    for s, t in footprint(p, cfg):
        if not leq(s, initial):
            continue
        if t is TOP:
            racy = True
        else:
            finals.add(supd(initial, t))
    return ExecResult(frozenset(finals), racy)


def executions_prog(
    p: syn.Prog,
    initial: State,
    dcfg: DenoteConfig = DenoteConfig(),
    ecfg: ExecConfig = ExecConfig(),
) -> ExecResult:
    """Union of the executions of every pomset a program denotes."""
    den = denote_prog(p, dcfg)
    finals = set()
    racy = False
    for pomset in den.pomsets:
        res = executions(pomset, initial, ecfg)
        finals |= res.finals
        racy = racy or res.racy
    return ExecResult(frozenset(finals), racy, den.truncated)
