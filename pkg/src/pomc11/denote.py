"""Syntax-directed denotations: commands and programs as sets of pomsets.

Expressions denote sets of (pomset, value) pairs, one pair per value a
read could observe; commands and programs denote sets of pomsets.  Reads
enumerate a finite value domain, so denotations stay finite; written
values are unrestricted integers, but a value outside the domain can
never be read back.  While loops unroll to a configurable bound; the
``truncated`` flag records that deeper unrollings (or divergence) exist
beyond the bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

from . import actions as act
from . import syntax as syn
from .actions import DELTA, Delta
from .pomset import (
    Pomset,
    canonicalize,
    dedup_iso,
    par_compose,
    relaxed_compose,
    restrict,
    seq_compose,
    singleton,
    sort_key,
    substitute,
)


@dataclass(frozen=True)
class DenoteConfig:
    """Finite read domain, loop unroll bound, and ordering toggles.

    ``relaxed_guards`` is a test hook: it composes branch guards with
    relaxed composition instead of full sequencing, removing the
    control dependency that normally blocks out-of-thin-air results.
    """

    values: Tuple[int, ...] = (0, 1, 2, 3)
    unroll: int = 4
    strict_sc: bool = True
    relaxed_guards: bool = False

    def __post_init__(self):
        if not self.values:
            raise ValueError("value domain must be nonempty")
        if self.unroll < 0:
            raise ValueError("unroll bound must be >= 0")


@dataclass(frozen=True)
class Denotation:
    """Canonical, iso-deduplicated pomsets plus a truncation marker."""

    pomsets: Tuple[Pomset, ...]
    truncated: bool = False


def _dedup_valued(pairs):
    """Deduplicate (pomset, value) pairs up to iso, deterministically ordered."""
    by_value: dict = {}
    for p, v in pairs:
        by_value.setdefault(v, []).append(p)
    out = []
    for v in sorted(by_value, key=repr):
        for p in dedup_iso(by_value[v]):
            out.append((p, v))
    return tuple(out)


_INT_OPS = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
}

_CMP_OPS = {
    "<": lambda a, b: a < b,
    "==": lambda a, b: a == b,
}


def denote_iexp(e: syn.IntExpr, cfg: DenoteConfig) -> tuple:
    """Pairs (pomset, integer value), one per observable evaluation."""
    if isinstance(e, syn.IntLit):
        return ((singleton(DELTA), e.value),)
    if isinstance(e, syn.ReadExp):
        return tuple(
            (singleton(act.Read(e.order, e.ident, v)), v) for v in cfg.values
        )
    if isinstance(e, syn.RmwExp):
        return tuple(
            (singleton(act.Rmw(e.order, e.ident, v, w)), w)
            for v, w in e.fun.graph_over(cfg.values)
        )
    if isinstance(e, syn.BinOp):
        op = _INT_OPS[e.op]
        pairs = [
            (canonicalize(par_compose(p1, p2)), op(v1, v2))
            for p1, v1 in denote_iexp(e.left, cfg)
            for p2, v2 in denote_iexp(e.right, cfg)
        ]
        return _dedup_valued(pairs)
    raise TypeError(f"not an integer expression: {e!r}")


def denote_bexp(b: syn.BoolExpr, cfg: DenoteConfig) -> tuple:
    """Pairs (pomset, boolean value); operands evaluate in parallel."""
    if isinstance(b, syn.BoolLit):
        return ((singleton(DELTA), b.value),)
    if isinstance(b, syn.NotExp):
        return tuple((p, not v) for p, v in denote_bexp(b.arg, cfg))
    if isinstance(b, syn.OrExp):
        pairs = [
            (canonicalize(par_compose(p1, p2)), v1 or v2)
            for p1, v1 in denote_bexp(b.left, cfg)
            for p2, v2 in denote_bexp(b.right, cfg)
        ]
        return _dedup_valued(pairs)
    if isinstance(b, syn.CmpExp):
        op = _CMP_OPS[b.op]
        pairs = [
            (canonicalize(par_compose(p1, p2)), op(v1, v2))
            for p1, v1 in denote_iexp(b.left, cfg)
            for p2, v2 in denote_iexp(b.right, cfg)
        ]
        return _dedup_valued(pairs)
    raise TypeError(f"not a boolean expression: {b!r}")


def pomt(b: syn.BoolExpr, cfg: DenoteConfig) -> tuple:
    """Guard pomsets that evaluate to true."""
    return tuple(p for p, v in denote_bexp(b, cfg) if v)


def pomf(b: syn.BoolExpr, cfg: DenoteConfig) -> tuple:
    """Guard pomsets that evaluate to false."""
    return tuple(p for p, v in denote_bexp(b, cfg) if not v)


def _lift(ps1, ps2, compose) -> tuple:
    return tuple(canonicalize(compose(p1, p2)) for p1 in ps1 for p2 in ps2)


def sexec(n: str, p: Pomset) -> bool:
    """Is the restriction of a pomset to one location sequentially runnable?

    Every non-delta label must act on ``n``.  Holds when all writes are
    mutually ordered, every read is ordered against every write, and
    each read returns the value of the latest write below it.  Reads of
    the same block may be mutually unordered; a read with no write below
    it has no value to return and fails.
    """
    writes = []
    reads = []
    for i in p.elements:
        label = p.labels[i]
        if isinstance(label, Delta):
            continue
        if isinstance(label, act.Write):
            writes.append(i)
        elif isinstance(label, act.Read):
            reads.append(i)
        else:
            raise AssertionError(f"sexec saw a non-{n} action: {label!r}")
        if label.ident != n:
            raise AssertionError(f"sexec saw a non-{n} action: {label!r}")

    for a in writes:
        for b in writes:
            if a != b and (a, b) not in p.order and (b, a) not in p.order:
                return False
    chain = sorted(writes, key=lambda w: sum((v, w) in p.order for v in writes))
    for r in reads:
        below = [w for w in writes if (w, r) in p.order]
        if not below:
            return False
        for w in writes:
            if w not in below and (r, w) not in p.order:
                return False
        last = max(below, key=chain.index)
        if p.labels[last].value != p.labels[r].value:
            return False
    return True


def denote_cmd(c: syn.Cmd, cfg: DenoteConfig) -> Denotation:
    """The set of pomsets a command denotes, canonical and deduplicated."""
    if isinstance(c, syn.Skip):
        return Denotation((singleton(DELTA),))

    if isinstance(c, syn.Assign):
        pomsets = [
            canonicalize(seq_compose(p, singleton(act.Write(c.order, c.ident, v))))
            for p, v in denote_iexp(c.expr, cfg)
        ]
        return Denotation(dedup_iso(pomsets))

    if isinstance(c, syn.FenceCmd):
        return Denotation((singleton(act.Fence(c.order)),))

    if isinstance(c, syn.RmwCmd):
        pomsets = [
            singleton(act.Rmw(c.order, c.ident, v, w))
            for v, w in c.fun.graph_over(cfg.values)
        ]
        return Denotation(dedup_iso(pomsets))

    if isinstance(c, syn.Seq):
        d1 = denote_cmd(c.first, cfg)
        d2 = denote_cmd(c.second, cfg)
        composed = _lift(
            d1.pomsets,
            d2.pomsets,
            lambda a, b: relaxed_compose(a, b, cfg.strict_sc),
        )
        return Denotation(dedup_iso(composed), d1.truncated or d2.truncated)

    if isinstance(c, syn.If):
        guard_compose = (
            (lambda a, b: relaxed_compose(a, b, cfg.strict_sc))
            if cfg.relaxed_guards
            else seq_compose
        )
        d1 = denote_cmd(c.then, cfg)
        d2 = denote_cmd(c.orelse, cfg)
        pomsets = _lift(pomt(c.guard, cfg), d1.pomsets, guard_compose)
        pomsets += _lift(pomf(c.guard, cfg), d2.pomsets, guard_compose)
        return Denotation(dedup_iso(pomsets), d1.truncated or d2.truncated)

    if isinstance(c, syn.While):
        guard_compose = (
            (lambda a, b: relaxed_compose(a, b, cfg.strict_sc))
            if cfg.relaxed_guards
            else seq_compose
        )
        taken = pomt(c.guard, cfg)
        body = denote_cmd(c.body, cfg)
        iterations = list(pomf(c.guard, cfg))  # bound 0: guard false
        collected = list(iterations)
        for _ in range(cfg.unroll):
            continued = _lift(
                body.pomsets,
                iterations,
                lambda a, b: relaxed_compose(a, b, cfg.strict_sc),
            )
            iterations = _lift(taken, continued, guard_compose)
            collected.extend(iterations)
        # Deeper (or infinite) unrollings exist whenever the guard can
        # come out true and the body has any behaviour at all.
        truncated = bool(taken) and (bool(body.pomsets) or body.truncated)
        return Denotation(dedup_iso(collected), truncated)

    if isinstance(c, syn.Local):
        body = denote_cmd(c.body, cfg)
        is_n = lambda a: act.ide(a) == c.ident
        init = singleton(act.Write(act.NA, c.ident, c.init))
        out = []
        for p in body.pomsets:
            if sexec(c.ident, seq_compose(init, restrict(p, is_n))):
                out.append(canonicalize(substitute(p, is_n, DELTA)))
        return Denotation(dedup_iso(out), body.truncated)

    raise TypeError(f"not a command: {c!r}")


def denote_prog(p: syn.Prog, cfg: DenoteConfig) -> Denotation:
    """Parallel composition of the per-thread denotations."""
    result = denote_cmd(p.threads[0], cfg)
    pomsets, truncated = result.pomsets, result.truncated
    for t in p.threads[1:]:
        d = denote_cmd(t, cfg)
        pomsets = dedup_iso(_lift(pomsets, d.pomsets, par_compose))
        truncated = truncated or d.truncated
    return Denotation(pomsets, truncated)
