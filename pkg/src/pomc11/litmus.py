"""Litmus-test corpus format, runner, and an interleaving reference oracle.

A litmus file names a program, a value domain, an initial state, and a
set of allow/forbid expectations on final states plus an expected race
verdict.  ``run_case`` evaluates the program's executions against the
expectations.  ``interleaving_oracle`` executes the program over a
single global store by exhaustive interleaving with no reordering; it is
the ground truth for single-threaded programs and for programs whose
atomic accesses are all sc.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from . import syntax as syn
from .actions import NA, SC, MemOrder
from .denote import DenoteConfig, denote_prog
from .execution import (
    ExecConfig,
    State,
    executions,
    proper,
    render_state,
)
from .syntax import ParseError, check_static, free_idents, parse_program


class LitmusError(ValueError):
    pass


@dataclass(frozen=True)
class Expectation:
    kind: str  # "allow" | "forbid"
    constraint: Tuple[Tuple[str, int], ...]


@dataclass(frozen=True)
class LitmusCase:
    name: str
    values: Tuple[int, ...]
    unroll: int
    strict_sc: bool
    max_size: int
    init: State
    program: syn.Prog
    expectations: Tuple[Expectation, ...]
    race: bool

    def denote_config(self) -> DenoteConfig:
        return DenoteConfig(
            values=self.values, unroll=self.unroll, strict_sc=self.strict_sc
        )

    def exec_config(self) -> ExecConfig:
        return ExecConfig(max_pomset_size=self.max_size, strict_sc=self.strict_sc)


@dataclass(frozen=True)
class CheckResult:
    kind: str  # "allow" | "forbid" | "race"
    description: str
    passed: bool
    witness: Optional[State] = None  # satisfier for allow, violator for forbid


@dataclass(frozen=True)
class Verdict:
    name: str
    checks: Tuple[CheckResult, ...]
    truncated: bool
    bound_limited: bool

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


# ---------------------------------------------------------------------------
# File format


def _parse_bindings(text: str, what: str, line_no: int):
    out = []
    for part in text.split():
        if "=" not in part:
            raise LitmusError(f"line {line_no}: malformed {what} entry {part!r}")
        name, _, value = part.partition("=")
        try:
            out.append((name, int(value)))
        except ValueError:
            raise LitmusError(f"line {line_no}: non-integer value in {part!r}")
    return out


def parse_litmus(text: str) -> LitmusCase:
    """Parse the line-oriented litmus format; '#' starts a comment."""
    name = None
    values: Tuple[int, ...] = (0, 1)
    unroll = 4
    strict_sc = True
    max_size = 14
    init_bindings = None
    prog_lines: Optional[list] = None
    program_text = None
    expectations = []
    race = None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if prog_lines is not None:
            if line.strip() == "endprog":
                program_text = "\n".join(prog_lines)
                prog_lines = None
            else:
                prog_lines.append(raw.split("#", 1)[0])
            continue
        if not line.strip():
            continue
        key, sep, rest = line.partition(":")
        if not sep:
            raise LitmusError(f"line {line_no}: expected 'key: value', got {line!r}")
        key = key.strip()
        rest = rest.strip()
        if key == "name":
            name = rest
        elif key == "values":
            try:
                values = tuple(sorted({int(v) for v in rest.split()}))
            except ValueError:
                raise LitmusError(f"line {line_no}: bad values list {rest!r}")
            if not values:
                raise LitmusError(f"line {line_no}: empty values list")
        elif key == "unroll":
            unroll = int(rest)
        elif key == "strict_sc":
            strict_sc = _parse_bool(rest, line_no)
        elif key == "max_size":
            max_size = int(rest)
        elif key == "init":
            init_bindings = _parse_bindings(rest, "init", line_no)
        elif key == "prog":
            prog_lines = []
        elif key in ("allow", "forbid"):
            constraint = tuple(sorted(_parse_bindings(rest, key, line_no)))
            if not constraint:
                raise LitmusError(f"line {line_no}: empty {key} constraint")
            expectations.append(Expectation(key, constraint))
        elif key == "race":
            race = _parse_bool(rest, line_no)
        else:
            raise LitmusError(f"line {line_no}: unknown key {key!r}")

    if prog_lines is not None:
        raise LitmusError("missing 'endprog'")
    if name is None:
        raise LitmusError("missing 'name' section")
    if program_text is None:
        raise LitmusError("missing 'prog' section")
    if init_bindings is None:
        raise LitmusError("missing 'init' section")
    if race is None:
        raise LitmusError("missing 'race' section")

    try:
        program = parse_program(program_text)
    except ParseError as exc:
        raise LitmusError(f"program does not parse: {exc}") from exc
    diagnostics = check_static(program)
    if diagnostics:
        raise LitmusError("; ".join(diagnostics))

    init = proper(dict(init_bindings))
    bound = {x for x, _ in init}
    unbound = free_idents(program) - bound
    if unbound:
        raise LitmusError(f"init does not bind: {sorted(unbound)}")
    for exp in expectations:
        loose = {x for x, _ in exp.constraint} - bound
        if loose:
            raise LitmusError(f"{exp.kind} mentions unbound: {sorted(loose)}")

    return LitmusCase(
        name=name,
        values=values,
        unroll=unroll,
        strict_sc=strict_sc,
        max_size=max_size,
        init=init,
        program=program,
        expectations=tuple(expectations),
        race=race,
    )


def _parse_bool(text: str, line_no: int) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise LitmusError(f"line {line_no}: expected true/false, got {text!r}")


# ---------------------------------------------------------------------------
# Runner


def _matches(final: State, constraint) -> bool:
    d = dict(final)
    return all(d.get(x) == v for x, v in constraint)


def run_case(case: LitmusCase) -> Verdict:
    """Evaluate every expectation of a case against the program's executions."""
    den = denote_prog(case.program, case.denote_config())
    ecfg = case.exec_config()
    finals = set()
    racy = False
    for pomset in den.pomsets:
        res = executions(pomset, case.init, ecfg)
        finals |= res.finals
        racy = racy or res.racy

    checks = []
    for exp in case.expectations:
        text = " ".join(f"{x}={v}" for x, v in exp.constraint)
        hits = sorted(f for f in finals if _matches(f, exp.constraint))
        if exp.kind == "allow":
            checks.append(
                CheckResult("allow", text, bool(hits), hits[0] if hits else None)
            )
        else:
            checks.append(
                CheckResult("forbid", text, not hits, hits[0] if hits else None)
            )
    race_ok = racy == case.race
    checks.append(
        CheckResult("race", "true" if case.race else "false", race_ok, None)
    )

    bound_limited = den.truncated and (
        any(c.kind == "forbid" and c.passed for c in checks)
        or race_ok
    )
    return Verdict(case.name, tuple(checks), den.truncated, bound_limited)


def render_verdict(v: Verdict) -> str:
    lines = [f"=== {v.name}"]
    for c in v.checks:
        status = "PASS" if c.passed else "FAIL"
        line = f"{status} {c.kind} {c.description}"
        if c.kind == "allow" and c.passed:
            line += f" (witness {render_state(c.witness)})"
        elif c.kind == "forbid" and not c.passed:
            line += f" (violation {render_state(c.witness)})"
        lines.append(line)
    summary = "PASS" if v.passed else "FAIL"
    if v.bound_limited:
        summary += " [bound-limited]"
    lines.append(f"result: {summary}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Interleaving oracle
#
# Threads execute one memory action per step against a single global
# store: one read per step inside expressions (subexpression reads may
# interleave in any order), writes and fences one step, rmw one
# indivisible step.  Local variables live in a per-thread stack, not in
# the store.  Reads that observe a value outside the configured domain
# abandon the path: the pomset semantics cannot read such values back
# either, so the two sides stay comparable.


def _expr_leaves(e, path=()):
    if isinstance(e, (syn.ReadExp, syn.RmwExp)):
        yield path, e
    elif isinstance(e, syn.BinOp):
        yield from _expr_leaves(e.left, path + ("left",))
        yield from _expr_leaves(e.right, path + ("right",))
    elif isinstance(e, syn.CmpExp):
        yield from _expr_leaves(e.left, path + ("left",))
        yield from _expr_leaves(e.right, path + ("right",))
    elif isinstance(e, syn.NotExp):
        yield from _expr_leaves(e.arg, path + ("arg",))
    elif isinstance(e, syn.OrExp):
        yield from _expr_leaves(e.left, path + ("left",))
        yield from _expr_leaves(e.right, path + ("right",))


def _replace(e, path, leaf):
    if not path:
        return leaf
    head, rest = path[0], path[1:]
    if isinstance(e, syn.BinOp):
        if head == "left":
            return syn.BinOp(e.op, _replace(e.left, rest, leaf), e.right)
        return syn.BinOp(e.op, e.left, _replace(e.right, rest, leaf))
    if isinstance(e, syn.CmpExp):
        if head == "left":
            return syn.CmpExp(e.op, _replace(e.left, rest, leaf), e.right)
        return syn.CmpExp(e.op, e.left, _replace(e.right, rest, leaf))
    if isinstance(e, syn.NotExp):
        return syn.NotExp(_replace(e.arg, rest, leaf))
    if isinstance(e, syn.OrExp):
        if head == "left":
            return syn.OrExp(_replace(e.left, rest, leaf), e.right)
        return syn.OrExp(e.left, _replace(e.right, rest, leaf))
    raise AssertionError("bad expression path")


def _fold_int(e) -> int:
    if isinstance(e, syn.IntLit):
        return e.value
    if isinstance(e, syn.BinOp):
        l, r = _fold_int(e.left), _fold_int(e.right)
        return {"+": l + r, "-": l - r, "*": l * r}[e.op]
    raise AssertionError(f"unevaluated expression: {e!r}")


def _fold_bool(b) -> bool:
    if isinstance(b, syn.BoolLit):
        return b.value
    if isinstance(b, syn.NotExp):
        return not _fold_bool(b.arg)
    if isinstance(b, syn.OrExp):
        return _fold_bool(b.left) or _fold_bool(b.right)
    if isinstance(b, syn.CmpExp):
        l, r = _fold_int(b.left), _fold_int(b.right)
        return l < r if b.op == "<" else l == r
    raise AssertionError(f"unevaluated guard: {b!r}")


def _normalize(cont, locals_stack, unroll):
    """Run all silent steps: skips, sequencing, folded guards, local scoping."""
    cont = list(cont)
    locals_stack = list(locals_stack)
    while cont:
        head = cont[0]
        tag = head[0]
        if tag == "c":
            c = head[1]
            if isinstance(c, syn.Skip):
                cont.pop(0)
            elif isinstance(c, syn.Seq):
                cont[0:1] = [("c", c.first), ("c", c.second)]
            elif isinstance(c, syn.Local):
                locals_stack.append((c.ident, c.init))
                cont[0:1] = [("c", c.body), ("pop",)]
            elif isinstance(c, syn.Assign):
                cont[0] = ("wr", c.ident, c.order, c.expr)
                break
            elif isinstance(c, syn.If):
                cont[0] = ("iff", c.guard, c.then, c.orelse)
            elif isinstance(c, syn.While):
                cont[0] = ("wh", c.guard, c.guard, c.body, unroll)
            else:
                break  # fence or rmw: an action step
        elif tag == "pop":
            locals_stack.pop()
            cont.pop(0)
        elif tag == "iff":
            _, guard, then, orelse = head
            if any(True for _ in _expr_leaves(guard)):
                break
            cont[0] = ("c", then if _fold_bool(guard) else orelse)
        elif tag == "wh":
            _, state, guard, body, fuel = head
            if any(True for _ in _expr_leaves(state)):
                break
            if not _fold_bool(state):
                cont.pop(0)
            elif fuel == 0:
                return None, None  # bound exhausted: path abandoned
            else:
                cont[0:1] = [("c", body), ("wh", guard, guard, body, fuel - 1)]
        else:
            break  # wr with a pending write step
    return tuple(cont), tuple(locals_stack)


def _lookup(x, locals_stack, store):
    for name, value in reversed(locals_stack):
        if name == x:
            return value, True
    return store.get(x), False


def _set(x, value, locals_stack, store):
    for idx in range(len(locals_stack) - 1, -1, -1):
        if locals_stack[idx][0] == x:
            updated = list(locals_stack)
            updated[idx] = (x, value)
            return tuple(updated), store
    new_store = dict(store)
    new_store[x] = value
    return locals_stack, new_store


def _leaf_steps(estate, locals_stack, store, values):
    """One successor per pending read/rmw leaf; reads outside the domain die."""
    for path, leaf in _expr_leaves(estate):
        if isinstance(leaf, syn.ReadExp):
            value, _ = _lookup(leaf.ident, locals_stack, store)
            if value is None or value not in values:
                continue
            yield _replace(estate, path, syn.IntLit(value)), locals_stack, store
        else:
            value, is_local = _lookup(leaf.ident, locals_stack, store)
            if value is None or value not in values:
                continue
            graph = dict(leaf.fun.graph_over((value,)))
            if value not in graph:
                continue
            written = graph[value]
            if is_local:
                new_locals, new_store = _set(leaf.ident, written, locals_stack, store)
            else:
                new_store = dict(store)
                new_store[leaf.ident] = written
                new_locals = locals_stack
            yield _replace(estate, path, syn.IntLit(written)), new_locals, new_store


def _thread_steps(cont, locals_stack, store, values, unroll):
    """All one-action successors of one thread: (cont, locals, store)."""
    if not cont:
        return
    head = cont[0]
    tag = head[0]
    if tag == "wr":
        _, x, order, estate = head
        leaves = list(_leaf_steps(estate, locals_stack, store, values))
        if any(True for _ in _expr_leaves(estate)):
            for new_e, new_locals, new_store in leaves:
                nc, nl = _normalize((("wr", x, order, new_e),) + cont[1:], new_locals, unroll)
                if nc is not None:
                    yield nc, nl, new_store
        else:
            value = _fold_int(estate)
            new_locals, new_store = _set(x, value, locals_stack, store)
            nc, nl = _normalize(cont[1:], new_locals, unroll)
            if nc is not None:
                yield nc, nl, new_store
    elif tag in ("iff", "wh"):
        estate = head[1]
        for new_e, new_locals, new_store in _leaf_steps(estate, locals_stack, store, values):
            new_head = (tag, new_e) + head[2:]
            nc, nl = _normalize((new_head,) + cont[1:], new_locals, unroll)
            if nc is not None:
                yield nc, nl, new_store
    elif tag == "c":
        c = head[1]
        if isinstance(c, syn.FenceCmd):
            nc, nl = _normalize(cont[1:], locals_stack, unroll)
            if nc is not None:
                yield nc, nl, store
        elif isinstance(c, syn.RmwCmd):
            value, _ = _lookup(c.ident, locals_stack, store)
            if value is None or value not in values:
                return
            graph = dict(c.fun.graph_over((value,)))
            if value not in graph:
                return
            new_store = dict(store)
            new_store[c.ident] = graph[value]
            nc, nl = _normalize(cont[1:], locals_stack, unroll)
            if nc is not None:
                yield nc, nl, new_store
        else:
            raise AssertionError(f"unnormalized command: {c!r}")
    else:
        raise AssertionError(f"unknown thread item: {head!r}")


def interleaving_oracle(
    p: syn.Prog,
    initial: State,
    values=(0, 1, 2, 3),
    unroll: int = 4,
) -> frozenset:
    """All final stores reachable by exhaustive interleaving.

    Loops run at most ``unroll`` iterations per activation, matching the
    bound the pomset semantics unrolls to; paths that would iterate
    deeper are abandoned rather than truncated mid-loop.
    """
    values = tuple(values)
    store0 = dict(initial)
    unbound = free_idents(p) - set(store0)
    if unbound:
        raise ValueError(f"initial state misses identifiers: {sorted(unbound)}")

    threads0 = []
    for t in p.threads:
        cont, locals_stack = _normalize((("c", t),), (), unroll)
        if cont is None:
            return frozenset()  # a thread diverges before its first action
        threads0.append((cont, locals_stack))

    start = (tuple(sorted(store0.items())), tuple(threads0))
    seen = {start}
    stack = [start]
    finals = set()
    while stack:
        store_items, threads = stack.pop()
        if all(not cont for cont, _ in threads):
            finals.add(store_items)
            continue
        store = dict(store_items)
        for idx, (cont, locals_stack) in enumerate(threads):
            for nc, nl, ns in _thread_steps(cont, locals_stack, store, values, unroll):
                new_threads = threads[:idx] + ((nc, nl),) + threads[idx + 1:]
                state = (tuple(sorted(ns.items())), new_threads)
                if state not in seen:
                    seen.add(state)
                    stack.append(state)
    return frozenset(finals)


# ---------------------------------------------------------------------------
# Cross-checking


def oracle_compatible(p: syn.Prog) -> bool:
    """Is a program inside the oracle's comparison domain?

    Single-threaded programs qualify.  Multi-threaded programs qualify
    when every atomic access is sc and every non-atomic identifier is
    confined to a single thread.
    """
    if len(p.threads) == 1:
        return True
    na_threads: dict = {}
    uses: list = []
    for i, t in enumerate(p.threads):
        thread_uses: list = []
        syn._cmd_uses(t, thread_uses, [])
        uses.append(thread_uses)
    for i, thread_uses in enumerate(uses):
        for kind, ident, order in thread_uses:
            if kind == "fence":
                if order is not SC:
                    return False
                continue
            if order is NA:
                na_threads.setdefault(ident, set()).add(i)
            elif order is not SC:
                return False
    return all(len(owners) == 1 for owners in na_threads.values())


@dataclass(frozen=True)
class CrossCheckReport:
    equal: bool
    engine_only: Tuple[State, ...]
    oracle_only: Tuple[State, ...]
    witnesses: Tuple[str, ...]  # pomset/footstep evidence for engine-only finals


def cross_check(
    p: syn.Prog,
    initial: State,
    dcfg: DenoteConfig = DenoteConfig(),
    ecfg: ExecConfig = ExecConfig(),
) -> CrossCheckReport:
    """Compare executions against the interleaving oracle on one program."""
    if not oracle_compatible(p):
        raise ValueError("program is outside the oracle's domain")
    from .execution import footprint, leq, render_footstep, supd, TOP

    den = denote_prog(p, dcfg)
    engine_finals = set()
    evidence: dict = {}
    for pomset in den.pomsets:
        for s, t in footprint(pomset, ecfg):
            if t is TOP or not leq(s, initial):
                continue
            final = supd(initial, t)
            engine_finals.add(final)
            evidence.setdefault(final, (pomset, (s, t)))

    oracle_finals = interleaving_oracle(p, initial, dcfg.values, dcfg.unroll)
    engine_only = tuple(sorted(engine_finals - oracle_finals))
    oracle_only = tuple(sorted(oracle_finals - engine_finals))
    witnesses = []
    for final in engine_only:
        pomset, step = evidence[final]
        from .actions import render_action

        shape = ", ".join(render_action(l) for l in pomset.labels)
        witnesses.append(
            f"final {render_state(final)} from pomset {{{shape}}} "
            f"via {render_footstep(step)}"
        )
    return CrossCheckReport(
        equal=not engine_only and not oracle_only,
        engine_only=engine_only,
        oracle_only=oracle_only,
        witnesses=tuple(witnesses),
    )
