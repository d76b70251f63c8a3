"""Command-line frontend: parse, denote, footprint, run, litmus, oracle.

Reads are enumerated over a finite value domain (--values) and loops are
unrolled to a finite bound (--unroll), so results are exact only for
programs whose reachable values fit the domain; the litmus runner marks
verdicts that depend on the bound as bound-limited.

Exit codes: 0 success, 1 internal error, 2 input error, 3 racy result or
failed litmus expectation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .actions import render_action
from .denote import DenoteConfig, denote_cmd, denote_prog
from .execution import (
    ExecConfig,
    PomsetSizeError,
    executions,
    footprint,
    proper,
    render_footstep,
    render_state,
)
from .litmus import (
    LitmusError,
    interleaving_oracle,
    parse_litmus,
    render_verdict,
    run_case,
)
from .pomset import sort_key, to_dot, transitive_reduction
from .syntax import (
    ParseError,
    check_static,
    free_idents,
    parse_program,
    pretty_print,
)
from . import syntax as syn

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2
EXIT_FINDING = 3


def _add_input_args(p):
    p.add_argument("path", nargs="?", help="program file")
    p.add_argument("-e", "--expr", help="inline program text")


def _add_denote_args(p):
    p.add_argument(
        "--values",
        default="0..3",
        help="read domain: K, LO..HI, or a comma list (default 0..3)",
    )
    p.add_argument("--unroll", type=int, default=4, help="loop unroll bound")
    p.add_argument(
        "--no-strict-sc",
        action="store_true",
        help="use the literal reordering relation, without the sc clause",
    )


def _parse_values(text: str):
    text = text.strip()
    if ".." in text:
        lo, _, hi = text.partition("..")
        return tuple(range(int(lo), int(hi) + 1))
    if "," in text:
        return tuple(sorted({int(v) for v in text.split(",")}))
    k = int(text)
    return tuple(range(0, k + 1))


def _parse_init(text, program):
    if text is None:
        return proper({x: 0 for x in sorted(free_idents(program))})
    bindings = {}
    for part in text.split():
        name, sep, value = part.partition("=")
        if not sep:
            raise ValueError(f"malformed init entry {part!r}")
        bindings[name] = int(value)
    return proper(bindings)


def _load_program(args):
    if args.expr is not None and args.path is not None:
        raise ValueError("give either a file or -e, not both")
    if args.expr is not None:
        text = args.expr
    elif args.path is not None:
        text = Path(args.path).read_text()
    else:
        raise ValueError("no input: give a file or -e 'program'")
    program = parse_program(text)
    diagnostics = check_static(program)
    if diagnostics:
        raise ParseError("; ".join(diagnostics), 1, 1)
    return program


def _dump_iexp(e, indent):
    pad = "  " * indent
    if isinstance(e, syn.IntLit):
        return [f"{pad}lit {e.value}"]
    if isinstance(e, syn.ReadExp):
        return [f"{pad}read {e.ident} @{e.order}"]
    if isinstance(e, syn.RmwExp):
        return [f"{pad}rmw {e.ident} @{e.order} {e.fun.pp()}"]
    if isinstance(e, syn.BinOp):
        return [f"{pad}binop {e.op}"] + _dump_iexp(e.left, indent + 1) + _dump_iexp(
            e.right, indent + 1
        )
    raise TypeError(repr(e))


def _dump_bexp(b, indent):
    pad = "  " * indent
    if isinstance(b, syn.BoolLit):
        return [f"{pad}bool {'true' if b.value else 'false'}"]
    if isinstance(b, syn.NotExp):
        return [f"{pad}not"] + _dump_bexp(b.arg, indent + 1)
    if isinstance(b, syn.OrExp):
        return [f"{pad}or"] + _dump_bexp(b.left, indent + 1) + _dump_bexp(
            b.right, indent + 1
        )
    if isinstance(b, syn.CmpExp):
        return [f"{pad}cmp {b.op}"] + _dump_iexp(b.left, indent + 1) + _dump_iexp(
            b.right, indent + 1
        )
    raise TypeError(repr(b))


def _dump_cmd(c, indent):
    pad = "  " * indent
    if isinstance(c, syn.Skip):
        return [f"{pad}skip"]
    if isinstance(c, syn.Assign):
        return [f"{pad}write {c.ident} @{c.order}"] + _dump_iexp(c.expr, indent + 1)
    if isinstance(c, syn.FenceCmd):
        return [f"{pad}fence @{c.order}"]
    if isinstance(c, syn.RmwCmd):
        return [f"{pad}rmw {c.ident} @{c.order} {c.fun.pp()}"]
    if isinstance(c, syn.Local):
        return [f"{pad}local {c.ident} = {c.init}"] + _dump_cmd(c.body, indent + 1)
    if isinstance(c, syn.Seq):
        return [f"{pad}seq"] + _dump_cmd(c.first, indent + 1) + _dump_cmd(
            c.second, indent + 1
        )
    if isinstance(c, syn.If):
        return (
            [f"{pad}if"]
            + _dump_bexp(c.guard, indent + 1)
            + [f"{pad}then"]
            + _dump_cmd(c.then, indent + 1)
            + [f"{pad}else"]
            + _dump_cmd(c.orelse, indent + 1)
        )
    if isinstance(c, syn.While):
        return (
            [f"{pad}while"]
            + _dump_bexp(c.guard, indent + 1)
            + [f"{pad}do"]
            + _dump_cmd(c.body, indent + 1)
        )
    raise TypeError(repr(c))


def _print_pomset(p, index, total, out):
    n = len(p)
    plural = "s" if n != 1 else ""
    print(f"--- pomset {index}/{total} ({n} element{plural})", file=out)
    for i in p.elements:
        print(f"  e{i}: {render_action(p.labels[i])}", file=out)
    edges = sorted(transitive_reduction(p))
    if edges:
        print("  edges: " + ", ".join(f"e{a}->e{b}" for a, b in edges), file=out)


def cmd_parse(args, out) -> int:
    program = _load_program(args)
    print(f"threads: {len(program.threads)}", file=out)
    for i, t in enumerate(program.threads):
        print(f"thread {i}:", file=out)
        for line in _dump_cmd(t, 1):
            print(line, file=out)
    print(f"pretty: {pretty_print(program)}", file=out)
    return EXIT_OK


def _configs(args):
    dcfg = DenoteConfig(
        values=_parse_values(args.values),
        unroll=args.unroll,
        strict_sc=not args.no_strict_sc,
    )
    max_size = getattr(args, "max_size", 14)
    ecfg = ExecConfig(max_pomset_size=max_size, strict_sc=not args.no_strict_sc)
    return dcfg, ecfg


def cmd_denote(args, out) -> int:
    program = _load_program(args)
    dcfg, _ = _configs(args)
    den = denote_prog(program, dcfg)
    pomsets = sorted(den.pomsets, key=sort_key)
    print(f"pomsets: {len(pomsets)}", file=out)
    print(f"truncated: {'yes' if den.truncated else 'no'}", file=out)
    shown = pomsets[: args.limit] if args.limit else pomsets
    for i, p in enumerate(shown, start=1):
        _print_pomset(p, i, len(pomsets), out)
    if args.limit and len(pomsets) > args.limit:
        print(f"... {len(pomsets) - args.limit} more not shown", file=out)
    if args.dot:
        blocks = [to_dot(p, f"p{i}") for i, p in enumerate(pomsets)]
        Path(args.dot).write_text("\n".join(blocks) + "\n")
        print(f"dot written to {args.dot}", file=out)
    return EXIT_OK


def cmd_footprint(args, out) -> int:
    program = _load_program(args)
    dcfg, ecfg = _configs(args)
    den = denote_prog(program, dcfg)
    pomsets = sorted(den.pomsets, key=sort_key)
    print(f"pomsets: {len(pomsets)}", file=out)
    print(f"truncated: {'yes' if den.truncated else 'no'}", file=out)
    for i, p in enumerate(pomsets, start=1):
        _print_pomset(p, i, len(pomsets), out)
        steps = sorted(render_footstep(f) for f in footprint(p, ecfg))
        for line in steps:
            print(f"  {line}", file=out)
        if not steps:
            print("  (no footsteps)", file=out)
    return EXIT_OK


def cmd_run(args, out) -> int:
    program = _load_program(args)
    dcfg, ecfg = _configs(args)
    initial = _parse_init(args.init, program)
    den = denote_prog(program, dcfg)
    finals = set()
    racy = False
    for p in den.pomsets:
        res = executions(p, initial, ecfg)
        finals |= res.finals
        racy = racy or res.racy
    for f in sorted(finals):
        print(f"final: {render_state(f)}", file=out)
    print(f"truncated: {'yes' if den.truncated else 'no'}", file=out)
    print(f"RACY: {'yes' if racy else 'no'}", file=out)
    return EXIT_FINDING if racy else EXIT_OK


def cmd_oracle(args, out) -> int:
    program = _load_program(args)
    dcfg, _ = _configs(args)
    initial = _parse_init(args.init, program)
    finals = interleaving_oracle(program, initial, dcfg.values, dcfg.unroll)
    for f in sorted(finals):
        print(f"final: {render_state(f)}", file=out)
    return EXIT_OK


def cmd_litmus(args, out) -> int:
    files = []
    for raw in args.paths:
        path = Path(raw)
        if path.is_dir():
            files.extend(sorted(path.glob("*.litmus")))
        elif path.exists():
            files.append(path)
        else:
            raise ValueError(f"no such file or directory: {raw}")
    if not files:
        raise ValueError("no cases")
    verdicts = []
    for path in files:
        case = parse_litmus(path.read_text())
        verdicts.append(run_case(case))
    for v in verdicts:
        print(render_verdict(v), file=out)
    passed = sum(1 for v in verdicts if v.passed)
    print(f"summary: {passed}/{len(verdicts)} cases passed", file=out)
    return EXIT_OK if passed == len(verdicts) else EXIT_FINDING


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pomc11",
        description=(
            "Pomset semantics engine and litmus checker for a C11-style "
            "memory model.  Reads enumerate a finite value domain and "
            "loops unroll to a finite bound; results are exact only when "
            "the domain covers every reachable value."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="dump the AST")
    _add_input_args(p)
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("denote", help="list the pomsets a program denotes")
    _add_input_args(p)
    _add_denote_args(p)
    p.add_argument("--limit", type=int, default=0, help="print at most N pomsets")
    p.add_argument("--dot", help="write DOT digraphs to this path")
    p.set_defaults(fn=cmd_denote)

    p = sub.add_parser("footprint", help="list footsteps per pomset")
    _add_input_args(p)
    _add_denote_args(p)
    p.add_argument("--max-size", type=int, default=14, dest="max_size")
    p.set_defaults(fn=cmd_footprint)

    p = sub.add_parser("run", help="final states and race verdict from a state")
    _add_input_args(p)
    _add_denote_args(p)
    p.add_argument("--max-size", type=int, default=14, dest="max_size")
    p.add_argument("--init", help="initial state, e.g. 'x=0 y=0' (default all zero)")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("oracle", help="exhaustive interleaving reference")
    _add_input_args(p)
    _add_denote_args(p)
    p.add_argument("--init", help="initial state (default all zero)")
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("litmus", help="run litmus files or directories")
    p.add_argument("paths", nargs="+")
    p.set_defaults(fn=cmd_litmus)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args, sys.stdout)
    except (ParseError, LitmusError, PomsetSizeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - report and exit nonzero
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
