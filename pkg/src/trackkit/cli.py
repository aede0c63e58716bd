"""The ``track`` command line tool: record, find, rm, slice, weave, serve."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .analysis import backward_slice, last_definition, slice_program
from .evaluator import Env, eval_program
from .features import render_featureset
from .history import HISTORY_ENV, History
from .parser import ScriptError, deparse, parse
from .service import DEFAULT_PORT, BindError, serve
from .store import build_record, open_store
from .weave import ChunkEvalError, DocumentError, weave_and_record


def _open_history() -> tuple[History | None, Path | None]:
    """The session history named by the environment, if one is configured."""
    location = os.environ.get(HISTORY_ENV)
    if not location:
        return None, None
    path = Path(location)
    history = History.load(path) if path.exists() else History()
    return history, path


def _parse_script(path: Path):
    return parse(path.read_text(encoding="utf-8"))


def cmd_record(args: argparse.Namespace) -> int:
    script = Path(args.script)
    program = _parse_script(script)
    env = Env(base_dir=script.parent)
    outcomes = eval_program(program, env)
    history, history_path = _open_history()
    if history is not None:
        for outcome in outcomes:
            if outcome.ok:
                history.append(program.exprs[outcome.index])
        history.save(history_path)
    at = last_definition(program, args.target)
    if at is None:
        print(f"error: {args.target} is never defined in {script}", file=sys.stderr)
        return 1
    if args.target not in env.vars:
        failure = next((o for o in outcomes if not o.ok and o.index == at), None)
        detail = f": {failure.error}" if failure is not None else ""
        print(f"error: evaluating {args.target} failed{detail}", file=sys.stderr)
        return 1
    record = build_record(
        env.vars[args.target],
        program=program,
        at=at,
        source_file=str(script),
        session_code_ref=history.session_id if history is not None else None,
    )
    stored = open_store(args.db).insert(record)
    print(stored.uniqueid)
    return 0


def cmd_find(args: argparse.Namespace) -> int:
    store = open_store(args.db)
    if args.count:
        print(store.find(args.pattern, field=args.field, ret_type="count"))
        return 0
    if args.ids:
        for uniqueid in store.find(args.pattern, field=args.field, ret_type="id"):
            print(uniqueid)
        return 0
    records = store.find(args.pattern, field=args.field)
    for i, record in enumerate(records):
        if i:
            print()
        print(render_featureset(record.featureset))
    return 0


def cmd_rm(args: argparse.Namespace) -> int:
    if open_store(args.db).remove(args.id):
        print(f"removed {args.id}")
        return 0
    print(f"error: no record with id {args.id}", file=sys.stderr)
    return 1


def cmd_slice(args: argparse.Namespace) -> int:
    program = _parse_script(Path(args.script))
    at = last_definition(program, args.target)
    if at is None:
        print(f"error: {args.target} is never defined in {args.script}", file=sys.stderr)
        return 1
    sliced = slice_program(program, backward_slice(program, at))
    sys.stdout.write(deparse(sliced))
    return 0


def cmd_weave(args: argparse.Namespace) -> int:
    store = open_store(args.db)
    history, history_path = _open_history()
    result = weave_and_record(args.document, store, history=history)
    if history is not None:
        result.history.save(history_path)
    if args.out:
        Path(args.out).write_text(result.output, encoding="utf-8")
        for artifact in result.artifacts:
            print(f"recorded {artifact.uniqueid}")
        print(f"report {result.report.uniqueid}")
    else:
        sys.stdout.write(result.output)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    serve(open_store(args.db), port=args.port, ui_dir=args.ui_dir)
    return 0


def _add_db_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--db", default=None, help="store location (default: TRACKR_DB or ~/.trackr/records.json)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="track", description="Record, search, and weave analysis results.")
    commands = parser.add_subparsers(dest="command", required=True)

    record = commands.add_parser("record", help="evaluate a script and record one variable")
    record.add_argument("script")
    record.add_argument("--target", required=True, help="variable to record")
    _add_db_option(record)
    record.set_defaults(run=cmd_record)

    find = commands.add_parser("find", help="search recorded results")
    find.add_argument("pattern")
    find.add_argument("--field", default=None, help="restrict the match to one field")
    group = find.add_mutually_exclusive_group()
    group.add_argument("--ids", action="store_true", help="print matching ids only")
    group.add_argument("--count", action="store_true", help="print the number of matches")
    _add_db_option(find)
    find.set_defaults(run=cmd_find)

    rm = commands.add_parser("rm", help="remove a record by id")
    rm.add_argument("id")
    _add_db_option(rm)
    rm.set_defaults(run=cmd_rm)

    sliced = commands.add_parser("slice", help="print the backward slice for a variable")
    sliced.add_argument("script")
    sliced.add_argument("--target", required=True)
    sliced.set_defaults(run=cmd_slice)

    weave = commands.add_parser("weave", help="evaluate a literate document and record its results")
    weave.add_argument("document")
    weave.add_argument("--out", default=None, help="write the rendered report here instead of stdout")
    _add_db_option(weave)
    weave.set_defaults(run=cmd_weave)

    server = commands.add_parser("serve", help="run the HTTP discovery service")
    server.add_argument("--port", type=int, default=DEFAULT_PORT)
    server.add_argument("--ui-dir", default=None, help="directory of gallery assets to serve at /ui/")
    _add_db_option(server)
    server.set_defaults(run=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except ScriptError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (DocumentError, ChunkEvalError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except BindError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
