"""Literate reports: run code chunks, store their results, link both ways.

A report document (``.tmd``) holds prose with fenced code chunks:

    ---
    title: Gem price check
    project: gems
    ---
    Some prose.

    ```{track sampling}
    d <- read_csv("gems.csv")
    ```

Chunks share one environment and one global statement sequence, so later
chunks see earlier definitions.  Every displayed result (a bare
expression with a value) becomes a stored record carrying the backward
slice that produced it; the report itself becomes one more record
listing those result ids, and each result record points back at the
report.  All insertions happen only after every chunk has evaluated, so
a failing chunk leaves the store untouched.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .analysis import backward_slice, extract_code_features
from .evaluator import Env, Unit, eval_top
from .features import ReportFeatures, build_featureset, extract_specific, value_preview
from .history import History, weave_origin
from .parser import (
    ExprStmt,
    Program,
    ScriptError,
    TopExpr,
    deparse,
    make_program,
    parse,
)
from .store import BaseStore, Record

DOCUMENT_SUFFIX = ".tmd"

_CHUNK_OPEN = re.compile(r"^```\{track(\s[^}]*)?\}\s*$")
_CHUNK_CLOSE = re.compile(r"^```\s*$")
_LABEL = re.compile(r"^[A-Za-z0-9_-]+$")


class WeaveError(Exception):
    pass


class DocumentError(WeaveError):
    """The document itself cannot be parsed."""


class ChunkEvalError(WeaveError):
    """A chunk failed while running; nothing was stored."""

    def __init__(self, label: str, message: str):
        super().__init__(f"chunk {label!r}: {message}")
        self.label = label


@dataclass
class TextSegment:
    text: str


@dataclass
class ChunkSegment:
    label: str
    display: bool
    source: str


@dataclass
class Document:
    front_matter: dict[str, str]
    segments: list[TextSegment | ChunkSegment]

    @property
    def chunks(self) -> list[ChunkSegment]:
        return [s for s in self.segments if isinstance(s, ChunkSegment)]


def _parse_front_matter(lines: list[str]) -> tuple[dict[str, str], int]:
    if not lines or lines[0].strip() != "---":
        return {}, 0
    matter: dict[str, str] = {}
    for i in range(1, len(lines)):
        line = lines[i]
        if line.strip() == "---":
            return matter, i + 1
        if not line.strip():
            continue
        if ":" not in line:
            raise DocumentError(f"front matter line {i + 1} is not 'key: value': {line!r}")
        key, value = line.split(":", 1)
        matter[key.strip()] = value.strip()
    raise DocumentError("front matter never closed with '---'")


def _parse_chunk_header(inner: str | None, position: int) -> tuple[str | None, bool]:
    label: str | None = None
    display = True
    if inner is None or not inner.strip():
        return None, True
    for part in inner.strip().split(","):
        part = part.strip()
        if not part:
            continue
        if "=" in part:
            key, value = (p.strip() for p in part.split("=", 1))
            if key == "label":
                label = value
            elif key == "display":
                if value not in ("true", "false"):
                    raise DocumentError(f"chunk {position}: display must be true or false")
                display = value == "true"
            else:
                raise DocumentError(f"chunk {position}: unknown option {key!r}")
        elif label is None:
            label = part
        else:
            raise DocumentError(f"chunk {position}: two labels given")
    if label is not None and not _LABEL.match(label):
        raise DocumentError(f"chunk {position}: bad label {label!r}")
    return label, display


def parse_document(text: str) -> Document:
    lines = text.splitlines()
    front_matter, start = _parse_front_matter(lines)
    segments: list[TextSegment | ChunkSegment] = []
    text_buffer: list[str] = []
    chunk_count = 0
    i = start
    while i < len(lines):
        open_match = _CHUNK_OPEN.match(lines[i])
        if not open_match:
            text_buffer.append(lines[i])
            i += 1
            continue
        if text_buffer:
            segments.append(TextSegment("\n".join(text_buffer)))
            text_buffer = []
        chunk_count += 1
        label, display = _parse_chunk_header(open_match.group(1), chunk_count)
        body: list[str] = []
        i += 1
        while i < len(lines) and not _CHUNK_CLOSE.match(lines[i]):
            body.append(lines[i])
            i += 1
        if i >= len(lines):
            raise DocumentError(f"chunk {chunk_count} never closed with ```")
        i += 1
        segments.append(
            ChunkSegment(
                label=label if label is not None else f"chunk-{chunk_count}",
                display=display,
                source="\n".join(body),
            )
        )
    if text_buffer:
        segments.append(TextSegment("\n".join(text_buffer)))

    labels = [c.label for c in segments if isinstance(c, ChunkSegment)]
    duplicates = {lab for lab in labels if labels.count(lab) > 1}
    if duplicates:
        raise DocumentError(f"duplicate chunk labels: {', '.join(sorted(duplicates))}")
    return Document(front_matter, segments)


def normalize_text(text: str) -> str:
    """Collapse every whitespace run to one space; the searchable prose."""
    return " ".join(text.split())


@dataclass
class WeaveResult:
    report: Record
    artifacts: list[Record]
    output: str
    program: Program
    history: History


@dataclass
class _Displayed:
    value: object
    global_index: int
    chunk_label: str
    preview: str = ""
    record: Record | None = field(default=None)


def weave_and_record(
    doc_path: str | Path,
    store: BaseStore,
    *,
    env: Env | None = None,
    history: History | None = None,
    user: str | None = None,
    clock: Callable[[], str] | None = None,
) -> WeaveResult:
    """Run every chunk of a document, then store results and the report."""
    doc_path = Path(doc_path)
    document = parse_document(doc_path.read_text(encoding="utf-8"))
    env = env if env is not None else Env(base_dir=doc_path.parent)
    history = history if history is not None else History(clock=clock)

    statements: list[TopExpr] = []
    chunk_of: dict[int, str] = {}
    displayed: list[_Displayed] = []

    for chunk in document.chunks:
        try:
            chunk_program = parse(chunk.source)
        except ScriptError as err:
            raise ChunkEvalError(chunk.label, str(err)) from None
        for top in chunk_program.exprs:
            global_index = len(statements)
            renumbered = dataclasses.replace(top, index=global_index)
            outcome = eval_top(renumbered, env)
            if not outcome.ok:
                raise ChunkEvalError(chunk.label, outcome.error or "evaluation failed")
            statements.append(renumbered)
            chunk_of[global_index] = chunk.label
            history.append(renumbered, origin=weave_origin(chunk.label))
            if (
                chunk.display
                and isinstance(renumbered, ExprStmt)
                and not isinstance(outcome.value, Unit)
            ):
                displayed.append(_Displayed(outcome.value, global_index, chunk.label))

    program = make_program(statements)
    title = document.front_matter.get("title")
    project = document.front_matter.get("project")
    extra_tags = tuple(
        t.strip() for t in document.front_matter.get("tags", "").split(",") if t.strip()
    )

    interdependent = False
    artifact_records: list[Record] = []
    stamps = clock if clock is not None else None
    for item in displayed:
        indices = backward_slice(program, item.global_index)
        if any(chunk_of[i] != item.chunk_label for i in indices):
            interdependent = True
        code = extract_code_features(program, item.global_index)
        featureset = build_featureset(
            extract_specific(item.value),
            user=user,
            timestamp=stamps() if stamps else None,
            source_file=str(doc_path),
            project=project,
            code=code,
            session_code_ref=history.session_id,
        )
        item.preview = value_preview(item.value)
        artifact_records.append(
            Record(featureset.uniqueid, featureset, item.preview)
        )

    result_ids = tuple(r.uniqueid for r in artifact_records)
    report_features = ReportFeatures(
        title=title,
        text=normalize_text(
            " ".join(s.text for s in document.segments if isinstance(s, TextSegment))
        ),
        result_ids=result_ids,
        n_results=len(result_ids),
        n_plots=sum(1 for r in artifact_records if r.featureset.klass == "plot"),
        results_interdependent=interdependent,
    )
    report_featureset = build_featureset(
        report_features,
        tags=extra_tags,
        user=user,
        timestamp=stamps() if stamps else None,
        source_file=str(doc_path),
        project=project,
        session_code_ref=history.session_id,
    )
    report = Record(
        report_featureset.uniqueid,
        report_featureset,
        f"report with {len(result_ids)} results",
        result_ids=result_ids,
    )

    # nothing was inserted before this point; artifacts first, report last
    stored_artifacts = []
    for record, item in zip(artifact_records, displayed):
        linked = Record(
            record.uniqueid, record.featureset, record.preview, report_id=report.uniqueid
        )
        item.record = linked
        stored_artifacts.append(store.insert(linked))
    store.insert(report)

    output = _render_output(document, displayed, report)
    return WeaveResult(report, stored_artifacts, output, program, history)


def _render_output(document: Document, displayed: list[_Displayed], report: Record) -> str:
    by_chunk: dict[str, list[_Displayed]] = {}
    for item in displayed:
        by_chunk.setdefault(item.chunk_label, []).append(item)

    parts: list[str] = []
    title = document.front_matter.get("title")
    if title:
        parts.append(f"# {title}\n")
    for segment in document.segments:
        if isinstance(segment, TextSegment):
            parts.append(segment.text)
            continue
        try:
            code = deparse(parse(segment.source)).rstrip("\n")
        except ScriptError:
            code = segment.source
        parts.append(f"```\n{code}\n```")
        for item in by_chunk.get(segment.label, ()):
            record = item.record
            assert record is not None
            parts.append(f"[{item.preview}]\n<!-- record: {record.uniqueid} -->")
    parts.append(f"<!-- report: {report.uniqueid} -->")
    return "\n".join(parts) + "\n"


def is_plot_record(record: Record) -> bool:
    return record.featureset.klass == "plot"
