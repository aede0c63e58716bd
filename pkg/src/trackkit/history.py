"""Session capture: an append-only log of successfully evaluated statements.

Each entry pairs a statement with a UTC timestamp and an origin marker
("interactive", or "weave:<label>" when a report chunk ran it).  The log
serializes to a tab-separated text file, one entry per line; canonical
printing guarantees each statement fits on a single line.  Files use the
``.histry`` suffix by convention.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from .hashing import artifact_id
from .parser import Program, TopExpr, deparse_top, make_program, parse, ScriptError

HISTORY_SUFFIX = ".histry"
HISTORY_ENV = "TRACKR_HISTORY"
INTERACTIVE = "interactive"
_WEAVE_PREFIX = "weave:"


class FormatError(Exception):
    """A history file line that cannot be decoded."""

    def __init__(self, message: str, line: int):
        super().__init__(f"{message} (line {line})")
        self.line = line


def rfc3339(moment: datetime) -> str:
    """UTC timestamp with a fixed-width fraction, so text order is time order."""
    return moment.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def now_rfc3339() -> str:
    return rfc3339(datetime.now(timezone.utc))


def weave_origin(label: str) -> str:
    return _WEAVE_PREFIX + label


def _valid_origin(origin: str) -> bool:
    if origin == INTERACTIVE:
        return True
    return origin.startswith(_WEAVE_PREFIX) and len(origin) > len(_WEAVE_PREFIX)


@dataclass(frozen=True)
class HistoryEntry:
    top: TopExpr
    timestamp: str
    origin: str


class History:
    """Ordered log of executed statements for one session."""

    def __init__(self, clock: Callable[[], str] | None = None):
        self._clock = clock or now_rfc3339
        self.started_at = self._clock()
        self.session_id = artifact_id(self.started_at.encode("utf-8") + os.urandom(16))
        self.entries: list[HistoryEntry] = []

    def append(self, top: TopExpr, origin: str = INTERACTIVE) -> HistoryEntry:
        if not _valid_origin(origin):
            raise ValueError(f"bad origin {origin!r}")
        entry = HistoryEntry(top, self._clock(), origin)
        self.entries.append(entry)
        return entry

    def snapshot(self) -> Program:
        """The captured statements as one renumbered program."""
        return make_program(entry.top for entry in self.entries)

    def save(self, path: str | Path) -> None:
        lines = [
            f"{e.origin}\t{e.timestamp}\t{deparse_top(e.top)}\n" for e in self.entries
        ]
        Path(path).write_text("".join(lines), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path, clock: Callable[[], str] | None = None) -> "History":
        history = cls(clock=clock)
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), start=1):
            parts = line.split("\t")
            if len(parts) != 3:
                raise FormatError(f"expected 3 tab-separated fields, got {len(parts)}", lineno)
            origin, timestamp, source = parts
            if not _valid_origin(origin):
                raise FormatError(f"bad origin {origin!r}", lineno)
            try:
                program = parse(source)
            except ScriptError as err:
                raise FormatError(f"bad statement: {err}", lineno) from None
            if len(program.exprs) != 1:
                raise FormatError(
                    f"each line must hold exactly one statement, got {len(program.exprs)}", lineno
                )
            history.entries.append(HistoryEntry(program.exprs[0], timestamp, origin))
        return history
