"""Searchable record stores: in-memory, JSON file, and indexed backends.

A record wraps one annotated result: its content id, the feature set,
a short preview string, and report linkage (which report displayed it /
which results a report contains).  All backends expose the same insert,
get, find, and remove operations and must return identical answers; the
tests hold them to that.

Search runs a case-insensitive, unanchored regular expression over the
flattened (field path, text) pairs of each feature set.  Results come
back newest first, ties broken by id.  The indexed backend keeps a
sidecar inverted index over lowercase alphanumeric tokens; a plain
alphanumeric pattern can only match inside a single token, so scanning
the token dictionary for substring hits finds every candidate, and each
candidate is then confirmed with the real regex.  Any other pattern
falls back to the full scan.  A stale or damaged index is rebuilt from
the records file without complaint.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal

from filelock import FileLock

from .analysis import CodeFeatures
from .evaluator import ArtifactValue
from .features import (
    CategoricalColumnSummary,
    FeatureSet,
    GenericFeatures,
    ModelFeatures,
    NumericColumnSummary,
    PlotFeatures,
    PlotVar,
    ReportFeatures,
    TableFeatures,
    extract_features,
    flatten_text,
    value_preview,
)

log = logging.getLogger("trackkit.store")

SCHEMA_VERSION = 1
DB_ENV = "TRACKR_DB"
INDEX_MAGIC = b"TRKIDX1\n"

RetType = Literal["record", "id", "count"]


class CorruptStore(Exception):
    """The records file cannot be decoded; offset is a byte position."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset


@dataclass(frozen=True)
class Record:
    uniqueid: str
    featureset: FeatureSet
    preview: str
    report_id: str | None = None
    result_ids: tuple[str, ...] = ()


def default_db_path() -> Path:
    override = os.environ.get(DB_ENV)
    if override:
        return Path(override)
    return Path.home() / ".trackr" / "records.json"


# --- serialization ---

_SPECIFIC_KINDS = {
    "plot": PlotFeatures,
    "model": ModelFeatures,
    "table": TableFeatures,
    "generic": GenericFeatures,
    "report": ReportFeatures,
}
_KIND_BY_TYPE = {cls: kind for kind, cls in _SPECIFIC_KINDS.items()}


def _specific_to_dict(specific) -> dict:
    body = dataclasses.asdict(specific)
    body["kind"] = _KIND_BY_TYPE[type(specific)]
    return body


def _specific_from_dict(body: dict):
    kind = body.get("kind")
    cls = _SPECIFIC_KINDS.get(kind)
    if cls is None:
        raise CorruptStore(f"unknown feature kind {kind!r}")
    if cls is TableFeatures:
        return _table_features_from_dict(body)
    if cls is PlotFeatures:
        return PlotFeatures(
            vars=tuple(PlotVar(**v) for v in body["vars"]),
            geoms=tuple(body["geoms"]),
            stats=tuple(body["stats"]),
            system=body["system"],
            title=body["title"],
            nobs=body["nobs"],
            data_summary=_table_features_from_dict(body["data_summary"]),
        )
    if cls is ModelFeatures:
        return ModelFeatures(
            formula=body["formula"],
            family=body["family"],
            link=body["link"],
            coef_names=tuple(body["coef_names"]),
            coefficients=tuple(float(c) for c in body["coefficients"]),
            significant_terms=tuple(body["significant_terms"]),
            nobs=body["nobs"],
        )
    if cls is GenericFeatures:
        return GenericFeatures(body["value_type"], body["length"], body["text"])
    return ReportFeatures(
        title=body["title"],
        text=body["text"],
        result_ids=tuple(body["result_ids"]),
        n_results=body["n_results"],
        n_plots=body["n_plots"],
        results_interdependent=body["results_interdependent"],
    )


def _table_features_from_dict(body: dict) -> TableFeatures:
    return TableFeatures(
        nrow=body["nrow"],
        ncol=body["ncol"],
        numeric=tuple(NumericColumnSummary(**n) for n in body["numeric"]),
        categorical=tuple(
            CategoricalColumnSummary(
                name=c["name"],
                distinct=c["distinct"],
                top_levels=tuple((level, count) for level, count in c["top_levels"]),
            )
            for c in body["categorical"]
        ),
    )


def featureset_to_dict(fs: FeatureSet) -> dict:
    body = {
        "uniqueid": fs.uniqueid,
        "klass": fs.klass,
        "tags": list(fs.tags),
        "user": fs.user,
        "timestamp": fs.timestamp,
        "tool_version": fs.tool_version,
        "platform": fs.platform,
        "source_file": fs.source_file,
        "project": fs.project,
        "code": dataclasses.asdict(fs.code) if fs.code is not None else None,
        "session_code_ref": fs.session_code_ref,
        "specific": _specific_to_dict(fs.specific),
    }
    return body


def featureset_from_dict(body: dict) -> FeatureSet:
    code = body.get("code")
    return FeatureSet(
        uniqueid=body["uniqueid"],
        klass=body["klass"],
        tags=tuple(body["tags"]),
        user=body["user"],
        timestamp=body["timestamp"],
        tool_version=body["tool_version"],
        platform=body["platform"],
        source_file=body["source_file"],
        project=body["project"],
        code=CodeFeatures(
            source=code["source"],
            input_vars=tuple(code["input_vars"]),
            packages=tuple(code["packages"]),
            functions=tuple(code["functions"]),
            n_statements=code["n_statements"],
        )
        if code is not None
        else None,
        session_code_ref=body["session_code_ref"],
        specific=_specific_from_dict(body["specific"]),
    )


def record_to_dict(record: Record) -> dict:
    return {
        "uniqueid": record.uniqueid,
        "featureset": featureset_to_dict(record.featureset),
        "preview": record.preview,
        "report_id": record.report_id,
        "result_ids": list(record.result_ids),
    }


def record_from_dict(body: dict) -> Record:
    return Record(
        uniqueid=body["uniqueid"],
        featureset=featureset_from_dict(body["featureset"]),
        preview=body["preview"],
        report_id=body.get("report_id"),
        result_ids=tuple(body.get("result_ids") or ()),
    )


# --- search over flattened pairs ---


def _strip_brackets(segment: str) -> str:
    cut = segment.find("[")
    return segment if cut < 0 else segment[:cut]


def field_matches(path: str, field: str) -> bool:
    """True when a flattened path is addressed by a field selector.

    A selector matches its exact path, or the final dotted segment with
    positional brackets ignored (so ``user`` finds ``user`` and
    ``formula`` finds ``specific.formula``).
    """
    if path == field:
        return True
    last = _strip_brackets(path.rsplit(".", 1)[-1])
    return last == field


def _record_matches(record: Record, regex: re.Pattern, field: str | None) -> bool:
    for path, text in flatten_text(record.featureset):
        if field is not None and not field_matches(path, field):
            continue
        if regex.search(text):
            return True
    return False


def _ordered(records: Iterable[Record]) -> list[Record]:
    by_id = sorted(records, key=lambda r: r.uniqueid)
    return sorted(by_id, key=lambda r: r.featureset.timestamp, reverse=True)


def _shape(records: list[Record], ret_type: RetType):
    if ret_type == "record":
        return records
    if ret_type == "id":
        return [r.uniqueid for r in records]
    if ret_type == "count":
        return len(records)
    raise ValueError(f"ret_type must be record, id, or count, not {ret_type!r}")


class BaseStore:
    """Shared search behavior; storage primitives live in subclasses."""

    def all_records(self) -> list[Record]:
        raise NotImplementedError

    def get(self, uniqueid: str) -> Record | None:
        raise NotImplementedError

    def insert(self, record: Record) -> Record:
        raise NotImplementedError

    def remove(self, uniqueid: str) -> bool:
        raise NotImplementedError

    def find(self, pattern: str, field: str | None = None, ret_type: RetType = "record"):
        regex = re.compile(pattern, re.IGNORECASE)
        hits = [r for r in self.all_records() if _record_matches(r, regex, field)]
        return _shape(_ordered(hits), ret_type)


class MemoryStore(BaseStore):
    def __init__(self):
        self._records: dict[str, Record] = {}

    def all_records(self) -> list[Record]:
        return list(self._records.values())

    def get(self, uniqueid: str) -> Record | None:
        return self._records.get(uniqueid)

    def insert(self, record: Record) -> Record:
        if record.uniqueid in self._records:
            log.info("replacing existing record %s", record.uniqueid)
        self._records[record.uniqueid] = record
        return record

    def remove(self, uniqueid: str) -> bool:
        return self._records.pop(uniqueid, None) is not None


class JsonFileStore(BaseStore):
    """Records in one JSON file, guarded by an advisory lock.

    Every operation reads the file fresh, so concurrent processes see
    each other's writes; mutations rewrite atomically via a temp file.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else default_db_path()
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = FileLock(str(self.path) + ".lock")

    def _load(self) -> dict[str, Record]:
        if not self.path.exists():
            return {}
        raw = self.path.read_bytes()
        if not raw.strip():
            return {}
        try:
            body = json.loads(raw.decode("utf-8"))
        except json.JSONDecodeError as err:
            raise CorruptStore(
                f"{self.path} is not valid JSON at byte {err.pos}: {err.msg}", offset=err.pos
            ) from None
        if not isinstance(body, dict) or body.get("schema_version") != SCHEMA_VERSION:
            raise CorruptStore(
                f"{self.path} has schema {body.get('schema_version')!r}, expected {SCHEMA_VERSION}"
            )
        records = [record_from_dict(r) for r in body["records"]]
        return {r.uniqueid: r for r in records}

    def _save(self, records: dict[str, Record]) -> None:
        body = {
            "schema_version": SCHEMA_VERSION,
            "records": [record_to_dict(r) for r in records.values()],
        }
        text = json.dumps(body, sort_keys=True, indent=1)
        fd, tmp = tempfile.mkstemp(dir=str(self.path.parent), prefix=".records-", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(text)
            os.replace(tmp, self.path)
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise

    def all_records(self) -> list[Record]:
        with self._lock:
            return list(self._load().values())

    def get(self, uniqueid: str) -> Record | None:
        with self._lock:
            return self._load().get(uniqueid)

    def insert(self, record: Record) -> Record:
        with self._lock:
            records = self._load()
            if record.uniqueid in records:
                log.info("replacing existing record %s", record.uniqueid)
            records[record.uniqueid] = record
            self._save(records)
        return record

    def remove(self, uniqueid: str) -> bool:
        with self._lock:
            records = self._load()
            removed = records.pop(uniqueid, None) is not None
            if removed:
                self._save(records)
        return removed


def _tokenize(text: str) -> set[str]:
    tokens = set()
    current: list[str] = []
    for ch in text:
        if ch.isalnum():
            current.append(ch.lower())
        elif current:
            tokens.add("".join(current))
            current = []
    if current:
        tokens.add("".join(current))
    return tokens


class IndexedStore(BaseStore):
    """JSON file records plus an on-disk inverted index sidecar."""

    def __init__(self, path: str | Path | None = None):
        self._inner = JsonFileStore(path)
        self.path = self._inner.path
        self.index_path = self.path.with_name(self.path.name + ".idx")

    # storage primitives delegate; the index is rebuilt lazily on search

    def all_records(self) -> list[Record]:
        return self._inner.all_records()

    def get(self, uniqueid: str) -> Record | None:
        return self._inner.get(uniqueid)

    def insert(self, record: Record) -> Record:
        return self._inner.insert(record)

    def remove(self, uniqueid: str) -> bool:
        return self._inner.remove(uniqueid)

    def _fingerprint(self) -> str:
        try:
            stat = self.path.stat()
        except FileNotFoundError:
            return "missing"
        return f"{stat.st_size}:{stat.st_mtime_ns}"

    def _build_index(self) -> dict:
        postings: dict[str, list[list[str]]] = {}
        for record in self._inner.all_records():
            for path, text in flatten_text(record.featureset):
                for token in _tokenize(text):
                    postings.setdefault(token, []).append([record.uniqueid, path])
        return {"fingerprint": self._fingerprint(), "tokens": postings}

    def _write_index(self, index: dict) -> None:
        payload = INDEX_MAGIC + json.dumps(index, sort_keys=True).encode("utf-8")
        fd, tmp = tempfile.mkstemp(dir=str(self.index_path.parent), prefix=".idx-", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(payload)
            os.replace(tmp, self.index_path)
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise

    def _read_index(self) -> dict | None:
        try:
            raw = self.index_path.read_bytes()
        except FileNotFoundError:
            return None
        if not raw.startswith(INDEX_MAGIC):
            return None
        try:
            index = json.loads(raw[len(INDEX_MAGIC):].decode("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError):
            return None
        if not isinstance(index, dict) or "tokens" not in index:
            return None
        return index

    def _current_index(self) -> dict:
        index = self._read_index()
        if index is None or index.get("fingerprint") != self._fingerprint():
            index = self._build_index()
            self._write_index(index)
        return index

    def find(self, pattern: str, field: str | None = None, ret_type: RetType = "record"):
        if not pattern.isalnum():
            return self._inner.find(pattern, field=field, ret_type=ret_type)

        regex = re.compile(pattern, re.IGNORECASE)
        needle = pattern.lower()
        index = self._current_index()
        candidate_ids: set[str] = set()
        for token, postings in index["tokens"].items():
            if needle in token:
                for uniqueid, path in postings:
                    if field is not None and not field_matches(path, field):
                        continue
                    candidate_ids.add(uniqueid)
        by_id = {r.uniqueid: r for r in self._inner.all_records()}
        hits = []
        for uniqueid in candidate_ids:
            record = by_id.get(uniqueid)
            if record is not None and _record_matches(record, regex, field):
                hits.append(record)
        return _shape(_ordered(hits), ret_type)


def open_store(location: str | Path | None = None) -> BaseStore:
    """Open a backend by location: ``memory:``, ``indexed:PATH``, or a path."""
    if location is None:
        return JsonFileStore(default_db_path())
    text = str(location)
    if text == "memory:":
        return MemoryStore()
    if text.startswith("indexed:"):
        return IndexedStore(text[len("indexed:"):])
    return JsonFileStore(text)


# --- recording values ---


def build_record(
    value: ArtifactValue,
    *,
    program=None,
    at: int | None = None,
    tags=(),
    user: str | None = None,
    timestamp: str | None = None,
    source_file: str | None = None,
    project: str | None = None,
    session_code_ref: str | None = None,
    significance: float = 0.05,
    report_id: str | None = None,
) -> Record:
    """Annotate a value and wrap it as a record, without storing it."""
    code = None
    if program is not None and at is not None:
        from .analysis import extract_code_features

        code = extract_code_features(program, at)
    featureset = extract_features(
        value,
        tags=tags,
        user=user,
        timestamp=timestamp,
        source_file=source_file,
        project=project,
        code=code,
        session_code_ref=session_code_ref,
        significance=significance,
    )
    return Record(
        uniqueid=featureset.uniqueid,
        featureset=featureset,
        preview=value_preview(value),
        report_id=report_id,
    )


def record_artifact(store: BaseStore, value: ArtifactValue, **kwargs) -> Record:
    """Annotate a value and insert it; returns the stored record."""
    record = build_record(value, **kwargs)
    return store.insert(record)


def find_records(store: BaseStore, pattern: str, field: str | None = None, ret_type: RetType = "record"):
    return store.find(pattern, field=field, ret_type=ret_type)


def rm_record(store: BaseStore, target, **kwargs) -> bool:
    """Remove by id string, or by re-deriving the id from a value."""
    if isinstance(target, str):
        return store.remove(target)
    record = build_record(target, **kwargs)
    return store.remove(record.uniqueid)
