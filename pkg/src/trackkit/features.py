"""Feature sets: the searchable annotation attached to every stored result.

A feature set combines fields common to every result (id, class, tags,
user, timestamp, provenance code) with a type-specific block extracted
from the value itself: plots report their variable roles and geoms,
model fits their formula and significant terms, tables their per-column
summaries.  Extractors are looked up by value type in a registry that
callers may override.

The content id hashes the canonical bytes of the feature set with the
session-dependent fields (uniqueid, timestamp, user, session_code_ref)
blanked, so re-running the same analysis yields the same id anywhere.
"""

from __future__ import annotations

import dataclasses
import getpass
import os
import sys
from dataclasses import dataclass
from typing import Callable

from . import __version__
from .analysis import CodeFeatures
from .evaluator import (
    ArtifactValue,
    ModelFit,
    PlotSpec,
    Scalar,
    Table,
    Unit,
    Vector,
)
from .hashing import artifact_id, canonical_bytes
from .history import now_rfc3339

PLOT_SYSTEM = "tracklang-plotspec"
DEFAULT_SIGNIFICANCE = 0.05


# --- type-specific feature blocks ---

@dataclass(frozen=True)
class NumericColumnSummary:
    name: str
    min: float
    median: float
    mean: float
    max: float


@dataclass(frozen=True)
class CategoricalColumnSummary:
    name: str
    distinct: int
    top_levels: tuple[tuple[str, int], ...]  # up to five (level, count) pairs


@dataclass(frozen=True)
class TableFeatures:
    nrow: int
    ncol: int
    numeric: tuple[NumericColumnSummary, ...]
    categorical: tuple[CategoricalColumnSummary, ...]


@dataclass(frozen=True)
class PlotVar:
    column: str
    role: str  # x, y, group.color, group.facet


@dataclass(frozen=True)
class PlotFeatures:
    vars: tuple[PlotVar, ...]
    geoms: tuple[str, ...]
    stats: tuple[str, ...]
    system: str
    title: str | None
    nobs: int
    data_summary: TableFeatures


@dataclass(frozen=True)
class ModelFeatures:
    formula: str
    family: str
    link: str
    coef_names: tuple[str, ...]
    coefficients: tuple[float, ...]
    significant_terms: tuple[str, ...]
    nobs: int


@dataclass(frozen=True)
class GenericFeatures:
    value_type: str
    length: int | None
    text: str


@dataclass(frozen=True)
class ReportFeatures:
    title: str | None
    text: str  # whitespace-normalized prose
    result_ids: tuple[str, ...]
    n_results: int
    n_plots: int
    results_interdependent: bool


SpecificFeatures = (
    PlotFeatures | ModelFeatures | TableFeatures | GenericFeatures | ReportFeatures
)

_KLASS_BY_TYPE = {
    PlotFeatures: "plot",
    ModelFeatures: "model",
    TableFeatures: "table",
    GenericFeatures: "generic",
    ReportFeatures: "report",
}


@dataclass(frozen=True)
class FeatureSet:
    uniqueid: str
    klass: str
    tags: tuple[str, ...]
    user: str
    timestamp: str
    tool_version: str
    platform: str
    source_file: str | None
    project: str | None
    code: CodeFeatures | None
    session_code_ref: str | None
    specific: SpecificFeatures


def content_id(featureset: FeatureSet) -> str:
    """Hash of the feature set with session-dependent fields blanked."""
    stripped = dataclasses.replace(
        featureset, uniqueid="", timestamp="", user="", session_code_ref=None
    )
    return artifact_id(canonical_bytes(stripped))


def with_content_id(featureset: FeatureSet) -> FeatureSet:
    return dataclasses.replace(featureset, uniqueid=content_id(featureset))


# --- extraction ---

@dataclass(frozen=True)
class ExtractOptions:
    significance: float = DEFAULT_SIGNIFICANCE


Extractor = Callable[[ArtifactValue, ExtractOptions], SpecificFeatures]


def _is_numeric(values) -> bool:
    return bool(values) and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in values
    )


def _median(ordered: list[float]) -> float:
    mid = len(ordered) // 2
    if len(ordered) % 2:
        return float(ordered[mid])
    return (ordered[mid - 1] + ordered[mid]) / 2


def _table_features(table: Table, options: ExtractOptions) -> TableFeatures:
    numeric = []
    categorical = []
    for name, col in zip(table.columns, table.data):
        if _is_numeric(col):
            ordered = sorted(float(v) for v in col)
            numeric.append(
                NumericColumnSummary(
                    name=name,
                    min=ordered[0],
                    median=_median(ordered),
                    mean=sum(ordered) / len(ordered),
                    max=ordered[-1],
                )
            )
        else:
            counts: dict[str, int] = {}
            for v in col:
                key = str(v)
                counts[key] = counts.get(key, 0) + 1
            top = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:5]
            categorical.append(
                CategoricalColumnSummary(name=name, distinct=len(counts), top_levels=tuple(top))
            )
    return TableFeatures(
        nrow=table.nrow(),
        ncol=len(table.columns),
        numeric=tuple(numeric),
        categorical=tuple(categorical),
    )


def _plot_features(plot: PlotSpec, options: ExtractOptions) -> PlotFeatures:
    roles = [PlotVar(plot.x, "x"), PlotVar(plot.y, "y")]
    if plot.color is not None:
        roles.append(PlotVar(plot.color, "group.color"))
    if plot.facet is not None:
        roles.append(PlotVar(plot.facet, "group.facet"))
    return PlotFeatures(
        vars=tuple(roles),
        geoms=plot.geoms,
        stats=plot.stats,
        system=PLOT_SYSTEM,
        title=plot.title,
        nobs=plot.data.nrow(),
        data_summary=_table_features(plot.data, options),
    )


def _model_features(fit: ModelFit, options: ExtractOptions) -> ModelFeatures:
    significant = tuple(
        name
        for name, p in zip(fit.coef_names, fit.p_values)
        if name != "(Intercept)" and p < options.significance
    )
    return ModelFeatures(
        formula=fit.formula,
        family="gaussian",
        link="identity",
        coef_names=fit.coef_names,
        coefficients=fit.coefficients,
        significant_terms=significant,
        nobs=fit.nobs,
    )


def _generic_features(value: ArtifactValue, options: ExtractOptions) -> GenericFeatures:
    if isinstance(value, Vector):
        return GenericFeatures("vector", len(value.values), value_preview(value))
    if isinstance(value, Scalar):
        return GenericFeatures("scalar", None, value_preview(value))
    return GenericFeatures(type(value).__name__.lower(), None, value_preview(value))


_DEFAULT_EXTRACTORS: dict[type, Extractor] = {
    PlotSpec: _plot_features,
    ModelFit: _model_features,
    Table: _table_features,
    Vector: _generic_features,
    Scalar: _generic_features,
}

_extractors: dict[type, Extractor] = dict(_DEFAULT_EXTRACTORS)


def register_extractor(value_type: type, extractor: Extractor) -> None:
    """Install an extractor for a value type; the newest wins."""
    _extractors[value_type] = extractor


def unregister_extractor(value_type: type) -> None:
    """Drop a custom extractor, restoring the built-in when there is one."""
    if value_type in _DEFAULT_EXTRACTORS:
        _extractors[value_type] = _DEFAULT_EXTRACTORS[value_type]
    else:
        _extractors.pop(value_type, None)


def extract_specific(
    value: ArtifactValue, options: ExtractOptions | None = None
) -> SpecificFeatures:
    """Run the registered extractor for a value's type."""
    extractor = _extractors.get(type(value))
    if extractor is None:
        raise ValueError(f"no extractor registered for {type(value).__name__}")
    return extractor(value, options if options is not None else ExtractOptions())


def default_tags(specific: SpecificFeatures) -> tuple[str, ...]:
    klass = _KLASS_BY_TYPE[type(specific)]
    if isinstance(specific, PlotFeatures):
        return ("plot", "plotspec")
    if isinstance(specific, ModelFeatures):
        return ("model", "lm")
    return (klass,)


def merge_tags(base: tuple[str, ...], extra) -> tuple[str, ...]:
    merged = []
    for tag in list(base) + [t for t in extra]:
        tag = tag.strip().lower()
        if tag and tag not in merged:
            merged.append(tag)
    return tuple(merged)


def build_featureset(
    specific: SpecificFeatures,
    *,
    tags=(),
    user: str | None = None,
    timestamp: str | None = None,
    source_file: str | None = None,
    project: str | None = None,
    code: CodeFeatures | None = None,
    session_code_ref: str | None = None,
) -> FeatureSet:
    """Wrap a specific feature block with the common fields and its id."""
    featureset = FeatureSet(
        uniqueid="",
        klass=_KLASS_BY_TYPE[type(specific)],
        tags=merge_tags(default_tags(specific), tags),
        user=user if user is not None else current_user(),
        timestamp=timestamp if timestamp is not None else now_rfc3339(),
        tool_version=__version__,
        platform=sys.platform,
        source_file=source_file,
        project=project,
        code=code,
        session_code_ref=session_code_ref,
        specific=specific,
    )
    return with_content_id(featureset)


def extract_features(
    value: ArtifactValue,
    *,
    tags=(),
    user: str | None = None,
    timestamp: str | None = None,
    source_file: str | None = None,
    project: str | None = None,
    code: CodeFeatures | None = None,
    session_code_ref: str | None = None,
    significance: float = DEFAULT_SIGNIFICANCE,
) -> FeatureSet:
    """Annotate a value; the returned feature set already carries its id."""
    if isinstance(value, Unit):
        raise ValueError("cannot annotate a unit value")
    extractor = _extractors.get(type(value))
    if extractor is None:
        raise ValueError(f"no extractor registered for {type(value).__name__}")
    specific = extractor(value, ExtractOptions(significance=significance))
    return build_featureset(
        specific,
        tags=tags,
        user=user,
        timestamp=timestamp,
        source_file=source_file,
        project=project,
        code=code,
        session_code_ref=session_code_ref,
    )


def current_user() -> str:
    override = os.environ.get("TRACKR_USER")
    if override:
        return override
    try:
        return getpass.getuser()
    except OSError:
        return "unknown"


# --- flattening for search ---


def flatten_text(featureset: FeatureSet) -> list[tuple[str, str]]:
    """Every scalar leaf as a (field path, text) pair, for regex search."""
    pairs: list[tuple[str, str]] = []

    def visit(node, path: str):
        if node is None:
            return
        if isinstance(node, bool):
            pairs.append((path, "true" if node else "false"))
        elif isinstance(node, (int, float, str)):
            pairs.append((path, str(node)))
        elif isinstance(node, (list, tuple)):
            for i, item in enumerate(node):
                visit(item, f"{path}[{i}]")
        elif dataclasses.is_dataclass(node):
            for field in dataclasses.fields(node):
                sub = f"{path}.{field.name}" if path else field.name
                visit(getattr(node, field.name), sub)
        else:
            raise TypeError(f"cannot flatten {type(node).__name__}")

    visit(featureset, "")
    return pairs


# --- rendering ---


def value_preview(value: ArtifactValue) -> str:
    if isinstance(value, Scalar):
        return repr(value.value)
    if isinstance(value, Vector):
        shown = ", ".join(repr(v) for v in value.values[:5])
        suffix = ", ..." if len(value.values) > 5 else ""
        return f"[{shown}{suffix}]"
    if isinstance(value, Table):
        return f"table with {value.nrow()} rows, {len(value.columns)} columns"
    if isinstance(value, PlotSpec):
        return f"plot of {value.y} vs {value.x} ({' '.join(value.geoms)})"
    if isinstance(value, ModelFit):
        return f"linear model {value.formula}"
    if isinstance(value, Unit):
        return "(no value)"
    return repr(value)


def _specific_lines(specific: SpecificFeatures) -> list[str]:
    if isinstance(specific, PlotFeatures):
        vars_text = ", ".join(f"{v.column} <{v.role}>" for v in specific.vars)
        lines = [
            f"vars: {vars_text}",
            f"geom(s): {' '.join(specific.geoms)}",
            f"stat(s): {' '.join(specific.stats)}",
            f"system: {specific.system}",
            f"nobs: {specific.nobs}",
        ]
        if specific.title:
            lines.insert(0, f"title: {specific.title}")
        return lines
    if isinstance(specific, ModelFeatures):
        return [
            f"formula: {specific.formula}",
            f"family: {specific.family}",
            f"link: {specific.link}",
            f"coef(s): {' '.join(specific.coef_names)}",
            f"signif: {' '.join(specific.significant_terms) or '(none)'}",
            f"nobs: {specific.nobs}",
        ]
    if isinstance(specific, TableFeatures):
        lines = [f"rows: {specific.nrow}", f"cols: {specific.ncol}"]
        for num in specific.numeric:
            lines.append(
                f"num {num.name}: min {num.min:g}, median {num.median:g}, "
                f"mean {num.mean:g}, max {num.max:g}"
            )
        for cat in specific.categorical:
            levels = " ".join(f"{level}({count})" for level, count in cat.top_levels)
            lines.append(f"cat {cat.name}: {cat.distinct} distinct: {levels}")
        return lines
    if isinstance(specific, ReportFeatures):
        lines = [
            f"title: {specific.title or '(untitled)'}",
            f"results: {specific.n_results}",
            f"plots: {specific.n_plots}",
            f"interdependent: {'yes' if specific.results_interdependent else 'no'}",
        ]
        lines.extend(f"result: {rid}" for rid in specific.result_ids)
        return lines
    return [f"type: {specific.value_type}", f"value: {specific.text}"]


def render_featureset(featureset: FeatureSet) -> str:
    """Multi-line plain-text card describing one stored result."""
    lines = [
        f"id: {featureset.uniqueid}",
        f"klass: {featureset.klass}",
        f"tags: {', '.join(featureset.tags)}",
        f"user: {featureset.user}",
        f"time: {featureset.timestamp}",
    ]
    if featureset.project:
        lines.append(f"project: {featureset.project}")
    if featureset.source_file:
        lines.append(f"source: {featureset.source_file}")
    lines.extend(_specific_lines(featureset.specific))
    if featureset.code is not None:
        lines.append("code:")
        lines.extend(f"  {code_line}" for code_line in featureset.code.source.splitlines())
    return "\n".join(lines)
