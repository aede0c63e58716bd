"""HTTP discovery service: search, record pages, schematic thumbnails, and RSS."""

from __future__ import annotations

import dataclasses
import re
import socket
import xml.etree.ElementTree as ET
from datetime import datetime, timezone
from email.utils import format_datetime
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse, Response
from fastapi.staticfiles import StaticFiles

from .evaluator import Minstd
from .features import (
    FeatureSet,
    GenericFeatures,
    ModelFeatures,
    PlotFeatures,
    ReportFeatures,
    TableFeatures,
    flatten_text,
    with_content_id,
)
from .store import (
    BaseStore,
    CorruptStore,
    Record,
    field_matches,
    record_from_dict,
    record_to_dict,
)

DEFAULT_PORT = 7878
DEFAULT_PAGE_SIZE = 20
MAX_PAGE_SIZE = 200
DEFAULT_FEED_LIMIT = 20


class BindError(Exception):
    """The requested serving port could not be bound."""


def _bad_request(message: str) -> HTTPException:
    return HTTPException(status_code=400, detail={"code": 400, "message": message})


def _not_found(uniqueid: str) -> HTTPException:
    message = f"no record with id {uniqueid}"
    return HTTPException(status_code=404, detail={"code": 404, "message": message, "id": uniqueid})


# --- faceting ---


def matches_facets(record: Record, facets: list[tuple[str, str]]) -> bool:
    """Every facet path must have at least one leaf equal to the wanted text."""
    pairs = flatten_text(record.featureset)
    for selector, wanted in facets:
        if not any(field_matches(path, selector) and text == wanted for path, text in pairs):
            return False
    return True


# --- feed ---

_FIELD_QUERY = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z0-9_]+)*):(.*)$", re.S)


def split_feed_query(q: str) -> tuple[str, str | None]:
    """Split a feed query into (pattern, field).

    Feed URLs have a single query slot, so ``user:alice`` addresses the user
    field the way ``find(..., field=...)`` would.  Queries that need a literal
    colon inside the pattern can escape it with a regex class like ``[:]``.
    """
    matched = _FIELD_QUERY.match(q)
    if matched is None:
        return q, None
    return matched.group(2), matched.group(1)


def _rfc822(timestamp: str) -> str:
    parsed = datetime.strptime(timestamp, "%Y-%m-%dT%H:%M:%S.%fZ")
    return format_datetime(parsed.replace(tzinfo=timezone.utc), usegmt=True)


def _item_headline(featureset: FeatureSet) -> str:
    specific = featureset.specific
    if isinstance(specific, PlotFeatures):
        if specific.title:
            return specific.title
        return specific.vars[0].column if specific.vars else "plot"
    if isinstance(specific, ModelFeatures):
        return specific.formula
    if isinstance(specific, TableFeatures):
        names = [c.name for c in specific.numeric] + [c.name for c in specific.categorical]
        return names[0] if names else f"{specific.nrow}x{specific.ncol} table"
    if isinstance(specific, ReportFeatures):
        return specific.title or "report"
    if isinstance(specific, GenericFeatures):
        return specific.text
    return featureset.klass


def rss_feed(records: list[Record], *, base_url: str, query: str = "") -> bytes:
    """Render records as an RSS 2.0 feed, newest first as given."""
    root = ET.Element("rss", version="2.0")
    channel = ET.SubElement(root, "channel")
    suffix = f" matching {query}" if query else ""
    ET.SubElement(channel, "title").text = f"trackkit records{suffix}"
    ET.SubElement(channel, "link").text = base_url
    ET.SubElement(channel, "description").text = "Auto-updating search over recorded results."
    for record in records:
        featureset = record.featureset
        item = ET.SubElement(channel, "item")
        title = f"{featureset.klass}: {_item_headline(featureset)}"
        ET.SubElement(item, "title").text = title
        ET.SubElement(item, "link").text = f"{base_url}records/{record.uniqueid}"
        guid = ET.SubElement(item, "guid", isPermaLink="false")
        guid.text = record.uniqueid
        ET.SubElement(item, "pubDate").text = _rfc822(featureset.timestamp)
        ET.SubElement(item, "description").text = record.preview
    return ET.tostring(root, encoding="utf-8", xml_declaration=True)


# --- schematic thumbnails ---

_SVG_W = 240
_SVG_H = 180
_BOX = (36.0, 30.0, 228.0, 154.0)  # left, top, right, bottom of the plot area
_MAX_POINTS = 100
_GLYPH_COLORS = {
    "plot": "#4477aa",
    "model": "#aa3377",
    "table": "#228833",
    "report": "#ccbb44",
    "generic": "#66778a",
}


def _thumb_rng(record: Record) -> Minstd:
    tail = record.uniqueid[-32:]
    try:
        seed = int(tail, 16) % Minstd.MODULUS
    except ValueError:
        seed = 1
    return Minstd(seed)


def _unit(rng: Minstd) -> float:
    return rng.draw() / Minstd.MODULUS


def _numeric_range(summary: TableFeatures, column: str) -> tuple[float, float]:
    for numeric in summary.numeric:
        if numeric.name == column and numeric.max > numeric.min:
            return numeric.min, numeric.max
    return 0.0, 1.0


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _plot_glyphs(specific: PlotFeatures, rng: Minstd) -> list[str]:
    left, top, right, bottom = _BOX
    width = right - left
    height = bottom - top
    roles = {var.role: var.column for var in specific.vars}
    x_lo, x_hi = _numeric_range(specific.data_summary, roles.get("x", ""))
    y_lo, y_hi = _numeric_range(specific.data_summary, roles.get("y", ""))

    def place(x_frac: float, y_frac: float) -> tuple[float, float]:
        return left + x_frac * width, bottom - y_frac * height

    parts = [
        f'<rect class="axes" x="{left:g}" y="{top:g}" width="{width:g}" '
        f'height="{height:g}" fill="none" stroke="#444444"/>'
    ]
    for label, anchor, x, y in (
        (f"{x_lo:g}", "start", left, bottom + 14),
        (f"{x_hi:g}", "end", right, bottom + 14),
        (f"{y_hi:g}", "end", left - 4, top + 8),
        (f"{y_lo:g}", "end", left - 4, bottom),
    ):
        parts.append(
            f'<text x="{x:g}" y="{y:g}" font-size="8" text-anchor="{anchor}" '
            f'fill="#777777">{_escape(label)}</text>'
        )
    if "point" in specific.geoms:
        n = max(0, min(_MAX_POINTS, specific.data_summary.nrow))
        circles = []
        for _ in range(n):
            cx, cy = place(_unit(rng), _unit(rng))
            circles.append(f'<circle cx="{cx:.1f}" cy="{cy:.1f}" r="2.4" fill="#4477aa" fill-opacity="0.65"/>')
        parts.append('<g class="points">' + "".join(circles) + "</g>")
    if "smooth" in specific.geoms:
        x0, y0 = place(0.02, 0.15 + 0.3 * _unit(rng))
        x1, y1 = place(0.35, 0.3 + 0.4 * _unit(rng))
        x2, y2 = place(0.65, 0.4 + 0.4 * _unit(rng))
        x3, y3 = place(0.98, 0.55 + 0.3 * _unit(rng))
        parts.append(
            f'<path class="smooth" d="M {x0:.1f} {y0:.1f} C {x1:.1f} {y1:.1f}, '
            f'{x2:.1f} {y2:.1f}, {x3:.1f} {y3:.1f}" fill="none" stroke="#aa3377" stroke-width="2"/>'
        )
    if "line" in specific.geoms:
        steps = 8
        coords = []
        for i in range(steps + 1):
            px, py = place(i / steps, 0.2 + 0.6 * _unit(rng))
            coords.append(f"{px:.1f},{py:.1f}")
        parts.append(
            f'<polyline class="line" points="{" ".join(coords)}" fill="none" '
            f'stroke="#228833" stroke-width="1.5"/>'
        )
    if "bar" in specific.geoms or "histogram" in specific.geoms:
        bars = []
        n_bars = 8
        slot = width / n_bars
        for i in range(n_bars):
            bar_h = (0.15 + 0.8 * _unit(rng)) * height
            bx = left + i * slot + slot * 0.15
            bars.append(
                f'<rect x="{bx:.1f}" y="{bottom - bar_h:.1f}" width="{slot * 0.7:.1f}" '
                f'height="{bar_h:.1f}" fill="#66778a"/>'
            )
        parts.append('<g class="bars">' + "".join(bars) + "</g>")
    if "boxplot" in specific.geoms:
        mid_x = (left + right) / 2
        box_top, box_bottom = top + 0.3 * height, top + 0.7 * height
        parts.append(
            '<g class="box">'
            f'<line x1="{mid_x:g}" y1="{top + 8:g}" x2="{mid_x:g}" y2="{bottom - 8:g}" stroke="#444444"/>'
            f'<rect x="{mid_x - 18:g}" y="{box_top:g}" width="36" height="{box_bottom - box_top:g}" '
            'fill="#ffffff" stroke="#444444"/>'
            f'<line x1="{mid_x - 18:g}" y1="{(box_top + box_bottom) / 2:g}" x2="{mid_x + 18:g}" '
            f'y2="{(box_top + box_bottom) / 2:g}" stroke="#444444" stroke-width="2"/>'
            "</g>"
        )
    return parts


def thumbnail_svg(record: Record) -> bytes:
    """A deterministic schematic preview; a pure function of the record."""
    featureset = record.featureset
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{_SVG_H}" '
        f'viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="#ffffff"/>',
    ]
    if featureset.klass == "plot" and isinstance(featureset.specific, PlotFeatures):
        title = featureset.specific.title
        if title:
            parts.append(
                f'<text x="{_SVG_W / 2:g}" y="18" font-size="11" text-anchor="middle" '
                f'fill="#222222">{_escape(title)}</text>'
            )
        parts.extend(_plot_glyphs(featureset.specific, _thumb_rng(record)))
    else:
        color = _GLYPH_COLORS.get(featureset.klass, _GLYPH_COLORS["generic"])
        letter = (featureset.klass[:1] or "?").upper()
        parts.append(
            '<g class="placeholder">'
            f'<rect x="70" y="40" width="100" height="100" rx="12" fill="{color}" fill-opacity="0.15" '
            f'stroke="{color}"/>'
            f'<text x="{_SVG_W / 2:g}" y="100" font-size="42" text-anchor="middle" '
            f'dominant-baseline="middle" fill="{color}">{letter}</text>'
            "</g>"
        )
    parts.append("</svg>")
    return "".join(parts).encode("utf-8")


# --- application ---


def _packaged_ui_dir() -> Path | None:
    candidate = Path(__file__).parent / "ui"
    return candidate if candidate.is_dir() else None


def create_app(store: BaseStore, *, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="trackkit", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    async def _on_validation(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"detail": {"code": 400, "message": "invalid request parameters"}},
        )

    @app.exception_handler(CorruptStore)
    async def _on_corrupt(request: Request, exc: CorruptStore):
        return JSONResponse(
            status_code=500,
            content={"detail": {"code": 500, "message": f"backend failure: {exc}"}},
        )

    def fetch(uniqueid: str) -> Record:
        record = store.get(uniqueid)
        if record is None:
            raise _not_found(uniqueid)
        return record

    @app.get("/healthz")
    def healthz() -> PlainTextResponse:
        return PlainTextResponse("ok")

    @app.get("/records")
    def list_records(
        request: Request,
        q: str = "",
        field: str | None = None,
        page: int = 1,
        page_size: int = DEFAULT_PAGE_SIZE,
        format: str = "json",
    ):
        if format != "json":
            raise _bad_request(f"unsupported format {format!r}")
        if page < 1:
            raise _bad_request("page must be at least 1")
        if not 1 <= page_size <= MAX_PAGE_SIZE:
            raise _bad_request(f"page_size must be between 1 and {MAX_PAGE_SIZE}")
        facets = [
            (key[len("facet."):], value)
            for key, value in request.query_params.multi_items()
            if key.startswith("facet.")
        ]
        try:
            records = store.find(q, field=field)
        except re.error as err:
            raise _bad_request(f"bad pattern: {err}")
        if facets:
            records = [r for r in records if matches_facets(r, facets)]
        start = (page - 1) * page_size
        return {
            "query": q,
            "field": field,
            "page": page,
            "page_size": page_size,
            "total": len(records),
            "records": [record_to_dict(r) for r in records[start : start + page_size]],
        }

    @app.get("/records/{uniqueid}")
    def get_record(uniqueid: str):
        return record_to_dict(fetch(uniqueid))

    @app.get("/records/{uniqueid}/code")
    def get_code(uniqueid: str) -> PlainTextResponse:
        record = fetch(uniqueid)
        code = record.featureset.code
        return PlainTextResponse(code.source if code is not None else "")

    @app.get("/records/{uniqueid}/thumbnail.svg")
    def get_thumbnail(uniqueid: str) -> Response:
        return Response(content=thumbnail_svg(fetch(uniqueid)), media_type="image/svg+xml")

    @app.get("/feed.rss")
    def get_feed(request: Request, q: str = "", limit: int = DEFAULT_FEED_LIMIT):
        if limit < 1:
            raise _bad_request("limit must be at least 1")
        pattern, feed_field = split_feed_query(q)
        try:
            records = store.find(pattern, field=feed_field)
        except re.error as err:
            raise _bad_request(f"bad pattern: {err}")
        body = rss_feed(records[:limit], base_url=str(request.base_url), query=q)
        return Response(content=body, media_type="application/rss+xml")

    @app.post("/records", status_code=201)
    def create_record(body: dict):
        try:
            record = record_from_dict(body)
        except (KeyError, TypeError, ValueError) as err:
            raise _bad_request(f"bad record document: {err}")
        featureset = with_content_id(record.featureset)
        record = dataclasses.replace(record, uniqueid=featureset.uniqueid, featureset=featureset)
        return record_to_dict(store.insert(record))

    @app.delete("/records/{uniqueid}")
    def delete_record(uniqueid: str):
        return {"removed": store.remove(uniqueid)}

    resolved_ui = Path(ui_dir) if ui_dir is not None else _packaged_ui_dir()
    if resolved_ui is not None and resolved_ui.is_dir():
        app.mount("/ui", StaticFiles(directory=resolved_ui, html=True), name="ui")

    return app


def serve(
    store: BaseStore,
    *,
    port: int = DEFAULT_PORT,
    host: str = "127.0.0.1",
    ui_dir: str | Path | None = None,
) -> None:
    """Run the service until interrupted; raises BindError if the port is busy."""
    import uvicorn

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
    except OSError as err:
        raise BindError(f"cannot bind {host}:{port}: {err}") from None
    finally:
        probe.close()
    uvicorn.run(create_app(store, ui_dir=ui_dir), host=host, port=port, log_level="warning")
