/** DOM builders. Pure functions of their inputs so views are testable. */
import { FACET_FIELDS } from "./state.js";
function el(tag, className, text) {
    const node = document.createElement(tag);
    if (className)
        node.className = className;
    if (text !== undefined)
        node.textContent = text;
    return node;
}
function headline(record) {
    const specific = record.featureset.specific;
    switch (specific.kind) {
        case "plot":
            return specific.title ?? specific.vars.map((v) => v.column).join(", ");
        case "model":
            return specific.formula;
        case "table":
            return `${specific.nrow} rows x ${specific.ncol} cols`;
        case "report":
            return specific.title ?? "report";
        case "generic":
            return specific.text;
    }
}
// --- search view ---
export function renderCard(record, thumbnailUrl) {
    const card = el("article", "card");
    card.dataset.id = record.uniqueid;
    const img = el("img", "card-thumb");
    img.src = thumbnailUrl;
    img.alt = `${record.featureset.klass} preview`;
    card.append(img);
    const body = el("div", "card-body");
    body.append(el("span", `badge badge-${record.featureset.klass}`, record.featureset.klass));
    body.append(el("h3", "card-title", headline(record)));
    const meta = el("div", "card-meta");
    meta.append(el("span", "card-user", record.featureset.user));
    meta.append(el("time", "card-time", record.featureset.timestamp));
    body.append(meta);
    card.append(body);
    return card;
}
export function renderEmpty(query) {
    const box = el("div", "empty-state");
    box.append(el("p", undefined, query === "" ? "Nothing recorded yet." : `No matches for "${query}".`));
    return box;
}
export function renderGrid(result, thumbnailUrl, onSelect) {
    if (result.records.length === 0) {
        return renderEmpty(result.query);
    }
    const grid = el("div", "grid");
    for (const record of result.records) {
        const card = renderCard(record, thumbnailUrl(record.uniqueid));
        card.addEventListener("click", () => onSelect(record.uniqueid));
        grid.append(card);
    }
    return grid;
}
export function renderPager(page, total, pageSize, onPage) {
    const pages = Math.max(1, Math.ceil(total / pageSize));
    const nav = el("nav", "pager");
    const prev = el("button", "pager-prev", "previous");
    prev.disabled = page <= 1;
    prev.addEventListener("click", () => onPage(page - 1));
    const next = el("button", "pager-next", "next");
    next.disabled = page >= pages;
    next.addEventListener("click", () => onPage(page + 1));
    nav.append(prev, el("span", "pager-label", `page ${page} of ${pages} (${total} records)`), next);
    return nav;
}
// --- facet sidebar ---
function facetValues(records, field) {
    const seen = new Set();
    for (const record of records) {
        const fs = record.featureset;
        if (field === "klass")
            seen.add(fs.klass);
        else if (field === "user")
            seen.add(fs.user);
        else if (field === "tags")
            fs.tags.forEach((t) => seen.add(t));
        else if (field === "geoms" && fs.specific.kind === "plot") {
            fs.specific.geoms.forEach((g) => seen.add(g));
        }
    }
    return [...seen].sort();
}
export function renderFacets(records, active, onToggle) {
    const aside = el("aside", "facets");
    for (const field of FACET_FIELDS) {
        const current = active[field];
        const values = facetValues(records, field);
        if (values.length === 0 && current === undefined)
            continue;
        const section = el("section", "facet-group");
        section.dataset.field = field;
        section.append(el("h4", undefined, field));
        for (const value of current !== undefined && !values.includes(current) ? [current, ...values] : values) {
            const chip = el("button", value === current ? "chip chip-active" : "chip", value);
            chip.addEventListener("click", () => onToggle(field, value === current ? null : value));
            section.append(chip);
        }
        aside.append(section);
    }
    return aside;
}
// --- detail view ---
function metadataRows(record) {
    const fs = record.featureset;
    const rows = [
        ["klass", fs.klass],
        ["user", fs.user],
        ["timestamp", fs.timestamp],
        ["tags", fs.tags.join(", ") || "(none)"],
    ];
    if (fs.project)
        rows.push(["project", fs.project]);
    if (fs.source_file)
        rows.push(["source", fs.source_file]);
    const specific = fs.specific;
    if (specific.kind === "plot") {
        rows.push(["vars", specific.vars.map((v) => `${v.column} <${v.role}>`).join(", ")]);
        rows.push(["geoms", specific.geoms.join(" ")]);
        rows.push(["stats", specific.stats.join(" ")]);
        if (specific.title)
            rows.push(["title", specific.title]);
        rows.push(["observations", String(specific.nobs)]);
    }
    else if (specific.kind === "model") {
        rows.push(["formula", specific.formula]);
        rows.push(["coefficients", specific.coef_names.join(", ")]);
        rows.push(["significant", specific.significant_terms.join(", ") || "(none)"]);
        rows.push(["observations", String(specific.nobs)]);
    }
    else if (specific.kind === "table") {
        rows.push(["shape", `${specific.nrow} x ${specific.ncol}`]);
        rows.push(["numeric columns", specific.numeric.map((c) => c.name).join(", ") || "(none)"]);
        rows.push(["categorical columns", specific.categorical.map((c) => c.name).join(", ") || "(none)"]);
    }
    else if (specific.kind === "report") {
        if (specific.title)
            rows.push(["title", specific.title]);
        rows.push(["results", String(specific.n_results)]);
        rows.push(["plots", String(specific.n_plots)]);
        rows.push(["interdependent", specific.results_interdependent ? "yes" : "no"]);
    }
    else {
        rows.push(["type", specific.value_type]);
        rows.push(["preview", specific.text]);
    }
    return rows;
}
export function renderDetail(record, code, thumbnailUrl, hooks) {
    const view = el("section", "detail");
    const back = el("button", "back-button", "back to results");
    back.addEventListener("click", hooks.onBack);
    view.append(back);
    const header = el("header", "detail-header");
    const img = el("img", "detail-thumb");
    img.src = thumbnailUrl;
    img.alt = `${record.featureset.klass} preview`;
    header.append(img, el("h2", undefined, headline(record)));
    view.append(header);
    const table = el("table", "metadata");
    for (const [key, value] of metadataRows(record)) {
        const row = el("tr");
        row.append(el("th", undefined, key), el("td", undefined, value));
        table.append(row);
    }
    view.append(table);
    const codePane = el("section", "code-pane");
    codePane.append(el("h4", undefined, "reproduction script"));
    const pre = el("pre", "code-text");
    pre.textContent = code;
    const copy = el("button", "copy-button", "copy reproduction script");
    copy.addEventListener("click", () => hooks.onCopy(code));
    codePane.append(pre, copy);
    view.append(codePane);
    const links = el("section", "links");
    if (record.report_id !== null) {
        const link = el("a", "report-link", "appears in report");
        link.href = `?id=${record.report_id}`;
        link.dataset.id = record.report_id;
        link.addEventListener("click", (event) => {
            event.preventDefault();
            hooks.onNavigate(record.report_id);
        });
        links.append(link);
    }
    record.result_ids.forEach((resultId, i) => {
        const link = el("a", "artifact-link", `result ${i + 1}`);
        link.href = `?id=${resultId}`;
        link.dataset.id = resultId;
        link.addEventListener("click", (event) => {
            event.preventDefault();
            hooks.onNavigate(resultId);
        });
        links.append(link);
    });
    if (links.childNodes.length > 0)
        view.append(links);
    return view;
}
export function renderError(message) {
    const card = el("div", "error-card");
    card.append(el("p", undefined, message));
    return card;
}
