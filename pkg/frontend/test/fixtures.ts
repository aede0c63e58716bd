/** Hand-written record documents mirroring docs/record-schema.md. */

import type { RecordDoc, SearchResponse, TableBlock } from "../src/types.js";

export const PLOT_ID = "SpkyV2_" + "a1".repeat(16);
export const MODEL_ID = "SpkyV2_" + "b2".repeat(16);
export const REPORT_ID = "SpkyV2_" + "c3".repeat(16);

export const PLOT_CODE = [
  "library(vizlib)",
  "set_seed(620)",
  'd <- read_csv("gems10k.csv")',
  "s <- sample_rows(d, 3000)",
  'p <- plot_spec(s, x="carat", y="price", color="clarity", geoms=["point", "smooth"])',
].join("\n");

const gemsSummary: TableBlock = {
  kind: "table",
  nrow: 3000,
  ncol: 3,
  numeric: [
    { name: "carat", min: 0.2, median: 1.1, mean: 1.2, max: 2.5 },
    { name: "price", min: 326, median: 2400, mean: 3100, max: 12000 },
  ],
  categorical: [
    {
      name: "clarity",
      distinct: 4,
      top_levels: [
        ["SI1", 900],
        ["VS2", 800],
        ["IF", 700],
        ["VVS1", 600],
      ],
    },
  ],
};

export const plotRecord: RecordDoc = {
  uniqueid: PLOT_ID,
  featureset: {
    uniqueid: PLOT_ID,
    klass: "plot",
    tags: ["plot", "plotspec", "scatter"],
    user: "alice",
    timestamp: "2026-02-03T10:15:00.000000Z",
    tool_version: "0.1.0",
    platform: "linux",
    source_file: "scripts/gems.tk",
    project: "gems",
    code: {
      source: PLOT_CODE,
      input_vars: [],
      packages: ["vizlib"],
      functions: ["plot_spec", "read_csv", "sample_rows", "set_seed"],
      n_statements: 5,
    },
    session_code_ref: null,
    specific: {
      kind: "plot",
      vars: [
        { column: "carat", role: "x" },
        { column: "price", role: "y" },
        { column: "clarity", role: "group.color" },
      ],
      geoms: ["point", "smooth"],
      stats: ["identity", "smooth"],
      system: "tracklang-plotspec",
      title: null,
      nobs: 3000,
      data_summary: gemsSummary,
    },
  },
  preview: "plot of price by carat",
  report_id: REPORT_ID,
  result_ids: [],
};

export const modelRecord: RecordDoc = {
  uniqueid: MODEL_ID,
  featureset: {
    uniqueid: MODEL_ID,
    klass: "model",
    tags: ["model", "lm"],
    user: "bob",
    timestamp: "2026-02-03T09:00:00.000000Z",
    tool_version: "0.1.0",
    platform: "linux",
    source_file: "scripts/fit.tk",
    project: "gems",
    code: {
      source: 'd <- read_csv("gems10k.csv")\nf <- fit_lm("price ~ carat", d)',
      input_vars: [],
      packages: [],
      functions: ["fit_lm", "read_csv"],
      n_statements: 2,
    },
    session_code_ref: null,
    specific: {
      kind: "model",
      formula: "price ~ carat",
      family: "gaussian",
      link: "identity",
      coef_names: ["(Intercept)", "carat"],
      coefficients: [-2256.4, 7756.4],
      significant_terms: ["carat"],
      nobs: 10000,
    },
  },
  preview: "lm price ~ carat",
  report_id: null,
  result_ids: [],
};

export const reportRecord: RecordDoc = {
  uniqueid: REPORT_ID,
  featureset: {
    uniqueid: REPORT_ID,
    klass: "report",
    tags: ["report", "weekly"],
    user: "alice",
    timestamp: "2026-02-03T10:16:00.000000Z",
    tool_version: "0.1.0",
    platform: "linux",
    source_file: "report.tmd",
    project: "gems",
    code: null,
    session_code_ref: null,
    specific: {
      kind: "report",
      title: "Gem price report",
      text: "Prices rise steeply with carat.",
      result_ids: [PLOT_ID],
      n_results: 1,
      n_plots: 1,
      results_interdependent: false,
    },
  },
  preview: "report: Gem price report",
  report_id: null,
  result_ids: [PLOT_ID],
};

export const ALL_RECORDS = [plotRecord, modelRecord, reportRecord];

const CODE_BY_ID: Record<string, string> = {
  [PLOT_ID]: PLOT_CODE,
  [MODEL_ID]: modelRecord.featureset.code?.source ?? "",
  [REPORT_ID]: "",
};

function matchesQuery(record: RecordDoc, q: string): boolean {
  if (q === "") return true;
  return JSON.stringify(record).toLowerCase().includes(q.toLowerCase());
}

function matchesFacets(record: RecordDoc, params: URLSearchParams): boolean {
  for (const [key, value] of params) {
    if (!key.startsWith("facet.")) continue;
    const field = key.slice("facet.".length);
    if (field === "klass" && record.featureset.klass !== value) return false;
    if (field === "user" && record.featureset.user !== value) return false;
    if (field === "tags" && !record.featureset.tags.includes(value)) return false;
    if (field === "geoms") {
      const specific = record.featureset.specific;
      if (specific.kind !== "plot" || !specific.geoms.includes(value)) return false;
    }
  }
  return true;
}

function json(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

/** A fetch stand-in implementing just enough of the service contract. */
export function fakeService(records: RecordDoc[] = ALL_RECORDS): typeof fetch {
  return ((input: RequestInfo | URL) => {
    const url = new URL(String(input), "http://testhost");
    const parts = url.pathname.split("/").filter((p) => p !== "");
    if (url.pathname === "/records") {
      const q = url.searchParams.get("q") ?? "";
      const page = Number(url.searchParams.get("page") ?? "1");
      const pageSize = Number(url.searchParams.get("page_size") ?? "20");
      const hits = records.filter(
        (r) => matchesQuery(r, q) && matchesFacets(r, url.searchParams),
      );
      const body: SearchResponse = {
        query: q,
        field: null,
        page,
        page_size: pageSize,
        total: hits.length,
        records: hits.slice((page - 1) * pageSize, page * pageSize),
      };
      return Promise.resolve(json(body));
    }
    if (parts.length >= 2 && parts[0] === "records") {
      const id = parts[1] as string;
      const record = records.find((r) => r.uniqueid === id);
      if (parts.length === 3 && parts[2] === "code") {
        if (record === undefined) return Promise.resolve(json({ detail: "missing" }, 404));
        return Promise.resolve(new Response(CODE_BY_ID[id] ?? "", { status: 200 }));
      }
      if (parts.length === 2) {
        if (record === undefined) return Promise.resolve(json({ detail: "missing" }, 404));
        return Promise.resolve(json(record));
      }
    }
    return Promise.resolve(json({ detail: "unknown endpoint" }, 404));
  }) as typeof fetch;
}
