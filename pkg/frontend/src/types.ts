/** Shapes of the JSON documents the service returns (see docs/record-schema.md). */

export interface NumericColumn {
  name: string;
  min: number;
  median: number;
  mean: number;
  max: number;
}

export interface CategoricalColumn {
  name: string;
  distinct: number;
  top_levels: [string, number][];
}

export interface TableBlock {
  kind: "table";
  nrow: number;
  ncol: number;
  numeric: NumericColumn[];
  categorical: CategoricalColumn[];
}

export interface PlotBlock {
  kind: "plot";
  vars: { column: string; role: string }[];
  geoms: string[];
  stats: string[];
  system: string;
  title: string | null;
  nobs: number;
  data_summary: TableBlock;
}

export interface ModelBlock {
  kind: "model";
  formula: string;
  family: string;
  link: string;
  coef_names: string[];
  coefficients: number[];
  significant_terms: string[];
  nobs: number;
}

export interface GenericBlock {
  kind: "generic";
  value_type: string;
  length: number | null;
  text: string;
}

export interface ReportBlock {
  kind: "report";
  title: string | null;
  text: string;
  result_ids: string[];
  n_results: number;
  n_plots: number;
  results_interdependent: boolean;
}

export type SpecificBlock = PlotBlock | ModelBlock | TableBlock | GenericBlock | ReportBlock;

export interface CodeBlock {
  source: string;
  input_vars: string[];
  packages: string[];
  functions: string[];
  n_statements: number;
}

export interface FeatureSetDoc {
  uniqueid: string;
  klass: string;
  tags: string[];
  user: string;
  timestamp: string;
  tool_version: string;
  platform: string;
  source_file: string | null;
  project: string | null;
  code: CodeBlock | null;
  session_code_ref: string | null;
  specific: SpecificBlock;
}

export interface RecordDoc {
  uniqueid: string;
  featureset: FeatureSetDoc;
  preview: string;
  report_id: string | null;
  result_ids: string[];
}

export interface SearchResponse {
  query: string;
  field: string | null;
  page: number;
  page_size: number;
  total: number;
  records: RecordDoc[];
}
