/** Gallery view state, kept in bijection with the URL query string. */

export const FACET_FIELDS = ["klass", "geoms", "user", "tags"] as const;
export type FacetField = (typeof FACET_FIELDS)[number];

export interface GalleryState {
  query: string;
  facets: Partial<Record<FacetField, string>>;
  page: number;
  selected: string | null;
}

export function defaultState(): GalleryState {
  return { query: "", facets: {}, page: 1, selected: null };
}

function isFacetField(name: string): name is FacetField {
  return (FACET_FIELDS as readonly string[]).includes(name);
}

/** Read state back from a location.search string (with or without the "?"). */
export function parseState(search: string): GalleryState {
  const params = new URLSearchParams(search.startsWith("?") ? search.slice(1) : search);
  const state = defaultState();
  state.query = params.get("q") ?? "";
  const page = Number(params.get("page") ?? "1");
  state.page = Number.isInteger(page) && page >= 1 ? page : 1;
  state.selected = params.get("id");
  for (const [key, value] of params) {
    if (key.startsWith("f.")) {
      const field = key.slice(2);
      if (isFacetField(field) && value !== "") {
        state.facets[field] = value;
      }
    }
  }
  return state;
}

/**
 * Serialize to a canonical query string: defaults are omitted and facets are
 * emitted in a fixed order, so parse(serialize(s)) === normalize(s) and equal
 * views share one URL.
 */
export function serializeState(state: GalleryState): string {
  const params = new URLSearchParams();
  if (state.query !== "") params.set("q", state.query);
  for (const field of FACET_FIELDS) {
    const value = state.facets[field];
    if (value !== undefined && value !== "") params.set(`f.${field}`, value);
  }
  if (state.page > 1) params.set("page", String(state.page));
  if (state.selected !== null) params.set("id", state.selected);
  const encoded = params.toString();
  return encoded === "" ? "" : `?${encoded}`;
}

export function statesEqual(a: GalleryState, b: GalleryState): boolean {
  return serializeState(a) === serializeState(b);
}
