/** Application wiring: state <-> URL <-> API <-> DOM. */

import { ApiClient, ApiError, CancelledError, PAGE_SIZE } from "./api.js";
import { renderDetail, renderError, renderFacets, renderGrid, renderPager } from "./render.js";
import {
  defaultState,
  parseState,
  serializeState,
  statesEqual,
  type FacetField,
  type GalleryState,
} from "./state.js";

export interface Gallery {
  state: () => GalleryState;
  setState: (next: GalleryState, push?: boolean) => Promise<void>;
  refresh: () => Promise<void>;
}

export function initGallery(root: HTMLElement, api: ApiClient, win: Window = window): Gallery {
  let state = parseState(win.location.search);

  root.innerHTML = "";
  const header = document.createElement("header");
  header.className = "topbar";
  const title = document.createElement("h1");
  title.textContent = "result gallery";
  const search = document.createElement("input");
  search.type = "search";
  search.className = "search-box";
  search.placeholder = "search records (regular expressions welcome)";
  search.value = state.query;
  header.append(title, search);

  const layout = document.createElement("div");
  layout.className = "layout";
  const side = document.createElement("div");
  side.className = "sidebar";
  const main = document.createElement("main");
  main.className = "content";
  layout.append(side, main);
  root.append(header, layout);

  function syncUrl(push: boolean): void {
    const target = serializeState(state) || win.location.pathname;
    if (push) {
      win.history.pushState(null, "", target);
    } else {
      win.history.replaceState(null, "", target);
    }
  }

  async function showSearch(): Promise<void> {
    let result;
    try {
      result = await api.search(state, PAGE_SIZE);
    } catch (err) {
      if (err instanceof CancelledError) return;
      main.innerHTML = "";
      main.append(renderError(err instanceof Error ? err.message : "search failed"));
      return;
    }
    main.innerHTML = "";
    side.innerHTML = "";
    side.append(
      renderFacets(result.records, state.facets, (field, value) => {
        void toggleFacet(field, value);
      }),
    );
    main.append(
      renderGrid(
        result,
        (id) => api.thumbnailUrl(id),
        (id) => {
          void setState({ ...state, selected: id }, true);
        },
      ),
    );
    main.append(
      renderPager(state.page, result.total, result.page_size, (page) => {
        void setState({ ...state, page }, true);
      }),
    );
  }

  async function showDetail(id: string): Promise<void> {
    let record, code;
    try {
      record = await api.record(id);
      code = await api.code(id);
    } catch (err) {
      main.innerHTML = "";
      side.innerHTML = "";
      const message =
        err instanceof ApiError && err.status === 404
          ? `No record with id ${id}.`
          : "Could not load the record.";
      main.append(renderError(message));
      return;
    }
    main.innerHTML = "";
    side.innerHTML = "";
    main.append(
      renderDetail(record, code, api.thumbnailUrl(id), {
        onBack: () => {
          void setState({ ...state, selected: null }, true);
        },
        onNavigate: (next) => {
          void setState({ ...state, selected: next }, true);
        },
        onCopy: (text) => {
          void win.navigator.clipboard?.writeText(text);
        },
      }),
    );
  }

  async function refresh(): Promise<void> {
    if (state.selected !== null) {
      await showDetail(state.selected);
    } else {
      await showSearch();
    }
  }

  async function setState(next: GalleryState, push = false): Promise<void> {
    const changed = !statesEqual(state, next);
    state = next;
    if (changed) syncUrl(push);
    search.value = state.query;
    await refresh();
  }

  async function toggleFacet(field: FacetField, value: string | null): Promise<void> {
    const facets = { ...state.facets };
    if (value === null) {
      delete facets[field];
    } else {
      facets[field] = value;
    }
    await setState({ ...state, facets, page: 1, selected: null }, true);
  }

  search.addEventListener("input", () => {
    void setState({ ...state, query: search.value, page: 1, selected: null }, true);
  });

  win.addEventListener("popstate", () => {
    void setState(parseState(win.location.search), false);
  });

  void refresh();
  return { state: () => state, setState, refresh };
}

export function start(): void {
  const root = document.getElementById("app");
  if (root !== null) {
    initGallery(root, new ApiClient(""));
  }
}

if (typeof document !== "undefined" && document.getElementById("app") !== null) {
  start();
}

export { defaultState, parseState, serializeState };
