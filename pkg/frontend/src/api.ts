/** Thin client over the service's JSON endpoints, with in-flight cancellation. */

import type { GalleryState } from "./state.js";
import type { RecordDoc, SearchResponse } from "./types.js";

export const PAGE_SIZE = 20;

export class CancelledError extends Error {
  constructor() {
    super("request cancelled");
    this.name = "CancelledError";
  }
}

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** Query parameters for GET /records, built the same way for every caller. */
export function searchParams(state: GalleryState, pageSize: number = PAGE_SIZE): URLSearchParams {
  const params = new URLSearchParams();
  params.set("q", state.query);
  params.set("page", String(state.page));
  params.set("page_size", String(pageSize));
  for (const [field, value] of Object.entries(state.facets)) {
    if (value !== undefined && value !== "") {
      params.set(`facet.${field}`, value);
    }
  }
  return params;
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    throw new ApiError(response.status, `request failed with status ${response.status}`);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  private controller: AbortController | null = null;

  constructor(
    private base: string = "",
    private fetcher: typeof fetch = (...args) => fetch(...args),
  ) {}

  /** Search; any still-running previous search is aborted first. */
  async search(state: GalleryState, pageSize: number = PAGE_SIZE): Promise<SearchResponse> {
    if (this.controller !== null) {
      this.controller.abort();
    }
    this.controller = new AbortController();
    const signal = this.controller.signal;
    const url = `${this.base}/records?${searchParams(state, pageSize)}`;
    try {
      const response = await this.fetcher(url, { signal });
      return await asJson<SearchResponse>(response);
    } catch (err) {
      if (err instanceof Error && err.name === "AbortError") {
        throw new CancelledError();
      }
      throw err;
    }
  }

  async record(id: string): Promise<RecordDoc> {
    const response = await this.fetcher(`${this.base}/records/${id}`);
    return asJson<RecordDoc>(response);
  }

  /** The canonical reproduction script, byte for byte. */
  async code(id: string): Promise<string> {
    const response = await this.fetcher(`${this.base}/records/${id}/code`);
    if (!response.ok) {
      throw new ApiError(response.status, `request failed with status ${response.status}`);
    }
    return response.text();
  }

  thumbnailUrl(id: string): string {
    return `${this.base}/records/${id}/thumbnail.svg`;
  }
}
