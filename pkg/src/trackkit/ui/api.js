/** Thin client over the service's JSON endpoints, with in-flight cancellation. */
export const PAGE_SIZE = 20;
export class CancelledError extends Error {
    constructor() {
        super("request cancelled");
        this.name = "CancelledError";
    }
}
export class ApiError extends Error {
    constructor(status, message) {
        super(message);
        this.status = status;
        this.name = "ApiError";
    }
}
/** Query parameters for GET /records, built the same way for every caller. */
export function searchParams(state, pageSize = PAGE_SIZE) {
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
async function asJson(response) {
    if (!response.ok) {
        throw new ApiError(response.status, `request failed with status ${response.status}`);
    }
    return (await response.json());
}
export class ApiClient {
    constructor(base = "", fetcher = (...args) => fetch(...args)) {
        this.base = base;
        this.fetcher = fetcher;
        this.controller = null;
    }
    /** Search; any still-running previous search is aborted first. */
    async search(state, pageSize = PAGE_SIZE) {
        if (this.controller !== null) {
            this.controller.abort();
        }
        this.controller = new AbortController();
        const signal = this.controller.signal;
        const url = `${this.base}/records?${searchParams(state, pageSize)}`;
        try {
            const response = await this.fetcher(url, { signal });
            return await asJson(response);
        }
        catch (err) {
            if (err instanceof Error && err.name === "AbortError") {
                throw new CancelledError();
            }
            throw err;
        }
    }
    async record(id) {
        const response = await this.fetcher(`${this.base}/records/${id}`);
        return asJson(response);
    }
    /** The canonical reproduction script, byte for byte. */
    async code(id) {
        const response = await this.fetcher(`${this.base}/records/${id}/code`);
        if (!response.ok) {
            throw new ApiError(response.status, `request failed with status ${response.status}`);
        }
        return response.text();
    }
    thumbnailUrl(id) {
        return `${this.base}/records/${id}/thumbnail.svg`;
    }
}
