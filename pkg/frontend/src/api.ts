/**
 * Typed client for the misdiag HTTP service.
 *
 * The fetch implementation is injectable so the client is testable without
 * a browser or a running server. Image ids contain '#', so every id is
 * URL-encoded before being placed in a path.
 */

import type {
    ImageDetail,
    ImagesPage,
    InterveneParams,
    InterventionResult,
    SaliencyGrid,
    SaliencyMethod,
    StatsSummary,
} from './types';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
    constructor(public status: number, public detail: string) {
        super(`HTTP ${status}: ${detail}`);
        this.name = 'ApiError';
    }
}

async function parseError(response: Response): Promise<never> {
    let detail = response.statusText;
    try {
        const body = await response.json();
        if (typeof body?.detail === 'string') detail = body.detail;
    } catch {
        // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, detail);
}

export class ExplorerClient {
    constructor(
        private baseUrl: string = '',
        private fetchImpl: FetchLike = (url, init) => fetch(url, init),
    ) {
        this.baseUrl = baseUrl.replace(/\/+$/, '');
    }

    private async getJson<T>(path: string): Promise<T> {
        const response = await this.fetchImpl(this.baseUrl + path);
        if (!response.ok) await parseError(response);
        return response.json() as Promise<T>;
    }

    listImages(page: number, pageSize: number): Promise<ImagesPage> {
        return this.getJson(`/api/images?page=${page}&page_size=${pageSize}`);
    }

    imageDetail(id: string): Promise<ImageDetail> {
        return this.getJson(`/api/image/${encodeURIComponent(id)}`);
    }

    saliency(id: string, method: SaliencyMethod = 'gradient'): Promise<SaliencyGrid> {
        return this.getJson(`/api/saliency/${encodeURIComponent(id)}?method=${method}`);
    }

    stats(): Promise<StatsSummary> {
        return this.getJson('/api/stats');
    }

    async intervene(params: InterveneParams): Promise<InterventionResult> {
        const response = await this.fetchImpl(this.baseUrl + '/api/intervene', {
            method: 'POST',
            headers: { 'Content-Type': 'application/json' },
            body: JSON.stringify(params),
        });
        if (!response.ok) await parseError(response);
        return response.json() as Promise<InterventionResult>;
    }
}
