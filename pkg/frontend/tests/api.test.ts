import { describe, expect, it } from 'vitest';

import { ApiError, ExplorerClient, FetchLike } from '../src/api';

function jsonResponse(body: unknown, status = 200): Response {
    return new Response(JSON.stringify(body), {
        status,
        headers: { 'Content-Type': 'application/json' },
    });
}

function recordingFetch(body: unknown, status = 200) {
    const calls: { url: string; init?: RequestInit }[] = [];
    const impl: FetchLike = async (url, init) => {
        calls.push({ url, init });
        return jsonResponse(body, status);
    };
    return { calls, impl };
}

describe('ExplorerClient', () => {
    it('encodes image ids containing #', async () => {
        const { calls, impl } = recordingFetch({ id: 'test#3' });
        const client = new ExplorerClient('', impl);
        await client.imageDetail('test#3');
        expect(calls[0].url).toBe('/api/image/test%233');
        await client.saliency('test#3', 'occlusion');
        expect(calls[1].url).toBe('/api/saliency/test%233?method=occlusion');
    });

    it('strips trailing slashes from the base url', async () => {
        const { calls, impl } = recordingFetch({ total: 0, page: 0, page_size: 50, items: [] });
        const client = new ExplorerClient('http://localhost:8000/', impl);
        await client.listImages(2, 25);
        expect(calls[0].url).toBe('http://localhost:8000/api/images?page=2&page_size=25');
    });

    it('posts intervention parameters as JSON', async () => {
        const { calls, impl } = recordingFetch({
            before: {}, after: {}, erased_pixel_count: 0,
            flipped_to_true: false, boxes: [],
        });
        const client = new ExplorerClient('', impl);
        await client.intervene({ id: 'test#0', p: 0.1, dx: 5, dy: 3, spare_mask: [[0, 4]] });
        expect(calls[0].url).toBe('/api/intervene');
        expect(calls[0].init?.method).toBe('POST');
        expect(JSON.parse(String(calls[0].init?.body))).toEqual({
            id: 'test#0', p: 0.1, dx: 5, dy: 3, spare_mask: [[0, 4]],
        });
    });

    it('returns parsed bodies unchanged', async () => {
        const stats = {
            counts: [[1, 2], [3, 4]], u: [0.5, 0.3], u_defined: [true, true],
            v: [[0, 1], [1, 0]], theta: 0.3, edges: [{ from: 0, to: 1, weight: 1 }],
        };
        const client = new ExplorerClient('', recordingFetch(stats).impl);
        expect(await client.stats()).toEqual(stats);
    });

    it('surfaces service error details as ApiError', async () => {
        const { impl } = recordingFetch({ detail: "unknown image id 'x'" }, 404);
        const client = new ExplorerClient('', impl);
        await expect(client.imageDetail('x')).rejects.toThrowError(ApiError);
        await expect(client.imageDetail('x')).rejects.toThrow(/unknown image id/);
    });

    it('falls back to status text for non-JSON errors', async () => {
        const impl: FetchLike = async () =>
            new Response('boom', { status: 500, statusText: 'Internal Server Error' });
        const client = new ExplorerClient('', impl);
        await expect(client.stats()).rejects.toThrow(/500/);
    });
});
