/**
 * Saliency grid colorization and overlay pixel math.
 *
 * Pure functions over plain arrays so they can be unit tested; the canvas
 * layer in main.ts only copies the produced RGBA buffers.
 */

import { GRID_SIZE } from './types';

export interface GridRange {
    min: number;
    max: number;
}

export function gridRange(grid: number[][]): GridRange {
    let min = Infinity;
    let max = -Infinity;
    for (const row of grid) {
        for (const v of row) {
            if (v < min) min = v;
            if (v > max) max = v;
        }
    }
    return { min, max };
}

/** Normalize a saliency value to [0, 1]; a flat grid maps everywhere to 0. */
export function normalizeValue(v: number, range: GridRange): number {
    if (range.max <= range.min) return 0;
    return (v - range.min) / (range.max - range.min);
}

/**
 * Black-body style ramp: low values fade through red and orange to yellow
 * at the top. Returns [r, g, b] in 0..255.
 */
export function heatColor(t: number): [number, number, number] {
    const clamped = Math.min(1, Math.max(0, t));
    const r = Math.round(255 * Math.min(1, clamped * 2));
    const g = Math.round(255 * Math.max(0, clamped * 2 - 1));
    return [r, g, 0];
}

/**
 * Flat RGBA buffer (GRID_SIZE * GRID_SIZE * 4) for the saliency overlay.
 * Alpha scales with normalized saliency so weak pixels stay transparent.
 */
export function saliencyToRgba(grid: number[][], maxAlpha = 200): Uint8ClampedArray {
    const range = gridRange(grid);
    const out = new Uint8ClampedArray(GRID_SIZE * GRID_SIZE * 4);
    for (let i = 0; i < GRID_SIZE; i++) {
        for (let j = 0; j < GRID_SIZE; j++) {
            const t = normalizeValue(grid[i][j], range);
            const [r, g, b] = heatColor(t);
            const o = (i * GRID_SIZE + j) * 4;
            out[o] = r;
            out[o + 1] = g;
            out[o + 2] = b;
            out[o + 3] = Math.round(t * maxAlpha);
        }
    }
    return out;
}

/**
 * The indices of the k most salient pixels, ties broken in row-major
 * order to mirror the service's selection rule.
 */
export function topKIndices(grid: number[][], k: number): number[] {
    const flat: { value: number; index: number }[] = [];
    for (let i = 0; i < GRID_SIZE; i++) {
        for (let j = 0; j < GRID_SIZE; j++) {
            flat.push({ value: grid[i][j], index: i * GRID_SIZE + j });
        }
    }
    flat.sort((a, b) => (b.value - a.value) || (a.index - b.index));
    return flat.slice(0, Math.max(0, k)).map((e) => e.index);
}
