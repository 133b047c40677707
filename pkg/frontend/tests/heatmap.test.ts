import { describe, expect, it } from 'vitest';

import { gridRange, heatColor, normalizeValue, saliencyToRgba, topKIndices } from '../src/heatmap';
import { GRID_SIZE } from '../src/types';

function zeros(): number[][] {
    return Array.from({ length: GRID_SIZE }, () => new Array<number>(GRID_SIZE).fill(0));
}

describe('gridRange / normalizeValue', () => {
    it('finds the extremes', () => {
        const grid = zeros();
        grid[3][4] = -2;
        grid[10][10] = 7;
        expect(gridRange(grid)).toEqual({ min: -2, max: 7 });
    });

    it('maps min to 0 and max to 1', () => {
        const range = { min: -2, max: 7 };
        expect(normalizeValue(-2, range)).toBe(0);
        expect(normalizeValue(7, range)).toBe(1);
        expect(normalizeValue(2.5, range)).toBeCloseTo(0.5, 12);
    });

    it('treats a flat grid as all-zero', () => {
        expect(normalizeValue(5, { min: 5, max: 5 })).toBe(0);
    });
});

describe('heatColor', () => {
    it('ramps from black through red to yellow', () => {
        expect(heatColor(0)).toEqual([0, 0, 0]);
        expect(heatColor(0.5)).toEqual([255, 0, 0]);
        expect(heatColor(1)).toEqual([255, 255, 0]);
    });

    it('clamps out-of-range inputs', () => {
        expect(heatColor(-3)).toEqual([0, 0, 0]);
        expect(heatColor(9)).toEqual([255, 255, 0]);
    });
});

describe('saliencyToRgba', () => {
    it('produces a full RGBA buffer with alpha proportional to saliency', () => {
        const grid = zeros();
        grid[0][0] = 1;
        const rgba = saliencyToRgba(grid, 200);
        expect(rgba.length).toBe(GRID_SIZE * GRID_SIZE * 4);
        // the hottest pixel is yellow at full overlay alpha
        expect([rgba[0], rgba[1], rgba[2], rgba[3]]).toEqual([255, 255, 0, 200]);
        // a cold pixel stays fully transparent
        const o = (5 * GRID_SIZE + 5) * 4;
        expect(rgba[o + 3]).toBe(0);
    });

    it('renders a flat grid fully transparent', () => {
        const rgba = saliencyToRgba(zeros());
        for (let i = 3; i < rgba.length; i += 4) expect(rgba[i]).toBe(0);
    });
});

describe('topKIndices', () => {
    it('selects the highest values with row-major tie-break', () => {
        const grid = zeros();
        grid[5][9] = 1;
        grid[2][30] = 1;
        grid[2][4] = 1;
        expect(topKIndices(grid, 3)).toEqual([
            2 * GRID_SIZE + 4, 2 * GRID_SIZE + 30, 5 * GRID_SIZE + 9,
        ]);
    });

    it('matches a full sort on random grids', () => {
        const grid = zeros();
        let seed = 12345;
        const rand = () => {
            // small LCG keeps the test deterministic
            seed = (seed * 1103515245 + 12345) % 2147483648;
            return seed / 2147483648;
        };
        for (let i = 0; i < GRID_SIZE; i++) {
            for (let j = 0; j < GRID_SIZE; j++) grid[i][j] = rand();
        }
        const k = 52;
        const picked = topKIndices(grid, k);
        expect(picked.length).toBe(k);
        const values = picked.map((idx) => grid[Math.floor(idx / GRID_SIZE)][idx % GRID_SIZE]);
        for (let i = 1; i < values.length; i++) {
            expect(values[i]).toBeLessThanOrEqual(values[i - 1]);
        }
        const threshold = Math.min(...values);
        const flat = grid.flat();
        const better = flat.filter((v) => v > threshold).length;
        expect(better).toBeLessThanOrEqual(k);
    });

    it('handles k <= 0 and k beyond the grid', () => {
        expect(topKIndices(zeros(), 0)).toEqual([]);
        expect(topKIndices(zeros(), 5000).length).toBe(GRID_SIZE * GRID_SIZE);
    });
});
