/**
 * Spare-mask editing: a boolean 32x32 grid painted in the browser and
 * shipped to the service as run-length runs over the row-major flattening.
 */

import { GRID_SIZE, RleRuns } from './types';

const CELLS = GRID_SIZE * GRID_SIZE;

export function emptyMask(): boolean[] {
    return new Array<boolean>(CELLS).fill(false);
}

export function maskToRle(mask: boolean[]): RleRuns {
    if (mask.length !== CELLS) {
        throw new Error(`mask must have ${CELLS} cells, got ${mask.length}`);
    }
    const runs: RleRuns = [];
    let start = -1;
    for (let i = 0; i < CELLS; i++) {
        if (mask[i] && start < 0) {
            start = i;
        } else if (!mask[i] && start >= 0) {
            runs.push([start, i - start]);
            start = -1;
        }
    }
    if (start >= 0) runs.push([start, CELLS - start]);
    return runs;
}

export function rleToMask(runs: RleRuns): boolean[] {
    const mask = emptyMask();
    for (const [start, length] of runs) {
        if (start < 0 || length < 0 || start + length > CELLS) {
            throw new Error(`run [${start}, ${length}] out of bounds`);
        }
        for (let i = start; i < start + length; i++) mask[i] = true;
    }
    return mask;
}

export function countMasked(mask: boolean[]): number {
    return mask.reduce((acc, v) => acc + (v ? 1 : 0), 0);
}

/** Paint a square brush centered on (row, col), clipped to the grid. */
export function paintBrush(
    mask: boolean[],
    row: number,
    col: number,
    brushSize: number,
    value: boolean,
): boolean[] {
    const half = Math.floor((brushSize - 1) / 2);
    const out = mask.slice();
    for (let i = Math.max(0, row - half); i <= Math.min(GRID_SIZE - 1, row + half); i++) {
        for (let j = Math.max(0, col - half); j <= Math.min(GRID_SIZE - 1, col + half); j++) {
            out[i * GRID_SIZE + j] = value;
        }
    }
    return out;
}
