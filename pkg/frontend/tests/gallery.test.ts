import { describe, expect, it } from 'vitest';

import { applyFilter, clampPage, initialGalleryState, misclassifiedFromCounts, pageCount, tallyItems } from '../src/gallery';
import { GalleryItem } from '../src/types';

function item(id: string, misclassified: boolean, interference = false): GalleryItem {
    return { id, label: 0, predicted: misclassified ? 1 : 0, misclassified, interference };
}

describe('pagination', () => {
    it('computes page counts with a floor of one page', () => {
        const state = initialGalleryState(50);
        expect(pageCount(state)).toBe(1);
        state.total = 300;
        expect(pageCount(state)).toBe(6);
        state.total = 301;
        expect(pageCount(state)).toBe(7);
    });

    it('clamps navigation to valid pages', () => {
        const state = { ...initialGalleryState(50), total: 300 };
        expect(clampPage(state, -3)).toBe(0);
        expect(clampPage(state, 2)).toBe(2);
        expect(clampPage(state, 99)).toBe(5);
    });
});

describe('filters', () => {
    const items = [
        item('a', false), item('b', true, true), item('c', true), item('d', false, true),
    ];

    it('partitions by misclassification', () => {
        expect(applyFilter(items, 'all')).toHaveLength(4);
        expect(applyFilter(items, 'misclassified').map((i) => i.id)).toEqual(['b', 'c']);
        expect(applyFilter(items, 'correct').map((i) => i.id)).toEqual(['a', 'd']);
        expect(applyFilter(items, 'interference').map((i) => i.id)).toEqual(['b', 'd']);
    });

    it('misclassified and correct filters partition the list', () => {
        const mis = applyFilter(items, 'misclassified');
        const ok = applyFilter(items, 'correct');
        expect(mis.length + ok.length).toBe(items.length);
    });
});

describe('count reconciliation', () => {
    it('tallies gallery items', () => {
        const counts = tallyItems([
            item('a', false), item('b', true, true), item('c', true),
        ]);
        expect(counts).toEqual({ total: 3, misclassified: 2, interference: 1 });
    });

    it('sums off-diagonal mass from a confusion matrix', () => {
        expect(misclassifiedFromCounts([[90, 10], [5, 95]])).toBe(15);
        expect(misclassifiedFromCounts([[7]])).toBe(0);
        const matrix = [
            [50, 1, 2],
            [3, 60, 4],
            [5, 6, 70],
        ];
        expect(misclassifiedFromCounts(matrix)).toBe(21);
    });

    it('gallery tallies agree with the matrix view of the same data', () => {
        // 2 misclassified of 5: matrix [[2,1],[1,1]] has off-diagonal 2
        const items = [
            item('a', false), item('b', false), item('c', true),
            item('d', true), item('e', false),
        ];
        const matrix = [[3, 2], [0, 0]];
        expect(tallyItems(items).misclassified).toBe(misclassifiedFromCounts(matrix));
    });
});
