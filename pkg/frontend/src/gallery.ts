/**
 * Gallery paging and client-side filtering.
 *
 * The service paginates by stable id order; filters are applied after
 * fetching so the displayed counts always agree with /api/stats tallies.
 */

import type { GalleryItem } from './types';

export type GalleryFilter = 'all' | 'misclassified' | 'correct' | 'interference';

export interface GalleryState {
    page: number;
    pageSize: number;
    total: number;
    filter: GalleryFilter;
}

export function initialGalleryState(pageSize = 50): GalleryState {
    return { page: 0, pageSize, total: 0, filter: 'all' };
}

export function pageCount(state: GalleryState): number {
    return Math.max(1, Math.ceil(state.total / state.pageSize));
}

export function clampPage(state: GalleryState, page: number): number {
    return Math.min(Math.max(0, page), pageCount(state) - 1);
}

export function applyFilter(items: GalleryItem[], filter: GalleryFilter): GalleryItem[] {
    switch (filter) {
        case 'misclassified':
            return items.filter((i) => i.misclassified);
        case 'correct':
            return items.filter((i) => !i.misclassified);
        case 'interference':
            return items.filter((i) => i.interference);
        default:
            return items;
    }
}

export interface GalleryCounts {
    total: number;
    misclassified: number;
    interference: number;
}

export function tallyItems(items: GalleryItem[]): GalleryCounts {
    let misclassified = 0;
    let interference = 0;
    for (const item of items) {
        if (item.misclassified) misclassified++;
        if (item.interference) interference++;
    }
    return { total: items.length, misclassified, interference };
}

/** Sum of misclassified counts from a confusion matrix (off-diagonal mass). */
export function misclassifiedFromCounts(counts: number[][]): number {
    let total = 0;
    for (let i = 0; i < counts.length; i++) {
        for (let j = 0; j < counts[i].length; j++) {
            if (i !== j) total += counts[i][j];
        }
    }
    return total;
}
