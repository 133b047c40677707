/**
 * Shapes of the JSON bodies exchanged with the misdiag HTTP service.
 */

export interface GalleryItem {
    id: string;
    label: number;
    predicted: number;
    misclassified: boolean;
    interference: boolean;
}

export interface ImagesPage {
    total: number;
    page: number;
    page_size: number;
    items: GalleryItem[];
}

export interface ImageDetail {
    id: string;
    label: number;
    predicted: number;
    scores: number[];
    png_b64: string;
}

export type SaliencyMethod = 'gradient' | 'occlusion';

export interface SaliencyGrid {
    id: string;
    method: SaliencyMethod;
    target_class: number;
    grid: number[][];
}

/** [start, length] runs over the row-major flattened 32x32 grid. */
export type RleRuns = [number, number][];

export interface InterveneParams {
    id: string;
    p?: number;
    dx?: number;
    dy?: number;
    spare_mask?: RleRuns | 'ground-truth' | null;
}

export interface PredictionRecord {
    image_id: string;
    true_label: number;
    predicted_label: number;
    scores: number[];
    model_id: string;
}

export interface InterventionBox {
    center: [number, number];
    width: number;
    height: number;
    extent: [number, number, number, number];
}

export interface InterventionResult {
    before: PredictionRecord;
    after: PredictionRecord;
    erased_pixel_count: number;
    flipped_to_true: boolean;
    boxes: InterventionBox[];
}

export interface NetworkEdge {
    from: number;
    to: number;
    weight: number;
}

export interface StatsSummary {
    counts: number[][];
    u: number[];
    u_defined: boolean[];
    v: number[][];
    theta: number;
    edges: NetworkEdge[];
}

export const GRID_SIZE = 32;
