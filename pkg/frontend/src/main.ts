/**
 * DOM wiring for the explorer: gallery grid, detail panel with saliency
 * overlay, and the erase-and-reclassify form with a paintable spare mask.
 * All logic with behavior worth testing lives in the sibling modules.
 */

import { ExplorerClient } from './api';
import { applyFilter, clampPage, GalleryFilter, GalleryState, initialGalleryState, misclassifiedFromCounts, pageCount } from './gallery';
import { saliencyToRgba } from './heatmap';
import { countMasked, emptyMask, maskToRle, paintBrush } from './mask';
import { latestOnly } from './staleness';
import { GalleryItem, GRID_SIZE, InterventionResult, RleRuns, SaliencyMethod } from './types';

const SCALE = 8; // canvas pixels per image pixel

const client = new ExplorerClient();
const state: GalleryState = initialGalleryState();
let selectedId: string | null = null;
let spareMask = emptyMask();
let painting = false;
let paintValue = true;

function el<T extends HTMLElement>(id: string): T {
    const node = document.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node as T;
}

function labelBadge(item: GalleryItem): string {
    const cls = item.misclassified ? 'badge bad' : 'badge ok';
    return `<span class="${cls}">${item.label}→${item.predicted}</span>`;
}

const loadGallery = latestOnly(async (page: number, filter: GalleryFilter) => {
    const body = await client.listImages(page, state.pageSize);
    state.total = body.total;
    state.page = body.page;
    state.filter = filter;
    return applyFilter(body.items, filter);
});

async function refreshGallery(): Promise<void> {
    const filter = (el<HTMLSelectElement>('filter')).value as GalleryFilter;
    const items = await loadGallery(state.page, filter);
    if (items === null) return; // a newer request superseded this one
    const grid = el<HTMLDivElement>('gallery');
    grid.innerHTML = '';
    for (const item of items) {
        const card = document.createElement('div');
        card.className = 'card' + (item.id === selectedId ? ' selected' : '');
        card.innerHTML = `<div class="card-id">${item.id}</div>${labelBadge(item)}` +
            (item.interference ? '<span class="badge warn">interference</span>' : '');
        card.addEventListener('click', () => selectImage(item.id));
        grid.appendChild(card);
    }
    el<HTMLSpanElement>('page-info').textContent =
        `page ${state.page + 1} / ${pageCount(state)} (${state.total} images)`;
}

async function drawImage(id: string): Promise<void> {
    const detail = await client.imageDetail(id);
    const canvas = el<HTMLCanvasElement>('image-canvas');
    const ctx = canvas.getContext('2d');
    if (!ctx) return;
    const img = new Image();
    img.onload = () => {
        ctx.imageSmoothingEnabled = false;
        ctx.clearRect(0, 0, canvas.width, canvas.height);
        ctx.drawImage(img, 0, 0, canvas.width, canvas.height);
        drawMaskOverlay();
    };
    img.src = `data:image/png;base64,${detail.png_b64}`;
    el<HTMLDivElement>('scores').textContent =
        `true ${detail.label}, predicted ${detail.predicted} | scores: ` +
        detail.scores.map((s) => s.toFixed(4)).join(', ');
}

const loadSaliency = latestOnly((id: string, method: SaliencyMethod) =>
    client.saliency(id, method));

async function drawSaliency(id: string): Promise<void> {
    const method = (el<HTMLSelectElement>('method')).value as SaliencyMethod;
    const body = await loadSaliency(id, method);
    if (body === null) return;
    const canvas = el<HTMLCanvasElement>('saliency-canvas');
    const ctx = canvas.getContext('2d');
    if (!ctx) return;
    const rgba = saliencyToRgba(body.grid);
    const small = new ImageData(new Uint8ClampedArray(rgba), GRID_SIZE, GRID_SIZE);
    const off = document.createElement('canvas');
    off.width = GRID_SIZE;
    off.height = GRID_SIZE;
    off.getContext('2d')?.putImageData(small, 0, 0);
    ctx.imageSmoothingEnabled = false;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    ctx.drawImage(off, 0, 0, canvas.width, canvas.height);
}

function drawMaskOverlay(): void {
    const canvas = el<HTMLCanvasElement>('mask-canvas');
    const ctx = canvas.getContext('2d');
    if (!ctx) return;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    ctx.fillStyle = 'rgba(80, 170, 255, 0.45)';
    for (let i = 0; i < GRID_SIZE; i++) {
        for (let j = 0; j < GRID_SIZE; j++) {
            if (spareMask[i * GRID_SIZE + j]) {
                ctx.fillRect(j * SCALE, i * SCALE, SCALE, SCALE);
            }
        }
    }
    el<HTMLSpanElement>('mask-count').textContent = `${countMasked(spareMask)} px spared`;
}

async function selectImage(id: string): Promise<void> {
    selectedId = id;
    spareMask = emptyMask();
    el<HTMLDivElement>('result').textContent = '';
    await Promise.all([drawImage(id), drawSaliency(id)]);
    void refreshGallery();
}

function maskCellFromEvent(event: MouseEvent): [number, number] {
    const canvas = el<HTMLCanvasElement>('mask-canvas');
    const rect = canvas.getBoundingClientRect();
    const col = Math.floor((event.clientX - rect.left) / rect.width * GRID_SIZE);
    const row = Math.floor((event.clientY - rect.top) / rect.height * GRID_SIZE);
    return [Math.min(GRID_SIZE - 1, Math.max(0, row)),
            Math.min(GRID_SIZE - 1, Math.max(0, col))];
}

function renderResult(result: InterventionResult): void {
    const flipped = result.flipped_to_true
        ? '<span class="badge ok">flipped to true class</span>'
        : '<span class="badge bad">prediction unchanged or wrong</span>';
    el<HTMLDivElement>('result').innerHTML = [
        flipped,
        `before: ${result.before.predicted_label}, after: ${result.after.predicted_label}`,
        `erased ${result.erased_pixel_count} px across ${result.boxes.length} boxes`,
    ].join('<br>');
}

async function runIntervention(): Promise<void> {
    if (!selectedId) return;
    const p = parseFloat(el<HTMLInputElement>('top-p').value);
    const dx = parseInt(el<HTMLInputElement>('box-dx').value, 10);
    const dy = parseInt(el<HTMLInputElement>('box-dy').value, 10);
    const mode = el<HTMLSelectElement>('spare-mode').value;
    let spare: RleRuns | 'ground-truth' | null = null;
    if (mode === 'ground-truth') spare = 'ground-truth';
    else if (mode === 'painted') spare = maskToRle(spareMask);
    try {
        const result = await client.intervene(
            { id: selectedId, p, dx, dy, spare_mask: spare });
        renderResult(result);
    } catch (err) {
        el<HTMLDivElement>('result').textContent = String(err);
    }
}

async function refreshStats(): Promise<void> {
    const stats = await client.stats();
    const total = stats.counts.flat().reduce((a, b) => a + b, 0);
    const mis = misclassifiedFromCounts(stats.counts);
    el<HTMLDivElement>('stats').textContent =
        `${total} images, ${mis} misclassified | ` +
        `u = [${stats.u.map((x) => x.toFixed(3)).join(', ')}] | ` +
        `${stats.edges.length} network edges at theta=${stats.theta}`;
}

function bindEvents(): void {
    el<HTMLButtonElement>('prev').addEventListener('click', () => {
        state.page = clampPage(state, state.page - 1);
        void refreshGallery();
    });
    el<HTMLButtonElement>('next').addEventListener('click', () => {
        state.page = clampPage(state, state.page + 1);
        void refreshGallery();
    });
    el<HTMLSelectElement>('filter').addEventListener('change', () => {
        state.page = 0;
        void refreshGallery();
    });
    el<HTMLSelectElement>('method').addEventListener('change', () => {
        if (selectedId) void drawSaliency(selectedId);
    });
    el<HTMLButtonElement>('intervene').addEventListener('click', () => {
        void runIntervention();
    });
    el<HTMLButtonElement>('clear-mask').addEventListener('click', () => {
        spareMask = emptyMask();
        drawMaskOverlay();
    });
    const maskCanvas = el<HTMLCanvasElement>('mask-canvas');
    maskCanvas.addEventListener('mousedown', (event) => {
        painting = true;
        const [row, col] = maskCellFromEvent(event);
        paintValue = !spareMask[row * GRID_SIZE + col];
        spareMask = paintBrush(spareMask, row, col, 3, paintValue);
        drawMaskOverlay();
    });
    maskCanvas.addEventListener('mousemove', (event) => {
        if (!painting) return;
        const [row, col] = maskCellFromEvent(event);
        spareMask = paintBrush(spareMask, row, col, 3, paintValue);
        drawMaskOverlay();
    });
    window.addEventListener('mouseup', () => {
        painting = false;
    });
}

async function boot(): Promise<void> {
    bindEvents();
    await Promise.all([refreshGallery(), refreshStats()]);
}

void boot();
