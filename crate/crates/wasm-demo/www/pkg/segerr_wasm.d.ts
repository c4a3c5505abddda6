/* tslint:disable */
/* eslint-disable */

export class DemoScene {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Boundary flags (0/1) of the ground truth, or of the prediction when
     * `of_prediction` is set and one exists.
     */
    boundary(radius: number, of_prediction: boolean): Uint8Array;
    /**
     * Corrupts the ground truth and evaluates the result at `radius`;
     * returns the metrics as JSON (absent values are `null`).
     */
    corrupt_and_score(mode: string, magnitude: number, seed: number, radius: number): string;
    is_empty(): boolean;
    labels(): Int32Array;
    len(): number;
    /**
     * `kind` is "two-planes", "checkerboard" or "blobs".
     */
    constructor(kind: string, seed: number);
    /**
     * Labels of the last corrupted prediction (empty before the first call
     * to `corrupt_and_score`).
     */
    pred_labels(): Int32Array;
    /**
     * Boundary counts at 2, 4, 6, 8 and 10 cm.
     */
    radius_sweep(): Uint32Array;
    /**
     * Interleaved x, y coordinates.
     */
    xy(): Float32Array;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demoscene_free: (a: number, b: number) => void;
    readonly demoscene_boundary: (a: number, b: number, c: number) => [number, number, number, number];
    readonly demoscene_corrupt_and_score: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly demoscene_is_empty: (a: number) => number;
    readonly demoscene_labels: (a: number) => [number, number];
    readonly demoscene_len: (a: number) => number;
    readonly demoscene_new: (a: number, b: number, c: number) => [number, number, number];
    readonly demoscene_pred_labels: (a: number) => [number, number];
    readonly demoscene_radius_sweep: (a: number) => [number, number, number, number];
    readonly demoscene_xy: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
