/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demoscene_free: (a: number, b: number) => void;
export const demoscene_boundary: (a: number, b: number, c: number) => [number, number, number, number];
export const demoscene_corrupt_and_score: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const demoscene_is_empty: (a: number) => number;
export const demoscene_labels: (a: number) => [number, number];
export const demoscene_len: (a: number) => number;
export const demoscene_new: (a: number, b: number, c: number) => [number, number, number];
export const demoscene_pred_labels: (a: number) => [number, number];
export const demoscene_radius_sweep: (a: number) => [number, number, number, number];
export const demoscene_xy: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
