/* tslint:disable */
/* eslint-disable */

/**
 * `|det B(λ)|` on an `nx × ny` grid over the first two λ-axes of the
 * spectral box. Further axes are held at the box centre.
 */
export function density_grid(config: string, nx: number, ny: number): string;

/**
 * The `design` report for a JSON config.
 */
export function design_report(config: string): string;

/**
 * Bundled config text for example 1, 2 or 3.
 */
export function example_config(which: number): string;

/**
 * Window, volume, tiling and truncated Parseval defect for the Heisenberg
 * fiber at `λ` with `a = b = 1` and the given `q` (a `p/q` string).
 */
export function heisenberg_window(lambda: number, q: string, trunc: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly density_grid: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly design_report: (a: number, b: number) => [number, number, number, number];
    readonly example_config: (a: number) => [number, number, number, number];
    readonly heisenberg_window: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
