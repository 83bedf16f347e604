/* tslint:disable */
/* eslint-disable */

export class FiringCurve {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly a: number;
    readonly b: number;
    readonly distances: Float64Array;
    readonly probabilities: Float64Array;
}

export class IsiView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly g_polar_radial: Float64Array;
    readonly g_radial_ou: Float64Array;
    /**
     * Largest pairwise KS distance among sample and both densities.
     */
    readonly ks: number;
    readonly samples: Float64Array;
    readonly t: Float64Array;
}

export function firing_curve(sigma0: number, trials: number, seed: number): FiringCurve;

export function isi_densities(sigma0: number, trials: number, m: number, spikes: number, seed: number): IsiView;

export function phase_portrait(sigma0: number, v0: number, w0: number, horizon: number, seed: number): Float64Array;

export function rest_state(): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_firingcurve_free: (a: number, b: number) => void;
    readonly __wbg_isiview_free: (a: number, b: number) => void;
    readonly firing_curve: (a: number, b: number, c: number) => [number, number, number];
    readonly firingcurve_a: (a: number) => number;
    readonly firingcurve_b: (a: number) => number;
    readonly firingcurve_distances: (a: number) => [number, number];
    readonly firingcurve_probabilities: (a: number) => [number, number];
    readonly isi_densities: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly isiview_g_polar_radial: (a: number) => [number, number];
    readonly isiview_g_radial_ou: (a: number) => [number, number];
    readonly isiview_ks: (a: number) => number;
    readonly isiview_samples: (a: number) => [number, number];
    readonly isiview_t: (a: number) => [number, number];
    readonly phase_portrait: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly rest_state: () => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
