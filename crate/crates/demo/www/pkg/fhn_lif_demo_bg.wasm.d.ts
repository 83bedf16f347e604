/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_firingcurve_free: (a: number, b: number) => void;
export const __wbg_isiview_free: (a: number, b: number) => void;
export const firing_curve: (a: number, b: number, c: number) => [number, number, number];
export const firingcurve_a: (a: number) => number;
export const firingcurve_b: (a: number) => number;
export const firingcurve_distances: (a: number) => [number, number];
export const firingcurve_probabilities: (a: number) => [number, number];
export const isi_densities: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const isiview_g_polar_radial: (a: number) => [number, number];
export const isiview_g_radial_ou: (a: number) => [number, number];
export const isiview_ks: (a: number) => number;
export const isiview_samples: (a: number) => [number, number];
export const isiview_t: (a: number) => [number, number];
export const phase_portrait: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const rest_state: () => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
