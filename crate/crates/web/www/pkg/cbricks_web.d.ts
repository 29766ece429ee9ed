/* tslint:disable */
/* eslint-disable */

/**
 * A bundled mesh analysed under a (possibly edited) vector field.
 */
export class Session {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Certificate for Morse set `k` as JSON.
     */
    certify(k: number): string;
    field_text(): string;
    /**
     * `example` is `circles` or `vdp`; an empty `field` keeps the bundled one.
     */
    constructor(example: string, field: string, depth: number);
    /**
     * Morse graph as JSON.
     */
    sets(): string;
    /**
     * SVG with the listed Morse sets shaded.
     */
    svg(selected: Uint32Array, ticks: boolean): string;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_session_free: (a: number, b: number) => void;
    readonly session_certify: (a: number, b: number) => [number, number, number, number];
    readonly session_field_text: (a: number) => [number, number];
    readonly session_new: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly session_sets: (a: number) => [number, number];
    readonly session_svg: (a: number, b: number, c: number, d: number) => [number, number];
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
