/* tslint:disable */
/* eslint-disable */

export class Explorer {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Plain and expected distances and kernels between two texts.
     */
    compare(a: string, b: string, kernel_sigma: number): string;
    /**
     * Fits on TSV text. `sigma <= 0` picks the median pairwise distance.
     */
    constructor(tsv: string, sigma: number, t: number);
    /**
     * Two-component kernel PCA of every document, plain and expected.
     */
    scatter(max_docs: number): string;
    /**
     * Re-diffuses at time `t` without refitting the graph.
     */
    set_time(t: number): void;
    summary(): string;
    /**
     * Nearest words by edge weight and the word's top translations.
     */
    word(word: string, n: number): string;
}

/**
 * The bundled synonym corpus as `id<TAB>label<TAB>text` lines.
 */
export function synonym_corpus(): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_explorer_free: (a: number, b: number) => void;
    readonly explorer_compare: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly explorer_new: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly explorer_scatter: (a: number, b: number) => [number, number, number, number];
    readonly explorer_set_time: (a: number, b: number) => [number, number];
    readonly explorer_summary: (a: number) => [number, number];
    readonly explorer_word: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly synonym_corpus: () => [number, number];
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
