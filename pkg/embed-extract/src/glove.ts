import * as fs from "node:fs";

import { tokenize } from "./tokenize.js";
import { EmbeddingRow, ExtractError, TextRecord } from "./types.js";

export interface WordVectors {
    dim: number;
    vectors: Map<string, Float64Array>;
}

/**
 * Parse a pretrained word-vector text file: one `word v1 v2 ... vd` line
 * per entry, space separated. The dimension comes from the first line;
 * any disagreeing line, or a mismatch with `expectedDim`, is fatal.
 */
export function loadWordVectors(path: string, expectedDim?: number): WordVectors {
    let raw: string;
    try {
        raw = fs.readFileSync(path, "utf8");
    } catch (cause) {
        throw new ExtractError(`cannot read vectors ${path}: ${(cause as Error).message}`);
    }
    const vectors = new Map<string, Float64Array>();
    let dim = -1;
    const lines = raw.split("\n");
    for (let i = 0; i < lines.length; i++) {
        const line = lines[i].trim();
        if (line === "") continue;
        const parts = line.split(" ");
        if (dim === -1) {
            dim = parts.length - 1;
            if (dim < 1) {
                throw new ExtractError(`${path}:${i + 1}: no vector components`);
            }
            if (expectedDim !== undefined && dim !== expectedDim) {
                throw new ExtractError(
                    `${path}: vectors have dimension ${dim}, expected ${expectedDim}`,
                );
            }
        } else if (parts.length - 1 !== dim) {
            throw new ExtractError(
                `${path}:${i + 1}: expected ${dim} components, got ${parts.length - 1}`,
            );
        }
        const values = new Float64Array(dim);
        for (let j = 0; j < dim; j++) {
            const value = Number(parts[j + 1]);
            if (!Number.isFinite(value)) {
                throw new ExtractError(`${path}:${i + 1}: bad component '${parts[j + 1]}'`);
            }
            values[j] = value;
        }
        vectors.set(parts[0], values);
    }
    if (vectors.size === 0) {
        throw new ExtractError(`${path}: no vectors`);
    }
    return { dim, vectors };
}

/** Arithmetic mean of the in-vocabulary token vectors; null if none hit. */
export function meanPool(tokens: string[], words: WordVectors): number[] | null {
    const sum = new Float64Array(words.dim);
    let hits = 0;
    for (const token of tokens) {
        const vector = words.vectors.get(token);
        if (!vector) continue;
        for (let j = 0; j < words.dim; j++) sum[j] += vector[j];
        hits++;
    }
    if (hits === 0) return null;
    return Array.from(sum, (v) => v / hits);
}

export interface GloveExtraction {
    rows: EmbeddingRow[];
    dropped: number;
}

/**
 * Mean-pooled word-vector embedding for every record. Sentence pairs are
 * pooled over both sides. Records with no in-vocabulary token are
 * dropped and counted so the caller can report them.
 */
export function extractGlove(records: TextRecord[], words: WordVectors): GloveExtraction {
    const rows: EmbeddingRow[] = [];
    let dropped = 0;
    for (const record of records) {
        const tokens = tokenize(record.texts.join(" "));
        const pooled = meanPool(tokens, words);
        if (pooled === null) {
            dropped++;
            continue;
        }
        rows.push({ label: record.label, values: pooled });
    }
    return { rows, dropped };
}
