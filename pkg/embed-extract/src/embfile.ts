import * as fs from "node:fs";
import * as path from "node:path";
import * as process from "node:process";

import { EmbeddingRow, ExtractError } from "./types.js";

/**
 * Render rows as an embedding file: a `#emb dim=<r> classes=<C>` header,
 * then `<label>\t<v1>,<v2>,...` per record with decimal floats and LF
 * endings. The class count is the largest label plus one.
 */
export function formatEmbeddingFile(rows: EmbeddingRow[], dim: number): string {
    if (rows.length === 0) {
        throw new ExtractError("refusing to write an embedding file with no rows");
    }
    let maxLabel = 0;
    for (const row of rows) {
        if (row.values.length !== dim) {
            throw new ExtractError(
                `row has ${row.values.length} values, expected ${dim}`,
            );
        }
        if (row.values.some((v) => !Number.isFinite(v))) {
            throw new ExtractError(`non-finite value in row with label ${row.label}`);
        }
        maxLabel = Math.max(maxLabel, row.label);
    }
    const classes = Math.max(maxLabel + 1, 2);
    const lines = [`#emb dim=${dim} classes=${classes}`];
    for (const row of rows) {
        lines.push(`${row.label}\t${row.values.map((v) => v.toString()).join(",")}`);
    }
    return lines.join("\n") + "\n";
}

/** Write atomically: a temp file in the target directory, then rename. */
export function writeEmbeddingFile(outPath: string, rows: EmbeddingRow[], dim: number): void {
    const text = formatEmbeddingFile(rows, dim);
    const tmpPath = path.join(
        path.dirname(outPath),
        `.${path.basename(outPath)}.tmp-${process.pid}`,
    );
    fs.writeFileSync(tmpPath, text, "utf8");
    fs.renameSync(tmpPath, outPath);
}

const HEADER = /^#emb dim=(\d+) classes=(\d+)$/;
const FLOAT = /^-?(\d+(\.\d+)?|\.\d+)([eE][-+]?\d+)?$/;

/**
 * Strict grammar check of an embedding file, mirroring what the consumer
 * of these files validates on load. Returns the parsed shape.
 */
export function validateEmbeddingFile(text: string): {
    dim: number;
    classes: number;
    rows: number;
} {
    const lines = text.split("\n");
    const header = HEADER.exec(lines[0] ?? "");
    if (!header) {
        throw new ExtractError(`malformed header: '${lines[0]}'`);
    }
    const dim = Number(header[1]);
    const classes = Number(header[2]);
    let rows = 0;
    for (let i = 1; i < lines.length; i++) {
        const line = lines[i];
        if (line === "") continue;
        const fields = line.split("\t");
        if (fields.length !== 2) {
            throw new ExtractError(`line ${i + 1}: expected '<label>\\t<values>'`);
        }
        const label = Number(fields[0]);
        if (!Number.isInteger(label) || label < 0 || label >= classes) {
            throw new ExtractError(`line ${i + 1}: bad label '${fields[0]}'`);
        }
        const values = fields[1].split(",");
        if (values.length !== dim) {
            throw new ExtractError(
                `line ${i + 1}: expected ${dim} values, got ${values.length}`,
            );
        }
        for (const value of values) {
            if (!FLOAT.test(value)) {
                throw new ExtractError(`line ${i + 1}: bad value '${value}'`);
            }
        }
        rows++;
    }
    if (rows === 0) {
        throw new ExtractError("no data rows");
    }
    return { dim, classes, rows };
}
