import * as fs from "node:fs";

import { ExtractError, TextRecord } from "./types.js";

/**
 * Read a labeled text corpus.
 *
 * Tab-separated, one record per line: `<label>\t<text>` for single
 * sentences or `<label>\t<text>\t<text>` for sentence pairs. Labels are
 * non-negative integers. Blank lines are ignored.
 */
export function readCorpus(path: string): TextRecord[] {
    let raw: string;
    try {
        raw = fs.readFileSync(path, "utf8");
    } catch (cause) {
        throw new ExtractError(`cannot read corpus ${path}: ${(cause as Error).message}`);
    }
    const records: TextRecord[] = [];
    const lines = raw.split("\n");
    for (let i = 0; i < lines.length; i++) {
        const line = lines[i];
        if (line.trim() === "") continue;
        const fields = line.split("\t");
        if (fields.length < 2 || fields.length > 3) {
            throw new ExtractError(
                `${path}:${i + 1}: expected '<label>\\t<text>[\\t<text>]', got ${fields.length} fields`,
            );
        }
        const label = Number(fields[0]);
        if (!Number.isInteger(label) || label < 0) {
            throw new ExtractError(
                `${path}:${i + 1}: label must be a non-negative integer, got '${fields[0]}'`,
            );
        }
        const texts = fields.slice(1);
        if (texts.some((t) => t.trim() === "")) {
            throw new ExtractError(`${path}:${i + 1}: empty text field`);
        }
        records.push({ label, texts });
    }
    if (records.length === 0) {
        throw new ExtractError(`${path}: no records`);
    }
    return records;
}
