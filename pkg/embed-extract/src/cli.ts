#!/usr/bin/env node
import * as path from "node:path";
import * as process from "node:process";
import { fileURLToPath } from "node:url";

import { readCorpus } from "./corpus.js";
import { writeEmbeddingFile } from "./embfile.js";
import { extractGlove, loadWordVectors } from "./glove.js";
import { extractTransformer, loadTransformersEncoder } from "./transformer.js";
import { ExtractError } from "./types.js";

const USAGE = `usage: embed-extract extract --dataset <corpus.tsv> --method glove|transformer --out <file>
  glove options:        --vectors <vectors.txt> [--dim 50]
  transformer options:  --model <name> [--pair-mode] [--dim 768]

The corpus is tab separated: '<label>\\t<text>' or '<label>\\t<text>\\t<text>'.`;

interface Flags {
    [name: string]: string | boolean;
}

function parseFlags(argv: string[]): Flags {
    const flags: Flags = {};
    for (let i = 0; i < argv.length; i++) {
        const arg = argv[i];
        if (!arg.startsWith("--")) {
            usageError(`unexpected argument '${arg}'`);
        }
        const name = arg.slice(2);
        if (name === "pair-mode") {
            flags[name] = true;
        } else {
            const value = argv[++i];
            if (value === undefined) {
                usageError(`flag --${name} needs a value`);
            }
            flags[name] = value;
        }
    }
    return flags;
}

function usageError(message: string): never {
    console.error(`embed-extract: ${message}`);
    console.error(USAGE);
    process.exit(2);
}

function requireString(flags: Flags, name: string): string {
    const value = flags[name];
    if (typeof value !== "string" || value === "") {
        usageError(`--${name} is required`);
    }
    return value;
}

export async function run(argv: string[]): Promise<number> {
    if (argv[0] !== "extract") {
        usageError(argv.length === 0 ? "missing subcommand" : `unknown subcommand '${argv[0]}'`);
    }
    const flags = parseFlags(argv.slice(1));
    const dataset = requireString(flags, "dataset");
    const method = requireString(flags, "method");
    const outPath = requireString(flags, "out");

    const records = readCorpus(dataset);
    if (method === "glove") {
        const vectorsPath = requireString(flags, "vectors");
        const dim = flags["dim"] === undefined ? 50 : Number(flags["dim"]);
        const words = loadWordVectors(vectorsPath, dim);
        const { rows, dropped } = extractGlove(records, words);
        writeEmbeddingFile(outPath, rows, words.dim);
        if (dropped > 0) {
            console.error(
                `embed-extract: dropped ${dropped} of ${records.length} records with no in-vocabulary token`,
            );
        }
        console.log(`wrote ${rows.length} embeddings (dim ${words.dim}) -> ${outPath}`);
    } else if (method === "transformer") {
        const model = requireString(flags, "model");
        const dim = flags["dim"] === undefined ? 768 : Number(flags["dim"]);
        const pairMode = flags["pair-mode"] === true;
        const encoder = await loadTransformersEncoder(model, dim);
        const rows = await extractTransformer(records, encoder, pairMode);
        writeEmbeddingFile(outPath, rows, encoder.dim);
        console.log(`wrote ${rows.length} embeddings (dim ${encoder.dim}) -> ${outPath}`);
    } else {
        usageError(`--method must be 'glove' or 'transformer', got '${method}'`);
    }
    return 0;
}

const isMain =
    process.argv[1] !== undefined &&
    fileURLToPath(import.meta.url) === path.resolve(process.argv[1]);

if (isMain) {
    run(process.argv.slice(2))
        .then((code) => process.exit(code))
        .catch((error) => {
            if (error instanceof ExtractError) {
                console.error(`embed-extract: ${error.message}`);
                process.exit(1);
            }
            console.error(error);
            process.exit(1);
        });
}
