import { EmbeddingRow, ExtractError, SentenceEncoder, TextRecord } from "./types.js";

/**
 * Load a pretrained encoder through transformers.js, exposing its pooled
 * sentence output. Any load problem (package not installed, model
 * missing, no network) is fatal.
 */
export async function loadTransformersEncoder(
    modelName: string,
    dim = 768,
): Promise<SentenceEncoder> {
    // Optional dependency, resolved at runtime only when this method is used.
    const packageName = "@xenova/transformers";
    let pipelineFactory: (task: string, model: string) => Promise<any>;
    try {
        const mod: any = await import(packageName);
        pipelineFactory = mod.pipeline;
    } catch (cause) {
        throw new ExtractError(
            `cannot load encoder '${modelName}': ${(cause as Error).message}`,
        );
    }
    let extractor: any;
    try {
        extractor = await pipelineFactory("feature-extraction", modelName);
    } catch (cause) {
        throw new ExtractError(
            `cannot load encoder '${modelName}': ${(cause as Error).message}`,
        );
    }
    const sep: string = extractor?.tokenizer?.sep_token ?? "";

    async function pooled(text: string): Promise<number[]> {
        const output = await extractor(text, { pooling: "mean", normalize: false });
        return Array.from(output.data as Iterable<number>);
    }

    return {
        dim,
        encode: (text) => pooled(text),
        // Joint packing via the tokenizer's separator when it has one.
        encodePair: (first, second) =>
            pooled(sep ? `${first} ${sep} ${second}` : `${first} ${second}`),
    };
}

/**
 * Encode every record with a pooled sentence encoder.
 *
 * With `pairMode`, two-text records go through the encoder's pair
 * packing. Without it, pair-shaped records are flattened with a space
 * and a single warning is emitted, since paraphrase-style corpora are
 * expected to be encoded jointly.
 */
export async function extractTransformer(
    records: TextRecord[],
    encoder: SentenceEncoder,
    pairMode: boolean,
    warn: (message: string) => void = (message) => console.warn(message),
): Promise<EmbeddingRow[]> {
    const rows: EmbeddingRow[] = [];
    let warned = false;
    for (const record of records) {
        let values: number[];
        if (record.texts.length === 2 && pairMode) {
            values = await encoder.encodePair(record.texts[0], record.texts[1]);
        } else {
            if (record.texts.length === 2 && !pairMode && !warned) {
                warn(
                    "corpus contains sentence pairs but --pair-mode is off; " +
                        "encoding each pair as one flattened sentence",
                );
                warned = true;
            }
            values = await encoder.encode(record.texts.join(" "));
        }
        if (values.length !== encoder.dim) {
            throw new ExtractError(
                `encoder returned ${values.length} dims, expected ${encoder.dim}`,
            );
        }
        rows.push({ label: record.label, values });
    }
    return rows;
}
