/** One labeled corpus record: a sentence, or both sides of a sentence pair. */
export interface TextRecord {
    label: number;
    texts: string[];
}

/** One output record: a label and a fixed-width real vector. */
export interface EmbeddingRow {
    label: number;
    values: number[];
}

/** A sentence encoder producing fixed-width pooled vectors. */
export interface SentenceEncoder {
    readonly dim: number;
    encode(text: string): Promise<number[]>;
    /** Encode two sentences jointly with the encoder's pair packing. */
    encodePair(first: string, second: string): Promise<number[]>;
}

/** Fatal problem with an input file, a model, or produced vectors. */
export class ExtractError extends Error {}
