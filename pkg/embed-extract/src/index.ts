export { readCorpus } from "./corpus.js";
export { formatEmbeddingFile, validateEmbeddingFile, writeEmbeddingFile } from "./embfile.js";
export { extractGlove, loadWordVectors, meanPool } from "./glove.js";
export { tokenize } from "./tokenize.js";
export { extractTransformer, loadTransformersEncoder } from "./transformer.js";
export { EmbeddingRow, ExtractError, SentenceEncoder, TextRecord } from "./types.js";
