/**
 * Lowercase and split on anything that is not a letter, digit, or
 * apostrophe. Deliberately minimal so tokens line up with lowercase
 * pretrained word-vector vocabularies.
 */
export function tokenize(text: string): string[] {
    return text
        .toLowerCase()
        .split(/[^a-z0-9']+/)
        .map((token) => token.replace(/^'+|'+$/g, ""))
        .filter((token) => token.length > 0);
}
