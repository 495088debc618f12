// Sanity probe: paraphrase vs unrelated cosine margins for the encoder.
import { Encoder, configFor, cosine } from "../src/encoder.js";

const PARAPHRASES: Array<[string, string]> = [
  ["strict environmental regulations", "tougher environmental rules"],
  ["electricity prices rise sharply", "sharp rise in electricity prices"],
  ["flood damage to coastal factories", "coastal factories damaged by flooding"],
  ["higher carbon taxes", "carbon tax increases"],
];
const UNRELATED: Array<[string, string]> = [
  ["strict environmental regulations", "quarterly earnings surprised analysts"],
  ["electricity prices rise sharply", "the committee met on tuesday"],
  ["flood damage to coastal factories", "new smartphone sales grew"],
  ["higher carbon taxes", "football season started early"],
];

for (const scale of [1.0, 0.2, 0.1, 0.0]) {
  const config = { ...configFor("builtin:base-64"), positionalScale: scale };
  const enc = new Encoder(config);
  const p = PARAPHRASES.map(([a, b]) => cosine(enc.encode(a), enc.encode(b)));
  const u = UNRELATED.map(([a, b]) => cosine(enc.encode(a), enc.encode(b)));
  const fmt = (xs: number[]) => xs.map((x) => x.toFixed(3)).join(" ");
  console.log(
    `scale=${scale}: paraphrase [${fmt(p)}] unrelated [${fmt(u)}] ` +
    `margin=${(Math.min(...p) - Math.max(...u)).toFixed(3)}`,
  );
}
