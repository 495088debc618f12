// Sanity probe: held-out macro F1 of the fine-tuned heads on the shared split.
import * as path from "node:path";
import { fileURLToPath } from "node:url";

import { evaluateMacroF1, fineTuneAll } from "../src/classifier.js";
import { Encoder, configFor } from "../src/encoder.js";
import { ArticleRecord, TeacherRecord, readJsonl } from "../src/exchange.js";

const HERE = path.dirname(fileURLToPath(import.meta.url));
const SHARED = path.resolve(HERE, "../../fixtures/shared_split");

const train = readJsonl<ArticleRecord>(path.join(SHARED, "train.jsonl"));
const held = readJsonl<ArticleRecord>(path.join(SHARED, "heldout.jsonl"));
const teachers = readJsonl<TeacherRecord>(path.join(SHARED, "teacher.jsonl"));

const enc = new Encoder(configFor("builtin:base-64"));
const started = Date.now();
const heads = await fineTuneAll(teachers, train, enc);
console.log("train F1:", evaluateMacroF1(heads, train, enc).toFixed(4));
console.log("held-out F1:", evaluateMacroF1(heads, held, enc).toFixed(4));
console.log("elapsed:", ((Date.now() - started) / 1000).toFixed(1), "s");
heads.forEach((h) => h.dispose());
