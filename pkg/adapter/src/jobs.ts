/** Batch jobs: expression embedding and per-topic flag production, both
 * emitting the pipeline package's exchange file formats. */

import { DEFAULT_TRAIN, TrainOptions, fineTuneAll } from "./classifier.js";
import { DEFAULT_MODEL, Encoder, configFor } from "./encoder.js";
import {
  ArticleRecord,
  EmbeddingRecord,
  FlagRecord,
  PairRecord,
  TeacherRecord,
  readJsonl,
  splitParagraphs,
  writeJsonl,
} from "./exchange.js";

export interface AdapterJob {
  input: string;
  model: string;
  output: string;
  batchSize: number;
}

export interface ClassifyJob extends AdapterJob {
  teacher: string;
  trainCorpus: string;
  train?: Partial<TrainOptions>;
}

export async function runEmbedJob(job: AdapterJob): Promise<{ records: number; dim: number }> {
  const encoder = new Encoder(configFor(job.model || DEFAULT_MODEL));
  const pairs = readJsonl<PairRecord>(job.input);
  const records: EmbeddingRecord[] = [];
  const batch = Math.max(1, job.batchSize);
  for (let start = 0; start < pairs.length; start += batch) {
    for (const pair of pairs.slice(start, start + batch)) {
      for (const role of ["cause", "effect"] as const) {
        records.push({
          article_id: pair.article_id,
          paragraph: pair.paragraph,
          sentence: pair.sentence,
          role,
          vector: encoder.encode(role === "cause" ? pair.cause_text : pair.effect_text),
        });
      }
    }
  }
  const dim = encoder.config.dim;
  for (const record of records) {
    if (record.vector.length !== dim) {
      throw new Error(`inconsistent vector dimension for ${record.article_id}`);
    }
  }
  writeJsonl(job.output, records);
  return { records: records.length, dim };
}

export async function runClassifyJob(job: ClassifyJob): Promise<{ paragraphs: number; topics: number }> {
  const encoder = new Encoder(configFor(job.model || DEFAULT_MODEL));
  const teachers = readJsonl<TeacherRecord>(job.teacher);
  const trainArticles = readJsonl<ArticleRecord>(job.trainCorpus);
  const targets = readJsonl<ArticleRecord>(job.input);
  const options = { ...DEFAULT_TRAIN, ...job.train };

  const heads = await fineTuneAll(teachers, trainArticles, encoder, options);
  try {
    const flags: FlagRecord[] = [];
    for (const article of targets) {
      splitParagraphs(article.body).forEach((text, ordinal) => {
        const topics = heads.filter((h) => h.predict(encoder, text)).map((h) => h.topic);
        flags.push({ article_id: article.id, ordinal, topics: topics.sort() });
      });
    }
    flags.sort((a, b) =>
      a.article_id < b.article_id ? -1 : a.article_id > b.article_id ? 1 : a.ordinal - b.ordinal,
    );
    writeJsonl(job.output, flags);
    return { paragraphs: flags.length, topics: heads.length };
  } finally {
    heads.forEach((h) => h.dispose());
  }
}
