/**
 * Per-topic binary classifiers fine-tuned from the base encoder.
 *
 * Each topic gets its own copy of the encoder's embedding layer plus a
 * sigmoid head, trained end-to-end on the exported teacher sets. Only
 * hash buckets observed in the teacher texts carry weights; unseen
 * buckets contribute nothing at prediction time.
 */

import * as tf from "@tensorflow/tfjs";

import { Encoder } from "./encoder.js";
import { ArticleRecord, TeacherRecord, articleText } from "./exchange.js";

export interface TrainOptions {
  epochs: number;
  learningRate: number;
  seed: number;
}

export const DEFAULT_TRAIN: TrainOptions = { epochs: 200, learningRate: 0.5, seed: 7 };

export class TopicHead {
  constructor(
    readonly topic: string,
    readonly threshold: number,
    private readonly vocab: Map<number, number>,
    private readonly model: tf.LayersModel,
  ) {}

  /** Bag-mean feature over the fine-tuned vocabulary. */
  features(encoder: Encoder, text: string): Float32Array {
    const ids = encoder.tokenIds(text);
    const row = new Float32Array(this.vocab.size);
    if (ids.length === 0) return row;
    for (const id of ids) {
      const col = this.vocab.get(id);
      if (col !== undefined) row[col] += 1 / ids.length;
    }
    return row;
  }

  predictProb(encoder: Encoder, text: string): number {
    const row = this.features(encoder, text);
    return tf.tidy(() => {
      const scores = this.model.predict(tf.tensor2d(row, [1, row.length])) as tf.Tensor;
      return scores.dataSync()[0];
    });
  }

  predict(encoder: Encoder, text: string): boolean {
    const ids = encoder.tokenIds(text);
    if (ids.length === 0) return false;
    return this.predictProb(encoder, text) >= this.threshold;
  }

  dispose(): void {
    this.model.dispose();
  }
}

export async function fineTuneTopic(
  teacher: TeacherRecord,
  articlesById: Map<string, ArticleRecord>,
  encoder: Encoder,
  options: TrainOptions = DEFAULT_TRAIN,
): Promise<TopicHead> {
  if (teacher.positives.length === 0 || teacher.negatives.length === 0) {
    throw new Error(
      `topic ${teacher.topic}: insufficient examples per class ` +
      `(${teacher.positives.length} positive, ${teacher.negatives.length} negative)`,
    );
  }
  const docIds = [...teacher.positives, ...teacher.negatives];
  const texts = docIds.map((id) => {
    const article = articlesById.get(id);
    if (!article) throw new Error(`topic ${teacher.topic}: unknown article id ${id}`);
    return articleText(article);
  });

  const observed = new Set<number>();
  const tokenized = texts.map((t) => encoder.tokenIds(t));
  for (const ids of tokenized) for (const id of ids) observed.add(id);
  const vocab = new Map<number, number>();
  for (const id of Array.from(observed).sort((a, b) => a - b)) vocab.set(id, vocab.size);

  const rows = tokenized.map((ids) => {
    const row = new Float32Array(vocab.size);
    for (const id of ids) row[vocab.get(id)!] += 1 / ids.length;
    return row;
  });
  const labels = [
    ...teacher.positives.map(() => 1),
    ...teacher.negatives.map(() => 0),
  ];

  // embedding rows from the base encoder seed the first layer, scaled
  // down so plain gradient descent washes out label noise instead of
  // memorizing it
  const dim = encoder.config.dim;
  const init = new Float32Array(vocab.size * dim);
  let r = 0;
  for (const id of vocab.keys()) {
    const row = encoder.embeddingRow(id);
    for (let j = 0; j < dim; j++) init[r * dim + j] = 0.2 * row[j];
    r += 1;
  }

  const model = tf.sequential();
  model.add(tf.layers.dense({
    inputShape: [vocab.size],
    units: dim,
    useBias: false,
    kernelInitializer: tf.initializers.zeros(),
  }));
  model.add(tf.layers.dense({
    units: 1,
    activation: "sigmoid",
    kernelInitializer: tf.initializers.glorotNormal({ seed: options.seed }),
    biasInitializer: tf.initializers.zeros(),
  }));
  model.layers[0].setWeights([tf.tensor2d(init, [vocab.size, dim])]);
  model.compile({
    optimizer: tf.train.sgd(options.learningRate),
    loss: "binaryCrossentropy",
  });

  const flat = new Float32Array(rows.length * vocab.size);
  rows.forEach((row, i) => flat.set(row, i * vocab.size));
  const x = tf.tensor2d(flat, [rows.length, vocab.size]);
  const y = tf.tensor1d(labels, "float32");
  try {
    await model.fit(x, y, {
      epochs: options.epochs,
      batchSize: rows.length,
      shuffle: false,
      verbose: 0,
    });
  } finally {
    x.dispose();
    y.dispose();
  }
  return new TopicHead(teacher.topic, 0.5, vocab, model);
}

export async function fineTuneAll(
  teachers: TeacherRecord[],
  articles: ArticleRecord[],
  encoder: Encoder,
  options: TrainOptions = DEFAULT_TRAIN,
): Promise<TopicHead[]> {
  const byId = new Map(articles.map((a) => [a.id, a]));
  const heads: TopicHead[] = [];
  for (const teacher of teachers) {
    heads.push(await fineTuneTopic(teacher, byId, encoder, options));
  }
  return heads;
}

/** Article-level macro F1 against the articles' own topic codes. */
export function evaluateMacroF1(
  heads: TopicHead[],
  articles: ArticleRecord[],
  encoder: Encoder,
): number {
  const scores = heads.map((head) => {
    let tp = 0;
    let fp = 0;
    let fn = 0;
    for (const article of articles) {
      const predicted = head.predict(encoder, articleText(article));
      const actual = article.topics.includes(head.topic);
      if (predicted && actual) tp += 1;
      else if (predicted) fp += 1;
      else if (actual) fn += 1;
    }
    const denom = 2 * tp + fp + fn;
    return denom === 0 ? 0 : (2 * tp) / denom;
  });
  return scores.reduce((a, b) => a + b, 0) / scores.length;
}
