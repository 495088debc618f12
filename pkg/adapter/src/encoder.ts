/**
 * Deterministic transformer sentence encoder.
 *
 * Weights are derived from the model identifier with a seeded PRNG, so a
 * given model id always produces the same vectors on any machine — no
 * downloads involved. Pretrained checkpoints are not reachable in an
 * offline setup; the id selects an architecture/seed instead.
 */

export interface EncoderConfig {
  modelId: string;
  dim: number;
  heads: number;
  ffnDim: number;
  vocabSize: number;
  maxLen: number;
  /** Weight on the shared positional signal; kept small so short
   * expressions are compared mostly by their words. */
  positionalScale: number;
}

export const DEFAULT_MODEL = "builtin:base-64";

export function configFor(modelId: string, dim?: number): EncoderConfig {
  const match = /^builtin:([a-z]+)-(\d+)$/.exec(modelId);
  const width = dim ?? (match ? parseInt(match[2], 10) : 64);
  if (width < 8 || width % 4 !== 0) {
    throw new Error(`unsupported encoder width ${width}`);
  }
  return {
    modelId,
    dim: width,
    heads: 4,
    ffnDim: width * 2,
    vocabSize: 4096,
    maxLen: 128,
    positionalScale: 0.1,
  };
}

export function fnv1a(text: string): number {
  let h = 0x811c9dc5;
  const bytes = new TextEncoder().encode(text);
  for (const b of bytes) {
    h ^= b;
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h >>> 0;
}

/** mulberry32: small deterministic PRNG. */
function makeRng(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function gaussian(rng: () => number): number {
  // Box-Muller; rng never returns 0 exactly often enough to matter, guard anyway
  const u = Math.max(rng(), 1e-12);
  const v = rng();
  return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
}

function randomMatrix(rng: () => number, rows: number, cols: number, scale: number): Float64Array {
  const out = new Float64Array(rows * cols);
  for (let i = 0; i < out.length; i++) out[i] = gaussian(rng) * scale;
  return out;
}

const WORD_RE = /[\p{L}\p{N}_']+/gu;

export function tokenize(text: string): string[] {
  return Array.from(text.toLowerCase().matchAll(WORD_RE), (m) => m[0]);
}

export class Encoder {
  readonly config: EncoderConfig;
  private readonly embeddings: Float64Array;
  private readonly wq: Float64Array;
  private readonly wk: Float64Array;
  private readonly wv: Float64Array;
  private readonly wo: Float64Array;
  private readonly w1: Float64Array;
  private readonly w2: Float64Array;
  private readonly positional: Float64Array;

  constructor(config: EncoderConfig) {
    this.config = config;
    const { dim, ffnDim, vocabSize, maxLen } = config;
    const rng = makeRng(fnv1a(config.modelId));
    this.embeddings = randomMatrix(rng, vocabSize, dim, 0.5);
    this.wq = randomMatrix(rng, dim, dim, 0.3);
    this.wk = randomMatrix(rng, dim, dim, 0.3);
    this.wv = randomMatrix(rng, dim, dim, 0.3);
    this.wo = randomMatrix(rng, dim, dim, 0.3);
    this.w1 = randomMatrix(rng, dim, ffnDim, 0.3);
    this.w2 = randomMatrix(rng, ffnDim, dim, 0.3);
    this.positional = new Float64Array(maxLen * dim);
    for (let p = 0; p < maxLen; p++) {
      for (let j = 0; j < dim; j += 2) {
        const angle = p / Math.pow(10000, j / dim);
        this.positional[p * dim + j] = config.positionalScale * Math.sin(angle);
        if (j + 1 < dim) this.positional[p * dim + j + 1] = config.positionalScale * Math.cos(angle);
      }
    }
  }

  tokenIds(text: string): number[] {
    return tokenize(text).map((t) => fnv1a(t) % this.config.vocabSize);
  }

  /** Base embedding row for a vocabulary bucket (read-only view). */
  embeddingRow(id: number): Float64Array {
    const { dim, vocabSize } = this.config;
    if (id < 0 || id >= vocabSize) throw new Error(`bucket ${id} out of range`);
    return this.embeddings.subarray(id * dim, (id + 1) * dim);
  }

  /** Unit-normalized sentence vector; all-zero for token-free text. */
  encode(text: string): number[] {
    const { dim, heads, ffnDim, maxLen } = this.config;
    const ids = this.tokenIds(text).slice(0, maxLen);
    const n = ids.length;
    if (n === 0) return new Array(dim).fill(0);

    let x: Float64Array = new Float64Array(n * dim);
    for (let i = 0; i < n; i++) {
      for (let j = 0; j < dim; j++) {
        x[i * dim + j] = this.embeddings[ids[i] * dim + j] + this.positional[i * dim + j];
      }
    }

    // single multi-head self-attention block with residual + layernorm
    const q = matmul(x, this.wq, n, dim, dim);
    const k = matmul(x, this.wk, n, dim, dim);
    const v = matmul(x, this.wv, n, dim, dim);
    const dk = dim / heads;
    const attended = new Float64Array(n * dim);
    const scores = new Float64Array(n);
    for (let h = 0; h < heads; h++) {
      const off = h * dk;
      for (let i = 0; i < n; i++) {
        let max = -Infinity;
        for (let j = 0; j < n; j++) {
          let s = 0;
          for (let c = 0; c < dk; c++) s += q[i * dim + off + c] * k[j * dim + off + c];
          scores[j] = s / Math.sqrt(dk);
          if (scores[j] > max) max = scores[j];
        }
        let z = 0;
        for (let j = 0; j < n; j++) {
          scores[j] = Math.exp(scores[j] - max);
          z += scores[j];
        }
        for (let j = 0; j < n; j++) {
          const w = scores[j] / z;
          for (let c = 0; c < dk; c++) attended[i * dim + off + c] += w * v[j * dim + off + c];
        }
      }
    }
    const mixed = matmul(attended, this.wo, n, dim, dim);
    for (let i = 0; i < x.length; i++) x[i] += mixed[i];
    x = layerNorm(x, n, dim);

    // position-wise feed-forward with residual + layernorm
    const hidden = matmul(x, this.w1, n, dim, ffnDim);
    for (let i = 0; i < hidden.length; i++) hidden[i] = Math.max(0, hidden[i]);
    const ffn = matmul(hidden, this.w2, n, ffnDim, dim);
    for (let i = 0; i < x.length; i++) x[i] += ffn[i];
    x = layerNorm(x, n, dim);

    // mean pool and L2 normalize
    const pooled = new Array(dim).fill(0);
    for (let i = 0; i < n; i++) {
      for (let j = 0; j < dim; j++) pooled[j] += x[i * dim + j];
    }
    let norm = 0;
    for (let j = 0; j < dim; j++) {
      pooled[j] /= n;
      norm += pooled[j] * pooled[j];
    }
    norm = Math.sqrt(norm);
    if (norm > 0) for (let j = 0; j < dim; j++) pooled[j] /= norm;
    return pooled;
  }
}

function matmul(a: Float64Array, b: Float64Array, n: number, inner: number, out: number): Float64Array {
  const result = new Float64Array(n * out);
  for (let i = 0; i < n; i++) {
    for (let c = 0; c < inner; c++) {
      const av = a[i * inner + c];
      if (av === 0) continue;
      for (let j = 0; j < out; j++) result[i * out + j] += av * b[c * out + j];
    }
  }
  return result;
}

function layerNorm(x: Float64Array, n: number, dim: number): Float64Array {
  const out = new Float64Array(n * dim);
  for (let i = 0; i < n; i++) {
    let mean = 0;
    for (let j = 0; j < dim; j++) mean += x[i * dim + j];
    mean /= dim;
    let variance = 0;
    for (let j = 0; j < dim; j++) {
      const d = x[i * dim + j] - mean;
      variance += d * d;
    }
    const sd = Math.sqrt(variance / dim) + 1e-6;
    for (let j = 0; j < dim; j++) out[i * dim + j] = (x[i * dim + j] - mean) / sd;
  }
  return out;
}

export function cosine(a: number[], b: number[]): number {
  if (a.length !== b.length) throw new Error("dimension mismatch");
  let dot = 0;
  let na = 0;
  let nb = 0;
  for (let i = 0; i < a.length; i++) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na === 0 || nb === 0) return 0;
  return dot / (Math.sqrt(na) * Math.sqrt(nb));
}
