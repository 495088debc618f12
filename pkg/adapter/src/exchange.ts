/** Line-delimited exchange file formats shared with the pipeline package. */

import * as fs from "node:fs";

export interface PairRecord {
  article_id: string;
  paragraph: number;
  sentence: number;
  cause_text: string;
  effect_text: string;
  cue: string;
  date: string;
  topics: string[];
}

export interface ArticleRecord {
  id: string;
  date: string;
  title: string;
  body: string;
  topics: string[];
}

export interface TeacherRecord {
  topic: string;
  positives: string[];
  negatives: string[];
}

export interface EmbeddingRecord {
  article_id: string;
  paragraph: number;
  sentence: number;
  role: "cause" | "effect";
  vector: number[];
}

export interface FlagRecord {
  article_id: string;
  ordinal: number;
  topics: string[];
}

export function readJsonl<T>(path: string): T[] {
  const out: T[] = [];
  const lines = fs.readFileSync(path, "utf-8").split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    try {
      out.push(JSON.parse(line) as T);
    } catch (err) {
      throw new Error(`${path}: malformed line ${i + 1}: ${err}`);
    }
  }
  return out;
}

export function writeJsonl(path: string, records: object[]): void {
  const body = records.map((r) => JSON.stringify(r)).join("\n");
  fs.writeFileSync(path, records.length ? body + "\n" : "", "utf-8");
}

/** Paragraph blocks split on blank lines, matching the pipeline's rule. */
export function splitParagraphs(body: string): string[] {
  return body
    .split(/\n[ \t]*\n+/)
    .map((block) => block.trim())
    .filter((block) => block.length > 0);
}

export function articleText(article: ArticleRecord): string {
  return splitParagraphs(article.body).join(" ");
}
