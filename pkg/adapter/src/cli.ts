#!/usr/bin/env node
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { DEFAULT_MODEL } from "./encoder.js";
import { runClassifyJob, runEmbedJob } from "./jobs.js";

await yargs(hideBin(process.argv))
  .scriptName("adapter")
  .command(
    "embed",
    "embed causal-pair expressions into the exchange format",
    (y) =>
      y
        .option("model", { type: "string", default: DEFAULT_MODEL })
        .option("in", { type: "string", demandOption: true, describe: "causal-pair JSONL file" })
        .option("out", { type: "string", demandOption: true })
        .option("batch", { type: "number", default: 32 }),
    async (argv) => {
      const result = await runEmbedJob({
        input: argv.in,
        model: argv.model,
        output: argv.out,
        batchSize: argv.batch,
      });
      console.log(JSON.stringify(result));
    },
  )
  .command(
    "classify",
    "fine-tune per-topic heads and write paragraph flags",
    (y) =>
      y
        .option("model", { type: "string", default: DEFAULT_MODEL })
        .option("teacher", { type: "string", demandOption: true, describe: "teacher sets JSONL" })
        .option("train-corpus", { type: "string", demandOption: true, describe: "articles for the teacher ids" })
        .option("in", { type: "string", demandOption: true, describe: "corpus whose paragraphs get flagged" })
        .option("out", { type: "string", demandOption: true })
        .option("epochs", { type: "number", default: 200 })
        .option("batch", { type: "number", default: 32 }),
    async (argv) => {
      const result = await runClassifyJob({
        input: argv.in,
        model: argv.model,
        output: argv.out,
        batchSize: argv.batch,
        teacher: argv.teacher,
        trainCorpus: argv["train-corpus"],
        train: { epochs: argv.epochs },
      });
      console.log(JSON.stringify(result));
    },
  )
  .demandCommand(1)
  .strict()
  .fail((msg, err) => {
    console.error(msg ?? err?.message ?? "unknown error");
    process.exit(1);
  })
  .parseAsync();
