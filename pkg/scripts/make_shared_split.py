#!/usr/bin/env python3
"""Generate the shared noisy classification split: a two-topic corpus with
overlapping vocabulary and 10% flipped training labels, plus the exported
teacher sets and the frozen held-out F1 of the built-in linear baseline.

Writes fixtures/shared_split/{train.jsonl,heldout.jsonl,teacher.jsonl,meta.json}.
External trainers consume these files and compare their held-out macro F1
against meta.json's baseline_f1 on the same split.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(ROOT / "tests"))

from narrative_chains.corpus import write_corpus
from narrative_chains.topics import TrainConfig, build_teacher_data, train, write_teacher_sets
from synthdata import macro_f1, noisy_corpus

SEED = 42
TOPICS = ("SOLP", "FLOD")


def main():
    outdir = ROOT / "fixtures" / "shared_split"
    outdir.mkdir(parents=True, exist_ok=True)
    train_store, heldout_store = noisy_corpus(seed=SEED)
    write_corpus(train_store, outdir / "train.jsonl")
    write_corpus(heldout_store, outdir / "heldout.jsonl")

    labeled = [build_teacher_data(train_store, t) for t in TOPICS]
    write_teacher_sets(labeled, outdir / "teacher.jsonl")

    cfg = TrainConfig()
    models = {ls.topic: train(ls, train_store, cfg) for ls in labeled}
    baseline = macro_f1(models, heldout_store)

    meta = {
        "seed": SEED,
        "topics": list(TOPICS),
        "train_articles": len(train_store),
        "heldout_articles": len(heldout_store),
        "label_noise": 0.10,
        "baseline_f1": baseline,
        "eval": "macro F1 over topics; per-article prediction vs heldout taxonomy codes",
    }
    with open(outdir / "meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {outdir} (baseline macro F1 = {baseline})")


if __name__ == "__main__":
    main()
