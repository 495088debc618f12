#!/usr/bin/env python3
"""Generate the bundled 60-article demo corpus with 25 planted causal
chains across 5 topics, then run the pipeline on it and verify that the
planted structure comes out intact (flags as intended, exactly 25 links).

Writes fixtures/demo/{corpus.jsonl,topics.txt,categories.json,config.txt}.
"""

from __future__ import annotations

import json
import random
import sys
import tempfile
from datetime import date, timedelta
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from narrative_chains import pipeline as pl
from narrative_chains.chains import read_chains
from narrative_chains.topics import read_flags

TOPICS = ["INTL", "POLI", "CORP", "MONE", "DISA"]
CATEGORIES = {
    "INTL": "international conferences",
    "POLI": "domestic policy",
    "CORP": "business-related",
    "MONE": "monetary policy/macroeconomics",
    "DISA": "natural disasters",
}
KEYWORDS = {
    "international conferences": ["summit", "accord", "negotiations"],
    "domestic policy": ["regulation", "targets", "subsidies"],
    "business-related": ["investment", "strategy", "procurement"],
    "monetary policy/macroeconomics": ["rates", "prices", "inflation"],
    "natural disasters": ["flood", "typhoon", "heatwave"],
}
VOCAB = {t: [f"{t.lower()}term{i}" for i in range(20)] for t in TOPICS}
NEUTRAL = [f"neutralterm{i}" for i in range(20)]

N_CHAINS = 25


def vocab_sentence(rng: random.Random, words: list[str]) -> str:
    return " ".join(rng.sample(words, 8)) + "."


def make_chain_plan():
    ordered = [(s, d) for s in TOPICS for d in TOPICS if s != d]
    plan = []
    for k in range(N_CHAINS):
        src, dst = ordered[k % len(ordered)]
        t1 = date(2018, 1, 5) + timedelta(days=k * 35)
        t2 = t1 + timedelta(days=25 + (k * 37) % 200)
        plan.append({
            "k": k, "src": src, "dst": dst, "t1": t1, "t2": t2,
            "cause": f"origin{k}x origin{k}y",
            "bridge": f"bridge{k}a bridge{k}b bridge{k}c",
            "effect": f"result{k}x result{k}y",
        })
    return plan


def build_articles(rng: random.Random, plan):
    articles = []

    def add(idx, day, codes, paragraphs, kind):
        articles.append({
            "id": f"d{idx:03d}", "date": day.isoformat(),
            "title": f"{kind} article {idx}",
            "body": "\n\n".join(paragraphs), "topics": codes,
        })
        return f"d{idx:03d}"

    idx = 0
    for chain in plan:
        chain["cause_id"] = add(
            idx, chain["t1"], [chain["src"]],
            [vocab_sentence(rng, VOCAB[chain["src"]]) + " " + vocab_sentence(rng, VOCAB[chain["src"]]),
             f"{chain['cause']} leads to {chain['bridge']}. " + vocab_sentence(rng, VOCAB[chain["src"]])],
            "cause",
        )
        idx += 1
        chain["effect_id"] = add(
            idx, chain["t2"], [chain["dst"]],
            [vocab_sentence(rng, VOCAB[chain["dst"]]) + " " + vocab_sentence(rng, VOCAB[chain["dst"]]),
             f"{chain['bridge']} will cause {chain['effect']}. " + vocab_sentence(rng, VOCAB[chain["dst"]])],
            "effect",
        )
        idx += 1

    # below-threshold distractors: one bridge token out of three (cosine ~ 1/3)
    for j, k in enumerate((0, 5, 10, 15)):
        topic = TOPICS[j % len(TOPICS)]
        add(idx, date(2019, 2, 3) + timedelta(days=31 * j), [topic],
            [vocab_sentence(rng, VOCAB[topic]),
             f"bridge{k}a weak{j}p weak{j}q will cause noise{j}r noise{j}s. "
             + vocab_sentence(rng, VOCAB[topic])],
            "below-threshold distractor")
        idx += 1

    # same-day distractors: full bridge phrase but d = 0 against the cause article
    for j, chain in enumerate(plan[1:16:5]):
        topic = TOPICS[(j + 2) % len(TOPICS)]
        add(idx, chain["t1"], [topic],
            [vocab_sentence(rng, VOCAB[topic]),
             f"{chain['bridge']} will cause sameday{j}r sameday{j}s. "
             + vocab_sentence(rng, VOCAB[topic])],
            "same-day distractor")
        idx += 1

    # cue-free filler: multi-code, two-code, and code-free articles
    add(idx, date(2018, 6, 15), ["INTL", "POLI", "CORP"],
        [vocab_sentence(rng, VOCAB["INTL"]), vocab_sentence(rng, VOCAB["POLI"])],
        "filler")
    idx += 1
    add(idx, date(2019, 3, 10), ["MONE", "DISA"],
        [vocab_sentence(rng, VOCAB["MONE"]), vocab_sentence(rng, VOCAB["DISA"])],
        "filler")
    idx += 1
    add(idx, date(2019, 9, 1), [],
        [vocab_sentence(rng, NEUTRAL), vocab_sentence(rng, NEUTRAL)],
        "filler")
    idx += 1
    return articles


def write_fixture(outdir: Path, articles, plan):
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "corpus.jsonl", "w", encoding="utf-8") as fh:
        for art in articles:
            fh.write(json.dumps(art, ensure_ascii=False, sort_keys=True) + "\n")
    (outdir / "topics.txt").write_text("".join(f"{t}\n" for t in TOPICS), encoding="utf-8")
    with open(outdir / "categories.json", "w", encoding="utf-8") as fh:
        json.dump({"categories": CATEGORIES, "keywords": KEYWORDS}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    (outdir / "config.txt").write_text(
        "# demo pipeline configuration (paths relative to the repo root)\n"
        "corpus = fixtures/demo/corpus.jsonl\n"
        "topics = fixtures/demo/topics.txt\n"
        "categories = fixtures/demo/categories.json\n"
        "lexicon = en\n"
        "threshold = 0.7\n"
        "decay_a = 0.05\n"
        "half_life_days = 1825\n"
        "outdir = out/demo\n"
        "seed = 0\n",
        encoding="utf-8",
    )


def verify(outdir: Path, plan) -> dict:
    with tempfile.TemporaryDirectory() as tmp:
        cfg = pl.PipelineConfig(
            corpus=str(outdir / "corpus.jsonl"),
            topics=str(outdir / "topics.txt"),
            categories=str(outdir / "categories.json"),
            outdir=tmp,
        )
        report = pl.run_pipeline(cfg)
        flags = read_flags(Path(tmp) / pl.FLAGS_FILE)
        for chain in plan:
            assert flags[(chain["cause_id"], 1)] == {chain["src"]}, chain
            assert flags[(chain["effect_id"], 1)] == {chain["dst"]}, chain
        chains = read_chains(Path(tmp) / pl.CHAINS_FILE)
        assert len(chains.links) == N_CHAINS, f"expected {N_CHAINS} links, got {len(chains.links)}"
        by_current = {l.current_key[0]: l for l in chains.links}
        for chain in plan:
            lnk = by_current[chain["effect_id"]]
            assert lnk.past_key[0] == chain["cause_id"]
            assert lnk.src_topics == frozenset({chain["src"]})
            assert lnk.dst_topics == frozenset({chain["dst"]})
            assert abs(lnk.similarity - 1.0) < 1e-12
            assert lnk.d == (chain["t2"] - chain["t1"]).days
    return report


def main():
    rng = random.Random(2024)
    plan = make_chain_plan()
    articles = build_articles(rng, plan)
    assert len(articles) == 60, len(articles)
    outdir = ROOT / "fixtures" / "demo"
    write_fixture(outdir, articles, plan)
    report = verify(outdir, plan)
    print(f"wrote {outdir} (60 articles, {N_CHAINS} planted chains)")
    print(json.dumps(report["counts"], indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
