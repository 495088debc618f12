"""End-to-end pipeline: each stage reads and writes plain line-delimited
artifact files in the output directory, so stages can be run one at a time
or replayed from persisted intermediates with identical results.

Stage files: articles.jsonl, flags.jsonl, pairs.jsonl, embeddings.jsonl,
chains.jsonl, series.csv, matrix.csv, graph.dot, graph.json (plus
report.json, which carries timings and is not byte-stable).
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import chains as chains_mod
from . import corpus as corpus_mod
from . import embedding as embedding_mod
from . import extraction as extraction_mod
from . import graphs as graphs_mod
from . import index as index_mod
from . import topics as topics_mod
from .corpus import MonthKey

ARTICLES_FILE = "articles.jsonl"
FLAGS_FILE = "flags.jsonl"
PAIRS_FILE = "pairs.jsonl"
EMBEDDINGS_FILE = "embeddings.jsonl"
CHAINS_FILE = "chains.jsonl"
SERIES_FILE = "series.csv"
MATRIX_FILE = "matrix.csv"
GRAPH_DOT_FILE = "graph.dot"
GRAPH_JSON_FILE = "graph.json"
REPORT_FILE = "report.json"

STAGE_FILES = (
    ARTICLES_FILE, FLAGS_FILE, PAIRS_FILE, EMBEDDINGS_FILE, CHAINS_FILE,
    SERIES_FILE, MATRIX_FILE, GRAPH_DOT_FILE, GRAPH_JSON_FILE,
)

STAGES = ("ingest", "classify", "extract", "embed", "chain", "index", "matrix", "graph")

# sentinel period for matrices over an empty corpus span
_EMPTY_PERIOD = (MonthKey(1970, 1), MonthKey(1970, 1))


class ConfigError(ValueError):
    """Raised for unusable pipeline configuration."""


class StageError(RuntimeError):
    """A stage failed; carries the stage name and the underlying cause."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    corpus: str = ""
    topics: str = ""
    lexicon: str = "en"
    profile: str = corpus_mod.SPACED
    dim: int = embedding_mod.DEFAULT_DIM
    external_embeddings: str | None = None
    flags: str | None = None
    threshold: float = 0.7
    decay_a: float = index_mod.DEFAULT_A
    half_life_days: int = index_mod.DEFAULT_HALF_LIFE_DAYS
    outdir: str = "out"
    seed: int = 0
    lenient: bool = False
    max_lag_days: int | None = None
    categories: str | None = None
    min_weight: float = 0.0
    matrix_from: str | None = None
    matrix_to: str | None = None
    teacher_export: str | None = None
    jobs: int = 1

    def __post_init__(self):
        if not 0.0 < self.threshold <= 1.0:
            raise ConfigError(f"threshold must be in (0, 1], got {self.threshold}")
        if self.profile not in corpus_mod.PROFILES:
            raise ConfigError(f"unknown script profile {self.profile!r}")
        if self.dim < 2:
            raise ConfigError("embedding dimension must be >= 2")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")

    @property
    def out(self) -> Path:
        return Path(self.outdir)


_INT_KEYS = {"dim", "half_life_days", "seed", "max_lag_days", "jobs"}
_FLOAT_KEYS = {"threshold", "decay_a", "min_weight"}
_BOOL_KEYS = {"lenient"}


def _coerce(key: str, raw: str):
    if key in _INT_KEYS:
        return int(raw)
    if key in _FLOAT_KEYS:
        return float(raw)
    if key in _BOOL_KEYS:
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    return raw


def read_config_file(path) -> dict:
    """Parse a ``key = value`` config file ('#' starts a comment line)."""
    values = {}
    known = set(PipelineConfig.__dataclass_fields__)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value'")
            key, _, raw = line.partition("=")
            key = key.strip()
            if key not in known:
                raise ConfigError(f"line {lineno}: unknown config key {key!r}")
            values[key] = _coerce(key, raw.strip())
    return values


def load_config(config_path=None, **overrides) -> PipelineConfig:
    """Build a config from an optional file plus flag overrides (flags win)."""
    values = read_config_file(config_path) if config_path else {}
    for key, val in overrides.items():
        if val is not None:
            values[key] = val
    return PipelineConfig(**values)


def load_topic_list(path) -> list[tuple[str, float]]:
    """Topic config: one code per line, optional tab-separated threshold."""
    topics = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n").strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            code = parts[0].strip()
            threshold = 0.5
            if len(parts) > 1:
                threshold = float(parts[1])
            if code in seen:
                raise ConfigError(f"line {lineno}: duplicate topic code {code!r}")
            seen.add(code)
            topics.append((code, threshold))
    if not topics:
        raise ConfigError(f"no topics configured in {path}")
    return topics


def _load_articles(cfg: PipelineConfig) -> corpus_mod.CorpusStore:
    return corpus_mod.parse_corpus(cfg.out / ARTICLES_FILE, profile=cfg.profile)


def stage_ingest(cfg: PipelineConfig) -> dict:
    store = corpus_mod.parse_corpus(cfg.corpus, profile=cfg.profile, lenient=cfg.lenient)
    cfg.out.mkdir(parents=True, exist_ok=True)
    corpus_mod.write_corpus(store, cfg.out / ARTICLES_FILE)
    return {"articles": len(store), "paragraphs": len(store.paragraphs())}


def stage_classify(cfg: PipelineConfig) -> dict:
    store = _load_articles(cfg)
    topic_list = load_topic_list(cfg.topics)
    counts = {"topics": len(topic_list), "models_trained": 0}
    if cfg.flags:
        flags = topics_mod.read_flags(cfg.flags)
        topics_mod.validate_flags(flags, store, [code for code, _ in topic_list])
    elif len(store) == 0:
        flags = {}
    else:
        train_cfg = topics_mod.TrainConfig(seed=cfg.seed)
        labeled = [topics_mod.build_teacher_data(store, code) for code, _ in topic_list]
        if cfg.teacher_export:
            topics_mod.write_teacher_sets(labeled, cfg.teacher_export)

        def fit(args):
            labeled_set, threshold = args
            model = topics_mod.train(labeled_set, store, train_cfg)
            model.threshold = threshold
            return model

        jobs = [(ls, thr) for ls, (_, thr) in zip(labeled, topic_list)]
        if cfg.jobs > 1:
            with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
                models = list(pool.map(fit, jobs))
        else:
            models = [fit(j) for j in jobs]
        counts["models_trained"] = len(models)
        flags = topics_mod.classify_paragraphs(models, store)
    topics_mod.write_flags(flags, cfg.out / FLAGS_FILE)
    counts["flagged_paragraphs"] = sum(1 for t in flags.values() if t)
    return counts


def stage_extract(cfg: PipelineConfig) -> dict:
    store = _load_articles(cfg)
    flags = topics_mod.read_flags(cfg.out / FLAGS_FILE)
    lexicon = extraction_mod.resolve_lexicon(cfg.lexicon, profile=cfg.profile)
    pairs, diagnostics = extraction_mod.extract_corpus_pairs(store, flags, lexicon)
    extraction_mod.write_pairs(pairs, cfg.out / PAIRS_FILE)
    return {"pairs": len(pairs), **diagnostics}


def stage_embed(cfg: PipelineConfig) -> dict:
    pairs = extraction_mod.read_pairs(cfg.out / PAIRS_FILE)
    if cfg.external_embeddings:
        valid = {p.key(role) for p in pairs for role in embedding_mod.ROLES}
        table = embedding_mod.load_external_embeddings(cfg.external_embeddings, valid_keys=valid)
    else:
        table = embedding_mod.EmbeddingTable(cfg.dim)
        for p in pairs:
            table.put(p.key("cause"), embedding_mod.embed(p.cause_text, cfg.profile, cfg.dim))
            table.put(p.key("effect"), embedding_mod.embed(p.effect_text, cfg.profile, cfg.dim))
    embedding_mod.write_embeddings(table, cfg.out / EMBEDDINGS_FILE)
    return {"embeddings": len(table), "dim": table.dim}


def stage_chain(cfg: PipelineConfig) -> dict:
    store = _load_articles(cfg)
    pairs = extraction_mod.read_pairs(cfg.out / PAIRS_FILE)
    table = embedding_mod.load_external_embeddings(cfg.out / EMBEDDINGS_FILE)
    provider = chains_mod.make_provider(cfg.profile, table.dim, table)
    chains = chains_mod.build_chains(
        pairs,
        threshold=cfg.threshold,
        provider=provider,
        months=store.span(),
        max_lag_days=cfg.max_lag_days,
    )
    chains_mod.write_chains(chains, cfg.out / CHAINS_FILE)
    return {"links": len(chains.links), "ungrouped_links": chains.ungrouped}


def stage_index(cfg: PipelineConfig) -> dict:
    store = _load_articles(cfg)
    topic_list = [code for code, _ in load_topic_list(cfg.topics)]
    chains = chains_mod.read_chains(cfg.out / CHAINS_FILE, months=store.span())
    params = index_mod.solve_decay(cfg.decay_a, cfg.half_life_days)
    grid = index_mod.full_grid(chains, topic_list, params)
    index_mod.write_series(grid, cfg.out / SERIES_FILE)
    return {"series": len(grid), "months": len(chains.months)}


def _matrix_period(cfg: PipelineConfig, store: corpus_mod.CorpusStore) -> tuple[MonthKey, MonthKey]:
    span = store.span()
    start = MonthKey.parse(cfg.matrix_from) if cfg.matrix_from else (span[0] if span else _EMPTY_PERIOD[0])
    end = MonthKey.parse(cfg.matrix_to) if cfg.matrix_to else (span[-1] if span else _EMPTY_PERIOD[1])
    return start, end


def stage_matrix(cfg: PipelineConfig) -> dict:
    store = _load_articles(cfg)
    topic_list = [code for code, _ in load_topic_list(cfg.topics)]
    grid = index_mod.read_series(cfg.out / SERIES_FILE)
    start, end = _matrix_period(cfg, store)
    matrix = index_mod.period_matrix(grid, start, end, topics=topic_list)
    index_mod.write_matrix(matrix, cfg.out / MATRIX_FILE)
    return {"matrix_cells": len(matrix.cells), "period": f"{start}..{end}"}


def stage_graph(cfg: PipelineConfig) -> dict:
    if not cfg.categories:
        raise ConfigError("graph stage needs a category map (categories=<path>)")
    matrix = index_mod.read_matrix(cfg.out / MATRIX_FILE)
    cmap = graphs_mod.CategoryMap.load(cfg.categories)
    graph = graphs_mod.aggregate_categories(matrix, cmap)
    for fmt, name in (("dot", GRAPH_DOT_FILE), ("json", GRAPH_JSON_FILE)):
        content = graphs_mod.export_graph(graph, min_weight=cfg.min_weight, format=fmt)
        (cfg.out / name).write_text(content, encoding="utf-8")
    return {"graph_nodes": len(graph.nodes), "graph_edges": len(graph.edges)}


_STAGE_FUNCS = {
    "ingest": stage_ingest,
    "classify": stage_classify,
    "extract": stage_extract,
    "embed": stage_embed,
    "chain": stage_chain,
    "index": stage_index,
    "matrix": stage_matrix,
    "graph": stage_graph,
}


def run_stage(name: str, cfg: PipelineConfig) -> dict:
    try:
        return _STAGE_FUNCS[name](cfg)
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def run_pipeline(cfg: PipelineConfig) -> dict:
    """Run all stages in order; returns (and persists) the run report."""
    report = {"stages": {}, "counts": {}, "timings_s": {}}
    for name in STAGES:
        started = time.perf_counter()
        counts = run_stage(name, cfg)
        report["timings_s"][name] = time.perf_counter() - started
        report["stages"][name] = "ok"
        report["counts"].update(counts)
    with open(cfg.out / REPORT_FILE, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report
