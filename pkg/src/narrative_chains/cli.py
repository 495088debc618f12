"""Command-line interface: one subcommand per pipeline stage plus `run`."""

from __future__ import annotations

import json

import click

from . import graphs as graphs_mod
from . import index as index_mod
from . import pipeline as pl


def _cfg(config, **overrides) -> pl.PipelineConfig:
    try:
        return pl.load_config(config, **overrides)
    except (pl.ConfigError, OSError) as exc:
        raise click.ClickException(str(exc))


def _run_stage(name: str, cfg: pl.PipelineConfig) -> None:
    try:
        counts = pl.run_stage(name, cfg)
    except pl.StageError as exc:
        raise click.ClickException(str(exc))
    click.echo(json.dumps({name: counts}, sort_keys=True))


config_option = click.option("--config", type=click.Path(exists=True), default=None,
                             help="Key-value config file; flags override its entries.")
outdir_option = click.option("--outdir", default=None, help="Artifact directory.")


@click.group()
def main():
    """Extract causal pairs from a dated news corpus, chain them across
    time and topics, and compute monthly narrative indices."""


@main.command()
@config_option
@outdir_option
@click.option("--corpus", default=None, help="Corpus JSONL file.")
@click.option("--profile", default=None, type=click.Choice(["spaced", "unspaced"]))
@click.option("--lenient", is_flag=True, default=None,
              help="Warn and skip invalid records instead of aborting.")
def ingest(config, outdir, corpus, profile, lenient):
    """Parse and validate the corpus; write articles.jsonl."""
    _run_stage("ingest", _cfg(config, outdir=outdir, corpus=corpus, profile=profile, lenient=lenient))


@main.command()
@config_option
@outdir_option
@click.option("--topics", default=None, help="Topic list file (code per line).")
@click.option("--flags", default=None, help="External flag file; bypasses the models.")
@click.option("--seed", type=int, default=None)
@click.option("--jobs", type=int, default=None)
@click.option("--export-teacher", "teacher_export", default=None,
              help="Also write the per-topic teacher sets to this path.")
def classify(config, outdir, topics, flags, seed, jobs, teacher_export):
    """Train per-topic models and flag every paragraph; write flags.jsonl."""
    _run_stage("classify", _cfg(config, outdir=outdir, topics=topics, flags=flags,
                                seed=seed, jobs=jobs, teacher_export=teacher_export))


@main.command()
@config_option
@outdir_option
@click.option("--lexicon", default=None, help="'en', 'ja', or a lexicon file path.")
@click.option("--profile", default=None, type=click.Choice(["spaced", "unspaced"]))
def extract(config, outdir, lexicon, profile):
    """Extract cause/effect pairs per sentence; write pairs.jsonl."""
    _run_stage("extract", _cfg(config, outdir=outdir, lexicon=lexicon, profile=profile))


@main.command()
@config_option
@outdir_option
@click.option("--external", "external_embeddings", default=None,
              help="Embedding exchange file overriding the built-in embedder.")
@click.option("--dim", type=int, default=None)
def embed(config, outdir, external_embeddings, dim):
    """Embed every pair expression; write embeddings.jsonl."""
    _run_stage("embed", _cfg(config, outdir=outdir,
                             external_embeddings=external_embeddings, dim=dim))


@main.command()
@config_option
@outdir_option
@click.option("--threshold", type=float, default=None)
@click.option("--max-lag-days", type=int, default=None)
def chain(config, outdir, threshold, max_lag_days):
    """Link past effects to later causes; write chains.jsonl."""
    _run_stage("chain", _cfg(config, outdir=outdir, threshold=threshold,
                             max_lag_days=max_lag_days))


@main.command()
@config_option
@outdir_option
@click.option("--a", "decay_a", type=float, default=None, help="Decay parameter a.")
@click.option("--half-life-days", type=int, default=None)
@click.option("--topics", default=None)
def index(config, outdir, decay_a, half_life_days, topics):
    """Compute the monthly index for every ordered topic pair; write series.csv."""
    _run_stage("index", _cfg(config, outdir=outdir, decay_a=decay_a,
                             half_life_days=half_life_days, topics=topics))


@main.command()
@config_option
@outdir_option
@click.option("--from", "matrix_from", default=None, help="Period start, YYYY-MM.")
@click.option("--to", "matrix_to", default=None, help="Period end, YYYY-MM.")
@click.option("--topics", default=None)
def matrix(config, outdir, matrix_from, matrix_to, topics):
    """Average the series over a period; write matrix.csv."""
    _run_stage("matrix", _cfg(config, outdir=outdir, matrix_from=matrix_from,
                              matrix_to=matrix_to, topics=topics))


@main.command()
@config_option
@outdir_option
@click.option("--categories", default=None, help="Topic-to-category JSON map.")
@click.option("--min-weight", type=float, default=None)
@click.option("--format", "fmt", type=click.Choice(["dot", "json"]), default=None,
              help="Write only this format (default: both).")
def graph(config, outdir, categories, min_weight, fmt):
    """Aggregate the matrix into a category graph; write graph.dot/graph.json."""
    cfg = _cfg(config, outdir=outdir, categories=categories, min_weight=min_weight)
    if fmt is None:
        _run_stage("graph", cfg)
        return
    try:
        if not cfg.categories:
            raise pl.ConfigError("graph stage needs a category map (categories=<path>)")
        mat = index_mod.read_matrix(cfg.out / pl.MATRIX_FILE)
        cmap = graphs_mod.CategoryMap.load(cfg.categories)
        g = graphs_mod.aggregate_categories(mat, cmap)
        name = pl.GRAPH_DOT_FILE if fmt == "dot" else pl.GRAPH_JSON_FILE
        (cfg.out / name).write_text(
            graphs_mod.export_graph(g, min_weight=cfg.min_weight, format=fmt),
            encoding="utf-8",
        )
    except Exception as exc:
        raise click.ClickException(f"stage 'graph' failed: {exc}")
    click.echo(json.dumps({"graph": {"nodes": len(g.nodes), "edges": len(g.edges)}}, sort_keys=True))


@main.command()
@config_option
@outdir_option
@click.option("--corpus", default=None)
@click.option("--topics", default=None)
@click.option("--lexicon", default=None)
@click.option("--profile", default=None, type=click.Choice(["spaced", "unspaced"]))
@click.option("--dim", type=int, default=None)
@click.option("--external", "external_embeddings", default=None)
@click.option("--flags", default=None)
@click.option("--threshold", type=float, default=None)
@click.option("--a", "decay_a", type=float, default=None)
@click.option("--half-life-days", type=int, default=None)
@click.option("--categories", default=None)
@click.option("--min-weight", type=float, default=None)
@click.option("--from", "matrix_from", default=None)
@click.option("--to", "matrix_to", default=None)
@click.option("--seed", type=int, default=None)
@click.option("--jobs", type=int, default=None)
@click.option("--lenient", is_flag=True, default=None)
def run(config, **overrides):
    """Run every stage in order and write the run report."""
    cfg = _cfg(config, **overrides)
    try:
        report = pl.run_pipeline(cfg)
    except pl.StageError as exc:
        raise click.ClickException(str(exc))
    click.echo(json.dumps(report, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
