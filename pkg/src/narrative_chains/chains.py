"""Join past causal pairs to later ones into cross-topic chains.

A link forms when the past pair's effect expression and the later pair's
cause expression have cosine similarity at or above the threshold and the
later pair is strictly newer (d > 0 days). Links are filed by
(source topic, destination topic, month of the result event).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .corpus import MonthKey, days_between, month_range
from .embedding import (
    DEFAULT_DIM,
    EmbeddingError,
    EmbeddingTable,
    Vector,
    cosine,
    embed,
)
from .extraction import CausalPair

PairKey = tuple[str, int, int]  # (article_id, paragraph, sentence)


def make_provider(profile: str, dim: int = DEFAULT_DIM, table: EmbeddingTable | None = None):
    """Vector lookup for (pair, role), caching built-in embeddings per expression.

    With a table, listed keys use the table's vectors; unlisted keys fall
    back to the built-in embedder only when the dimensions agree, and are
    an error otherwise.
    """
    cache: dict[str, Vector] = {}

    def provider(pair: CausalPair, role: str) -> Vector:
        if table is not None:
            key = pair.key(role)
            if key in table:
                return table.get(key)
            if table.dim != dim:
                raise EmbeddingError(f"no embedding for key {key}")
        text = pair.cause_text if role == "cause" else pair.effect_text
        vec = cache.get(text)
        if vec is None:
            vec = embed(text, profile, dim)
            cache[text] = vec
        return vec

    return provider


@dataclass(frozen=True)
class ChainLink:
    past_key: PairKey
    current_key: PairKey
    similarity: float
    d: int
    src_topics: frozenset[str]
    dst_topics: frozenset[str]
    month: MonthKey  # month of the result event

    def sort_key(self):
        return (self.past_key, self.current_key)


class ChainSet:
    """Links grouped by (src_topic, dst_topic, month of the result event)."""

    def __init__(self, links: list[ChainLink], months: list[MonthKey] | None = None):
        self.links = sorted(links, key=ChainLink.sort_key)
        if months is None:
            months = month_range(min(l.month for l in links), max(l.month for l in links)) if links else []
        self.months = months
        self.groups: dict[tuple[str, str, MonthKey], list[ChainLink]] = {}
        self.ungrouped = 0
        for link in self.links:
            if not link.src_topics or not link.dst_topics:
                self.ungrouped += 1
                continue
            for src in link.src_topics:
                for dst in link.dst_topics:
                    self.groups.setdefault((src, dst, link.month), []).append(link)

    def group(self, src: str, dst: str, month: MonthKey) -> list[ChainLink]:
        return self.groups.get((src, dst, month), [])


def _make_link(past: CausalPair, current: CausalPair, similarity: float,
               topics_of=None) -> ChainLink:
    src = past.topics if topics_of is None else topics_of(past)
    dst = current.topics if topics_of is None else topics_of(current)
    return ChainLink(
        past_key=past.sort_key(),
        current_key=current.sort_key(),
        similarity=similarity,
        d=days_between(past.date, current.date),
        src_topics=frozenset(src),
        dst_topics=frozenset(dst),
        month=MonthKey.of(current.date),
    )


def link_pairs(
    past_pool: list[CausalPair],
    current: CausalPair,
    threshold: float,
    provider,
    max_lag_days: int | None = None,
) -> list[ChainLink]:
    """All links from the pool into the current pair, in pool order."""
    cause_vec = provider(current, "cause")
    links = []
    for past in past_pool:
        d = days_between(past.date, current.date)
        if d <= 0:
            continue
        if max_lag_days is not None and d > max_lag_days:
            continue
        sim = cosine(provider(past, "effect"), cause_vec)
        if sim >= threshold:
            links.append(_make_link(past, current, sim))
    return links


def build_chains(
    pairs: list[CausalPair],
    flags=None,
    threshold: float = 0.7,
    provider=None,
    months: list[MonthKey] | None = None,
    max_lag_days: int | None = None,
) -> ChainSet:
    """Link every ordered pair of dated CausalPairs that clears both gates.

    Pairs from the same article share its date, so d > 0 also rules out
    same-article links. With flags given, topic sets are re-read from the
    flag table instead of the pairs' own topics.
    """
    if provider is None:
        raise ValueError("an embedding provider is required")
    topics_of = None
    if flags is not None:
        topics_of = lambda p: flags.get((p.article_id, p.paragraph), set())

    ordered = sorted(pairs, key=lambda p: (p.date, p.sort_key()))
    links: list[ChainLink] = []
    past_pool: list[CausalPair] = []
    i = 0
    while i < len(ordered):
        # freeze the pool before linking anything from this date
        j = i
        while j < len(ordered) and ordered[j].date == ordered[i].date:
            j += 1
        for current in ordered[i:j]:
            cause_vec = provider(current, "cause")
            for past in past_pool:
                d = days_between(past.date, current.date)
                if max_lag_days is not None and d > max_lag_days:
                    continue
                sim = cosine(provider(past, "effect"), cause_vec)
                if sim >= threshold:
                    links.append(_make_link(past, current, sim, topics_of))
        past_pool.extend(ordered[i:j])
        i = j
    return ChainSet(links, months=months)


def write_chains(chains: ChainSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for link in chains.links:
            fh.write(
                json.dumps(
                    {
                        "past_article_id": link.past_key[0],
                        "past_paragraph": link.past_key[1],
                        "past_sentence": link.past_key[2],
                        "current_article_id": link.current_key[0],
                        "current_paragraph": link.current_key[1],
                        "current_sentence": link.current_key[2],
                        "similarity": link.similarity,
                        "d": link.d,
                        "src_topics": sorted(link.src_topics),
                        "dst_topics": sorted(link.dst_topics),
                        "month": str(link.month),
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )


def read_chains(path, months: list[MonthKey] | None = None) -> ChainSet:
    links = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            links.append(
                ChainLink(
                    past_key=(obj["past_article_id"], int(obj["past_paragraph"]), int(obj["past_sentence"])),
                    current_key=(obj["current_article_id"], int(obj["current_paragraph"]), int(obj["current_sentence"])),
                    similarity=float(obj["similarity"]),
                    d=int(obj["d"]),
                    src_topics=frozenset(obj["src_topics"]),
                    dst_topics=frozenset(obj["dst_topics"]),
                    month=MonthKey.parse(obj["month"]),
                )
            )
    return ChainSet(links, months=months)
