"""Corpus ingestion: articles, paragraphs, sentence spans, and calendar math.

The corpus file is UTF-8 JSON lines, one article per line with fields
``id``, ``date`` (ISO-8601 day), ``title``, ``body`` and ``topics``
(array of taxonomy code strings).
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from datetime import date

log = logging.getLogger(__name__)

SPACED = "spaced"
UNSPACED = "unspaced"
PROFILES = (SPACED, UNSPACED)

# Sentence-terminal punctuation per script profile.
_TERMINALS = {
    SPACED: ".!?",
    UNSPACED: "。！？",  # 。 ！ ？
}

_PARAGRAPH_SEP = re.compile(r"\n[ \t]*\n+")


class CorpusError(ValueError):
    """Raised when a corpus file violates the record schema."""


@dataclass(frozen=True)
class Article:
    id: str
    date: date
    title: str
    body: str
    taxonomy_codes: frozenset[str]


@dataclass(frozen=True)
class Paragraph:
    article_id: str
    ordinal: int
    text: str
    sentences: tuple[tuple[int, int], ...]  # (start, end) char spans into text

    def sentence_texts(self) -> list[str]:
        return [self.text[a:b] for a, b in self.sentences]


@dataclass(frozen=True, order=True)
class MonthKey:
    year: int
    month: int

    def __post_init__(self) -> None:
        if not 1 <= self.month <= 12:
            raise ValueError(f"month out of range: {self.month}")

    @classmethod
    def of(cls, day: date) -> "MonthKey":
        return cls(day.year, day.month)

    @classmethod
    def parse(cls, text: str) -> "MonthKey":
        m = re.fullmatch(r"(\d{4})-(\d{2})", text.strip())
        if m is None:
            raise ValueError(f"expected YYYY-MM, got {text!r}")
        return cls(int(m.group(1)), int(m.group(2)))

    def next(self) -> "MonthKey":
        if self.month == 12:
            return MonthKey(self.year + 1, 1)
        return MonthKey(self.year, self.month + 1)

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.month:02d}"


def month_range(start: MonthKey, end: MonthKey) -> list[MonthKey]:
    """Inclusive list of months from start to end (empty when start > end)."""
    out = []
    cur = start
    while cur <= end:
        out.append(cur)
        cur = cur.next()
    return out


def days_between(earlier: date, later: date) -> int:
    """Exact calendar-day difference, positive when later > earlier."""
    return (later - earlier).days


class CorpusStore:
    """Immutable article store, sorted by (date, id). Safe for concurrent reads."""

    def __init__(self, articles: list[Article], profile: str = SPACED):
        if profile not in PROFILES:
            raise ValueError(f"unknown script profile: {profile!r}")
        self._articles = sorted(articles, key=lambda a: (a.date, a.id))
        self._by_id = {a.id: a for a in self._articles}
        self.profile = profile

    def __len__(self) -> int:
        return len(self._articles)

    def __iter__(self):
        return iter(self._articles)

    def article(self, article_id: str) -> Article:
        return self._by_id[article_id]

    def paragraphs(self) -> list[Paragraph]:
        out: list[Paragraph] = []
        for a in self._articles:
            out.extend(split_paragraphs(a, self.profile))
        return out

    def span(self) -> list[MonthKey]:
        """All calendar months covered by the corpus, inclusive. Empty corpus -> []."""
        if not self._articles:
            return []
        first = MonthKey.of(self._articles[0].date)
        last = max(MonthKey.of(a.date) for a in self._articles)
        return month_range(first, last)


def _parse_record(obj: dict, lineno: int) -> Article:
    for key in ("id", "date", "title", "body", "topics"):
        if key not in obj:
            raise CorpusError(f"line {lineno}: missing field {key!r}")
    if not isinstance(obj["id"], str) or not obj["id"]:
        raise CorpusError(f"line {lineno}: id must be a non-empty string")
    try:
        day = date.fromisoformat(obj["date"])
    except (TypeError, ValueError) as exc:
        raise CorpusError(f"line {lineno}: unparseable date {obj['date']!r}: {exc}") from exc
    topics = obj["topics"]
    if not isinstance(topics, list) or not all(isinstance(t, str) for t in topics):
        raise CorpusError(f"line {lineno}: topics must be an array of strings")
    return Article(
        id=obj["id"],
        date=day,
        title=str(obj["title"]),
        body=str(obj["body"]),
        taxonomy_codes=frozenset(topics),
    )


def parse_corpus(path, profile: str = SPACED, lenient: bool = False) -> CorpusStore:
    """Parse a JSONL corpus file into a CorpusStore.

    Strict by default: any malformed line, duplicate id, or bad date aborts
    with a CorpusError naming the line. With lenient=True bad lines are
    logged and skipped.
    """
    articles: list[Article] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorpusError(f"line {lineno}: malformed record: {exc}") from exc
                if not isinstance(obj, dict):
                    raise CorpusError(f"line {lineno}: record must be an object")
                article = _parse_record(obj, lineno)
                if article.id in seen:
                    raise CorpusError(
                        f"line {lineno}: duplicate id {article.id!r} "
                        f"(first seen at line {seen[article.id]})"
                    )
            except CorpusError as exc:
                if lenient:
                    log.warning("skipping corpus record: %s", exc)
                    continue
                raise
            seen[article.id] = lineno
            articles.append(article)
    return CorpusStore(articles, profile=profile)


def write_corpus(store: CorpusStore, path) -> None:
    """Serialize a store back to the corpus schema (one article per line)."""
    with open(path, "w", encoding="utf-8") as fh:
        for a in store:
            fh.write(
                json.dumps(
                    {
                        "id": a.id,
                        "date": a.date.isoformat(),
                        "title": a.title,
                        "body": a.body,
                        "topics": sorted(a.taxonomy_codes),
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )


def split_sentences(text: str, profile: str = SPACED) -> tuple[tuple[int, int], ...]:
    """Split text into sentence spans on the profile's terminal punctuation.

    A sentence runs through its terminal punctuation (consecutive terminals
    are absorbed); trailing text without a terminal forms a final sentence.
    """
    if profile not in PROFILES:
        raise ValueError(f"unknown script profile: {profile!r}")
    terminals = _TERMINALS[profile]
    spans: list[tuple[int, int]] = []
    n = len(text)
    i = 0
    while i < n:
        while i < n and text[i].isspace():
            i += 1
        if i >= n:
            break
        start = i
        while i < n and text[i] not in terminals:
            i += 1
        while i < n and text[i] in terminals:
            i += 1
        spans.append((start, i))
    return tuple(spans)


def split_paragraphs(article: Article, profile: str = SPACED) -> list[Paragraph]:
    """Split an article body into paragraphs on blank-line boundaries.

    Empty body yields an empty list; ordinals are contiguous from 0.
    """
    out: list[Paragraph] = []
    for block in _PARAGRAPH_SEP.split(article.body):
        text = block.strip()
        if not text:
            continue
        out.append(
            Paragraph(
                article_id=article.id,
                ordinal=len(out),
                text=text,
                sentences=split_sentences(text, profile),
            )
        )
    return out
