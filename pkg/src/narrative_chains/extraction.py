"""Cue-expression causal detection and cause/effect pair extraction.

A sentence is causal when a cue pattern from the lexicon matches as a
whole-token contiguous subsequence (exact substring for unspaced scripts).
The sentence is split at the highest-priority matching cue; the cue's
orientation assigns the two sides to cause and effect.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from datetime import date

from .corpus import SPACED, UNSPACED, PROFILES, CorpusStore, split_paragraphs

CAUSE_BEFORE_CUE = "CAUSE_BEFORE_CUE"
EFFECT_BEFORE_CUE = "EFFECT_BEFORE_CUE"
ORIENTATIONS = (CAUSE_BEFORE_CUE, EFFECT_BEFORE_CUE)

_WORD = re.compile(r"[\w']+", re.UNICODE)

# Characters stripped from expression boundaries.
_EDGE_PUNCT = set(".,;:!?\"'()[]{}<>-–—…、。！？「」『』“”‘’")
# Connective fragments dropped from expression edges (spaced scripts only).
_EDGE_CONNECTIVES = {"and", "but", "so", "then", "thus", "therefore", "however"}
# Auxiliaries left dangling before a cue ("was caused by", "is due to") are
# treated as part of the connective and trimmed from the trailing edge only.
_TRAILING_AUX = {
    "am", "is", "are", "was", "were", "be", "been", "being",
    "has", "have", "had", "will", "would", "may", "might", "can", "could",
}


class LexiconError(ValueError):
    """Raised for malformed or inconsistent cue lexicons."""


@dataclass(frozen=True)
class CueEntry:
    pattern: str
    orientation: str
    priority: int

    def __post_init__(self):
        if not self.pattern.strip():
            raise LexiconError("empty cue pattern")
        if self.orientation not in ORIENTATIONS:
            raise LexiconError(f"unknown orientation {self.orientation!r}")


class CueLexicon:
    """Ordered cue entries; lower priority number wins when several match."""

    def __init__(self, entries: list[CueEntry], profile: str = SPACED):
        if profile not in PROFILES:
            raise ValueError(f"unknown script profile: {profile!r}")
        if not entries:
            raise LexiconError("lexicon has no entries")
        priorities = [e.priority for e in entries]
        if len(set(priorities)) != len(priorities):
            raise LexiconError("cue priorities must be unique")
        # Entry order in the file never matters: matching walks priorities.
        self.entries = sorted(entries, key=lambda e: e.priority)
        self.profile = profile


ENGLISH_CUES = CueLexicon(
    [
        CueEntry("as a result of", EFFECT_BEFORE_CUE, 1),
        CueEntry("in response to", EFFECT_BEFORE_CUE, 2),
        CueEntry("because of", EFFECT_BEFORE_CUE, 3),
        CueEntry("caused by", EFFECT_BEFORE_CUE, 4),
        CueEntry("will cause", CAUSE_BEFORE_CUE, 5),
        CueEntry("leads to", CAUSE_BEFORE_CUE, 6),
        CueEntry("due to", EFFECT_BEFORE_CUE, 7),
        CueEntry("because", EFFECT_BEFORE_CUE, 8),
    ],
    profile=SPACED,
)

JAPANESE_CUES = CueLexicon(
    [
        CueEntry("が原因で", CAUSE_BEFORE_CUE, 1),   # が原因で
        CueEntry("の影響で", CAUSE_BEFORE_CUE, 2),   # の影響で
        CueEntry("を受けて", CAUSE_BEFORE_CUE, 3),   # を受けて
        CueEntry("による", CAUSE_BEFORE_CUE, 4),         # による
        CueEntry("ため", CAUSE_BEFORE_CUE, 5),               # ため
    ],
    profile=UNSPACED,
)


def load_lexicon(path, profile: str = SPACED) -> CueLexicon:
    """Read a lexicon file: one cue per line, ``pattern<TAB>orientation<TAB>priority``."""
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise LexiconError(f"line {lineno}: expected 3 tab-separated fields")
            pattern, orientation, priority = parts
            try:
                entries.append(CueEntry(pattern, orientation, int(priority)))
            except (ValueError, LexiconError) as exc:
                raise LexiconError(f"line {lineno}: {exc}") from exc
    return CueLexicon(entries, profile=profile)


def resolve_lexicon(name_or_path: str, profile: str = SPACED) -> CueLexicon:
    """Map 'en'/'ja' to the built-in lexicons, anything else to a file path."""
    if name_or_path == "en":
        return ENGLISH_CUES
    if name_or_path == "ja":
        return JAPANESE_CUES
    return load_lexicon(name_or_path, profile=profile)


def _match_cue(sentence: str, entry: CueEntry, profile: str) -> tuple[int, int] | None:
    """Leftmost whole-token match span of the cue in the sentence, or None."""
    if profile == UNSPACED:
        idx = sentence.find(entry.pattern)
        return (idx, idx + len(entry.pattern)) if idx >= 0 else None
    pattern_tokens = [t.lower() for t in _WORD.findall(entry.pattern)]
    if not pattern_tokens:
        return None
    tokens = [(m.group(0).lower(), m.start(), m.end()) for m in _WORD.finditer(sentence)]
    k = len(pattern_tokens)
    for i in range(len(tokens) - k + 1):
        if all(tokens[i + j][0] == pattern_tokens[j] for j in range(k)):
            return (tokens[i][1], tokens[i + k - 1][2])
    return None


def _trim_span(sentence: str, start: int, end: int, profile: str) -> tuple[int, int]:
    """Narrow a span to drop edge punctuation, whitespace, and connectives."""
    def strip_edges(a: int, b: int) -> tuple[int, int]:
        while a < b and (sentence[a].isspace() or sentence[a] in _EDGE_PUNCT):
            a += 1
        while b > a and (sentence[b - 1].isspace() or sentence[b - 1] in _EDGE_PUNCT):
            b -= 1
        return a, b

    start, end = strip_edges(start, end)
    if profile == SPACED:
        changed = True
        while changed and start < end:
            changed = False
            m = _WORD.match(sentence, start)
            if m and m.group(0).lower() in _EDGE_CONNECTIVES:
                start, end = strip_edges(m.end(), end)
                changed = True
            words = list(_WORD.finditer(sentence, start, end))
            if words and words[-1].group(0).lower() in (_EDGE_CONNECTIVES | _TRAILING_AUX):
                start, end = strip_edges(start, words[-1].start())
                changed = True
    return start, end


@dataclass(frozen=True)
class ExtractedPair:
    """A cause/effect split of one sentence, with character spans."""

    cause_text: str
    effect_text: str
    cue: str
    cause_span: tuple[int, int]
    effect_span: tuple[int, int]
    cue_span: tuple[int, int]


def contains_causality(sentence: str, lexicon: CueLexicon) -> bool:
    """True iff some cue pattern matches the sentence."""
    return any(_match_cue(sentence, e, lexicon.profile) is not None for e in lexicon.entries)


def extract_pairs(sentence: str, lexicon: CueLexicon) -> list[ExtractedPair]:
    """Split the sentence at the highest-priority matching cue.

    Returns at most one pair; sentences without a match, or where either
    side trims to nothing, yield an empty list.
    """
    for entry in lexicon.entries:
        span = _match_cue(sentence, entry, lexicon.profile)
        if span is None:
            continue
        cue_start, cue_end = span
        left = _trim_span(sentence, 0, cue_start, lexicon.profile)
        right = _trim_span(sentence, cue_end, len(sentence), lexicon.profile)
        if left[0] >= left[1] or right[0] >= right[1]:
            return []
        if entry.orientation == CAUSE_BEFORE_CUE:
            cause_span, effect_span = left, right
        else:
            cause_span, effect_span = right, left
        return [
            ExtractedPair(
                cause_text=sentence[cause_span[0] : cause_span[1]],
                effect_text=sentence[effect_span[0] : effect_span[1]],
                cue=entry.pattern,
                cause_span=cause_span,
                effect_span=effect_span,
                cue_span=span,
            )
        ]
    return []


@dataclass(frozen=True)
class CausalPair:
    """An extracted (cause, effect) expression pair with its source location."""

    article_id: str
    paragraph: int
    sentence: int
    cause_text: str
    effect_text: str
    cue: str
    date: date
    topics: frozenset[str]

    def key(self, role: str) -> tuple[str, int, int, str]:
        return (self.article_id, self.paragraph, self.sentence, role)

    def sort_key(self):
        return (self.article_id, self.paragraph, self.sentence)


def extract_corpus_pairs(
    corpus: CorpusStore, flags: dict[tuple[str, int], set[str]], lexicon: CueLexicon
) -> tuple[list[CausalPair], dict[str, int]]:
    """Extract pairs from every sentence; topics inherit from paragraph flags.

    Returns the pairs plus diagnostics counts, including sentences where a
    cue matched but no clean clause split was possible (dropped).
    """
    pairs: list[CausalPair] = []
    diagnostics = {"sentences": 0, "cued_sentences": 0, "dropped_unsplit": 0}
    for article in corpus:
        for para in split_paragraphs(article, corpus.profile):
            para_topics = frozenset(flags.get((article.id, para.ordinal), set()))
            for s_idx, text in enumerate(para.sentence_texts()):
                diagnostics["sentences"] += 1
                extracted = extract_pairs(text, lexicon)
                if not extracted:
                    if contains_causality(text, lexicon):
                        diagnostics["cued_sentences"] += 1
                        diagnostics["dropped_unsplit"] += 1
                    continue
                diagnostics["cued_sentences"] += 1
                pairs.append(
                    CausalPair(
                        article_id=article.id,
                        paragraph=para.ordinal,
                        sentence=s_idx,
                        cause_text=extracted[0].cause_text,
                        effect_text=extracted[0].effect_text,
                        cue=extracted[0].cue,
                        date=article.date,
                        topics=para_topics,
                    )
                )
    return pairs, diagnostics


def write_pairs(pairs: list[CausalPair], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in sorted(pairs, key=CausalPair.sort_key):
            fh.write(
                json.dumps(
                    {
                        "article_id": p.article_id,
                        "paragraph": p.paragraph,
                        "sentence": p.sentence,
                        "cause_text": p.cause_text,
                        "effect_text": p.effect_text,
                        "cue": p.cue,
                        "date": p.date.isoformat(),
                        "topics": sorted(p.topics),
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )


def read_pairs(path) -> list[CausalPair]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            pairs.append(
                CausalPair(
                    article_id=obj["article_id"],
                    paragraph=int(obj["paragraph"]),
                    sentence=int(obj["sentence"]),
                    cause_text=obj["cause_text"],
                    effect_text=obj["effect_text"],
                    cue=obj["cue"],
                    date=date.fromisoformat(obj["date"]),
                    topics=frozenset(obj["topics"]),
                )
            )
    return pairs
