"""Per-topic teacher sets, binary linear classifiers, paragraph flags, and
the topic-based count index.

Teacher examples are whole articles (an article's features are its
concatenated paragraph features); classification is per paragraph. Features
are hashed token counts (2^18 buckets) with sub-linear log weighting and
row L2-normalization; training is full-batch gradient descent on logistic
loss with a fixed iteration count, so identical inputs give identical
weights.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.special import expit

from .corpus import Article, CorpusStore, MonthKey, Paragraph, split_paragraphs
from .embedding import hashed_log_counts, tokenize

FEATURE_DIM = 2**18

# (article_id, paragraph ordinal) -> set of topic codes
TopicFlags = dict[tuple[str, int], set[str]]


class TeacherDataError(ValueError):
    """Raised when the labeling rule yields no usable teacher set."""


class TrainingError(ValueError):
    """Raised for degenerate training inputs or model/feature mismatches."""


@dataclass(frozen=True)
class LabeledSet:
    topic: str
    positives: list[str]
    negatives: list[str]


@dataclass
class TrainConfig:
    dim: int = FEATURE_DIM
    iterations: int = 400
    learning_rate: float = 2.0
    l2: float = 1e-4
    seed: int = 0
    threshold: float = 0.5


@dataclass
class TopicModel:
    """Binary linear model over hashed token features.

    vocabulary maps hash buckets seen in training to compact weight
    indices; buckets never seen in training carry implicit weight 0.
    """

    topic: str
    dim: int
    vocabulary: dict[int, int]
    weights: np.ndarray
    bias: float
    threshold: float = 0.5

    def score(self, features: dict[int, float]) -> float:
        """Probability that the featurized text is about this topic."""
        z = self.bias
        for bucket, val in features.items():
            idx = self.vocabulary.get(bucket)
            if idx is not None:
                z += val * self.weights[idx]
        return float(expit(z))


def _normalized(features: dict[int, float]) -> dict[int, float]:
    norm = math.sqrt(sum(v * v for v in features.values()))
    if norm == 0.0:
        return features
    return {b: v / norm for b, v in features.items()}


def paragraph_features(para: Paragraph, profile: str, dim: int = FEATURE_DIM) -> dict[int, float]:
    return _normalized(hashed_log_counts(tokenize(para.text, profile), dim))


def article_features(article: Article, profile: str, dim: int = FEATURE_DIM) -> dict[int, float]:
    tokens: list[str] = []
    for para in split_paragraphs(article, profile):
        tokens.extend(tokenize(para.text, profile))
    return _normalized(hashed_log_counts(tokens, dim))


def build_teacher_data(corpus: CorpusStore, topic: str) -> LabeledSet:
    """Apply the teacher-data labeling rule for one topic.

    Positives: articles carrying the topic code with at most two codes in
    total. Negatives: articles without the topic code. Articles carrying
    the topic alongside more than two codes fall in neither set.
    """
    positives, negatives = [], []
    for article in corpus:
        if topic in article.taxonomy_codes:
            if len(article.taxonomy_codes) <= 2:
                positives.append(article.id)
        else:
            negatives.append(article.id)
    if not positives:
        raise TeacherDataError(f"no positive examples for topic {topic!r}")
    return LabeledSet(topic=topic, positives=positives, negatives=negatives)


def train(labeled: LabeledSet, corpus: CorpusStore, config: TrainConfig | None = None) -> TopicModel:
    """Fit the binary model by full-batch gradient descent on logistic loss."""
    config = config or TrainConfig()
    if not labeled.positives or not labeled.negatives:
        raise TrainingError(
            f"topic {labeled.topic!r}: need at least one positive and one negative example"
        )
    docs = [article_features(corpus.article(a), corpus.profile, config.dim)
            for a in labeled.positives + labeled.negatives]
    y = np.array([1.0] * len(labeled.positives) + [0.0] * len(labeled.negatives))

    buckets = sorted({b for feats in docs for b in feats})
    vocabulary = {b: i for i, b in enumerate(buckets)}
    rows, cols, vals = [], [], []
    for r, feats in enumerate(docs):
        for b, v in feats.items():
            rows.append(r)
            cols.append(vocabulary[b])
            vals.append(v)
    X = sparse.csr_matrix((vals, (rows, cols)), shape=(len(docs), len(buckets)))

    n = len(docs)
    w = np.zeros(len(buckets))
    b = 0.0
    for _ in range(config.iterations):
        p = expit(X @ w + b)
        g = (p - y) / n
        w -= config.learning_rate * (X.T @ g + config.l2 * w)
        b -= config.learning_rate * float(g.sum())
    return TopicModel(
        topic=labeled.topic,
        dim=config.dim,
        vocabulary=vocabulary,
        weights=w,
        bias=b,
        threshold=config.threshold,
    )


def classify_paragraphs(models: list[TopicModel], corpus: CorpusStore) -> TopicFlags:
    """Flag every paragraph for every model's topic.

    Paragraphs with no tokens receive no flags. All models must share one
    feature dimension.
    """
    if not models:
        raise TrainingError("no models given")
    dims = {m.dim for m in models}
    if len(dims) != 1:
        raise TrainingError(f"models disagree on feature dimension: {sorted(dims)}")
    dim = dims.pop()
    flags: TopicFlags = {}
    for para in corpus.paragraphs():
        feats = paragraph_features(para, corpus.profile, dim)
        topics = set()
        if feats:
            for model in models:
                if model.score(feats) >= model.threshold:
                    topics.add(model.topic)
        flags[(para.article_id, para.ordinal)] = topics
    return flags


def topic_index(flags: TopicFlags, corpus: CorpusStore, topic: str) -> dict[MonthKey, int]:
    """Monthly count of paragraphs flagged with the topic, over the corpus span."""
    counts = {month: 0 for month in corpus.span()}
    for (article_id, _ordinal), topics in flags.items():
        if topic in topics:
            counts[MonthKey.of(corpus.article(article_id).date)] += 1
    return counts


def validate_flags(flags: TopicFlags, corpus: CorpusStore, topic_list: list[str] | None = None) -> None:
    """Check that every flagged paragraph exists and topics are configured."""
    known = {(p.article_id, p.ordinal) for p in corpus.paragraphs()}
    allowed = set(topic_list) if topic_list is not None else None
    for key, topics in flags.items():
        if key not in known:
            raise TrainingError(f"flags reference unknown paragraph {key}")
        if allowed is not None:
            extra = topics - allowed
            if extra:
                raise TrainingError(f"paragraph {key} flagged with unconfigured topics {sorted(extra)}")


def write_flags(flags: TopicFlags, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for (article_id, ordinal) in sorted(flags):
            fh.write(
                json.dumps(
                    {
                        "article_id": article_id,
                        "ordinal": ordinal,
                        "topics": sorted(flags[(article_id, ordinal)]),
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )


def read_flags(path) -> TopicFlags:
    flags: TopicFlags = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            try:
                key = (str(obj["article_id"]), int(obj["ordinal"]))
                topics = set(obj["topics"])
            except (KeyError, TypeError, ValueError) as exc:
                raise TrainingError(f"line {lineno}: bad flag record: {exc}") from exc
            flags[key] = topics
    return flags


def write_teacher_sets(sets: list[LabeledSet], path) -> None:
    """Export teacher sets (one topic per line) for external trainers."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in sets:
            fh.write(
                json.dumps(
                    {"topic": s.topic, "positives": s.positives, "negatives": s.negatives},
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )
