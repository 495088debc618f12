"""Deterministic expression vectors and cosine similarity.

The built-in embedder hashes tokens into a fixed-dimension count vector
(sub-linear log weighting, L2-normalized). Externally produced vectors can
be loaded from an exchange file and override the built-in embedder per key.
"""

from __future__ import annotations

import json
import math
import re
import zlib
from dataclasses import dataclass

from .corpus import SPACED, UNSPACED, PROFILES

DEFAULT_DIM = 2**20

_WORD = re.compile(r"[\w']+", re.UNICODE)

# (article_id, paragraph ordinal, sentence index, role); role is "cause" or "effect"
ExpressionKey = tuple[str, int, int, str]
ROLES = ("cause", "effect")


class EmbeddingError(ValueError):
    """Raised for malformed embedding exchange files or mismatched vectors."""


def tokenize(text: str, profile: str = SPACED) -> list[str]:
    """Spaced scripts: lowercased word tokens. Unspaced: character bigrams.

    Unspaced bigrams are taken over the non-whitespace character stream; a
    single-character text yields that character as its only token.
    """
    if profile not in PROFILES:
        raise ValueError(f"unknown script profile: {profile!r}")
    if profile == SPACED:
        return [m.group(0).lower() for m in _WORD.finditer(text)]
    chars = [c for c in text if not c.isspace()]
    if len(chars) < 2:
        return ["".join(chars)] if chars else []
    return ["".join(chars[i : i + 2]) for i in range(len(chars) - 1)]


def stable_bucket(token: str, dim: int) -> int:
    """Process-independent hash bucket (crc32 of the UTF-8 token)."""
    return zlib.crc32(token.encode("utf-8")) % dim


def hashed_log_counts(tokens: list[str], dim: int) -> dict[int, float]:
    """Hashed token counts with sub-linear (1 + ln count) weighting."""
    counts: dict[int, int] = {}
    for tok in tokens:
        b = stable_bucket(tok, dim)
        counts[b] = counts.get(b, 0) + 1
    return {b: 1.0 + math.log(c) for b, c in counts.items()}


@dataclass(frozen=True)
class Vector:
    """Sparse real vector of fixed dimension."""

    values: dict[int, float]
    dim: int

    def __post_init__(self):
        for i, v in self.values.items():
            if not (0 <= i < self.dim):
                raise EmbeddingError(f"index {i} out of range for dim {self.dim}")
            if not math.isfinite(v):
                raise EmbeddingError(f"non-finite entry at index {i}")

    @classmethod
    def from_dense(cls, values: list[float]) -> "Vector":
        return cls({i: float(v) for i, v in enumerate(values) if v != 0.0}, dim=len(values))

    def norm(self) -> float:
        return math.sqrt(sum(v * v for v in self.values.values()))

    def scaled(self, c: float) -> "Vector":
        return Vector({i: v * c for i, v in self.values.items()}, self.dim)


def embed(text: str, profile: str = SPACED, dim: int = DEFAULT_DIM) -> Vector:
    """Hashed log-count vector, L2-normalized when nonzero. Empty text -> zero vector."""
    if dim < 2:
        raise ValueError("dimension must be >= 2")
    weights = hashed_log_counts(tokenize(text, profile), dim)
    norm = math.sqrt(sum(v * v for v in weights.values()))
    if norm > 0.0:
        weights = {i: v / norm for i, v in weights.items()}
    return Vector(weights, dim)


def cosine(u: Vector, v: Vector) -> float:
    """dot(u,v) / (|u||v|); 0.0 when either norm is zero."""
    if u.dim != v.dim:
        raise EmbeddingError(f"dimension mismatch: {u.dim} vs {v.dim}")
    nu, nv = u.norm(), v.norm()
    if nu == 0.0 or nv == 0.0:
        return 0.0
    small, big = (u.values, v.values) if len(u.values) <= len(v.values) else (v.values, u.values)
    dot = sum(val * big[i] for i, val in small.items() if i in big)
    return dot / (nu * nv)


class EmbeddingTable:
    """Vectors keyed by (article_id, paragraph, sentence, role).

    When a table is present, its vectors override the built-in embedder for
    the listed keys; all vectors share one dimension.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self._vectors: dict[ExpressionKey, Vector] = {}

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, key: ExpressionKey) -> bool:
        return key in self._vectors

    def put(self, key: ExpressionKey, vec: Vector) -> None:
        if vec.dim != self.dim:
            raise EmbeddingError(
                f"vector for {key} has dimension {vec.dim}, table has {self.dim}"
            )
        self._vectors[key] = vec

    def get(self, key: ExpressionKey) -> Vector:
        try:
            return self._vectors[key]
        except KeyError:
            raise EmbeddingError(f"no embedding for key {key}") from None

    def keys(self):
        return self._vectors.keys()

    def items(self):
        return self._vectors.items()


def _key_from_record(obj: dict, lineno: int) -> ExpressionKey:
    try:
        key = (str(obj["article_id"]), int(obj["paragraph"]), int(obj["sentence"]), str(obj["role"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise EmbeddingError(f"line {lineno}: bad embedding record: {exc}") from exc
    if key[3] not in ROLES:
        raise EmbeddingError(f"line {lineno}: unknown role {key[3]!r}")
    return key


def load_external_embeddings(path, valid_keys=None) -> EmbeddingTable:
    """Load an embedding exchange file (JSONL).

    Records carry either a dense ``vector`` array or the sparse
    ``dim``/``indices``/``values`` triple written by the embed stage.
    Dimension is inferred from the first record and enforced thereafter.
    With valid_keys given, any key outside that set is an error.
    """
    table: EmbeddingTable | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise EmbeddingError(f"line {lineno}: malformed record: {exc}") from exc
            key = _key_from_record(obj, lineno)
            if "vector" in obj:
                dense = obj["vector"]
                if not isinstance(dense, list):
                    raise EmbeddingError(f"line {lineno}: vector must be an array")
                vec = Vector.from_dense([float(x) for x in dense])
            elif "indices" in obj and "values" in obj and "dim" in obj:
                vec = Vector(
                    {int(i): float(v) for i, v in zip(obj["indices"], obj["values"])},
                    dim=int(obj["dim"]),
                )
            else:
                raise EmbeddingError(f"line {lineno}: record carries no vector")
            if valid_keys is not None and key not in valid_keys:
                raise EmbeddingError(f"line {lineno}: key {key} does not match any causal pair")
            if table is None:
                table = EmbeddingTable(vec.dim)
            if vec.dim != table.dim:
                raise EmbeddingError(
                    f"line {lineno}: dimension {vec.dim} differs from first record's {table.dim}"
                )
            table.put(key, vec)
    return table if table is not None else EmbeddingTable(DEFAULT_DIM)


def write_embeddings(table: EmbeddingTable, path) -> None:
    """Write a table in the exchange format, sparse entries, keys sorted."""
    with open(path, "w", encoding="utf-8") as fh:
        for key in sorted(table.keys()):
            vec = table.get(key)
            indices = sorted(vec.values)
            fh.write(
                json.dumps(
                    {
                        "article_id": key[0],
                        "paragraph": key[1],
                        "sentence": key[2],
                        "role": key[3],
                        "dim": vec.dim,
                        "indices": indices,
                        "values": [vec.values[i] for i in indices],
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )
