import json
import math

import pytest
from hypothesis import given, strategies as st

from narrative_chains.embedding import (
    DEFAULT_DIM,
    EmbeddingError,
    EmbeddingTable,
    Vector,
    cosine,
    embed,
    load_external_embeddings,
    stable_bucket,
    tokenize,
    write_embeddings,
)


class TestTokenize:
    def test_spaced_lowercases_and_splits(self):
        assert tokenize("Green Energy investment") == ["green", "energy", "investment"]

    def test_unspaced_character_bigrams(self):
        assert tokenize("環境規制", "unspaced") == ["環境", "境規", "規制"]

    def test_empty(self):
        assert tokenize("") == []
        assert tokenize("", "unspaced") == []

    def test_punctuation_is_not_a_token(self):
        assert tokenize("rose, fell; and stalled!") == ["rose", "fell", "and", "stalled"]

    def test_unspaced_single_char(self):
        assert tokenize("雨", "unspaced") == ["雨"]


class TestEmbed:
    def test_deterministic(self):
        assert embed("strict regulations") == embed("strict regulations")

    def test_empty_text_zero_vector(self):
        vec = embed("")
        assert vec.values == {} and vec.norm() == 0.0

    def test_unit_norm_when_nonzero(self):
        assert embed("a b c a").norm() == pytest.approx(1.0, abs=1e-12)

    def test_repeated_token_log_scaled(self):
        one = embed("solar")
        three = embed("solar solar solar")
        # single token normalizes to weight 1 regardless of count
        assert list(one.values.values()) == [1.0]
        assert list(three.values.values()) == [1.0]

    def test_rejects_tiny_dimension(self):
        with pytest.raises(ValueError):
            embed("x", dim=1)

    def test_disjoint_expressions_cosine_zero_absent_collisions(self):
        # fixture vocabulary: brute-force check there are no bucket collisions
        vocab_a = ["carbon", "tax", "proposal"]
        vocab_b = ["flood", "insurance", "claims"]
        buckets = [stable_bucket(t, DEFAULT_DIM) for t in vocab_a + vocab_b]
        assert len(set(buckets)) == len(buckets)
        assert cosine(embed(" ".join(vocab_a)), embed(" ".join(vocab_b))) == 0.0


class TestCosine:
    def test_identity(self):
        u = Vector.from_dense([1.0, 0.0])
        assert cosine(u, u) == 1.0

    def test_orthogonal(self):
        assert cosine(Vector.from_dense([1.0, 0.0]), Vector.from_dense([0.0, 1.0])) == 0.0

    def test_analytic_45_degrees(self):
        got = cosine(Vector.from_dense([1.0, 1.0]), Vector.from_dense([1.0, 0.0]))
        assert got == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-9)

    def test_zero_norm_convention(self):
        assert cosine(Vector.from_dense([0.0, 0.0]), Vector.from_dense([1.0, 0.0])) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(EmbeddingError, match="dimension mismatch"):
            cosine(Vector.from_dense([1.0]), Vector.from_dense([1.0, 0.0]))

    @given(st.lists(st.floats(-10, 10), min_size=2, max_size=6),
           st.lists(st.floats(-10, 10), min_size=2, max_size=6))
    def test_symmetry_and_bounds(self, a, b):
        n = min(len(a), len(b))
        u, v = Vector.from_dense(a[:n]), Vector.from_dense(b[:n])
        assert cosine(u, v) == cosine(v, u)
        assert abs(cosine(u, v)) <= 1.0 + 1e-12

    @given(st.lists(st.floats(-5, 5), min_size=2, max_size=6),
           st.floats(0.001, 1000.0))
    def test_positive_scaling_preserves_cosine(self, a, c):
        u = Vector.from_dense(a)
        if u.norm() == 0.0:
            return
        assert cosine(u, u.scaled(c)) == pytest.approx(1.0, abs=1e-9)


def pair_key(i, role):
    return (f"art{i}", 0, 0, role)


def write_exchange(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def exchange_record(i=0, role="cause", vector=(1.0, 0.0, 0.0, 0.0)):
    return {"article_id": f"art{i}", "paragraph": 0, "sentence": 0,
            "role": role, "vector": list(vector)}


class TestExternalEmbeddings:
    def test_loads_dense_records(self, tmp_path):
        path = tmp_path / "e.jsonl"
        write_exchange(path, [exchange_record(0), exchange_record(1, role="effect")])
        table = load_external_embeddings(path)
        assert len(table) == 2 and table.dim == 4

    def test_ragged_dimension_rejected(self, tmp_path):
        path = tmp_path / "e.jsonl"
        write_exchange(path, [exchange_record(0), exchange_record(1, vector=(1.0, 2.0, 3.0))])
        with pytest.raises(EmbeddingError, match="dimension"):
            load_external_embeddings(path)

    def test_unknown_key_named(self, tmp_path):
        path = tmp_path / "e.jsonl"
        write_exchange(path, [exchange_record(7)])
        with pytest.raises(EmbeddingError, match="art7"):
            load_external_embeddings(path, valid_keys={pair_key(0, "cause")})

    def test_unknown_role_rejected(self, tmp_path):
        path = tmp_path / "e.jsonl"
        rec = exchange_record()
        rec["role"] = "side"
        write_exchange(path, [rec])
        with pytest.raises(EmbeddingError, match="role"):
            load_external_embeddings(path)

    def test_write_read_round_trip_exact(self, tmp_path):
        table = EmbeddingTable(DEFAULT_DIM)
        table.put(pair_key(0, "cause"), embed("strict environmental regulations"))
        table.put(pair_key(0, "effect"), embed("green energy investment"))
        path = tmp_path / "e.jsonl"
        write_embeddings(table, path)
        back = load_external_embeddings(path)
        assert back.dim == table.dim
        for key in table.keys():
            assert back.get(key) == table.get(key)

    def test_table_rejects_mismatched_vector(self):
        table = EmbeddingTable(4)
        with pytest.raises(EmbeddingError):
            table.put(pair_key(0, "cause"), Vector.from_dense([1.0, 0.0]))
