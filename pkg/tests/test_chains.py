import math
import random
from datetime import date, timedelta

import pytest

from narrative_chains.chains import (
    ChainLink,
    ChainSet,
    build_chains,
    link_pairs,
    make_provider,
    read_chains,
    write_chains,
)
from narrative_chains.corpus import MonthKey, days_between
from narrative_chains.embedding import (
    DEFAULT_DIM,
    EmbeddingError,
    EmbeddingTable,
    Vector,
    cosine,
)
from narrative_chains.extraction import CausalPair


def pair(i, day, cause="cause text", effect="effect text", topics=("A",), article=None):
    return CausalPair(
        article_id=article or f"art{i}", paragraph=0, sentence=i % 3,
        cause_text=cause, effect_text=effect, cue="because",
        date=day, topics=frozenset(topics),
    )


def naive_links(pairs, threshold, provider, max_lag_days=None):
    """Brute-force double loop over all ordered pairs."""
    links = set()
    for p in pairs:
        for q in pairs:
            d = days_between(p.date, q.date)
            if d <= 0:
                continue
            if max_lag_days is not None and d > max_lag_days:
                continue
            sim = cosine(provider(p, "effect"), provider(q, "cause"))
            if sim >= threshold:
                links.add(ChainLink(
                    past_key=p.sort_key(), current_key=q.sort_key(),
                    similarity=sim, d=d,
                    src_topics=p.topics, dst_topics=q.topics,
                    month=MonthKey.of(q.date),
                ))
    return links


def table_provider(vectors):
    """Provider backed by an explicit (pair key, role) -> Vector mapping."""
    table = EmbeddingTable(next(iter(vectors.values())).dim)
    for key, vec in vectors.items():
        table.put(key, vec)

    def provider(p, role):
        return table.get(p.key(role))

    return provider


class TestLinkPairs:
    def setup_method(self):
        self.t0 = date(2020, 1, 1)
        self.unit_x = Vector.from_dense([1.0, 0.0])

    def make(self, sim_vector, d):
        past = pair(0, self.t0, topics=("A",))
        current = pair(1, self.t0 + timedelta(days=d), topics=("B",))
        provider = table_provider({
            past.key("effect"): self.unit_x,
            past.key("cause"): self.unit_x,
            current.key("cause"): sim_vector,
            current.key("effect"): self.unit_x,
        })
        return past, current, provider

    def test_similar_and_later_links(self):
        v = Vector.from_dense([0.9, math.sqrt(1 - 0.81)])
        past, current, provider = self.make(v, d=30)
        links = link_pairs([past], current, 0.7, provider)
        assert len(links) == 1
        assert links[0].d == 30
        assert links[0].similarity == pytest.approx(0.9, abs=1e-12)

    def test_exact_threshold_links(self):
        v = Vector.from_dense([0.7, math.sqrt(1 - 0.7**2)])
        past, current, provider = self.make(v, d=30)
        assert len(link_pairs([past], current, 0.7, provider)) == 1

    def test_just_below_threshold_rejected(self):
        v = Vector.from_dense([0.699, math.sqrt(1 - 0.699**2)])
        past, current, provider = self.make(v, d=30)
        assert link_pairs([past], current, 0.7, provider) == []

    def test_same_day_never_links(self):
        v = Vector.from_dense([0.9, math.sqrt(1 - 0.81)])
        past, current, provider = self.make(v, d=0)
        assert link_pairs([past], current, 0.7, provider) == []

    def test_missing_embedding_errors(self):
        past = pair(0, self.t0)
        current = pair(1, self.t0 + timedelta(days=1))
        provider = table_provider({
            past.key("effect"): self.unit_x,
            current.key("cause"): self.unit_x,
        })
        lonely = pair(2, self.t0)
        with pytest.raises(EmbeddingError):
            link_pairs([lonely], current, 0.7, provider)

    def test_max_lag_cap(self):
        v = Vector.from_dense([1.0, 0.0])
        past, current, provider = self.make(v, d=400)
        assert link_pairs([past], current, 0.7, provider, max_lag_days=365) == []
        assert len(link_pairs([past], current, 0.7, provider, max_lag_days=400)) == 1


class TestBuildChains:
    def test_planted_transitive_chain(self):
        # topic-A pair (X, Y) then topic-B pair (Y, Z): one A->B link
        provider = make_provider("spaced", DEFAULT_DIM)
        past = pair(0, date(2020, 1, 10), cause="carbon tax announced",
                    effect="electricity prices rise", topics=("A",))
        current = pair(1, date(2020, 3, 5), cause="electricity prices rise",
                       effect="factories relocate abroad", topics=("B",))
        chains = build_chains([past, current], threshold=0.7, provider=provider)
        assert len(chains.links) == 1
        link = chains.links[0]
        assert link.similarity == pytest.approx(1.0, abs=1e-12)
        assert chains.group("A", "B", MonthKey(2020, 3)) == [link]

    def test_same_date_yields_nothing(self):
        provider = make_provider("spaced", DEFAULT_DIM)
        past = pair(0, date(2020, 1, 10), effect="shared phrase", topics=("A",))
        current = pair(1, date(2020, 1, 10), cause="shared phrase", topics=("B",))
        chains = build_chains([past, current], threshold=0.7, provider=provider)
        assert chains.links == []

    def test_five_past_matches_give_five_links(self):
        provider = make_provider("spaced", DEFAULT_DIM)
        pasts = [pair(i, date(2020, 1, 1 + i), effect="demand collapses", topics=("A",))
                 for i in range(5)]
        current = pair(9, date(2020, 6, 1), cause="demand collapses", topics=("B",))
        chains = build_chains(pasts + [current], threshold=0.7, provider=provider)
        incoming = [l for l in chains.links if l.current_key == current.sort_key()]
        assert len(incoming) == 5

    def test_topic_filing_completeness(self):
        provider = make_provider("spaced", DEFAULT_DIM)
        past = pair(0, date(2020, 1, 1), effect="energy costs spike", topics=("A", "B"))
        current = pair(1, date(2020, 2, 1), cause="energy costs spike", topics=("C", "D", "E"))
        chains = build_chains([past, current], threshold=0.7, provider=provider)
        assert len(chains.links) == 1
        groups = [k for k, links in chains.groups.items() if links]
        assert len(groups) == 6
        assert {(s, d) for s, d, _m in groups} == {("A", "C"), ("A", "D"), ("A", "E"),
                                                   ("B", "C"), ("B", "D"), ("B", "E")}

    def test_zero_topic_pairs_kept_but_ungrouped(self):
        provider = make_provider("spaced", DEFAULT_DIM)
        past = pair(0, date(2020, 1, 1), effect="port closes", topics=())
        current = pair(1, date(2020, 2, 1), cause="port closes", topics=("B",))
        chains = build_chains([past, current], threshold=0.7, provider=provider)
        assert len(chains.links) == 1
        assert chains.ungrouped == 1
        assert chains.groups == {}

    def test_flags_override_pair_topics(self):
        provider = make_provider("spaced", DEFAULT_DIM)
        past = pair(0, date(2020, 1, 1), effect="rates rise", topics=("A",))
        current = pair(1, date(2020, 2, 1), cause="rates rise", topics=("B",))
        flags = {(past.article_id, 0): {"X"}, (current.article_id, 0): {"Y"}}
        chains = build_chains([past, current], flags=flags, threshold=0.7, provider=provider)
        assert chains.links[0].src_topics == frozenset({"X"})
        assert chains.links[0].dst_topics == frozenset({"Y"})

    def test_threshold_monotonicity(self):
        pairs = random_pairs(random.Random(11), n=60)
        provider = make_provider("spaced", DEFAULT_DIM)
        low = set(build_chains(pairs, threshold=0.2, provider=provider).links)
        high = set(build_chains(pairs, threshold=0.6, provider=provider).links)
        assert high <= low

    def test_no_link_travels_back_in_time(self):
        pairs = random_pairs(random.Random(12), n=80)
        provider = make_provider("spaced", DEFAULT_DIM)
        by_key = {p.sort_key(): p for p in pairs}
        for link in build_chains(pairs, threshold=0.3, provider=provider).links:
            assert by_key[link.past_key].date < by_key[link.current_key].date
            assert link.d > 0


VOCAB = ["carbon", "tax", "flood", "damage", "exports", "fall", "prices",
         "rise", "demand", "drops", "policy", "shift", "energy", "crisis"]


def random_pairs(rng, n=50, months=3):
    pairs = []
    for i in range(n):
        # two pairs can share an article (and so its date)
        art = f"art{i // 2}"
        day = date(2021, 1, 1) + timedelta(days=(i // 2 * 37) % (months * 30))
        phrase = lambda: " ".join(rng.sample(VOCAB, rng.randint(2, 4)))
        topics = frozenset(rng.sample(["A", "B", "C", "D", "E"], rng.randint(0, 3)))
        pairs.append(CausalPair(
            article_id=art, paragraph=rng.randint(0, 1), sentence=i % 2,
            cause_text=phrase(), effect_text=phrase(), cue="because",
            date=day, topics=topics,
        ))
    # drop accidental key collisions
    seen, unique = set(), []
    for p in pairs:
        if p.sort_key() not in seen:
            seen.add(p.sort_key())
            unique.append(p)
    return unique


def test_oracle_equivalence_small_random_corpora():
    rng = random.Random(1234)
    provider = make_provider("spaced", DEFAULT_DIM)
    for trial in range(8):
        pairs = random_pairs(rng, n=rng.randint(10, 80))
        threshold = rng.choice([0.3, 0.5, 0.7])
        got = set(build_chains(pairs, threshold=threshold, provider=provider).links)
        want = naive_links(pairs, threshold, provider)
        assert got == want, f"trial {trial} diverged"


def test_scaling_external_vectors_changes_no_link_decision():
    pairs = random_pairs(random.Random(31), n=40)
    base = EmbeddingTable(8)
    rng = random.Random(32)
    for p in pairs:
        for role in ("cause", "effect"):
            base.put(p.key(role), Vector.from_dense([rng.uniform(-1, 1) for _ in range(8)]))
    scaled = EmbeddingTable(8)
    for key in base.keys():
        scaled.put(key, base.get(key).scaled(rng.uniform(0.01, 100.0)))

    def decisions(table):
        got = build_chains(pairs, threshold=0.5, provider=lambda p, r: table.get(p.key(r)))
        return {(l.past_key, l.current_key) for l in got.links}

    assert decisions(base) == decisions(scaled)


def test_chain_file_round_trip(tmp_path):
    pairs = random_pairs(random.Random(5), n=40)
    provider = make_provider("spaced", DEFAULT_DIM)
    chains = build_chains(pairs, threshold=0.3, provider=provider)
    path = tmp_path / "chains.jsonl"
    write_chains(chains, path)
    back = read_chains(path, months=chains.months)
    assert back.links == chains.links
    assert back.groups.keys() == chains.groups.keys()


def test_chainset_months_default_from_links():
    link = ChainLink(("a", 0, 0), ("b", 0, 0), 0.8, 5, frozenset({"A"}),
                     frozenset({"B"}), MonthKey(2020, 4))
    chains = ChainSet([link])
    assert chains.months == [MonthKey(2020, 4)]
