import math
import random
from collections import Counter

import pytest

from crisis_pulse.corpus import (
    BowVector,
    build_dictionary,
    key_bigrams,
    load_dictionary,
    save_dictionary,
    term_frequencies,
    tfidf_corpus,
    to_bow,
)
from crisis_pulse.errors import EmptyCorpus
from crisis_pulse.messages import TokenizedDoc


def doc(*tokens: str, mid: str = "m") -> TokenizedDoc:
    return TokenizedDoc(message_id=mid, tokens=list(tokens))


def naive_dictionary_ids(docs, min_docs, max_frac, keep_n):
    """Independent brute-force filter: count, threshold, sort, truncate."""
    D = len(docs)
    df = Counter()
    tf = Counter()
    for d in docs:
        tf.update(d.tokens)
        for t in set(d.tokens):
            df[t] += 1
    kept = [t for t in df if df[t] >= min_docs and df[t] / D <= max_frac]
    kept.sort(key=lambda t: (-tf[t], t))
    return set(kept[:keep_n])


def random_corpus(rng, max_docs=200, max_vocab=500):
    vocab = [f"w{i}" for i in range(rng.randint(5, max_vocab))]
    return [
        doc(*rng.choices(vocab, k=rng.randint(0, 30)), mid=f"m{i}")
        for i in range(rng.randint(1, max_docs))
    ]


class TestBuildDictionary:
    def test_high_frequency_excluded(self):
        docs = [doc("common", f"x{i}") for i in range(18)] + [doc(f"y{i}") for i in range(2)]
        d = build_dictionary(docs, min_docs=1, max_frac=0.5)
        assert "common" not in d.token_to_id  # 18/20 > 0.5

    def test_threshold_boundaries(self):
        docs = [doc("often", "usual") if i < 16 else doc("usual") for i in range(40)]
        # 'often' df=16 kept, 'usual' df=40 -> 40/40 > 0.5 excluded
        d = build_dictionary(docs, min_docs=15, max_frac=0.5)
        assert "often" in d.token_to_id and "usual" not in d.token_to_id
        docs14 = [doc("rare") if i < 14 else doc("pad", "pad2") for i in range(40)]
        d14 = build_dictionary(docs14, min_docs=15, max_frac=0.5)
        assert "rare" not in d14.token_to_id

    def test_keep_n_by_total_frequency(self):
        docs = []
        freqs = {"aaa": 5, "bbb": 4, "ccc": 3, "ddd": 2, "eee": 1}
        for i in range(5):
            tokens = [t for t, f in freqs.items() if f > i]
            docs.append(doc(*tokens, mid=f"m{i}"))
        d = build_dictionary(docs, min_docs=1, max_frac=1.0, keep_n=3)
        assert set(d.token_to_id) == {"aaa", "bbb", "ccc"}

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpus):
            build_dictionary([])

    def test_invariants_hold(self):
        rng = random.Random(7)
        d = build_dictionary(random_corpus(rng), min_docs=2, max_frac=0.5, keep_n=50)
        ids = sorted(d.token_to_id.values())
        assert ids == list(range(len(ids)))
        for i in ids:
            assert d.doc_freq[i] >= 2
            assert d.doc_freq[i] / d.num_docs <= 0.5
        assert len(ids) <= 50

    def test_brute_force_equivalence(self):
        rng = random.Random(42)
        for _ in range(100):
            docs = random_corpus(rng)
            d = build_dictionary(docs, min_docs=3, max_frac=0.5, keep_n=50)
            assert set(d.token_to_id) == naive_dictionary_ids(docs, 3, 0.5, 50)


class TestToBow:
    def setup_method(self):
        self.docs = [doc("flood", "warn") for _ in range(5)]
        self.d = build_dictionary(self.docs, min_docs=1, max_frac=1.0)

    def test_counts(self):
        bow = to_bow(doc("flood", "flood", "warn"), self.d)
        assert dict(bow.entries) == {
            self.d.token_to_id["flood"]: 2.0,
            self.d.token_to_id["warn"]: 1.0,
        }

    def test_out_of_dictionary_dropped(self):
        assert to_bow(doc("unknown", "tokens"), self.d).entries == ()

    def test_empty_doc(self):
        assert to_bow(doc(), self.d).entries == ()

    def test_total_weight_equals_in_dict_tokens(self):
        bow = to_bow(doc("flood", "warn", "flood", "xxx"), self.d)
        assert bow.total_weight() == 3.0


class TestTfidf:
    def test_everywhere_term_weight_zero(self):
        docs = [doc("common", f"x{i}") for i in range(4)]
        d = build_dictionary(docs, min_docs=1, max_frac=1.0)
        bows = [to_bow(dd, d) for dd in docs]
        weighted = tfidf_corpus(bows, d)
        cid = d.token_to_id["common"]
        for w in weighted:
            assert all(i != cid for i, _ in w.entries)

    def test_idf_log2(self):
        docs = [doc("rare", "pad"), doc("pad"), doc("pad"), doc("pad")]
        d = build_dictionary(docs, min_docs=1, max_frac=1.0)
        assert math.isclose(math.log2(d.num_docs / d.doc_freq[d.token_to_id["rare"]]), 2.0)

    def test_l2_normalized(self):
        docs = [doc("aaa", "aaa", "aaa", "bbb", "bbb", "bbb", "bbb"), doc("ccc"), doc("ccc")]
        d = build_dictionary(docs, min_docs=1, max_frac=1.0)
        weighted = tfidf_corpus([to_bow(docs[0], d)], d)[0]
        # pre-normalization weights proportional to (3, 4); idf equal for both
        values = sorted(w for _, w in weighted.entries)
        assert math.isclose(values[0], 0.6, abs_tol=1e-12)
        assert math.isclose(values[1], 0.8, abs_tol=1e-12)

    def test_norms_one_or_empty(self):
        rng = random.Random(3)
        docs = random_corpus(rng)
        d = build_dictionary(docs, min_docs=1, max_frac=0.6, keep_n=100)
        for w in tfidf_corpus([to_bow(dd, d) for dd in docs], d):
            norm = math.sqrt(sum(x * x for _, x in w.entries))
            assert norm == 0 or math.isclose(norm, 1.0, abs_tol=1e-9)


class TestTermStats:
    def test_term_frequencies(self):
        docs = [doc("flood", "flood", "warn"), doc("flood", "warn", "river")]
        assert term_frequencies(docs, 2) == [("flood", 3), ("warn", 2)]

    def test_empty(self):
        assert term_frequencies([], 5) == []

    def test_tie_lexicographic(self):
        docs = [doc("warn", "flood"), doc("flood", "warn")]
        assert term_frequencies(docs, 2) == [("flood", 2), ("warn", 2)]

    def test_sums_match_corpus(self):
        rng = random.Random(11)
        docs = random_corpus(rng, max_docs=50, max_vocab=30)
        totals = Counter(t for d in docs for t in d.tokens)
        assert dict(term_frequencies(docs, 10 ** 6)) == dict(totals)

    def test_key_bigrams(self):
        docs = [doc("flood", "warn") for _ in range(5)]
        assert key_bigrams(docs, min_count=3, top_n=5) == [("flood warn", 5)]

    def test_bigrams_below_min_count(self):
        assert key_bigrams([doc("aaa", "bbb")], min_count=3, top_n=5) == []

    def test_bigram_tie_break(self):
        docs = (
            [doc("aaa", "bbb") for _ in range(7)]
            + [doc("ccc", "ddd") for _ in range(5)]
            + [doc("bbb", "ccc") for _ in range(5)]
        )
        assert key_bigrams(docs, min_count=1, top_n=2) == [("aaa bbb", 7), ("bbb ccc", 5)]


class TestSerialization:
    def test_round_trip(self, tmp_path):
        rng = random.Random(5)
        d = build_dictionary(random_corpus(rng), min_docs=2, max_frac=0.5, keep_n=40)
        path = tmp_path / "dict.tsv"
        save_dictionary(d, path)
        loaded = load_dictionary(path)
        assert loaded == d


class TestBowVectorInvariants:
    def test_rejects_unsorted_ids(self):
        with pytest.raises(ValueError):
            BowVector(((2, 1.0), (1, 1.0)))

    def test_rejects_nonpositive_weights(self):
        with pytest.raises(ValueError):
            BowVector(((0, 0.0),))
