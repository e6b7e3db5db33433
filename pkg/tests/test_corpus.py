import json
import random
from collections import Counter
from datetime import datetime, timezone

import pytest

from socioscope import corpus as cp
from socioscope.errors import IngestError
from socioscope.stemming import stem
from socioscope.stopwords import STOPWORDS

DAY = 86400
T0 = 1500000000  # 2017-07-14 UTC


def make_records(n, seed=1, communities=("alpha", "beta")):
    rng = random.Random(seed)
    words = ["jews", "white", "matter", "echoes", "news", "report", "daily"]
    recs = []
    for i in range(n):
        comm = communities[i % len(communities)]
        recs.append({
            "id": f"p{i}",
            "community": comm,
            "ts": T0 + rng.randrange(0, 60 * DAY),
            "text": " ".join(rng.choices(words, k=rng.randrange(3, 9))),
            "images": [],
        })
    return recs


class TestStemmer:
    # canonical single-pass outputs of the suffix-stripping algorithm
    VECTORS = [
        ("caresses", "caress"), ("ponies", "poni"), ("ties", "ti"),
        ("caress", "caress"), ("cats", "cat"), ("feed", "feed"),
        ("agreed", "agre"), ("plastered", "plaster"), ("bled", "bled"),
        ("motoring", "motor"), ("sing", "sing"), ("conflated", "conflat"),
        ("troubled", "troubl"), ("sized", "size"), ("hopping", "hop"),
        ("tanned", "tan"), ("falling", "fall"), ("hissing", "hiss"),
        ("fizzed", "fizz"), ("failing", "fail"), ("filing", "file"),
        ("happy", "happi"), ("sky", "sky"), ("relational", "relat"),
        ("conditional", "condit"), ("rational", "ration"),
        ("valenci", "valenc"), ("hesitanci", "hesit"),
        ("digitizer", "digit"), ("radicalli", "radic"),
        ("differentli", "differ"), ("vileli", "vile"),
        ("analogousli", "analog"), ("vietnamization", "vietnam"),
        ("predication", "predic"), ("operator", "oper"),
        ("feudalism", "feudal"), ("decisiveness", "decis"),
        ("hopefulness", "hope"), ("callousness", "callous"),
        ("formaliti", "formal"), ("sensitiviti", "sensit"),
        ("sensibiliti", "sensibl"), ("triplicate", "triplic"),
        ("formative", "form"), ("formalize", "formal"),
        ("electriciti", "electr"), ("electrical", "electr"),
        ("hopeful", "hope"), ("goodness", "good"), ("revival", "reviv"),
        ("allowance", "allow"), ("inference", "infer"),
        ("airliner", "airlin"), ("gyroscopic", "gyroscop"),
        ("adjustable", "adjust"), ("defensible", "defens"),
        ("irritant", "irrit"), ("replacement", "replac"),
        ("adjustment", "adjust"), ("dependent", "depend"),
        ("adoption", "adopt"), ("communism", "commun"),
        ("activate", "activ"), ("angulariti", "angular"),
        ("effective", "effect"), ("probate", "probat"), ("rate", "rate"),
        ("cease", "ceas"), ("controll", "control"), ("roll", "roll"),
        ("jews", "jew"), ("echoes", "echo"),
    ]

    @pytest.mark.parametrize("word,expected", VECTORS)
    def test_known_vectors(self, word, expected):
        assert stem(word) == expected

    def test_short_words_unchanged(self):
        for w in ["a", "is", "by", ""]:
            assert stem(w) == w


class TestTokenize:
    def test_empty(self):
        assert cp.tokenize("") == []

    def test_stopwords_and_stemming(self):
        assert cp.tokenize("The Jews and the jews!") == ["jew", "jew"]

    def test_paren_wrappers_kept(self):
        assert cp.tokenize("(((echoes))) matter") == ["(((echo)))", "matter"]

    def test_single_parens_are_punctuation(self):
        assert cp.tokenize("(hello world)") == ["hello", "world"]

    def test_punctuation_only_dropped(self):
        assert cp.tokenize("((( ... !!!") == []

    def test_urls_dropped(self):
        assert cp.tokenize("watch https://example.com/x soon") == ["watch", "soon"]

    def test_idempotent_on_own_output(self):
        rng = random.Random(7)
        words = [
            "agreed", "dying", "generalizations", "oscillators", "echoes",
            "happiness", "relational", "flying", "studies", "being",
            "(((echoes)))", "news2016", "caresses", "worrying",
        ]
        for _ in range(200):
            text = " ".join(rng.choices(words, k=rng.randrange(1, 10)))
            toks = cp.tokenize(text)
            assert cp.tokenize(" ".join(toks)) == toks

    def test_no_emitted_token_is_stopword(self):
        text = "having haves doing does the those echoes"
        for tok in cp.tokenize(text):
            assert tok not in STOPWORDS


class TestIngest:
    def test_empty_file(self, jsonl_writer):
        handle = cp.ingest_posts(jsonl_writer([]))
        assert len(handle.posts) == 0
        assert handle.report.skipped == 0

    def test_missing_field_skipped(self, jsonl_writer):
        recs = make_records(3)
        del recs[1]["ts"]
        handle = cp.ingest_posts(jsonl_writer(recs))
        assert handle.report.accepted == 2
        assert handle.report.skipped_missing_field == 1

    def test_duplicate_skipped(self, jsonl_writer):
        recs = make_records(3)
        recs[2]["id"] = recs[0]["id"]
        recs[2]["community"] = recs[0]["community"]
        handle = cp.ingest_posts(jsonl_writer(recs))
        assert handle.report.accepted == 2
        assert handle.report.skipped_duplicate == 1
        # the first record wins
        assert handle.post(("alpha", "p0")).text == recs[0]["text"]

    def test_bad_timestamp_skipped(self, jsonl_writer):
        recs = make_records(2)
        recs[0]["ts"] = -5
        handle = cp.ingest_posts(jsonl_writer(recs))
        assert handle.report.skipped_bad_timestamp == 1

    def test_invalid_json_skipped(self, tmp_path):
        p = tmp_path / "bad.jsonl"
        p.write_text('{"id": "a", "community": "c", "ts": 1, "text": "x"}\nnot json\n')
        handle = cp.ingest_posts(p)
        assert handle.report.accepted == 1
        assert handle.report.skipped_invalid_record == 1

    def test_unreadable_file_fatal(self, tmp_path):
        with pytest.raises(IngestError):
            cp.ingest_posts(tmp_path / "nope.jsonl")

    def test_record_conservation(self, jsonl_writer):
        recs = make_records(50)
        del recs[3]["text"]
        recs[10]["ts"] = "zzz"
        handle = cp.ingest_posts(jsonl_writer(recs))
        assert handle.report.accepted + handle.report.skipped == 50

    def test_csv_ingest(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text(
            "id,community,ts,text,images\n"
            f'a,alpha,{T0},"some words here",img1|img2\n'
            f"b,beta,{T0 + DAY},other words,\n"
        )
        handle = cp.ingest_posts(p, format="csv")
        assert handle.report.accepted == 2
        assert handle.post(("alpha", "a")).image_refs == ("img1", "img2")

    def test_per_day_counts_match_line_tally(self, jsonl_writer):
        # oracle: independent per-day tally straight off the input file
        recs = make_records(10_000, seed=42)
        path = jsonl_writer(recs)
        handle = cp.ingest_posts(path)
        assert handle.report.accepted == 10_000

        tally = Counter()
        with open(path) as f:
            for line in f:
                rec = json.loads(line)
                day = datetime.fromtimestamp(rec["ts"], tz=timezone.utc).date()
                tally[(day, rec["community"])] += 1
        for day, per_comm in handle.date_index.items():
            for comm, count in per_comm.items():
                assert tally[(day, comm)] == count
        assert sum(tally.values()) == sum(
            sum(pc.values()) for pc in handle.date_index.values()
        )

    def test_date_index_sums_to_community_counts(self, jsonl_writer):
        handle = cp.ingest_posts(jsonl_writer(make_records(200)))
        for comm in handle.communities:
            via_index = sum(
                pc.get(comm, 0) for pc in handle.date_index.values()
            )
            assert via_index == handle.community_posts(comm)

    def test_missing_image_refs_flagged(self, jsonl_writer, tmp_path):
        recs = make_records(2)
        recs[0]["images"] = ["present.png", "absent.png"]
        store = tmp_path / "imgs"
        store.mkdir()
        (store / "present.png").write_bytes(b"x")
        handle = cp.ingest_posts(jsonl_writer(recs), image_store=store)
        assert handle.report.missing_image_refs == 1


class TestFilterAndSample:
    def test_absent_term_empty(self, jsonl_writer):
        handle = cp.ingest_posts(jsonl_writer(make_records(10)))
        assert cp.filter_by_term(handle, "nosuchtoken") == set()

    def test_filter_matches_linear_scan(self, jsonl_writer):
        handle = cp.ingest_posts(jsonl_writer(make_records(300, seed=9)))
        for term in ["jew", "white", "echo"]:
            expected = {
                p.key
                for p, toks in zip(handle.posts, handle.tokens)
                if term in toks
            }
            assert cp.filter_by_term(handle, term) == expected

    def test_filter_idempotent(self, jsonl_writer):
        handle = cp.ingest_posts(jsonl_writer(make_records(100)))
        assert cp.filter_by_term(handle, "jew") == cp.filter_by_term(handle, "jew")

    def test_term_index_matches_tokenizer_output(self, jsonl_writer):
        handle = cp.ingest_posts(jsonl_writer(make_records(150, seed=3)))
        produced = set()
        for toks in handle.tokens:
            produced.update(toks)
        assert set(handle.term_index) == produced

    def test_sample_fewer_matches_returns_all(self, jsonl_writer):
        handle = cp.ingest_posts(jsonl_writer(make_records(60, seed=5)))
        matches = cp.filter_by_term(handle, "jew")
        sample = cp.sample_for_annotation(handle, "jew", 100, seed=0)
        assert {p.key for p in sample} == matches

    def test_sample_deterministic(self, jsonl_writer):
        handle = cp.ingest_posts(jsonl_writer(make_records(2000, seed=8)))
        s1 = cp.sample_for_annotation(handle, "jew", 20, seed=123)
        s2 = cp.sample_for_annotation(handle, "jew", 20, seed=123)
        assert [p.key for p in s1] == [p.key for p in s2]

    def test_sample_members_contain_term(self, jsonl_writer):
        handle = cp.ingest_posts(jsonl_writer(make_records(5000, seed=11)))
        matches = cp.filter_by_term(handle, "jew")
        sample = cp.sample_for_annotation(handle, "jew", 100, seed=4)
        keys = [p.key for p in sample]
        assert len(keys) == min(100, len(matches))
        assert len(set(keys)) == len(keys)
        assert set(keys) <= matches


class TestCache:
    def test_round_trip(self, jsonl_writer, tmp_path):
        handle = cp.ingest_posts(jsonl_writer(make_records(50)))
        cache = tmp_path / "corpus.cache"
        cp.save_cache(handle, cache)
        loaded = cp.load_cache(cache)
        assert loaded is not None
        assert loaded.index == handle.index
        assert loaded.term_index == handle.term_index

    def test_version_mismatch_invalidates(self, jsonl_writer, tmp_path, monkeypatch):
        handle = cp.ingest_posts(jsonl_writer(make_records(5)))
        cache = tmp_path / "corpus.cache"
        cp.save_cache(handle, cache)
        monkeypatch.setattr(cp, "CACHE_VERSION", cp.CACHE_VERSION + 1)
        assert cp.load_cache(cache) is None

    def test_missing_cache_none(self, tmp_path):
        assert cp.load_cache(tmp_path / "absent.cache") is None
