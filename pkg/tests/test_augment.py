import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_cos_mul
from protozs.augment import build_augmented_set, superclass_match, translate_sentence
from protozs.corpus import RelationMeta, TaggedSentence
from protozs.embeddings import VectorStore
from protozs.errors import DataError
from protozs.text import ADJ, ADV, CONTENT_POS, NOUN, OTHER, VERB

BIRTH = RelationMeta("place_of_birth", "location", "person", "location")
DEATH = RelationMeta("place_of_death", "location", "person", "location")
COUNTRY = RelationMeta("country", "location", "location", "location")


@pytest.fixture
def life_store():
    return VectorStore.from_dict({
        "place": [1.0, 0.0, 0.0, 0.0, 0.0],
        "birth": [0.0, 1.0, 0.0, 0.0, 0.0],
        "death": [0.0, 0.0, 1.0, 0.0, 0.0],
        "born": [0.2, 0.9, 0.0, 0.4, 0.0],
        "died": [0.2, 0.0, 0.9, 0.4, 0.0],
        "native": [0.1, 0.7, 0.0, 0.0, 0.5],
        "buried": [0.1, 0.0, 0.7, 0.0, 0.5],
        "in": [0.0, 0.0, 0.0, 0.0, 1.0],
        "jessica": [0.0, 0.0, 0.0, 1.0, 0.3],
        "manchester": [0.3, 0.0, 0.0, 0.8, 0.2],
    })


def sentence(tokens, pos, rel="place_of_birth"):
    return TaggedSentence(tokens, pos, (0, 1), (len(tokens) - 1, len(tokens)), rel)


def test_superclass_match_cases():
    assert superclass_match(BIRTH, DEATH)
    assert not superclass_match(BIRTH, COUNTRY)
    assert superclass_match(BIRTH, BIRTH)
    shouty = RelationMeta("x", "LOCATION", "Person", "location")
    assert superclass_match(BIRTH, shouty)


def test_all_other_is_identity(life_store):
    x = sentence(["jessica", "in", "manchester"], [OTHER] * 3)
    y = translate_sentence(x, BIRTH, DEATH, life_store)
    assert y.tokens == x.tokens and y.pos == x.pos and (y.head, y.tail) == (x.head, x.tail)
    assert y.relation == "place_of_death"


def test_birth_sentence_becomes_death_sentence(life_store):
    x = sentence(["jessica", "born", "in", "native", "manchester"], [OTHER, VERB, OTHER, ADJ, OTHER])
    y = translate_sentence(x, BIRTH, DEATH, life_store)
    assert y.tokens == ("jessica", "died", "in", "buried", "manchester")


def test_mismatched_superclasses_rejected(life_store):
    x = sentence(["jessica", "born", "manchester"], [OTHER, VERB, OTHER])
    with pytest.raises(DataError):
        translate_sentence(x, BIRTH, COUNTRY, life_store)


def test_single_noun_equals_oracle_argmax():
    vocab = {"alpha": [1.0, 0.0, 0.0], "beta": [0.0, 1.0, 0.0], "gamma": [0.6, 0.8, 0.0],
             "delta": [0.0, 0.6, 0.8], "omega": [0.5, -0.5, 0.7071]}
    store = VectorStore.from_dict(vocab)
    unit = {w: list(store.vector(w)) for w in store.words}
    src = RelationMeta("alpha", "s", "h", "t")
    dst = RelationMeta("beta", "s", "h", "t")
    for word in ("gamma", "delta", "omega"):
        x = TaggedSentence(["x", word, "y"], [OTHER, NOUN, OTHER], (0, 1), (2, 3), "alpha")
        y = translate_sentence(x, src, dst, store)
        assert y.tokens[1] == brute_cos_mul(unit, word, "alpha", "beta")[0][0]


@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_length_spans_and_pos_preserved(data):
    rng = np.random.default_rng(data.draw(st.integers(0, 10**6)))
    words = [f"v{i}" for i in range(25)]
    store = VectorStore.from_dict({w: rng.normal(size=6) for w in words + ["rs", "ru"]})
    n = data.draw(st.integers(2, 12))
    toks = [data.draw(st.sampled_from(words + ["oov"])) for _ in range(n)]
    pos = [data.draw(st.sampled_from([NOUN, VERB, ADJ, ADV, OTHER])) for _ in range(n)]
    h = data.draw(st.integers(0, n - 2))
    x = TaggedSentence(toks, pos, (h, h + 1), (n - 1, n), "rs")
    y = translate_sentence(x, RelationMeta("rs", "a", "b", "c"), RelationMeta("ru", "a", "b", "c"), store)
    assert len(y.tokens) == n and y.pos == x.pos
    assert (y.head, y.tail) == (x.head, x.tail)
    for a, b, p in zip(x.tokens, y.tokens, x.pos):
        if p not in CONTENT_POS or a == "oov":
            assert a == b


def _group(rel, count):
    return [TaggedSentence(["jessica", "born", "manchester"], [OTHER, VERB, OTHER], (0, 1), (2, 3),
                           rel, id=f"{rel}-{i}") for i in range(count)]


def test_counts_one_source(life_store):
    out, stats = build_augmented_set(_group("place_of_birth", 10), [BIRTH, DEATH],
                                     ["place_of_death"], 10, seed=1, store=life_store)
    assert len(out) == 10 and all(s.relation == "place_of_death" for s in out)
    assert stats.uncoverable == [] and stats.duplication == {}


def test_two_sources_reproducible(life_store):
    other = RelationMeta("place_of_residence", "location", "person", "location")
    store = VectorStore.from_dict({**{w: life_store.vector(w) for w in life_store.words},
                                   "residence": [0.0, 0.3, 0.3, 0.0, 0.9]})
    corpus = _group("place_of_birth", 10) + _group("place_of_residence", 10)
    a, _ = build_augmented_set(corpus, [BIRTH, DEATH, other], ["place_of_death"], 10, 5, store)
    b, _ = build_augmented_set(corpus, [BIRTH, DEATH, other], ["place_of_death"], 10, 5, store)
    assert len(a) == 10 and a == b


def test_short_pool_is_topped_up(life_store):
    out, stats = build_augmented_set(_group("place_of_birth", 4), [BIRTH, DEATH],
                                     ["place_of_death"], 10, seed=1, store=life_store)
    assert len(out) == 10
    assert stats.duplication["place_of_death"] == pytest.approx(0.6)


def test_uncoverable(life_store):
    out, stats = build_augmented_set(_group("place_of_birth", 5), [BIRTH, COUNTRY],
                                     ["country"], 10, seed=1, store=life_store)
    assert out == [] and stats.uncoverable == ["country"]
