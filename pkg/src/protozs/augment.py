"""Analogy-based sentence generation for relations with no training data.

A sentence labelled with a seen relation is rewritten word by word into a
sentence for an unseen relation of the same super-class signature: every
content word w is replaced by the best 3CosMul answer to
``w : r_seen :: ? : r_unseen``.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .embeddings import EPSILON, cos_mul_3
from .errors import DataError
from .text import CONTENT_POS

logger = logging.getLogger(__name__)


def superclass_match(source, target):
    """True iff relation, head and tail super-classes all agree (case-insensitive)."""
    return (source.super_class.strip().lower() == target.super_class.strip().lower()
            and source.head_super.strip().lower() == target.head_super.strip().lower()
            and source.tail_super.strip().lower() == target.tail_super.strip().lower())


@dataclass
class AugmentStats:
    translated: int = 0
    out_of_vocabulary: int = 0
    uncoverable: list = field(default_factory=list)
    duplication: dict = field(default_factory=dict)


class Translator:
    """Caches 3CosMul answers per (word, source, target) triple."""

    def __init__(self, store, eps=EPSILON, stats=None):
        self.store = store
        self.eps = eps
        self.stats = stats if stats is not None else AugmentStats()
        self._cache = {}

    def word(self, word, source_name, target_name):
        key = (word, source_name, target_name)
        if key not in self._cache:
            best = cos_mul_3(word, source_name, target_name, self.store, k=1, eps=self.eps)
            self._cache[key] = best[0][0]
        return self._cache[key]

    def sentence(self, x, source, target):
        if not superclass_match(source, target):
            raise DataError(f"super-classes of {source.name!r} and {target.name!r} differ")
        for name in (source.name, target.name):
            if not self.store.phrase_tokens(name) and self.store.resolve(name) is None:
                raise DataError(f"relation name {name!r} not in vector store")
        out = []
        for tok, pos in zip(x.tokens, x.pos):
            if pos not in CONTENT_POS:
                out.append(tok)
                continue
            key = self.store.resolve(tok)
            if key is None:
                self.stats.out_of_vocabulary += 1
                out.append(tok)
                continue
            out.append(self.word(key, source.name, target.name))
            self.stats.translated += 1
        return x.with_relation(target.name, tokens=tuple(out),
                               head_super=x.head_super or target.head_super,
                               tail_super=x.tail_super or target.tail_super)


def translate_sentence(x, source, target, store, eps=EPSILON):
    """Rewrite ``x`` (labelled ``source``) into a sentence labelled ``target``.

    Tokens tagged NOUN/VERB/ADJ/ADV and present in ``store`` are replaced;
    everything else, and both entity spans' positions, carry over unchanged.
    """
    return Translator(store, eps=eps).sentence(x, source, target)


def build_augmented_set(corpus, catalog, unseen, per_relation_count, seed, store,
                        eps=EPSILON):
    """Balanced augmented training data for every relation in ``unseen``.

    Each unseen relation draws from the translations of every sentence of every
    seen relation with a matching super-class signature. Exactly
    ``per_relation_count`` are kept: sampled without replacement when enough
    exist, otherwise all of them topped up by sampling with replacement.

    Returns ``(sentences, stats)``; relations with no matching seen relation are
    listed in ``stats.uncoverable``.
    """
    if per_relation_count < 1:
        raise ValueError("per_relation_count must be positive")
    metas = {m.name: m for m in catalog}
    unseen = set(unseen)
    missing = sorted(unseen - metas.keys())
    if missing:
        raise DataError(f"unseen relations missing from catalog: {missing}")
    by_rel = {}
    for s in corpus:
        if s.relation in unseen:
            continue
        by_rel.setdefault(s.relation, []).append(s)
    seen_names = sorted(r for r in by_rel if r in metas)

    stats = AugmentStats()
    translator = Translator(store, eps=eps, stats=stats)
    rng = np.random.default_rng(seed)
    out = []
    for target_name in sorted(unseen):
        target = metas[target_name]
        pool = [(metas[r], s) for r in seen_names if superclass_match(metas[r], target)
                for s in by_rel[r]]
        if not pool:
            stats.uncoverable.append(target_name)
            logger.warning("no seen relation matches the super-classes of %r", target_name)
            continue
        if len(pool) >= per_relation_count:
            picks = np.sort(rng.choice(len(pool), per_relation_count, replace=False))
        else:
            extra = rng.choice(len(pool), per_relation_count - len(pool), replace=True)
            picks = np.concatenate([np.arange(len(pool)), np.sort(extra)])
            stats.duplication[target_name] = (per_relation_count - len(pool)) / per_relation_count
            logger.info("%s: %d candidates for %d slots, duplication rate %.3f", target_name,
                        len(pool), per_relation_count, stats.duplication[target_name])
        for j, i in enumerate(picks):
            source, x = pool[int(i)]
            y = translator.sentence(x, source, target)
            out.append(y.with_relation(target_name, id=f"aug-{target_name}-{j}"))
    if stats.out_of_vocabulary:
        logger.info("copied %d out-of-vocabulary content words verbatim", stats.out_of_vocabulary)
    return out, stats
