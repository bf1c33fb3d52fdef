"""Prompt embeddings: [E(head super-class) | virtual label | E(tail super-class)].

The template "head is [MASK] of tail" lives purely in embedding space; the
function words contribute nothing. For a labelled instance the [MASK] slot is
the relation's virtual label. For a query the relation is unknown, so the slot
is filled from the sentence itself (see :func:`mask_fill`).
"""

from dataclasses import dataclass

import numpy as np

from .text import CONTENT_POS


@dataclass(frozen=True, eq=False)
class PromptEmbedding:
    vector: np.ndarray
    dim: int

    @property
    def head_block(self):
        return self.vector[:self.dim]

    @property
    def label_block(self):
        return self.vector[self.dim:2 * self.dim]

    @property
    def tail_block(self):
        return self.vector[2 * self.dim:]


def _super_vector(word, store):
    if not word:
        return np.zeros(store.dim)
    return store.phrase_vector(word)


def prompt_embedding(head_super, vlabel, tail_super, store):
    """Concatenate head super-class, virtual label and tail super-class blocks.

    ``vlabel`` is a VirtualLabel or a bare vector of the store's dimension.
    An empty super-class string yields a zero block.
    """
    mid = getattr(vlabel, "vector", vlabel)
    mid = np.asarray(mid, dtype=np.float64)
    if mid.shape != (store.dim,):
        raise ValueError(f"virtual label has shape {mid.shape}, expected ({store.dim},)")
    vec = np.concatenate([_super_vector(head_super, store), mid, _super_vector(tail_super, store)])
    return PromptEmbedding(vec, store.dim)


def mask_fill(sentence, store):
    """Unit mean of the sentence's in-vocabulary content words outside the entities.

    Stands in for the contextual [MASK] state when no label is known; zero if
    the sentence has no usable content word.
    """
    rows = []
    for i, (tok, pos) in enumerate(zip(sentence.tokens, sentence.pos)):
        if pos not in CONTENT_POS or sentence.in_entity(i):
            continue
        key = store.resolve(tok)
        if key is not None:
            rows.append(store.index[key])
    if not rows:
        return np.zeros(store.dim)
    v = store.matrix[rows].mean(axis=0)
    n = np.linalg.norm(v)
    return v / n if n > 0 else np.zeros(store.dim)


def zero_prompt(store):
    return PromptEmbedding(np.zeros(3 * store.dim), store.dim)


def support_prompt(sentence, vlabel, store, meta=None):
    """Prompt of a labelled instance; entity super-classes default to the relation's."""
    head = sentence.head_super or (meta.head_super if meta else "")
    tail = sentence.tail_super or (meta.tail_super if meta else "")
    return prompt_embedding(head, vlabel, tail, store)


def query_prompt(sentence, store):
    """Prompt of an unlabelled query: the [MASK] slot is :func:`mask_fill`."""
    return prompt_embedding(sentence.head_super, mask_fill(sentence, store),
                            sentence.tail_super, store)
