"""Static word vectors, cosine similarity and the 3CosMul analogy search."""

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, UnknownWordError
from .text import lemmatize, split_phrase

logger = logging.getLogger(__name__)

EPSILON = 1e-3


@dataclass(frozen=True, eq=False)
class VectorStore:
    """Immutable word -> unit vector table.

    ``matrix`` rows are L2-normalised and read-only; ``words[i]`` labels row i.
    """

    words: tuple
    matrix: np.ndarray
    skipped: int = 0
    index: dict = field(init=False, repr=False)
    _lex_rank: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.matrix.ndim != 2 or self.matrix.shape[0] != len(self.words):
            raise DataError("matrix shape does not match word list")
        self.matrix.setflags(write=False)
        object.__setattr__(self, "index", {w: i for i, w in enumerate(self.words)})
        rank = np.empty(len(self.words), dtype=np.int64)
        rank[np.argsort(np.array(self.words, dtype=object), kind="stable")] = np.arange(len(self.words))
        object.__setattr__(self, "_lex_rank", rank)

    @classmethod
    def from_dict(cls, vectors):
        """Build a store from ``{word: vector}``, normalising every vector."""
        words = tuple(vectors)
        if not words:
            raise DataError("empty vector table")
        mat = np.array([np.asarray(vectors[w], dtype=np.float64) for w in words])
        norms = np.linalg.norm(mat, axis=1)
        if np.any(norms == 0):
            raise DataError("zero vector in table")
        return cls(words, mat / norms[:, None])

    @property
    def dim(self):
        return self.matrix.shape[1]

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.index

    def get(self, word):
        """Row for ``word`` or ``None``; never a silent zero vector."""
        i = self.index.get(word)
        return None if i is None else self.matrix[i]

    def resolve(self, token):
        """Vocabulary form of a surface token: lowercased, then lemmatised."""
        low = token.lower()
        if low in self.index:
            return low
        if token in self.index:
            return token
        lemma = lemmatize(low)
        if lemma in self.index:
            return lemma
        return None

    def vector(self, word):
        key = self.resolve(word)
        if key is None:
            raise UnknownWordError(f"word not in vocabulary: {word!r}")
        return self.matrix[self.index[key]]

    def phrase_tokens(self, phrase):
        """In-vocabulary vocabulary forms of a relation name or phrase."""
        out = []
        for tok in split_phrase(phrase):
            key = self.resolve(tok)
            if key is not None and key not in out:
                out.append(key)
        return out

    def phrase_vector(self, phrase):
        """Mean of the in-vocabulary token vectors of ``phrase``, renormalised."""
        key = self.resolve(phrase)
        if key is not None:
            return self.matrix[self.index[key]]
        toks = self.phrase_tokens(phrase)
        if not toks:
            raise UnknownWordError(f"no token of {phrase!r} is in the vocabulary")
        v = self.matrix[[self.index[t] for t in toks]].mean(axis=0)
        n = np.linalg.norm(v)
        if n == 0:
            raise UnknownWordError(f"phrase {phrase!r} averages to a zero vector")
        return v / n

    def lex_rank(self):
        return self._lex_rank


def load_vectors(path, expected_dim=None):
    """Read a word2vec-style text file (``word v1 ... vd`` per line).

    An optional ``count dim`` header line is accepted. Rows that fail to parse
    and zero vectors are skipped and counted; a row whose width disagrees with
    the established dimension is an error.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read vectors file {path}: {exc}") from exc

    dim = expected_dim
    words, rows = [], []
    seen = set()
    skipped = zeros = 0
    for lineno, line in enumerate(lines, 1):
        parts = line.split()
        if not parts:
            continue
        if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
            header_dim = int(parts[1])
            if dim is not None and header_dim != dim:
                raise DataError(f"{path}: header dim {header_dim} != expected {dim}")
            dim = header_dim
            continue
        word, raw = parts[0], parts[1:]
        try:
            vec = np.array([float(x) for x in raw], dtype=np.float64)
        except ValueError:
            skipped += 1
            continue
        if vec.size == 0 or not np.all(np.isfinite(vec)):
            skipped += 1
            continue
        if dim is None:
            dim = vec.size
        elif vec.size != dim:
            raise DataError(f"{path}:{lineno}: row has {vec.size} values, expected {dim}")
        norm = np.linalg.norm(vec)
        if norm == 0:
            zeros += 1
            continue
        if word in seen:
            skipped += 1
            continue
        seen.add(word)
        words.append(word)
        rows.append(vec / norm)

    if zeros:
        logger.warning("%s: skipped %d zero vectors", path, zeros)
    if skipped:
        logger.warning("%s: skipped %d malformed rows", path, skipped)
    if not words:
        raise DataError(f"{path}: no usable vectors")
    return VectorStore(tuple(words), np.vstack(rows), skipped=skipped + zeros)


def cosine(u, v):
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ValueError("cosine of a zero-norm vector")
    return float(np.clip(u @ v / (nu * nv), -1.0, 1.0))


def analogy_scores(w_s, r_s, r_u, store, eps=EPSILON, shifted=True):
    """3CosMul score of every vocabulary row for the query (w_s, r_s, r_u).

    score(x) = cos(x, r_u) * cos(x, w_s) / (cos(x, r_s) + eps).  With
    ``shifted`` each cosine is first mapped to [0, 1] as (1 + cos) / 2, which
    keeps the denominator at least ``eps`` and the ranking well defined.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    m = store.matrix
    c_u = m @ store.phrase_vector(r_u)
    c_w = m @ store.vector(w_s)
    c_s = m @ store.phrase_vector(r_s)
    if shifted:
        c_u, c_w, c_s = (1 + c_u) / 2, (1 + c_w) / 2, (1 + c_s) / 2
    return c_u * c_w / (c_s + eps)


def cos_mul_3(w_s, r_s, r_u, store, k=10, exclusions=(), eps=EPSILON, shifted=True):
    """Top-``k`` analogy candidates for ``w_s : r_s :: ? : r_u``.

    The query word and every token of both relation names are never returned.
    Equal scores are ordered lexicographically.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    scores = analogy_scores(w_s, r_s, r_u, store, eps=eps, shifted=shifted)
    banned = set(exclusions)
    banned.add(store.resolve(w_s))
    banned.update(store.phrase_tokens(r_s))
    banned.update(store.phrase_tokens(r_u))
    for name in (r_s, r_u):
        key = store.resolve(name)
        if key is not None:
            banned.add(key)
    keep = np.ones(len(store), dtype=bool)
    for w in banned:
        i = store.index.get(w)
        if i is not None:
            keep[i] = False
    idx = np.flatnonzero(keep)
    if idx.size == 0:
        raise DataError("empty candidate pool after exclusions")
    order = np.lexsort((store.lex_rank()[idx], -scores[idx]))[:k]
    return [(store.words[idx[j]], float(scores[idx[j]])) for j in order]
