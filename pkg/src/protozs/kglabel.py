"""Knowledge-graph virtual labels.

A relation's virtual label is a weighted average of word vectors. Candidate
words must lie within cosine ``tau`` of the relation name (this is also what
removes noisy, loosely related words). Each candidate is then weighted by how
strongly it is tied in the graph to five node sets describing the relation:
its name tokens, its super-class, its description words and the two entity
super-classes.
"""

import csv
import logging
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .text import CONTENT_POS, graph_term, split_phrase, tag

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class KGraph:
    """Undirected adjacency over normalised graph terms."""

    adjacency: dict
    malformed: int = 0

    @classmethod
    def from_edges(cls, edges, malformed=0):
        adj = {}
        for a, b in edges:
            a, b = graph_term(a), graph_term(b)
            if not a or not b or a == b:
                continue
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
        return cls({k: frozenset(v) for k, v in adj.items()}, malformed)

    @property
    def node_count(self):
        return len(self.adjacency)

    @property
    def edge_count(self):
        return sum(len(v) for v in self.adjacency.values()) // 2

    def __contains__(self, term):
        return term in self.adjacency

    def neighbors(self, term):
        return self.adjacency.get(term, frozenset())

    def ball(self, term, k):
        """Nodes within ``k`` hops of ``term``, excluding ``term`` itself."""
        if term not in self.adjacency:
            return set()
        seen = {term}
        frontier = {term}
        for _ in range(k):
            frontier = {n for t in frontier for n in self.adjacency[t]} - seen
            if not frontier:
                break
            seen |= frontier
        seen.discard(term)
        return seen


def _concept_term(field):
    # ConceptNet URIs look like /c/en/word/n/...
    field = field.strip()
    if field.startswith("/c/"):
        parts = field.split("/")
        field = parts[3] if len(parts) > 3 else ""
    return graph_term(field)


def load_graph(path):
    """Read ``source,relation_type,target`` rows into a symmetric graph."""
    edges = []
    malformed = 0
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            for row in csv.reader(fh):
                if not row:
                    continue
                if len(row) != 3:
                    malformed += 1
                    continue
                src, _, dst = row
                if (src.strip().lower(), dst.strip().lower()) == ("source", "target"):
                    continue
                a, b = _concept_term(src), _concept_term(dst)
                if not a or not b:
                    malformed += 1
                    continue
                edges.append((a, b))
    except OSError as exc:
        raise DataError(f"cannot read graph {path}: {exc}") from exc
    if malformed:
        logger.warning("%s: skipped %d malformed rows", path, malformed)
    graph = KGraph.from_edges(edges, malformed)
    logger.info("graph %s: %d nodes, %d edges", path, graph.node_count, graph.edge_count)
    return graph


@dataclass(frozen=True)
class HopFeatures:
    v1: int
    v2: tuple
    v3: tuple
    v_ave: tuple

    @property
    def hops(self):
        return len(self.v2)

    def flat(self, v3_scale=None):
        v3 = np.asarray(self.v3, dtype=np.float64)
        if v3_scale is not None:
            scale = np.asarray(v3_scale, dtype=np.float64)
            v3 = np.divide(v3, scale, out=np.zeros_like(v3), where=scale > 0)
        return np.concatenate([[float(self.v1)], np.asarray(self.v2, dtype=np.float64), v3,
                               np.asarray(self.v_ave, dtype=np.float64)])


def relation_node_sets(meta):
    """The five term sets: name tokens, super-class, description, S(e1), S(e2)."""
    desc = []
    for phrase in meta.description:
        toks = split_phrase(phrase)
        desc.extend(t for t, p in zip(toks, tag(toks)) if p in CONTENT_POS)
    return (frozenset(split_phrase(meta.name)) | {graph_term(meta.name)},
            frozenset({graph_term(meta.super_class)}),
            frozenset(desc),
            frozenset({graph_term(meta.head_super)}),
            frozenset({graph_term(meta.tail_super)}))


def hop_features(word, node_set, graph, K):
    """Graph evidence tying ``word`` to ``node_set`` within 1..K hops.

    v1 flags ``word`` itself being a graph node inside the set; for each hop
    radius k, v3[k] counts set members within k hops, v2[k] flags any, and
    v_ave[k] is the fraction of the k-hop neighbourhood inside the set.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    term = graph_term(word)
    if term not in graph:
        zero = (0,) * K
        return HopFeatures(0, zero, zero, (0.0,) * K)
    v1 = int(term in node_set)
    v2, v3, v_ave = [], [], []
    for k in range(1, K + 1):
        ball = graph.ball(term, k)
        hits = len(ball & node_set)
        v2.append(int(hits > 0))
        v3.append(hits)
        v_ave.append(hits / len(ball) if ball else 0.0)
    return HopFeatures(v1, tuple(v2), tuple(v3), tuple(v_ave))


def word_weight(features, v3_scale=None):
    """Mean of the flattened feature vector(s).

    ``features`` is one HopFeatures or a sequence of them (one per node set,
    concatenated). ``v3_scale`` holds the matching per-hop maxima used to bring
    neighbour counts into [0, 1]; without it v3 is taken as already scaled.
    """
    if isinstance(features, HopFeatures):
        features = [features]
        v3_scale = None if v3_scale is None else [v3_scale]
    parts = [f.flat(None if v3_scale is None else v3_scale[i]) for i, f in enumerate(features)]
    flat = np.concatenate(parts)
    return float(flat.mean()) if flat.size else 0.0


def candidate_words(meta, store, tau):
    """Vocabulary words with cosine >= tau to the relation name, plus its tokens."""
    target = store.phrase_vector(meta.name)
    sims = store.matrix @ target
    picked = {store.words[i] for i in np.flatnonzero(sims >= tau - 1e-12)}
    picked.update(store.phrase_tokens(meta.name))
    key = store.resolve(meta.name)
    if key is not None:
        picked.add(key)
    return picked


@dataclass(frozen=True, eq=False)
class VirtualLabel:
    relation: str
    vector: np.ndarray
    components: tuple

    def raw_vector(self, store):
        """Weighted average of component embeddings before normalisation."""
        weights = np.array([a for _, a in self.components])
        mat = np.array([store.vector(w) for w, _ in self.components])
        return weights @ mat / weights.sum()

    def to_record(self):
        return {"vector": [float(x) for x in self.vector],
                "components": [[w, float(a)] for w, a in self.components]}

    @classmethod
    def from_record(cls, relation, rec):
        return cls(relation, np.asarray(rec["vector"], dtype=np.float64),
                   tuple((w, float(a)) for w, a in rec["components"]))


def virtual_label(meta, store, graph, tau=0.6, K=1, n=5):
    """Build the virtual label embedding for one relation."""
    cands = sorted(candidate_words(meta, store, tau))
    if not cands:
        raise DataError(f"no candidate words for {meta.name!r}")
    sets = relation_node_sets(meta)
    feats = {w: [hop_features(w, s, graph, K) for s in sets] for w in cands}
    scale = [np.max([feats[w][i].v3 for w in cands], axis=0) for i in range(len(sets))]
    weights = {w: word_weight(feats[w], scale) for w in cands}
    ranked = sorted(cands, key=lambda w: (-weights[w], w))[:n]
    comps = tuple((w, weights[w]) for w in ranked if weights[w] > 0)
    name_vec = store.phrase_vector(meta.name)
    if not comps:
        logger.warning("all candidates of %r have zero weight; using the name embedding", meta.name)
        return VirtualLabel(meta.name, name_vec.copy(), ())
    alpha = np.array([a for _, a in comps])
    mat = np.array([store.vector(w) for w, _ in comps])
    avg = alpha @ mat / alpha.sum()
    norm = np.linalg.norm(avg)
    if norm == 0:
        logger.warning("virtual label of %r cancels out; using the name embedding", meta.name)
        return VirtualLabel(meta.name, name_vec.copy(), ())
    return VirtualLabel(meta.name, avg / norm, comps)


def virtual_labels(catalog, store, graph, tau=0.6, K=1, n=5):
    return {m.name: virtual_label(m, store, graph, tau=tau, K=K, n=n) for m in catalog}
