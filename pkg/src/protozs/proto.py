"""Prototypical-network training and zero-shot inference.

Each relation is represented by the mean embedding of its instances; a query
gets p(r) proportional to exp(-||q - c_r||). Seen relations take their
prototypes from real training sentences, unseen ones from augmented sentences.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .encoder import backward, featurize, forward
from .errors import DataError, NumericalError
from .prompt import query_prompt, support_prompt

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Prototype:
    relation: str
    vector: np.ndarray
    support_count: int

    def to_record(self):
        return {"relation": self.relation, "vector": [float(x) for x in self.vector],
                "support_count": self.support_count}

    @classmethod
    def from_record(cls, rec):
        return cls(rec["relation"], np.asarray(rec["vector"], dtype=np.float64),
                   int(rec["support_count"]))


def prototypes(groups):
    """One mean-vector prototype per relation, sorted by relation name.

    ``groups`` maps relation -> sequence of embeddings (arrays or objects with
    a ``vector`` attribute).
    """
    out = []
    for rel in sorted(groups):
        members = [np.asarray(getattr(v, "vector", v), dtype=np.float64) for v in groups[rel]]
        if not members:
            raise DataError(f"relation {rel!r} has no instances")
        out.append(Prototype(rel, np.mean(members, axis=0), len(members)))
    return out


def _log_softmax(logits):
    m = logits.max(axis=-1, keepdims=True)
    shifted = logits - m
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def distances(queries, centers):
    """Euclidean distance matrix (N, R)."""
    diff = queries[:, None, :] - centers[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def classify_matrix(queries, centers):
    """Row-wise softmax of negative distances, shape (N, R)."""
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    if queries.shape[1] != centers.shape[1]:
        raise ValueError(f"query width {queries.shape[1]} != prototype width {centers.shape[1]}")
    return np.exp(_log_softmax(-distances(queries, centers)))


def classify(query, protos):
    """Probability of each prototype's relation for one query embedding."""
    if not protos:
        raise ValueError("need at least one prototype")
    q = np.asarray(getattr(query, "vector", query), dtype=np.float64)
    probs = classify_matrix(q[None, :], np.array([p.vector for p in protos]))[0]
    return {p.relation: float(pr) for p, pr in zip(protos, probs)}


def episode_loss(queries, query_labels, support, support_labels, n_classes):
    """Mean negative log-probability of the gold relation for each query.

    Prototypes are the means of ``support`` rows per label; labels are ints in
    ``range(n_classes)``. Only classes with support take part, and queries
    whose gold class has no support are ignored.
    Returns ``(loss, dL/dqueries, dL/dsupport)``.
    """
    query_labels = np.asarray(query_labels)
    support_labels = np.asarray(support_labels)
    present = np.unique(support_labels)
    slot = -np.ones(n_classes, dtype=np.int64)
    slot[present] = np.arange(present.size)
    counts = np.bincount(support_labels, minlength=n_classes)[present]
    C = np.zeros((present.size, support.shape[1]))
    np.add.at(C, slot[support_labels], support)
    C /= counts[:, None]

    active = slot[query_labels] >= 0
    dQ = np.zeros_like(queries)
    dS = np.zeros_like(support)
    if not np.any(active):
        return 0.0, dQ, dS
    q = queries[active]
    gold = slot[query_labels[active]]
    diff = q[:, None, :] - C[None, :, :]
    d = np.sqrt((diff * diff).sum(axis=-1))
    logp = _log_softmax(-d)
    n = q.shape[0]
    loss = -logp[np.arange(n), gold].mean()

    y = np.zeros_like(d)
    y[np.arange(n), gold] = 1.0
    g = (y - np.exp(logp)) / n  # dL/dd
    unit = np.divide(diff, d[:, :, None], out=np.zeros_like(diff), where=d[:, :, None] > 0)
    weighted = g[:, :, None] * unit
    dQ[active] = weighted.sum(axis=1)
    dC = -weighted.sum(axis=0)
    dS += (dC / counts[:, None])[slot[support_labels]]
    return float(loss), dQ, dS


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 10
    batch_size: int = 4
    seed: int = 7
    support_per_class: int = 5
    episodic: bool = True
    use_prompts: bool = True
    lr_grid: tuple = (1e-1, 1e-2, 1e-3, 1e-4)

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.support_per_class < 1:
            raise ValueError("support_per_class must be >= 1")


class InstanceTable:
    """Pre-windowed token features and prompts for a list of sentences."""

    def __init__(self, sentences, vlabels, params, store, catalog=None, use_prompts=True):
        metas = {m.name: m for m in catalog or ()}
        self.sentences = list(sentences)
        self.features = [featurize(s, store, params) for s in self.sentences]
        width = 3 * store.dim
        self.query_prompts = np.zeros((len(self.sentences), width))
        self.support_prompts = np.zeros((len(self.sentences), width))
        if use_prompts:
            for i, s in enumerate(self.sentences):
                self.query_prompts[i] = query_prompt(s, store).vector
                if vlabels is not None and s.relation in vlabels:
                    self.support_prompts[i] = support_prompt(
                        s, vlabels[s.relation], store, metas.get(s.relation)).vector

    def __len__(self):
        return len(self.sentences)

    def encode(self, rows, params, chunk=512):
        rows = list(rows)
        out = np.zeros((len(rows), params.hidden_dim))
        for start in range(0, len(rows), chunk):
            part = rows[start:start + chunk]
            out[start:start + len(part)], _ = forward([self.features[i] for i in part], params)
        return out


def _sgd_step(params, table, queries, q_labels, support, s_labels, n_classes, lr):
    rows = list(queries) + list(support)
    H, cache = forward([table.features[i] for i in rows], params)
    nq = len(queries)
    Q = np.hstack([H[:nq], table.query_prompts[queries]])
    S = np.hstack([H[nq:], table.support_prompts[support]])
    loss, dQ, dS = episode_loss(Q, q_labels, S, s_labels, n_classes)
    if not np.isfinite(loss):
        raise NumericalError(f"non-finite training loss {loss}")
    hid = params.hidden_dim
    dH = np.vstack([dQ[:, :hid], dS[:, :hid]])
    d_filters, d_bias = backward(dH, cache, params)
    if lr:
        params.filters -= lr * d_filters
        params.bias -= lr * d_bias
    if not params.is_finite():
        raise NumericalError("parameters became non-finite; lower the learning rate")
    return loss


def train(corpus, vlabels, params, store, config, catalog=None):
    """SGD on the prototypical loss. Returns new params with ``history`` = per-epoch mean loss.

    Episodic mode: shuffled mini-batches of queries; prototypes come from up to
    ``support_per_class`` sampled instances per relation that are not in the
    batch. Full-batch mode (``episodic=False``): batches in corpus order, and
    each batch is both the query and the support set.
    """
    relations = sorted({s.relation for s in corpus})
    if len(relations) < 2:
        raise DataError("training needs at least two relations")
    params = params.copy()
    params.history = []
    table = InstanceTable(corpus, vlabels, params, store, catalog, config.use_prompts)
    labels = np.array([relations.index(s.relation) for s in corpus])
    pools = [np.flatnonzero(labels == r) for r in range(len(relations))]
    rng = np.random.default_rng(config.seed)
    n = len(corpus)
    for epoch in range(config.epochs):
        order = rng.permutation(n) if config.episodic else np.arange(n)
        losses = []
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            if config.episodic:
                in_batch = np.zeros(n, dtype=bool)
                in_batch[batch] = True
                support = []
                for pool in pools:
                    free = pool[~in_batch[pool]]
                    if free.size:
                        k = min(config.support_per_class, free.size)
                        support.extend(np.sort(rng.choice(free, k, replace=False)))
                support = np.array(support, dtype=np.int64)
            else:
                support = batch
            loss = _sgd_step(params, table, batch, labels[batch], support, labels[support],
                             len(relations), config.learning_rate)
            losses.append(loss)
        params.history.append(float(np.mean(losses)))
        logger.info("epoch %d/%d loss %.5f", epoch + 1, config.epochs, params.history[-1])
    return params


def relation_prototypes(sentences, vlabels, params, store, catalog=None, use_prompts=True):
    """Prototypes of every relation in ``sentences`` from their support embeddings."""
    table = InstanceTable(sentences, vlabels, params, store, catalog, use_prompts)
    H = table.encode(range(len(table)), params)
    emb = np.hstack([H, table.support_prompts])
    groups = {}
    for i, s in enumerate(table.sentences):
        groups.setdefault(s.relation, []).append(emb[i])
    return prototypes(groups)


def unseen_prototypes(augmented, vlabels, params, store, catalog=None, use_prompts=True):
    """Prototypes of unseen relations built from their augmented instances."""
    if not augmented:
        raise DataError("augmented corpus is empty")
    return relation_prototypes(augmented, vlabels, params, store, catalog, use_prompts)


def embed_queries(sentences, params, store, use_prompts=True):
    table = InstanceTable(sentences, None, params, store, use_prompts=use_prompts)
    return np.hstack([table.encode(range(len(table)), params), table.query_prompts])


def predict(sentences, protos, params, store, use_prompts=True):
    """``(predicted relation, {relation: probability})`` per sentence."""
    if not protos:
        raise DataError("no prototypes to classify against")
    Q = embed_queries(sentences, params, store, use_prompts)
    P = classify_matrix(Q, np.array([p.vector for p in protos]))
    names = [p.relation for p in protos]
    out = []
    for row in P:
        out.append((names[int(np.argmax(row))], {r: float(x) for r, x in zip(names, row)}))
    return out


def select_learning_rate(corpus, vlabels, params, store, config, catalog=None, grid=None):
    """Pick the learning rate from ``grid`` with the lowest final training loss."""
    best = None
    for lr in grid or config.lr_grid:
        cfg = TrainConfig(**{**config.__dict__, "learning_rate": lr})
        try:
            loss = train(corpus, vlabels, params, store, cfg, catalog).history[-1]
        except NumericalError:
            continue
        if best is None or loss < best[1]:
            best = (lr, loss)
    if best is None:
        raise NumericalError("every learning rate in the grid diverged")
    return best[0]
