"""Convolutional sentence encoder with hand-written backpropagation.

h = max_t ReLU(W . [x_{t-(n-1)/2} ; ... ; x_{t+(n-1)/2}] + b)

Token vectors come from a static :class:`~protozs.embeddings.VectorStore`;
out-of-vocabulary tokens and the window's boundary padding are zero vectors.
No position embeddings are used.
"""

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, NumericalError

CHECKPOINT_VERSION = 1


@dataclass(eq=False)
class ModelParams:
    filters: np.ndarray  # (hidden_dim, window * embed_dim)
    bias: np.ndarray     # (hidden_dim,)
    window: int
    embed_dim: int
    max_len: int = 128
    history: list = field(default_factory=list)

    def __post_init__(self):
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError(f"window must be odd and positive, got {self.window}")
        self.filters = np.asarray(self.filters, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.filters.shape != (self.bias.size, self.window * self.embed_dim):
            raise ValueError(f"filters shape {self.filters.shape} inconsistent with "
                             f"hidden={self.bias.size}, window={self.window}, embed={self.embed_dim}")

    @property
    def hidden_dim(self):
        return self.bias.size

    def copy(self):
        return ModelParams(self.filters.copy(), self.bias.copy(), self.window,
                           self.embed_dim, self.max_len, list(self.history))

    def is_finite(self):
        return bool(np.all(np.isfinite(self.filters)) and np.all(np.isfinite(self.bias)))


def init_params(embed_dim, hidden_dim=300, window=3, seed=0, max_len=128):
    """Glorot-uniform filters, zero bias."""
    fan_in = window * embed_dim
    limit = np.sqrt(6.0 / (fan_in + hidden_dim))
    rng = np.random.default_rng(seed)
    filters = rng.uniform(-limit, limit, size=(hidden_dim, fan_in))
    return ModelParams(filters, np.zeros(hidden_dim), window, embed_dim, max_len)


def token_matrix(sentence, store, max_len=128):
    """(L, D) token vectors, truncated to ``max_len``; unknown tokens are zero."""
    toks = sentence.tokens[:max_len]
    out = np.zeros((len(toks), store.dim))
    for i, tok in enumerate(toks):
        key = store.resolve(tok)
        if key is not None:
            out[i] = store.matrix[store.index[key]]
    return out


def windows(tokens, window):
    """Stack each position's zero-padded centred window into one row: (L, window*D)."""
    half = (window - 1) // 2
    L, D = tokens.shape
    padded = np.vstack([np.zeros((half, D)), tokens, np.zeros((half, D))])
    return np.hstack([padded[j:j + L] for j in range(window)])


def featurize(sentence, store, params):
    if not sentence.tokens:
        raise DataError("cannot encode an empty sentence")
    if store.dim != params.embed_dim:
        raise DataError(f"store dim {store.dim} != encoder embed dim {params.embed_dim}")
    return windows(token_matrix(sentence, store, params.max_len), params.window)


@dataclass(eq=False)
class _Cache:
    U: np.ndarray      # (B, Lmax, window*D)
    idx: np.ndarray    # (B, H) winning position per channel
    z_max: np.ndarray  # (B, H) pre-activation at the winning position


def forward(features, params):
    """Encode pre-windowed sentences. Returns ``(H, cache)`` with H of shape (B, hidden)."""
    B = len(features)
    Lmax = max(f.shape[0] for f in features)
    U = np.zeros((B, Lmax, params.filters.shape[1]))
    mask = np.zeros((B, Lmax), dtype=bool)
    for b, f in enumerate(features):
        U[b, :f.shape[0]] = f
        mask[b, :f.shape[0]] = True
    Z = (U.reshape(B * Lmax, -1) @ params.filters.T + params.bias).reshape(B, Lmax, -1)
    A = np.maximum(Z, 0.0)
    A[~mask] = -1.0  # padding never wins the max
    idx = np.argmax(A.transpose(0, 2, 1), axis=2)  # first index on ties
    H = np.take_along_axis(A, idx[:, None, :], axis=1)[:, 0, :]
    z_max = np.take_along_axis(Z, idx[:, None, :], axis=1)[:, 0, :]
    return H, _Cache(U, idx, z_max)


def backward(dH, cache, params):
    """Gradients of filters and bias given dL/dH of shape (B, hidden)."""
    dz = np.where(cache.z_max > 0, dH, 0.0)
    B, Lmax, F = cache.U.shape
    dZ = np.zeros((B, Lmax, dz.shape[1]))
    np.put_along_axis(dZ, cache.idx[:, None, :], dz[:, None, :], axis=1)
    d_filters = dZ.reshape(-1, dz.shape[1]).T @ cache.U.reshape(-1, F)
    d_bias = dz.sum(axis=0)
    return d_filters, d_bias


def encode(x, params, store):
    """Sentence representation h (hidden_dim,), elementwise non-negative."""
    H, _ = forward([featurize(x, store, params)], params)
    return H[0]


@dataclass(frozen=True, eq=False)
class InstanceEmbedding:
    vector: np.ndarray
    hidden_dim: int

    @property
    def sentence_block(self):
        return self.vector[:self.hidden_dim]

    @property
    def prompt_block(self):
        return self.vector[self.hidden_dim:]


def encode_instance(x, prompt, params, store):
    h = encode(x, params, store)
    p = getattr(prompt, "vector", prompt)
    return InstanceEmbedding(np.concatenate([h, p]), params.hidden_dim)


def gradients(batch, params, store, loss_fn):
    """Loss and exact parameter gradients for a batch of sentences.

    ``loss_fn`` maps the (B, hidden) encodings to ``(loss, dloss/dH)``.
    Returns ``(loss, d_filters, d_bias)``.
    """
    feats = [featurize(x, store, params) for x in batch]
    H, cache = forward(feats, params)
    loss, dH = loss_fn(H)
    if not np.isfinite(loss):
        raise NumericalError(f"non-finite loss {loss}")
    d_filters, d_bias = backward(np.asarray(dH, dtype=np.float64), cache, params)
    return float(loss), d_filters, d_bias


def config_hash(config):
    blob = json.dumps(config, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def save_checkpoint(path, params, config=None, prototypes=None):
    """JSON dump of parameters, the run config (with its hash) and prototypes."""
    config = dict(config or {})
    doc = {
        "format_version": CHECKPOINT_VERSION,
        "config": config,
        "config_hash": config_hash(config),
        "window": params.window,
        "embed_dim": params.embed_dim,
        "max_len": params.max_len,
        "filters": params.filters.tolist(),
        "bias": params.bias.tolist(),
        "history": [float(h) for h in params.history],
        "prototypes": [p.to_record() for p in prototypes or ()],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_checkpoint(path):
    """Returns ``(params, config, prototype_records)``."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read checkpoint {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid checkpoint: {exc}") from exc
    if doc.get("format_version") != CHECKPOINT_VERSION:
        raise DataError(f"{path}: unsupported checkpoint version {doc.get('format_version')}")
    if config_hash(doc.get("config", {})) != doc.get("config_hash"):
        raise DataError(f"{path}: config hash mismatch")
    params = ModelParams(np.array(doc["filters"], dtype=np.float64),
                         np.array(doc["bias"], dtype=np.float64),
                         doc["window"], doc["embed_dim"], doc["max_len"], doc.get("history", []))
    return params, doc.get("config", {}), doc.get("prototypes", [])
