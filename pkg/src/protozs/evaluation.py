"""Zero-shot splits, macro P/R/F1, the end-to-end pipeline and parameter sweeps.

Scores are macro-averaged: every relation present in the gold labels counts
equally, and the macro F1 is the mean of per-relation F1 values.
"""

import csv
import io
import logging
import time
from collections import Counter
from dataclasses import dataclass
from itertools import product

import numpy as np

from .augment import build_augmented_set, superclass_match
from .encoder import init_params
from .errors import DataError
from .kglabel import virtual_labels
from .proto import predict, relation_prototypes, train, unseen_prototypes

logger = logging.getLogger(__name__)

TAU_GRID = tuple(round(0.1 * i, 1) for i in range(11))
LR_GRID = (1e-1, 1e-2, 1e-3, 1e-4)
SWEEP_COLUMNS = ("tau", "n", "lr", "m", "seed", "macro_p", "macro_r", "macro_f1",
                 "unseen_f1", "wall_time_s", "best")


@dataclass(frozen=True)
class ZeroShotSplit:
    train: tuple
    test: tuple
    unseen: tuple
    seed: int
    resamples: int = 0

    def to_record(self):
        return {"unseen": list(self.unseen), "seed": self.seed, "resamples": self.resamples,
                "train_size": len(self.train), "test_size": len(self.test)}


def max_coverable(relations, catalog):
    """Largest number of relations that can be unseen while each keeps a matched seen peer."""
    metas = {m.name: m for m in catalog}
    groups = Counter()
    for r in relations:
        m = metas[r]
        groups[(m.super_class.lower(), m.head_super.lower(), m.tail_super.lower())] += 1
    return sum(n - 1 for n in groups.values())


def make_split(corpus, catalog, m, seed, test_fraction=0.2, max_tries=1000):
    """Hold out ``m`` relations entirely and ``test_fraction`` of every seen one."""
    metas = {mt.name: mt for mt in catalog}
    relations = sorted({s.relation for s in corpus})
    missing = [r for r in relations if r not in metas]
    if missing:
        raise DataError(f"relations missing from catalog: {missing}")
    if not 1 <= m < len(relations):
        raise DataError(f"m={m} must lie in [1, {len(relations) - 1}]")
    limit = max_coverable(relations, catalog)
    if m > limit:
        raise DataError(f"m={m} unseen relations cannot all keep a super-class-matched seen "
                        f"relation; at most {limit} can")

    rng = np.random.default_rng(seed)
    for attempt in range(max_tries):
        unseen = sorted(str(r) for r in rng.choice(relations, size=m, replace=False))
        seen = [r for r in relations if r not in unseen]
        if all(any(superclass_match(metas[s], metas[u]) for s in seen) for u in unseen):
            break
    else:
        raise DataError(f"no valid split of m={m} found in {max_tries} draws")
    if attempt:
        logger.info("split: re-sampled %d times to satisfy the super-class constraint", attempt)

    held = set()
    for r in relations:
        if r in unseen:
            continue
        idx = [i for i, s in enumerate(corpus) if s.relation == r]
        k = int(round(test_fraction * len(idx)))
        if len(idx) > 1:
            k = min(max(k, 1), len(idx) - 1)
        else:
            k = 0
        held.update(int(i) for i in rng.choice(idx, size=k, replace=False))
    unseen_set = set(unseen)
    train_part = tuple(s for i, s in enumerate(corpus) if s.relation not in unseen_set and i not in held)
    test_part = tuple(s for i, s in enumerate(corpus) if s.relation in unseen_set or i in held)
    return ZeroShotSplit(train_part, test_part, tuple(unseen), seed, attempt)


@dataclass(frozen=True)
class MetricsReport:
    per_relation: dict  # relation -> (precision, recall, f1, support)
    macro: tuple
    subset_macro: tuple = None

    def rows(self, unseen=()):
        unseen = set(unseen)
        out = [(r, *vals, int(r in unseen)) for r, vals in sorted(self.per_relation.items())]
        out.append(("__macro__", *self.macro, sum(v[3] for v in self.per_relation.values()), 0))
        if self.subset_macro is not None:
            sup = sum(v[3] for r, v in self.per_relation.items() if r in unseen)
            out.append(("__unseen_macro__", *self.subset_macro, sup, 1))
        return out

    def to_csv(self, unseen=()):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["relation", "precision", "recall", "f1", "support", "unseen"])
        for rel, p, r, f, sup, u in self.rows(unseen):
            w.writerow([rel, f"{p:.6f}", f"{r:.6f}", f"{f:.6f}", sup, u])
        return buf.getvalue()


def _f1(p, r):
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def _macro(stats):
    if not stats:
        return (0.0, 0.0, 0.0)
    vals = np.array([v[:3] for v in stats])
    return tuple(float(x) for x in vals.mean(axis=0))


def metrics(pred, gold, unseen=None):
    """Per-relation and macro precision/recall/F1 over relations present in ``gold``."""
    pred, gold = list(pred), list(gold)
    if len(pred) != len(gold):
        raise ValueError(f"{len(pred)} predictions for {len(gold)} gold labels")
    if not gold:
        raise ValueError("empty evaluation set")
    tp = Counter(g for p, g in zip(pred, gold) if p == g)
    n_pred = Counter(pred)
    n_gold = Counter(gold)
    per = {}
    for rel in sorted(n_gold):
        p = tp[rel] / n_pred[rel] if n_pred[rel] else 0.0
        r = tp[rel] / n_gold[rel]
        per[rel] = (p, r, _f1(p, r), n_gold[rel])
    subset = None
    if unseen is not None:
        subset = _macro([v for k, v in per.items() if k in set(unseen)])
    return MetricsReport(per, _macro(list(per.values())), subset)


@dataclass
class PipelineResult:
    split: ZeroShotSplit
    augmented: list
    vlabels: dict
    params: object
    prototypes: list
    predictions: list
    report: MetricsReport


def augmentation_count(train_sentences):
    counts = Counter(s.relation for s in train_sentences)
    return max(1, int(round(np.mean(list(counts.values())))))


def run_pipeline(corpus, catalog, store, graph, cfg, split=None):
    """Split, augment, build virtual labels, train, predict and score."""
    split = split or make_split(corpus, catalog, cfg.m, cfg.seed)
    count = cfg.count or augmentation_count(split.train)
    augmented, stats = build_augmented_set(split.train, catalog, split.unseen, count, cfg.seed,
                                           store, eps=cfg.eps)
    if stats.uncoverable:
        raise DataError(f"unseen relations with no super-class match: {stats.uncoverable}")
    vlabels = virtual_labels(catalog, store, graph, tau=cfg.tau, K=cfg.hops, n=cfg.top_n)
    params = init_params(store.dim, cfg.hidden, cfg.window, cfg.seed, cfg.max_len)
    params = train(list(split.train) + augmented, vlabels, params, store, cfg.train_config(), catalog)
    protos = (relation_prototypes(split.train, vlabels, params, store, catalog, cfg.prompts)
              + unseen_prototypes(augmented, vlabels, params, store, catalog, cfg.prompts))
    preds = predict(split.test, protos, params, store, cfg.prompts)
    report = metrics([p for p, _ in preds], [s.relation for s in split.test], unseen=split.unseen)
    return PipelineResult(split, augmented, vlabels, params, protos, preds, report)


def sweep(corpus, catalog, store, graph, base, taus=None, ns=None, lrs=None, ms=None):
    """One full pipeline run per grid point; rows in grid order, best macro-F1 flagged."""
    taus = taus or (base.tau,)
    ns = ns or (base.top_n,)
    lrs = lrs or (base.lr,)
    ms = ms or (base.m,)
    rows = []
    for tau, n, lr, m in product(taus, ns, lrs, ms):
        cfg = base.replace(tau=float(tau), top_n=int(n), lr=float(lr), m=int(m)).validate()
        t0 = time.perf_counter()
        rep = run_pipeline(corpus, catalog, store, graph, cfg).report
        rows.append({"tau": cfg.tau, "n": cfg.top_n, "lr": cfg.lr, "m": cfg.m, "seed": cfg.seed,
                     "macro_p": rep.macro[0], "macro_r": rep.macro[1], "macro_f1": rep.macro[2],
                     "unseen_f1": rep.subset_macro[2],
                     "wall_time_s": time.perf_counter() - t0, "best": 0})
        logger.info("sweep tau=%s n=%s lr=%s m=%s -> macro F1 %.4f", tau, n, lr, m, rep.macro[2])
    if rows:
        best = max(range(len(rows)), key=lambda i: (rows[i]["macro_f1"], -i))
        rows[best]["best"] = 1
    return rows


def sweep_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        w.writerow([f"{row[c]:.6f}" if isinstance(row[c], float) else row[c] for c in SWEEP_COLUMNS])
    return buf.getvalue()
