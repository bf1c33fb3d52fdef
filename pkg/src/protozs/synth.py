"""Deterministic desk-scale benchmark: vectors, graph, catalog and corpus.

Relations come in families that share a super-class signature, so every
relation has at least one peer it can be augmented from. Word vectors are
built from latent directions:

* relation name       R_r = unit(F_family + beta * S_r)
* trigger word (r, j) = unit(R_r + slot_weight * G_j + noise)
* family word         = unit(F_family + noise)
* filler word         = unit(Filler + noise)
* entity name         = unit(T_type + noise)

so that trigger words of two sibling relations are related by the analogy
offset R_u - R_s, which is what the augmentation step relies on.
"""

import csv
import json
import os
from dataclasses import dataclass

import numpy as np

from .corpus import RelationMeta, TaggedSentence, write_catalog, write_corpus
from .text import ADJ, ADV, NOUN, OTHER, VERB

FAMILY_SIGNATURES = [
    ("location", "person", "location"),
    ("membership", "person", "organization"),
    ("part", "location", "location"),
    ("creation", "person", "work"),
    ("employment", "person", "company"),
    ("kinship", "person", "person"),
]
FUNCTION_WORDS = ["the", "of", "in", "a", "and", "at", "was", "to", "by", "with"]
SLOT_POS = [VERB, NOUN, ADJ, ADV]

_CONS = "bdfgklmnprtvz"
_VOWS = "aeiou"


@dataclass
class SynthConfig:
    relations: int = 10
    instances_per: int = 50
    seed: int = 7
    dim: int = 48
    triggers_per_slot: int = 2
    family_words: int = 6
    fillers: int = 30
    names_per_type: int = 25
    beta: float = 1.0
    slot_weight: float = 0.8
    noise: float = 0.35
    hubs: int = 3


def _pseudo_words(rng, count, taken):
    out = []
    while len(out) < count:
        n = int(rng.integers(2, 4))
        w = "".join(_CONS[rng.integers(len(_CONS))] + _VOWS[rng.integers(len(_VOWS))]
                    for _ in range(n))
        # a trailing consonant keeps pseudo-words away from the lemmatiser's suffix rules
        w += "n"
        if w not in taken:
            taken.add(w)
            out.append(w)
    return out


def family_sizes(relations):
    if relations < 4:
        raise ValueError("need at least 4 relations")
    sizes = []
    left = relations
    while left >= 5:
        sizes.append(3)
        left -= 3
    while left:
        if left == 3:
            sizes.append(3)
            left = 0
        else:
            sizes.append(2)
            left -= 2
    return sizes


def _unit(v):
    return v / np.linalg.norm(v)


def generate(cfg):
    """Build the benchmark in memory.

    Returns ``(corpus, catalog, vectors, edges)`` where ``vectors`` maps word to
    array and ``edges`` is a list of (source, relation_type, target) rows.
    """
    rng = np.random.default_rng(cfg.seed)
    D = cfg.dim
    taken = set(FUNCTION_WORDS)
    vectors = {}
    edges = []

    def direction():
        return _unit(rng.normal(size=D))

    def noisy(base):
        return _unit(base + cfg.noise * rng.normal(size=D) / np.sqrt(D))

    sizes = family_sizes(cfg.relations)
    signatures = list(FAMILY_SIGNATURES)
    while len(signatures) < len(sizes):
        a, b, c = _pseudo_words(rng, 3, taken)
        signatures.append((a, b, c))
    for sig in signatures[:len(sizes)]:
        taken.update(sig)

    type_words = sorted({w for sig in signatures[:len(sizes)] for w in sig[1:]})
    super_words = sorted({sig[0] for sig in signatures[:len(sizes)]})
    for w in sorted(set(type_words) | set(super_words)):
        vectors[w] = direction()
    names = {t: _pseudo_words(rng, cfg.names_per_type, taken) for t in type_words}
    for t in type_words:
        for nm in names[t]:
            vectors[nm] = noisy(vectors[t])
            edges.append((nm, "IsA", t))

    for w in FUNCTION_WORDS:
        vectors[w] = direction()
    filler_dir = direction()
    fillers = _pseudo_words(rng, cfg.fillers, taken)
    filler_pos = [NOUN if i % 2 == 0 else ADJ for i in range(cfg.fillers)]
    for w in fillers:
        vectors[w] = noisy(filler_dir)
    slot_dirs = [direction() for _ in SLOT_POS]
    hubs = _pseudo_words(rng, cfg.hubs, taken)
    for w in hubs:
        vectors[w] = direction()

    catalog = []
    triggers = {}
    fam_words = {}
    fam_of = {}
    rel_names = _pseudo_words(rng, cfg.relations, taken)
    r = 0
    for f, size in enumerate(sizes):
        sig = signatures[f]
        fam_dir = direction()
        fam_words[f] = _pseudo_words(rng, cfg.family_words, taken)
        for w in fam_words[f]:
            vectors[w] = noisy(fam_dir)
        for _ in range(size):
            name = rel_names[r]
            r += 1
            rel_vec = _unit(fam_dir + cfg.beta * direction())
            vectors[name] = rel_vec
            trig = []
            for j, pos in enumerate(SLOT_POS):
                for w in _pseudo_words(rng, cfg.triggers_per_slot, taken):
                    vectors[w] = noisy(rel_vec + cfg.slot_weight * slot_dirs[j])
                    trig.append((w, pos))
            triggers[name] = trig
            fam_of[name] = f
            desc = [trig[0][0], trig[2][0], fam_words[f][0]]
            catalog.append(RelationMeta(name, sig[0], sig[1], sig[2], desc))
            edges.append((name, "IsA", sig[0]))
            for w, _ in trig:
                edges.append((w, "RelatedTo", name))
                edges.append((w, "RelatedTo", desc[-1]))
            for d in desc:
                edges.append((name, "RelatedTo", d))
            for w in fam_words[f][:2]:
                edges.append((w, "RelatedTo", name))

    # noise hubs tie into a random slice of the vocabulary
    pool = sorted(vectors)
    for h in hubs:
        for w in rng.choice(pool, size=len(pool) // 4, replace=False):
            if w != h:
                edges.append((h, "RelatedTo", str(w)))
    for w in fillers:
        for t in rng.choice(sorted(triggers), size=2, replace=False):
            edges.append((w, "RelatedTo", str(t)))

    corpus = []
    for meta in catalog:
        trig = triggers[meta.name]
        f = fam_of[meta.name]
        for i in range(cfg.instances_per):
            head = str(rng.choice(names[meta.head_super]))
            tail = str(rng.choice(names[meta.tail_super]))
            while tail == head:
                tail = str(rng.choice(names[meta.tail_super]))
            middle = []
            for w, pos in [trig[int(k)] for k in rng.choice(len(trig), size=2, replace=False)]:
                middle.append((w, pos))
            middle.append((str(rng.choice(fam_words[f])), NOUN))
            k = int(rng.integers(len(fillers)))
            middle.append((fillers[k], filler_pos[k]))
            for _ in range(3):
                middle.append((str(rng.choice(FUNCTION_WORDS)), OTHER))
            perm = rng.permutation(len(middle))
            middle = [middle[p] for p in perm]
            toks = [head] + [w for w, _ in middle] + [tail]
            pos = [OTHER] + [p for _, p in middle] + [OTHER]
            corpus.append(TaggedSentence(toks, pos, (0, 1), (len(toks) - 1, len(toks)),
                                         meta.name, id=f"{meta.name}-{i}",
                                         head_super=meta.head_super, tail_super=meta.tail_super))
    return corpus, catalog, vectors, edges


def write_vectors(path, vectors):
    words = sorted(vectors)
    dim = len(vectors[words[0]])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(words)} {dim}\n")
        for w in words:
            fh.write(w + " " + " ".join(f"{x:.6f}" for x in vectors[w]) + "\n")


def write_edges(path, edges):
    rows = sorted(set(edges))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["source", "relation_type", "target"])
        out.writerows(rows)


def synth(out_dir, cfg=None, **overrides):
    """Write corpus.jsonl, catalog.json, vectors.txt and graph.csv into ``out_dir``."""
    cfg = cfg or SynthConfig(**overrides)
    corpus, catalog, vectors, edges = generate(cfg)
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "corpus": os.path.join(out_dir, "corpus.jsonl"),
        "catalog": os.path.join(out_dir, "catalog.json"),
        "vectors": os.path.join(out_dir, "vectors.txt"),
        "graph": os.path.join(out_dir, "graph.csv"),
    }
    write_corpus(paths["corpus"], corpus)
    write_catalog(paths["catalog"], catalog)
    write_vectors(paths["vectors"], vectors)
    write_edges(paths["graph"], edges)
    with open(os.path.join(out_dir, "synth.json"), "w", encoding="utf-8") as fh:
        json.dump(cfg.__dict__, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return paths
