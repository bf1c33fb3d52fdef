"""Acceptance suite: one PASS/FAIL line per criterion in the terminal summary."""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from oracles import brute_cos_mul, central_difference, rel_error
from protozs.augment import translate_sentence
from protozs.config import RunConfig
from protozs.corpus import RelationMeta, TaggedSentence, read_catalog, read_corpus
from protozs.embeddings import VectorStore, cos_mul_3, load_vectors
from protozs.encoder import gradients, init_params
from protozs.evaluation import run_pipeline
from protozs.kglabel import KGraph, candidate_words, load_graph, virtual_label
from protozs.proto import Prototype, classify, prototypes
from protozs.text import ADJ, ADV, CONTENT_POS, NOUN, OTHER, VERB


def record(key, ok, detail):
    ACCEPTANCE[key] = (bool(ok), detail)
    print(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")
    assert ok, detail


def _vocab(rng, n, dim):
    store = VectorStore.from_dict({f"w{i}": rng.normal(size=dim) for i in range(n)})
    return store, {w: list(store.vector(w)) for w in store.words}


def test_criterion_1_analogy_oracle():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    mismatches = 0
    for _ in range(100):
        n, dim = int(rng.integers(5, 201)), int(rng.integers(2, 17))
        store, unit = _vocab(rng, n, dim)
        w_s, r_s, r_u = (f"w{int(i)}" for i in rng.integers(0, n, size=3))
        expect = [w for w, _ in brute_cos_mul(unit, w_s, r_s, r_u)]
        got = [w for w, _ in cos_mul_3(w_s, r_s, r_u, store, k=n)]
        mismatches += got != expect
    dt = time.perf_counter() - t0
    record(1, mismatches == 0 and dt < 5,
           f"3CosMul ranking vs brute force: {100 - mismatches}/100 exact, {dt:.2f}s (< 5s)")


def test_criterion_2_gradients():
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(1000 + seed)
        D, hidden = int(rng.integers(1, 9)), int(rng.integers(1, 9))
        window = int(rng.choice([1, 3, 5]))
        store = VectorStore.from_dict({f"t{i}": rng.normal(size=D) for i in range(6)})
        batch = [TaggedSentence(list(rng.choice(store.words, size=L)), [NOUN] * L, (0, 1), (L - 1, L))
                 for L in rng.integers(2, 7, size=int(rng.integers(1, 4)))]
        p = init_params(D, hidden_dim=hidden, window=window, seed=seed)
        p.bias[:] = rng.normal(scale=0.1, size=hidden)
        target = rng.normal(size=(len(batch), hidden))

        def fn(H):
            return 0.5 * float(((H - target) ** 2).sum()), H - target

        def loss():
            return gradients(batch, p, store, fn)[0]

        _, dF, db = gradients(batch, p, store, fn)
        worst = max(worst, rel_error(dF, central_difference(loss, p.filters)),
                    rel_error(db, central_difference(loss, p.bias)))
    dt = time.perf_counter() - t0
    record(2, worst <= 1e-4 and dt < 10,
           f"20 finite-difference configs, worst relative error {worst:.2e} (<= 1e-4), {dt:.2f}s (< 10s)")


def test_criterion_3_classify():
    cases = [
        (np.zeros(2), [((1, 0), "a"), ((3, 0), "b")]),
        (np.zeros(2), [((1, 0), "a"), ((0, 1), "b")]),
        (np.array([1.0, 1.0]), [((4, 5), "a"), ((1, 2), "b"), ((-1, 1), "c")]),
    ]
    worst = 0.0
    for q, ps in cases:
        protos = [Prototype(r, np.array(c, dtype=float), 1) for c, r in ps]
        d = [math.hypot(c[0] - q[0], c[1] - q[1]) for c, _ in ps]
        z = sum(math.exp(-x) for x in d)
        got = classify(q, protos)
        worst = max(worst, max(abs(got[r] - math.exp(-x) / z) for (_, r), x in zip(ps, d)))
    first = classify(np.zeros(2), [Prototype("a", np.array([1.0, 0]), 1),
                                   Prototype("b", np.array([3.0, 0]), 1)])["a"]
    record(3, worst <= 1e-6 and abs(first - 0.8808) < 1e-4,
           f"3 hand-computed cases, max error {worst:.1e} (<= 1e-6); p1 = {first:.4f}")


def test_criterion_4_prototypes():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(50):
        groups = {f"r{i}": list(rng.normal(size=(int(rng.integers(1, 12)), 7)))
                  for i in range(int(rng.integers(1, 6)))}
        shuffled = {r: [g[i] for i in rng.permutation(len(g))] for r, g in groups.items()}
        for a, b in zip(prototypes(groups), prototypes(shuffled)):
            exact = np.sum(groups[a.relation], axis=0) / len(groups[a.relation])
            worst = max(worst, np.abs(a.vector - b.vector).max(), np.abs(a.vector - exact).max())
    record(4, worst <= 1e-6, f"50 random groupings, permutation/mean error {worst:.1e} (<= 1e-6)")


def test_criterion_5_virtual_labels():
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    identity_err, monotone_fail = 0.0, 0
    for _ in range(50):
        n = int(rng.integers(10, 40))
        store = VectorStore.from_dict({f"w{i}": rng.normal(size=6) for i in range(n)}
                                      | {"s": rng.normal(size=6), "h": rng.normal(size=6),
                                         "t": rng.normal(size=6)})
        nodes = list(store.words)
        edges = [(nodes[a], nodes[b]) for a, b in rng.integers(0, len(nodes), size=(3 * n, 2))]
        graph = KGraph.from_edges(edges)
        meta = RelationMeta("w0", "s", "h", "t", (f"w{int(rng.integers(1, n))}",))
        taus = np.sort(rng.uniform(0, 1, size=4))
        sets = [candidate_words(meta, store, t) for t in taus]
        monotone_fail += any(not b <= a for a, b in zip(sets, sets[1:]))
        vl = virtual_label(meta, store, graph, tau=float(taus[0]), n=int(rng.integers(1, 8)))
        if vl.components:
            w = np.array([a for _, a in vl.components])
            E = np.array([store.vector(x) for x, _ in vl.components])
            avg = (w[:, None] * E).sum(axis=0) / w.sum()
            identity_err = max(identity_err, np.abs(vl.raw_vector(store) - avg).max(),
                               np.abs(vl.vector - avg / np.linalg.norm(avg)).max())
    dt = time.perf_counter() - t0
    record(5, identity_err <= 1e-6 and monotone_fail == 0 and dt < 5,
           f"weighted-average identity error {identity_err:.1e} (<= 1e-6); tau monotone on "
           f"{50 - monotone_fail}/50 random graphs; {dt:.2f}s (< 5s)")


def test_criterion_6_translation_contract():
    rng = np.random.default_rng(6)
    t0 = time.perf_counter()
    bad = 0
    checked = 0
    for _ in range(100):
        n = int(rng.integers(6, 40))
        store, unit = _vocab(rng, n, int(rng.integers(2, 12)))
        src = RelationMeta("w0", "s", "h", "t")
        dst = RelationMeta("w1", "s", "h", "t")
        L = int(rng.integers(2, 10))
        toks = list(rng.choice(store.words, size=L))
        pos = list(rng.choice([NOUN, VERB, ADJ, ADV, OTHER], size=L))
        h = int(rng.integers(0, L - 1))
        x = TaggedSentence(toks, pos, (h, h + 1), (L - 1, L), "w0")
        y = translate_sentence(x, src, dst, store)
        bad += len(y.tokens) != L or (y.head, y.tail) != (x.head, x.tail) or y.pos != x.pos
        for a, b, p in zip(x.tokens, y.tokens, x.pos):
            if p in CONTENT_POS:
                checked += 1
                bad += b != brute_cos_mul(unit, a, "w0", "w1")[0][0]
            else:
                bad += a != b
    dt = time.perf_counter() - t0
    record(6, bad == 0 and dt < 5,
           f"100 random sentences, {checked} content words equal the oracle argmax, "
           f"{bad} violations, {dt:.2f}s (< 5s)")


@pytest.fixture(scope="module")
def benchmark_runs(bench_paths):
    def load():
        return (read_corpus(bench_paths["corpus"]), read_catalog(bench_paths["catalog"]),
                load_vectors(bench_paths["vectors"]), load_graph(bench_paths["graph"]))

    cfg = RunConfig(m=3, seed=7)
    t0 = time.perf_counter()
    full = run_pipeline(*load(), cfg)
    ablated = run_pipeline(*load(), cfg.replace(prompts=False))
    elapsed = time.perf_counter() - t0
    again = run_pipeline(*load(), cfg)
    return {"full": full, "ablated": ablated, "again": again, "elapsed": elapsed}


def test_criterion_7_benchmark(benchmark_runs):
    full, abl = benchmark_runs["full"].report, benchmark_runs["ablated"].report
    unseen, macro, abl_unseen = full.subset_macro[2], full.macro[2], abl.subset_macro[2]
    dt = benchmark_runs["elapsed"]
    record(7, unseen >= 0.90 and macro >= 0.90 and abl_unseen < unseen and dt < 120,
           f"unseen F1 {unseen:.4f}, macro F1 {macro:.4f} (>= 0.90); no-prompt unseen F1 "
           f"{abl_unseen:.4f} (< full); {dt:.1f}s (< 120s)")


def test_criterion_8_robustness(bench):
    t0 = time.perf_counter()
    ms, seeds = (2, 3, 5), (1, 2, 3)
    curve = {}
    for prompts in (True, False):
        curve[prompts] = []
        for m in ms:
            f1 = [run_pipeline(bench["corpus"], bench["catalog"], bench["store"], bench["graph"],
                               RunConfig(m=m, seed=s, prompts=prompts)).report.subset_macro[2]
                  for s in seeds]
            curve[prompts].append(float(np.mean(f1)))
    dt = time.perf_counter() - t0
    drops = [(curve[True][i] - curve[True][i + 1], curve[False][i] - curve[False][i + 1])
             for i in range(len(ms) - 1)]
    ok = all(no >= fu - 1e-12 for fu, no in drops) and dt < 300
    show = lambda c: "/".join(f"{x:.3f}" for x in c)  # noqa: E731
    record(8, ok, f"mean unseen F1 over seeds {seeds} at m={ms}: full {show(curve[True])}, "
                  f"no-prompt {show(curve[False])}; no-prompt drop >= full drop at every step; "
                  f"{dt:.1f}s (< 300s)")


def test_criterion_9_determinism(benchmark_runs):
    a = benchmark_runs["full"]
    b = benchmark_runs["again"]
    ca = a.report.to_csv(a.split.unseen).encode()
    cb = b.report.to_csv(b.split.unseen).encode()
    record(9, ca == cb, f"two seed-7 runs give byte-identical metrics CSVs ({len(ca)} bytes)")
