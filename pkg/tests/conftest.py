import os

import numpy as np
import pytest

from protozs.corpus import read_catalog, read_corpus
from protozs.embeddings import VectorStore, load_vectors
from protozs.kglabel import load_graph
from protozs.synth import SynthConfig, synth

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")


@pytest.fixture
def toy_store():
    return VectorStore.from_dict({
        "cat": [1.0, 0.0, 0.0, 0.0],
        "dog": [3.0, 4.0, 0.0, 0.0],
        "born": [0.0, 0.0, 1.0, 0.2],
        "died": [0.0, 0.1, 1.0, -0.3],
        "place": [0.2, 0.0, 0.0, 1.0],
        "birth": [0.0, 0.3, 0.9, 0.4],
        "death": [0.1, -0.2, 0.8, 0.2],
    })


@pytest.fixture(scope="session")
def bench_paths(tmp_path_factory):
    """The 10-relation synthetic benchmark written to disk once per session."""
    out = tmp_path_factory.mktemp("bench")
    return synth(str(out), SynthConfig(relations=10, instances_per=50, seed=7))


@pytest.fixture(scope="session")
def bench(bench_paths):
    return {
        "paths": bench_paths,
        "store": load_vectors(bench_paths["vectors"]),
        "graph": load_graph(bench_paths["graph"]),
        "corpus": read_corpus(bench_paths["corpus"]),
        "catalog": read_catalog(bench_paths["catalog"]),
    }


def random_store(rng, n_words, dim):
    words = [f"w{i:03d}" for i in range(n_words)]
    return VectorStore.from_dict({w: rng.normal(size=dim) for w in words})
