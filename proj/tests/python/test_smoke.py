"""Smoke tests for the python bindings: one round through every exposed call.

The C++ suites carry the real coverage; here we only prove the module imports,
the calls marshal correctly, and a toy analogy works end to end.
"""

import os
import subprocess

import pytest

import gpvec

RULE = "add(ARG2,sub(ARG1,ARG0))"


def write_store(path):
    # d = c - a + b exactly; x is a distractor off every landing point
    rows = [
        ("a", (1, 0, 0)),
        ("b", (0, 1, 0)),
        ("c", (0, 0, 1)),
        ("d", (-1, 1, 1)),
        ("x", (0.25, 0.5, -0.75)),
    ]
    lines = [f"{len(rows)} 3"]
    lines += [w + " " + " ".join(str(v) for v in vec) for w, vec in rows]
    path.write_text("\n".join(lines) + "\n")


def test_program_text_helpers():
    assert gpvec.canonical_program("ADD( arg2 , SUB(ARG1,ARG0) )") == RULE
    assert gpvec.baseline_rule() == RULE
    assert gpvec.program_depth(RULE) == 2
    assert gpvec.program_size(RULE) == 5
    with pytest.raises(RuntimeError):
        gpvec.canonical_program("bogus(ARG0)")


def test_evaluate_program():
    out = gpvec.evaluate_program(RULE, [1.0, 0.0], [0.0, 1.0], [2.0, 2.0])
    assert out == [1.0, 3.0]
    ties = [1.5, -0.5, 2.3]
    zero = [0.0] * 3
    assert gpvec.evaluate_program("rint(ARG0)", ties, zero, zero) == [2.0, 0.0, 2.0]
    assert gpvec.evaluate_program("rint(ARG0)", ties, zero, zero, rint_mode="truncate") == [
        1.0,
        0.0,
        2.0,
    ]


def test_store_and_benchmark(tmp_path):
    store_path = tmp_path / "toy.txt"
    write_store(store_path)
    store = gpvec.EmbeddingStore.load(str(store_path))
    assert len(store) == 5
    assert store.dim == 3
    assert "d" in store and "nope" not in store
    assert store.vector("b") == [0.0, 1.0, 0.0]
    with pytest.raises(KeyError):
        store.vector("nope")

    hits = store.nearest([-1.0, 1.0, 1.0], k=2, exclude=["a", "b", "c"])
    assert hits[0][0] == "d"
    assert hits[0][1] == pytest.approx(1.0)

    acc = gpvec.evaluate_accuracy(RULE, store, [("a", "b", "c", "d")])
    assert acc == 1.0
    assert gpvec.evaluate_accuracy("ARG0", store, [("a", "b", "c", "d")]) == 0.0


def test_parse_questions(tmp_path):
    q = tmp_path / "q.txt"
    q.write_text(": toy-group\nA B c D\n")
    assert gpvec.parse_questions(str(q)) == [(1, "toy-group", [("a", "b", "c", "d")])]


def test_equivalence_and_random_programs():
    assert gpvec.semantically_equivalent("sub(add(ARG2,ARG1),ARG0)", RULE)
    assert not gpvec.semantically_equivalent("ARG0", RULE)
    assert gpvec.random_program(7) == gpvec.random_program(7)
    for seed in range(20):
        assert gpvec.program_depth(gpvec.random_program(seed, 1, 4, "full")) <= 4


def test_evolve_smoke(tmp_path):
    store_path = tmp_path / "toy.txt"
    write_store(store_path)
    store = gpvec.EmbeddingStore.load(str(store_path))
    train = [("a", "b", "c", "d")]
    r1 = gpvec.evolve(store, train, population=30, generations=3, survivors=5, seed=5)
    r2 = gpvec.evolve(store, train, population=30, generations=3, survivors=5, seed=5)
    assert r1 == r2
    assert set(r1) == {
        "best_program",
        "best_train_accuracy",
        "evaluation_count",
        "generations_completed",
    }
    assert r1["generations_completed"] == 3
    assert 0.0 <= r1["best_train_accuracy"] <= 1.0
    gpvec.canonical_program(r1["best_program"])  # parses back


def test_cli_available():
    cli = os.environ.get("GPVEC_CLI")
    if not cli:
        pytest.skip("GPVEC_CLI not set")
    out = subprocess.run([cli, "--version"], capture_output=True, text=True, check=True)
    assert "gpvec" in out.stdout
