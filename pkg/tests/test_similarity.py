import numpy as np
import pytest

from errorscope.errors import MissingEmbeddings, ZeroVector
from errorscope.ingestion import ProjectState, _normalize_embeddings
from errorscope.similarity import (
    NeighborList,
    neighbor_table,
    nearest_neighbors,
    similarity_tags,
)

from conftest import minimal_datasets, probs_for


def brute_force_neighbors(queries, target, k, same_split):
    """O(N^2) oracle: cosine via raw vectors, full sort per query, ties by
    ascending id, self excluded inside one split."""
    out = []
    for qi, q in enumerate(queries):
        qn = q / np.linalg.norm(q)
        scored = []
        for ti, t in enumerate(target):
            if same_split and ti == qi:
                continue
            norm = np.linalg.norm(t)
            sim = float(qn @ (t / norm)) if norm > 0 else 0.0
            scored.append((ti, sim))
        scored.sort(key=lambda pair: (-pair[1], pair[0]))
        out.append(scored[:k])
    return out


def fake_state(embeddings, labels=None):
    """ProjectState stub with only the fields similarity reads."""
    from errorscope.ingestion import DatasetSplit, Utterance

    splits = {}
    for name, matrix in embeddings.items():
        n = matrix.shape[0]
        split_labels = labels.get(name) if labels else ["x"] * n
        splits[name] = DatasetSplit(
            name,
            [Utterance(i, f"text {i}", split_labels[i], name) for i in range(n)],
        )
    state = ProjectState.__new__(ProjectState)
    state.splits = splits
    state.embeddings = {k: _normalize_embeddings(np.asarray(v, float)) for k, v in embeddings.items()}
    return state


def test_stored_duplicate_ranks_first_with_unit_similarity():
    train = np.array([[1.0, 2.0], [3.0, -1.0], [0.5, 0.5]])
    state = fake_state({"train": train, "eval": np.array([[2.0, 4.0]])})
    table = neighbor_table(state, "eval", "train", k=2)
    first_id, first_sim = table[0].neighbors[0]
    assert first_id == 0
    assert first_sim == pytest.approx(1.0, abs=1e-6)


def test_orthogonal_fixture():
    state = fake_state({"train": np.array([[0.0, 1.0]]), "eval": np.array([[1.0, 0.0]])})
    table = neighbor_table(state, "eval", "train", k=1)
    assert table[0].neighbors[0][1] == pytest.approx(0.0, abs=1e-12)


def test_self_excluded_within_split():
    matrix = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    state = fake_state({"train": matrix})
    table = neighbor_table(state, "train", "train", k=2)
    for nl in table:
        assert nl.query_id not in [nid for nid, _ in nl.neighbors]
    # the duplicate pair still finds each other at similarity 1
    assert table[0].neighbors[0] == (1, pytest.approx(1.0))


def test_matches_brute_force_oracle():
    rng = np.random.default_rng(2024)
    train = rng.normal(size=(300, 16))
    eval_m = rng.normal(size=(120, 16))
    state = fake_state({"train": train, "eval": eval_m})

    engine_result = neighbor_table(state, "eval", "train", k=10)
    oracle = brute_force_neighbors(eval_m, train, 10, same_split=False)
    for nl, expected in zip(engine_result, oracle):
        assert [nid for nid, _ in nl.neighbors] == [nid for nid, _ in expected]
        for (_, sim), (_, expected_sim) in zip(nl.neighbors, expected):
            assert sim == pytest.approx(expected_sim, abs=1e-9)

    same_split = neighbor_table(state, "train", "train", k=10)
    oracle_same = brute_force_neighbors(train, train, 10, same_split=True)
    for nl, expected in zip(same_split, oracle_same):
        assert [nid for nid, _ in nl.neighbors] == [nid for nid, _ in expected]


def test_positive_rescaling_changes_nothing():
    rng = np.random.default_rng(7)
    train = rng.normal(size=(80, 8))
    eval_m = rng.normal(size=(40, 8))
    scales_t = rng.uniform(0.1, 50.0, size=(80, 1))
    scales_e = rng.uniform(0.1, 50.0, size=(40, 1))

    base = neighbor_table(fake_state({"train": train, "eval": eval_m}), "eval", "train", 8)
    scaled = neighbor_table(
        fake_state({"train": train * scales_t, "eval": eval_m * scales_e}), "eval", "train", 8
    )
    for a, b in zip(base, scaled):
        assert [nid for nid, _ in a.neighbors] == [nid for nid, _ in b.neighbors]
        for (_, sa), (_, sb) in zip(a.neighbors, b.neighbors):
            assert sa == pytest.approx(sb, abs=1e-6)


def test_missing_embeddings_error():
    state = fake_state({"train": np.eye(3)})
    with pytest.raises(MissingEmbeddings):
        neighbor_table(state, "eval", "train", 2)


def test_zero_query_vector_rejected():
    with pytest.raises(ZeroVector):
        nearest_neighbors(np.zeros(4), np.eye(4), k=2)


def make_neighbor_list(neighbors, target="train"):
    return NeighborList("eval", 0, target, tuple(neighbors))


def test_no_close_tag_below_tau():
    nl = make_neighbor_list([(3, 0.3), (5, 0.2)])
    tags = similarity_tags(
        {"train": nl}, "a", {"train": ["a"] * 10}, tau_close=0.5, tau_same=0.1
    )
    assert "no_close_train" in tags


def test_all_same_label_neighbors_not_conflicting():
    neighbors = [(i, 0.9) for i in range(20)]
    tags = similarity_tags(
        {"train": make_neighbor_list(neighbors)},
        "a",
        {"train": ["a"] * 20},
        tau_close=0.5,
        tau_same=0.1,
    )
    assert "conflicting_neighbors_train" not in tags
    assert "no_close_train" not in tags


def test_zero_same_label_neighbors_conflict():
    neighbors = [(i, 0.9) for i in range(20)]
    tags = similarity_tags(
        {"eval": make_neighbor_list(neighbors, "eval")},
        "a",
        {"eval": ["b"] * 20},
        tau_close=0.5,
        tau_same=0.1,
    )
    assert "conflicting_neighbors_eval" in tags


def test_tags_monotone_in_tau_close():
    nl = make_neighbor_list([(1, 0.62)])
    labels = {"train": ["a"] * 5}
    for low, high in [(0.1, 0.5), (0.5, 0.7), (0.62, 0.99)]:
        low_tags = similarity_tags({"train": nl}, "a", labels, low, 0.1)
        high_tags = similarity_tags({"train": nl}, "a", labels, high, 0.1)
        assert low_tags <= high_tags


def test_tags_from_engine_fixture(builder):
    # eval utterance 0 embedded far from everything: both no_close tags fire
    datasets = minimal_datasets()
    builder.datasets = datasets
    builder.predictions = {
        "main": {"eval": [probs_for(0, 0.9, 4)] * 5, "train": [probs_for(0, 0.9, 4)] * 8}
    }
    train_vectors = np.tile(np.array([[1.0, 0.0, 0.0]]), (8, 1))
    eval_vectors = np.tile(np.array([[1.0, 0.0, 0.0]]), (5, 1))
    eval_vectors[0] = [0.19, 0.98, 0.0]  # cosine vs train ~0.19
    builder.embeddings = {"train": train_vectors, "eval": eval_vectors}
    engine = builder.engine()
    tags = engine.tag_map("eval", "main")
    assert "no_close_train" in tags[0]
    assert "no_close_eval" in tags[0]
