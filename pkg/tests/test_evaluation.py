import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from armsc.evaluation import (
    CorruptionSpec,
    SubspaceSpec,
    block_diag_mass,
    clustering_error,
    corrupt,
    generate_subspaces,
    rank_approx_profile,
    subspace_bases,
    write_table,
)
from oracles import error_by_permutation


def test_single_line_columns_are_parallel():
    X, labels = generate_subspaces(SubspaceSpec(5, 1, dims=1, points=10, seed=3))
    assert np.linalg.matrix_rank(X, tol=1e-10) == 1
    assert np.all(labels == 0)


def test_independent_bases_are_orthogonal():
    spec = SubspaceSpec(12, 3, dims=[2, 3, 4], points=5, seed=2)
    bases, _ = subspace_bases(spec)
    for i in range(3):
        for j in range(i + 1, 3):
            assert np.max(np.abs(bases[i].T @ bases[j])) <= 1e-12


def test_points_lie_in_their_subspace():
    spec = SubspaceSpec(30, 4, dims=3, points=[10, 12, 8, 9], seed=5)
    X, labels = generate_subspaces(spec)
    bases, _ = subspace_bases(spec)
    assert X.shape == (30, 39)
    for i, B in enumerate(bases):
        cols = X[:, labels == i]
        assert np.linalg.norm(cols - B @ (B.T @ cols)) <= 1e-10
    np.testing.assert_allclose(np.linalg.norm(X, axis=0), 1.0)


def test_generation_is_deterministic():
    spec = SubspaceSpec(20, 3, seed=11)
    a, la = generate_subspaces(spec)
    b, lb = generate_subspaces(spec)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(la, lb)


def test_too_many_independent_dimensions():
    with pytest.raises(ValueError):
        SubspaceSpec(10, 3, dims=4)
    SubspaceSpec(10, 3, dims=4, independent=False)


def test_corrupt_level_zero_is_identity(five_subspaces):
    X, _ = five_subspaces
    for model in ("none", "gaussian", "sparse", "sample"):
        Xc, E = corrupt(X, CorruptionSpec(model, 0.0))
        np.testing.assert_array_equal(Xc, X)
        assert not E.any()


def test_sparse_count():
    X = np.zeros((20, 50))
    Xc, E = corrupt(X, CorruptionSpec("sparse", 0.1, magnitude=5.0, seed=1))
    assert np.count_nonzero(E) == 100
    assert np.abs(E).max() <= 5.0


def test_sample_specific_columns():
    X, _ = generate_subspaces(SubspaceSpec(20, 2, dims=3, points=10))
    Xc, E = corrupt(X, CorruptionSpec("sample_specific", 0.25, magnitude=2.0, seed=4))
    changed = np.flatnonzero(np.abs(E).sum(axis=0) > 0)
    assert changed.size == 5
    np.testing.assert_allclose(np.linalg.norm(Xc[:, changed], axis=0), 2.0)


@pytest.mark.parametrize("model", ["gaussian", "sparse", "sample_specific"])
def test_corruption_identity_is_exact(model, five_subspaces):
    X, _ = five_subspaces
    Xc, E = corrupt(X, CorruptionSpec(model, 0.2, magnitude=3.0, seed=8))
    assert np.array_equal(Xc - X, E)
    np.testing.assert_allclose(X + E, Xc, rtol=0, atol=1e-15 * max(1.0, np.abs(Xc).max()))


def test_unknown_corruption():
    with pytest.raises(ValueError):
        CorruptionSpec("salt")
    with pytest.raises(ValueError):
        CorruptionSpec("sparse", 1.5)


def test_clustering_error_examples():
    assert clustering_error([0, 0, 1, 1], [1, 1, 0, 0]) == 0.0
    assert clustering_error([0, 0, 0, 1], [0, 0, 1, 1]) == pytest.approx(0.25)
    assert clustering_error([0, 1, 2, 3], [0, 0, 0, 0]) == pytest.approx(0.75)


def test_clustering_error_length_mismatch():
    with pytest.raises(ValueError):
        clustering_error([0, 1], [0, 1, 1])


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4).flatmap(
    lambda k: st.tuples(st.just(k),
                        st.lists(st.tuples(st.integers(0, k - 1), st.integers(0, k - 1)),
                                 min_size=1, max_size=15))))
def test_clustering_error_against_permutations(data):
    k, pairs = data
    pred = np.array([p for p, _ in pairs])
    truth = np.array([t for _, t in pairs])
    err = clustering_error(pred, truth)
    assert err == pytest.approx(error_by_permutation(pred, truth), abs=1e-12)
    assert err == pytest.approx(clustering_error(truth, pred), abs=1e-12)
    kmax = max(np.unique(truth).size, np.unique(pred).size)
    assert err <= 1.0 - 1.0 / kmax + 1e-12


def test_block_diag_mass_examples():
    truth = np.array([0, 0, 1, 1])
    W = np.ones((4, 4))
    assert block_diag_mass(W, truth) == pytest.approx(1 / 3)
    assert block_diag_mass(np.eye(4), truth) == 1.0
    n = 10
    t = np.repeat([0, 1], n // 2)
    assert block_diag_mass(np.ones((n, n)), t) == pytest.approx((n / 2 - 1) / (n - 1))
    Wb = (t[:, None] == t[None, :]).astype(float)
    assert block_diag_mass(Wb, t) == 1.0


def test_rank_profile_rows():
    rows = rank_approx_profile(10.0, 3)
    assert len(rows) == 9
    assert rows[0] == (0.0, 0.0, 0, 0.0, 0.0)
    s1, s2, r, arc, nuc = rows[-1]
    assert (s1, s2, r, nuc) == (10.0, 10.0, 2, 20.0)
    assert arc >= 1.87
    assert rows[1][2] == 1


def test_rank_profile_validation():
    with pytest.raises(ValueError):
        rank_approx_profile(1.0, 1)
    with pytest.raises(ValueError):
        rank_approx_profile(0.0, 5)


def test_write_table_roundtrip(tmp_path):
    path = tmp_path / "t.csv"
    write_table(path, ["a", "b"], [(1, 0.1), (2, 1 / 3)])
    lines = path.read_text().splitlines()
    assert lines[0] == "a,b"
    assert float(lines[2].split(",")[1]) == 1 / 3
