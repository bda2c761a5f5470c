import numpy as np
import pytest
import scipy.linalg

from mlmkl import kpca
from mlmkl.errors import DegenerateGramError, ShapeError
from mlmkl.kernels import GramMatrix, cross_gram, gram, parse_kernel


def linear_gram(x):
    return gram(x, parse_kernel("linear"))


def test_centered_gram_rows_sum_to_zero():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(14, 5))
    centered, row_means, total_mean = kpca.center_gram(linear_gram(x).values)
    assert np.abs(centered.sum(axis=0)).max() < 1e-9
    assert np.abs(centered.sum(axis=1)).max() < 1e-9
    np.testing.assert_array_equal(centered, centered.T)
    assert row_means.shape == (14,)
    assert total_mean == pytest.approx(row_means.mean())


def test_linear_kernel_reproduces_pca():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(30, 6)) * np.array([5.0, 3.0, 1.0, 0.5, 0.1, 0.05])
    model = kpca.fit(linear_gram(x), 4)

    xc = x - x.mean(axis=0)
    cov_vals, cov_vecs = np.linalg.eigh(xc.T @ xc)
    pca = xc @ cov_vecs[:, ::-1][:, :4]

    proj = model.training_projections()
    assert proj.shape == (30, 4)
    for j in range(4):
        a, b = proj[:, j], pca[:, j]
        sign = np.sign(a @ b)
        np.testing.assert_allclose(a, sign * b, atol=1e-8)


def test_training_projections_match_transform_on_training_gram():
    rng = np.random.default_rng(2)
    x = rng.uniform(0.1, 1.0, size=(20, 8))
    spec = parse_kernel("rbf(gamma=0.7)")
    k = gram(x, spec)
    model = kpca.fit(k, 5)
    again = kpca.transform(model, k.values)
    np.testing.assert_allclose(again, model.training_projections(), atol=1e-9)


def test_projection_variance_equals_eigenvalue_over_n():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(25, 4))
    model = kpca.fit(linear_gram(x), 3)
    proj = model.training_projections()
    for j in range(3):
        col = proj[:, j]
        assert col.mean() == pytest.approx(0.0, abs=1e-9)
        assert (col ** 2).mean() == pytest.approx(model.eigenvalues[j] / 25.0, rel=1e-9)


def test_eigenvalues_match_scipy():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(16, 5))
    k = linear_gram(x)
    model = kpca.fit(k, 4)
    centered, _, _ = kpca.center_gram(k.values)
    ref = scipy.linalg.eigh(centered, eigvals_only=True)[::-1][:4]
    np.testing.assert_allclose(model.eigenvalues, ref, rtol=1e-10, atol=1e-8)


def test_out_of_sample_transform():
    rng = np.random.default_rng(5)
    train = rng.uniform(size=(18, 6))
    test = rng.uniform(size=(7, 6))
    spec = parse_kernel("poly(degree=2,coef0=1,scale=1)")
    model = kpca.fit(gram(train, spec), 4)
    out = kpca.transform(model, cross_gram(test, train, spec))
    assert out.shape == (7, 4)
    # a test point that duplicates a training point lands on its projection
    dup = kpca.transform(model, cross_gram(train[3:4], train, spec))
    np.testing.assert_allclose(dup[0], model.training_projections()[3], atol=1e-8)


def test_transform_empty_rows():
    rng = np.random.default_rng(6)
    x = rng.normal(size=(9, 3))
    model = kpca.fit(linear_gram(x), 2)
    out = kpca.transform(model, np.zeros((0, 9)))
    assert out.shape == (0, 2)


def test_transform_rejects_wrong_width():
    rng = np.random.default_rng(7)
    x = rng.normal(size=(9, 3))
    model = kpca.fit(linear_gram(x), 2)
    with pytest.raises(ShapeError):
        kpca.transform(model, np.zeros((4, 8)))


def test_rank_deficient_gram_warns_and_truncates():
    # identity Gram centers to rank n-1 with equal eigenvalues 1
    k = GramMatrix(np.eye(3))
    with pytest.warns(UserWarning, match="2"):
        model = kpca.fit(k, 3)
    assert model.n_components == 2
    np.testing.assert_allclose(model.eigenvalues, [1.0, 1.0], atol=1e-12)


def test_constant_gram_is_degenerate():
    with pytest.raises(DegenerateGramError):
        kpca.fit(GramMatrix(np.ones((5, 5))), 1)


def test_component_count_validation():
    k = GramMatrix(np.eye(4))
    for bad in (0, -1, 2.5):
        with pytest.raises(ValueError):
            kpca.fit(k, bad)
    # asking beyond the usable spectrum truncates rather than failing
    with pytest.warns(UserWarning):
        model = kpca.fit(k, 5)
    assert model.n_components == 3


def test_sign_convention_is_deterministic():
    rng = np.random.default_rng(8)
    x = rng.normal(size=(12, 4))
    k = linear_gram(x)
    a = kpca.fit(k, 3)
    b = kpca.fit(k, 3)
    np.testing.assert_array_equal(a.alphas, b.alphas)
    # largest-magnitude coordinate of every eigenvector is positive
    for j in range(3):
        col = a.alphas[:, j]
        assert col[np.argmax(np.abs(col))] > 0.0
