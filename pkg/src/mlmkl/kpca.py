"""Kernel principal component analysis on a precomputed Gram matrix.

The Gram matrix is double-centered in feature space,

    K' = K - 1_n K - K 1_n + 1_n K 1_n,

eigendecomposed, and the eigenvectors are rescaled by 1/sqrt(lambda) so
that projecting a centered kernel row onto them yields unit-variance
principal directions in feature space.  Components whose eigenvalue
falls below 1e-10 times the largest are dropped as numerically
rank-deficient.  With a linear kernel the result coincides with
ordinary PCA scores up to per-component sign.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGramError, ShapeError

__all__ = ["KpcaModel", "center_gram", "fit", "transform"]

_EIGENVALUE_CUTOFF = 1e-10


def _gram_values(k):
    v = getattr(k, "values", k)
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise ShapeError("Gram matrix must be square, got shape %r" % (v.shape,))
    return v


def center_gram(k):
    """Double-center a Gram matrix.

    Returns the centered matrix together with the per-row means and the
    total mean of the input, which are exactly what is needed to center
    kernel evaluations against new points later.
    """
    v = _gram_values(k)
    row_means = v.mean(axis=1)
    total_mean = float(v.mean())
    centered = v - row_means[:, None] - row_means[None, :] + total_mean
    iu, ju = np.triu_indices_from(centered, 1)
    centered[ju, iu] = centered[iu, ju]
    return centered, row_means, total_mean


@dataclass(frozen=True)
class KpcaModel:
    """Fitted components: everything needed to project new kernel rows."""

    alphas: np.ndarray  # (n_fit, p) eigenvectors scaled by 1/sqrt(eigenvalue)
    eigenvalues: np.ndarray  # (p,) descending, all positive
    row_means: np.ndarray  # (n_fit,) row means of the uncentered fit Gram
    total_mean: float

    @property
    def n_fit(self):
        return self.alphas.shape[0]

    @property
    def n_components(self):
        return self.alphas.shape[1]

    def training_projections(self):
        """Projections of the fit samples themselves: sqrt(lambda_j) v_j."""
        return self.alphas * self.eigenvalues[None, :]


def fit(k, n_components):
    """Extract the leading kernel principal components.

    Keeps at most ``n_components`` directions, fewer (with a warning)
    when the centered spectrum has fewer eigenvalues above the relative
    cutoff.  A spectrum with no positive eigenvalue at all means the
    centered Gram carries no variance and is rejected.
    """
    if not isinstance(n_components, (int, np.integer)) or n_components < 1:
        raise ValueError("n_components must be a positive integer, got %r" % (n_components,))
    centered, row_means, total_mean = center_gram(k)
    lams, vecs = np.linalg.eigh(centered)
    lams = lams[::-1]
    vecs = vecs[:, ::-1]
    lam_max = float(lams[0])
    if not lam_max > 0.0:
        raise DegenerateGramError(
            "centered Gram has no positive eigenvalue (max %r)" % lam_max
        )
    usable = int(np.sum(lams > _EIGENVALUE_CUTOFF * lam_max))
    keep = min(n_components, usable)
    if keep < n_components:
        warnings.warn(
            "requested %d components but only %d eigenvalues are usable"
            % (n_components, usable),
            stacklevel=2,
        )
    lams = lams[:keep].copy()
    vecs = vecs[:, :keep].copy()
    # deterministic sign: make the largest-magnitude entry of each vector positive
    for j in range(keep):
        i = int(np.argmax(np.abs(vecs[:, j])))
        if vecs[i, j] < 0.0:
            vecs[:, j] = -vecs[:, j]
    alphas = vecs / np.sqrt(lams)[None, :]
    return KpcaModel(alphas=alphas, eigenvalues=lams, row_means=row_means, total_mean=total_mean)


def transform(model, cross):
    """Project new points given their kernel values against the fit set.

    ``cross`` has one row per new point and one column per fit sample.
    Centering uses the stored fit-set statistics, so the projection is
    consistent with the training-time geometry.
    """
    c = np.asarray(cross, dtype=np.float64)
    if c.ndim != 2 or c.shape[1] != model.n_fit:
        raise ShapeError(
            "cross matrix must be (t, %d), got shape %r" % (model.n_fit, c.shape)
        )
    if c.shape[0] == 0:
        return np.zeros((0, model.n_components))
    row_means_new = c.mean(axis=1)
    centered = c - row_means_new[:, None] - model.row_means[None, :] + model.total_mean
    return centered @ model.alphas
