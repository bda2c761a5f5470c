"""Unsupervised learning of kernel combination weights.

Given base Gram matrices K_1..K_m over one sample set, find simplex
weights mu (mu_t >= 0, sum mu_t = 1) for the combined kernel
K = sum_t mu_t K_t by asking that each point be well reconstructed by
its kernel-weighted nearest neighbours in input space:

    J(mu) = 1/2 sum_i || x_i - sum_{j in B_i} k_ij x_j ||^2
            + gamma sum_i sum_{j in B_i} k_ij ||x_i - x_j||^2

where k_ij are entries of the combined kernel, B_i is the set of the
basis_size nearest neighbours of x_i (self excluded) and gamma trades
reconstruction against distortion.  Expanding the squared norm through
the linear Gram P = X X^T makes J a convex quadratic in mu:

    J(mu) = mu^T W mu + z^T mu + 1/2 sum_i P_ii
    W[s][t] = 1/2 sum_i (k_{s,i} o d_i)^T P (k_{t,i} o d_i)
    z[t]    = sum_i (gamma v_i o d_i - p_i o d_i)^T k_{t,i}

with d_i the 0/1 indicator of B_i, k_{t,i} column i of K_t, p_i column i
of P and v_i column i of the squared-distance matrix.  W is PSD (it is a
Gram matrix of masked kernel columns under P restricted to the bases),
so projected gradient descent over the simplex solves the problem.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidBasisSizeError, NumericalFailureError, ShapeError
from .kernels import GramMatrix

__all__ = [
    "KernelWeights",
    "LocalBases",
    "UmklProblem",
    "QpForm",
    "build_local_bases",
    "squared_distances",
    "problem_from_features",
    "objective_scalar",
    "assemble_qp",
    "project_to_simplex",
    "minimize_qp",
    "solve_simplex_qp",
    "combine",
]


@dataclass(frozen=True)
class KernelWeights:
    """Point on the probability simplex: nonnegative, sums to one."""

    mu: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=np.float64)
        if mu.ndim != 1 or mu.size < 1:
            raise ShapeError("weights must be a nonempty 1-d vector")
        if not np.all(np.isfinite(mu)):
            raise ValueError("weights must be finite")
        if np.any(mu < 0.0):
            raise ValueError("weights must be nonnegative, got %r" % (mu,))
        if abs(float(mu.sum()) - 1.0) > 1e-10:
            raise ValueError("weights must sum to 1, got sum %r" % float(mu.sum()))
        object.__setattr__(self, "mu", mu)

    def __len__(self):
        return self.mu.size


@dataclass(frozen=True)
class LocalBases:
    """Per-sample nearest-neighbour index sets of equal size, self excluded."""

    indices: np.ndarray  # (n, basis_size) int, each row sorted ascending

    def __post_init__(self):
        idx = np.asarray(self.indices)
        if idx.ndim != 2:
            raise ShapeError("basis indices must be 2-d, got shape %r" % (idx.shape,))
        n, k = idx.shape
        if not (1 <= k <= n - 1):
            raise InvalidBasisSizeError("basis size %d not in [1, %d]" % (k, n - 1))
        if np.any(idx < 0) or np.any(idx >= n):
            raise ValueError("basis indices out of range")
        rows = np.arange(n)[:, None]
        if np.any(idx == rows):
            raise ValueError("a sample may not appear in its own basis")
        object.__setattr__(self, "indices", idx.astype(np.int64, copy=False))

    @property
    def n(self):
        return self.indices.shape[0]

    @property
    def basis_size(self):
        return self.indices.shape[1]

    def mask(self):
        """Boolean (n, n) matrix, mask[i, j] = (j in B_i)."""
        n = self.n
        out = np.zeros((n, n), dtype=bool)
        out[np.arange(n)[:, None], self.indices] = True
        return out


def squared_distances(linear_gram):
    """Pairwise squared Euclidean distances from a linear Gram matrix."""
    p = np.asarray(linear_gram, dtype=np.float64)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ShapeError("linear Gram must be square, got shape %r" % (p.shape,))
    d = np.diag(p)
    m = d[:, None] + d[None, :] - 2.0 * p
    np.maximum(m, 0.0, out=m)
    np.fill_diagonal(m, 0.0)
    return m


def build_local_bases(linear_gram, basis_size):
    """Nearest neighbours of each sample in input-space distance.

    Distances come from the linear Gram (||x_i - x_j||^2 = P_ii + P_jj
    - 2 P_ij); the sample itself is excluded and ties are broken toward
    the smaller index.
    """
    p = np.asarray(linear_gram, dtype=np.float64)
    n = p.shape[0] if p.ndim == 2 else 0
    m = squared_distances(p)
    if not (isinstance(basis_size, (int, np.integer)) and 1 <= basis_size <= n - 1):
        raise InvalidBasisSizeError(
            "basis size must be an integer in [1, %d], got %r" % (n - 1, basis_size)
        )
    np.fill_diagonal(m, np.inf)
    order = np.argsort(m, axis=1, kind="stable")
    picked = np.sort(order[:, :basis_size], axis=1)
    return LocalBases(picked)


@dataclass(frozen=True)
class UmklProblem:
    """Everything the weight QP needs about one sample set."""

    base_grams: tuple
    linear_gram: np.ndarray
    sq_dists: np.ndarray
    bases: LocalBases
    gamma: float

    def __post_init__(self):
        grams = tuple(self.base_grams)
        if len(grams) < 1:
            raise ValueError("need at least one base kernel")
        n = grams[0].n
        for g in grams:
            if not isinstance(g, GramMatrix):
                raise ShapeError("base_grams must hold GramMatrix values")
            if g.n != n:
                raise ShapeError("base Grams disagree on sample count")
        p = np.asarray(self.linear_gram, dtype=np.float64)
        if p.shape != (n, n):
            raise ShapeError("linear Gram shape %r does not match n=%d" % (p.shape, n))
        m = np.asarray(self.sq_dists, dtype=np.float64)
        if m.shape != (n, n):
            raise ShapeError("distance matrix shape %r does not match n=%d" % (m.shape, n))
        if not np.allclose(m, squared_distances(p), rtol=1e-10, atol=1e-10):
            raise ValueError("sq_dists is inconsistent with the linear Gram")
        if self.bases.n != n:
            raise ShapeError("local bases built for a different sample count")
        if not self.gamma >= 0.0:
            raise ValueError("gamma must be nonnegative, got %r" % (self.gamma,))
        object.__setattr__(self, "base_grams", grams)
        object.__setattr__(self, "linear_gram", p)
        object.__setattr__(self, "sq_dists", m)

    @property
    def n(self):
        return self.bases.n

    @property
    def m(self):
        return len(self.base_grams)


def problem_from_features(features, specs, gamma=0.1, basis_size=10):
    """Convenience constructor: Grams, distances and bases from raw features."""
    from .kernels import gram  # local import keeps module load light

    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError("features must be 2-d, got shape %r" % (x.shape,))
    p = x @ x.T
    iu, ju = np.triu_indices_from(p, 1)
    p[ju, iu] = p[iu, ju]
    bases = build_local_bases(p, basis_size)
    grams = tuple(gram(x, s) for s in specs)
    return UmklProblem(grams, p, squared_distances(p), bases, float(gamma))


def _weights_array(mu, m):
    arr = np.asarray(getattr(mu, "mu", mu), dtype=np.float64)
    if arr.shape != (m,):
        raise ShapeError("expected %d weights, got shape %r" % (m, arr.shape))
    return arr


def objective_scalar(problem, mu):
    """Direct per-sample evaluation of J(mu); the reference the QP must match.

    Accepts any weight vector, on the simplex or off it, so finite
    differences can probe the neighbourhood of a feasible point.
    """
    w = _weights_array(mu, problem.m)
    k = sum(wt * g.values for wt, g in zip(w, problem.base_grams))
    p = problem.linear_gram
    v = problem.sq_dists
    idx = problem.bases.indices
    total = 0.5 * float(np.trace(p))
    for i in range(problem.n):
        b = idx[i]
        a = k[b, i]
        total += -float(a @ p[b, i]) + 0.5 * float(a @ p[np.ix_(b, b)] @ a)
        total += problem.gamma * float(a @ v[b, i])
    return total


@dataclass(frozen=True)
class QpForm:
    """J(mu) = mu^T w mu + z^T mu + constant, with w symmetric PSD."""

    w: np.ndarray
    z: np.ndarray
    constant: float

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        z = np.asarray(self.z, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or z.shape != (w.shape[0],):
            raise ShapeError("inconsistent QP shapes %r, %r" % (w.shape, z.shape))
        if not np.array_equal(w, w.T):
            raise ShapeError("QP matrix must be exactly symmetric")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "z", z)

    @property
    def m(self):
        return self.z.size

    def value(self, mu):
        mu = _weights_array(mu, self.m)
        return float(mu @ self.w @ mu + self.z @ mu + self.constant)

    def gradient(self, mu):
        mu = _weights_array(mu, self.m)
        return 2.0 * (self.w @ mu) + self.z


def assemble_qp(problem):
    """Collapse the per-sample objective into an m x m quadratic form."""
    idx = problem.bases.indices
    n = problem.n
    cols = np.arange(n)[:, None]
    # t[i, a, s] = K_s[idx[i, a], i]: basis rows of column i of each base Gram
    t = np.stack([g.values[idx, cols] for g in problem.base_grams], axis=2)
    p_sub = problem.linear_gram[idx[:, :, None], idx[:, None, :]]
    half = np.einsum("iab,ibt->iat", p_sub, t)
    w = 0.5 * np.einsum("ias,iat->st", t, half)
    w = 0.5 * (w + w.T)
    p_col = problem.linear_gram[idx, cols]
    v_col = problem.sq_dists[idx, cols]
    z = np.einsum("ia,iat->t", problem.gamma * v_col - p_col, t)
    constant = 0.5 * float(np.trace(problem.linear_gram))
    return QpForm(w, z, constant)


def project_to_simplex(v):
    """Euclidean projection onto the probability simplex, O(m log m)."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ShapeError("can only project a nonempty vector")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / ks > 0.0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def _spectral_norm(a, iters=50):
    v = np.full(a.shape[0], 1.0 / math.sqrt(a.shape[0]))
    est = 0.0
    for _ in range(iters):
        w = a @ v
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0
        est = nw
        v = w / nw
    return est


def _face_minimum(qp, support):
    """Exact stationary point of the QP restricted to one simplex face.

    On the face where only ``support`` is nonzero the constraint is a
    single equality, so stationarity is a (s+1)-dimensional linear
    system.  Returns None when the face has no feasible stationary
    point; its infimum then sits on a smaller face, which the caller
    enumerates anyway.
    """
    s = support.size
    a = np.zeros((s + 1, s + 1))
    a[:s, :s] = 2.0 * qp.w[np.ix_(support, support)]
    a[:s, s] = -1.0
    a[s, :s] = 1.0
    b = np.concatenate([-qp.z[support], [1.0]])
    sol, *_ = np.linalg.lstsq(a, b, rcond=None)
    if np.linalg.norm(a @ sol - b) > 1e-8 * (1.0 + np.linalg.norm(b)):
        return None
    mu_s = sol[:s]
    if np.any(mu_s < -1e-12):
        return None
    mu = np.zeros(qp.m)
    mu[support] = np.clip(mu_s, 0.0, None)
    total = mu.sum()
    if not total > 0.0:
        return None
    return mu / total


def _polish_on_faces(qp, mu, value):
    """Compare against the exact KKT point of every simplex face.

    2^m - 1 tiny linear solves.  Descent can crawl when W is nearly
    singular and stop a hair above the optimum; for the handful of base
    kernels a layer realistically combines this closes the gap to
    machine precision.
    """
    best_mu, best_val = mu, value
    idx = np.arange(qp.m)
    for bits in range(1, 1 << qp.m):
        support = idx[(bits >> idx) & 1 == 1]
        cand = _face_minimum(qp, support)
        if cand is None:
            continue
        val = qp.value(cand)
        if val < best_val:
            best_mu, best_val = cand, val
    return best_mu, best_val


def minimize_qp(qp, max_iter=500, tol=1e-9):
    """Projected gradient descent on the simplex with backtracking.

    Starts from uniform weights with step 1/||2W||_2 (50 power
    iterations), halves the step until the objective does not increase,
    and stops once an accepted step improves by less than ``tol``.  When
    the weight count is small enough to enumerate, a final pass checks
    the exact stationary point of every simplex face and keeps the best.
    Returns the final weights and the (non-increasing) list of accepted
    objective values, starting with the value at the uniform point.
    """
    if not (np.all(np.isfinite(qp.w)) and np.all(np.isfinite(qp.z))):
        raise NumericalFailureError("QP coefficients are not finite")
    m = qp.m
    mu = np.full(m, 1.0 / m)
    objs = [qp.value(mu)]
    if m == 1:
        return mu, objs
    lip = _spectral_norm(2.0 * qp.w)
    step0 = 1.0 / lip if lip > 0.0 else 1.0
    for _ in range(max_iter):
        g = qp.gradient(mu)
        if not np.all(np.isfinite(g)):
            raise NumericalFailureError("gradient overflowed during descent")
        t = step0
        f_cur = objs[-1]
        cand = None
        f_new = f_cur
        while t > 1e-20:
            cand = project_to_simplex(mu - t * g)
            f_new = qp.value(cand)
            if f_new <= f_cur:
                break
            t *= 0.5
        if cand is None or f_new > f_cur:
            break  # no descent direction left at any step size
        mu = cand
        objs.append(f_new)
        if f_cur - f_new < tol:
            break
    if m <= 12:
        mu_p, val_p = _polish_on_faces(qp, mu, objs[-1])
        if val_p < objs[-1]:
            mu = mu_p
            objs.append(val_p)
    return mu, objs


def solve_simplex_qp(qp, max_iter=500, tol=1e-9):
    """Minimize the QP over the simplex; returns the weight vector."""
    mu, _ = minimize_qp(qp, max_iter=max_iter, tol=tol)
    return KernelWeights(mu)


def combine(base_grams, weights):
    """Convex combination sum_t mu_t K_t of base Gram matrices."""
    grams = list(base_grams)
    if len(grams) < 1:
        raise ValueError("need at least one base Gram")
    w = _weights_array(weights, len(grams))
    n = grams[0].n
    out = np.zeros((n, n))
    for wt, g in zip(w, grams):
        if g.n != n:
            raise ShapeError("base Grams disagree on sample count")
        out += wt * g.values
    return GramMatrix(out, spec=None)
