"""Base kernel families and Gram matrix construction.

Four families are supported: linear, polynomial, Gaussian and the
arc-cosine family.  The arc-cosine kernel of activation order n between
x and y is

    k_n(x, y) = (1/pi) ||x||^n ||y||^n J_n(theta),   theta = angle(x, y)

with the closed-form angular factors

    J_0(theta) = pi - theta
    J_1(theta) = sin(theta) + (pi - theta) cos(theta)
    J_2(theta) = 3 sin(theta) cos(theta) + (pi - theta)(1 + 2 cos^2(theta))

and composes with itself to imitate a deep network: given the level-L
values, the level-(L+1) kernel is

    k^(L+1)(x, y) = (1/pi) [k^(L)(x,x) k^(L)(y,y)]^(n/2) J_n(theta^(L))

where theta^(L) is the angle induced by the level-L kernel.  Degree 0
produces values in [0, 1] independent of input scale; degree 1 of a
vector with itself reproduces ||x||^2 at every level.

Numerical care: arccos is ill-conditioned near cos = 1, so a dot-product
round-off of one ulp turns into an angle of ~1e-8.  Same-set Gram
construction therefore pins theta = 0 on the diagonal at every
composition level, and pairwise evaluation detects identical inputs
before falling back to the general formula.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    DegenerateRecursionError,
    ParseError,
    ShapeError,
    UnsupportedDegreeError,
    ZeroVectorError,
)

__all__ = [
    "KernelFamily",
    "KernelSpec",
    "GramMatrix",
    "parse_kernel",
    "angle",
    "j_n",
    "arc_cosine",
    "gaussian",
    "polynomial",
    "linear",
    "evaluate",
    "gram",
    "cross_gram",
]

# J_n(0) / pi, exact: J_0(0) = pi, J_1(0) = pi, J_2(0) = 3*pi.
_J0_OVER_PI = {0: 1.0, 1: 1.0, 2: 3.0}


def _check_degree(degree):
    if not isinstance(degree, (int, np.integer)) or isinstance(degree, bool):
        raise UnsupportedDegreeError("degree must be an integer, got %r" % (degree,))
    if degree not in (0, 1, 2):
        raise UnsupportedDegreeError(
            "arc-cosine degree must be 0, 1 or 2, got %d" % degree
        )


class KernelFamily(Enum):
    ARC_COSINE = "arccos"
    GAUSSIAN = "rbf"
    POLYNOMIAL = "poly"
    LINEAR = "linear"


def _fmt_num(value):
    # integers print bare so that canonical strings stay short and stable
    f = float(value)
    if f == int(f) and abs(f) < 1e15:
        return "%d" % int(f)
    return repr(f)


@dataclass(frozen=True)
class KernelSpec:
    """Tagged description of one base kernel.

    Only the fields relevant to ``family`` matter; the rest keep their
    defaults and are ignored.  ``degree`` is the activation order n for
    the arc-cosine family and the exponent for the polynomial family;
    ``depth`` is the number of arc-cosine composition levels L.
    """

    family: KernelFamily
    degree: int = 0
    depth: int = 1
    gamma: float = 1.0
    coef0: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if self.family is KernelFamily.ARC_COSINE:
            _check_degree(self.degree)
            if not isinstance(self.depth, (int, np.integer)) or self.depth < 1:
                raise ValueError("depth must be a positive integer, got %r" % (self.depth,))
        elif self.family is KernelFamily.GAUSSIAN:
            if not self.gamma > 0:
                raise ValueError("rbf gamma must be positive, got %r" % (self.gamma,))
        elif self.family is KernelFamily.POLYNOMIAL:
            if not isinstance(self.degree, (int, np.integer)) or self.degree < 1:
                raise ValueError(
                    "polynomial degree must be a positive integer, got %r" % (self.degree,)
                )
            if not self.scale > 0:
                raise ValueError("polynomial scale must be positive, got %r" % (self.scale,))

    def canonical(self):
        """Unambiguous text form; ``parse_kernel`` inverts it exactly."""
        if self.family is KernelFamily.ARC_COSINE:
            return "arccos(n=%d,L=%d)" % (self.degree, self.depth)
        if self.family is KernelFamily.GAUSSIAN:
            return "rbf(gamma=%s)" % _fmt_num(self.gamma)
        if self.family is KernelFamily.POLYNOMIAL:
            return "poly(degree=%d,coef0=%s,scale=%s)" % (
                self.degree,
                _fmt_num(self.coef0),
                _fmt_num(self.scale),
            )
        return "linear"

    def __str__(self):
        return self.canonical()


_FAMILY_ALIASES = {
    "arccos": KernelFamily.ARC_COSINE,
    "arc_cosine": KernelFamily.ARC_COSINE,
    "rbf": KernelFamily.GAUSSIAN,
    "gaussian": KernelFamily.GAUSSIAN,
    "poly": KernelFamily.POLYNOMIAL,
    "polynomial": KernelFamily.POLYNOMIAL,
    "linear": KernelFamily.LINEAR,
}

_SPEC_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\(\s*(.*?)\s*\))?\s*$")


def parse_kernel(text):
    """Parse a kernel description like ``arccos(n=1,L=2)`` or ``rbf(gamma=0.01)``."""
    if not isinstance(text, str):
        raise ParseError("kernel spec must be a string, got %r" % (text,))
    m = _SPEC_RE.match(text)
    if m is None:
        raise ParseError("cannot parse kernel spec %r" % text)
    name, body = m.group(1), m.group(2)
    family = _FAMILY_ALIASES.get(name)
    if family is None:
        raise ParseError("unknown kernel family %r in %r" % (name, text))
    params = {}
    if body:
        for piece in body.split(","):
            if "=" not in piece:
                raise ParseError("expected key=value, got %r in %r" % (piece, text))
            key, _, raw = piece.partition("=")
            key = key.strip()
            raw = raw.strip()
            try:
                value = float(raw)
            except ValueError:
                raise ParseError("bad numeric value %r in %r" % (raw, text)) from None
            params[key] = value

    def take(key, default, integer=False):
        if key in params:
            v = params.pop(key)
            if integer:
                if v != int(v):
                    raise ParseError("%s must be an integer in %r" % (key, text))
                return int(v)
            return v
        return default

    try:
        if family is KernelFamily.ARC_COSINE:
            spec = KernelSpec(
                family, degree=take("n", 0, integer=True), depth=take("L", 1, integer=True)
            )
        elif family is KernelFamily.GAUSSIAN:
            spec = KernelSpec(family, gamma=take("gamma", 1.0))
        elif family is KernelFamily.POLYNOMIAL:
            spec = KernelSpec(
                family,
                degree=take("degree", 2, integer=True),
                coef0=take("coef0", 1.0),
                scale=take("scale", 1.0),
            )
        else:
            spec = KernelSpec(family)
    except (ValueError, UnsupportedDegreeError) as exc:
        raise ParseError("invalid kernel parameters in %r: %s" % (text, exc)) from None
    if params:
        raise ParseError("unknown parameter %r for %s in %r" % (sorted(params)[0], name, text))
    return spec


# ---------------------------------------------------------------------------
# pointwise evaluation


def _as_vector(x, name):
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ShapeError("%s must be a 1-d vector, got shape %r" % (name, arr.shape))
    return arr


def _check_pair(x, y):
    x = _as_vector(x, "x")
    y = _as_vector(y, "y")
    if x.shape != y.shape:
        raise ShapeError("mismatched vector lengths %d and %d" % (x.size, y.size))
    return x, y


def angle(x, y):
    """Angle in [0, pi] between two nonzero vectors."""
    x, y = _check_pair(x, y)
    nx = float(np.linalg.norm(x))
    ny = float(np.linalg.norm(y))
    if nx == 0.0 or ny == 0.0:
        raise ZeroVectorError("angle undefined for a zero vector")
    if np.array_equal(x, y):
        return 0.0
    c = float(np.dot(x, y)) / (nx * ny)
    return math.acos(min(1.0, max(-1.0, c)))


def j_n(theta, degree):
    """Angular factor J_n(theta) of the arc-cosine family, n in {0, 1, 2}.

    Accepts a scalar or an ndarray of angles in [0, pi].
    """
    _check_degree(degree)
    t = np.asarray(theta, dtype=np.float64)
    rest = np.pi - t
    if degree == 0:
        out = rest
    elif degree == 1:
        out = np.sin(t) + rest * np.cos(t)
    else:
        c = np.cos(t)
        out = 3.0 * np.sin(t) * c + rest * (1.0 + 2.0 * c * c)
    if out.ndim == 0:
        return float(out)
    return out


def _pair_level(sq_x, sq_y, inner, degree, identical):
    """One composition level of the arc-cosine recursion for a single pair.

    ``sq_x`` and ``sq_y`` are the current self-kernel values k(x,x), k(y,y)
    and ``inner`` the current cross value k(x,y).
    """
    if sq_x <= 0.0 or sq_y <= 0.0:
        raise DegenerateRecursionError(
            "non-positive self-kernel (%r, %r) in arc-cosine recursion" % (sq_x, sq_y)
        )
    prod = sq_x * sq_y
    if identical:
        # theta = 0 exactly; J_n(0)/pi is 1, 1 or 3
        return _J0_OVER_PI[degree] * prod ** (degree / 2.0)
    c = inner / math.sqrt(prod)
    theta = math.acos(min(1.0, max(-1.0, c)))
    return prod ** (degree / 2.0) * (j_n(theta, degree) / math.pi)


def arc_cosine(x, y, degree, depth=1):
    """Arc-cosine kernel of activation order ``degree`` composed ``depth`` times."""
    _check_degree(degree)
    if not isinstance(depth, (int, np.integer)) or depth < 1:
        raise ValueError("depth must be a positive integer, got %r" % (depth,))
    x, y = _check_pair(x, y)
    sq_x = float(np.dot(x, x))
    sq_y = float(np.dot(y, y))
    if sq_x == 0.0 or sq_y == 0.0:
        raise ZeroVectorError("arc-cosine kernel undefined for a zero vector")
    identical = np.array_equal(x, y)
    k = _pair_level(sq_x, sq_y, float(np.dot(x, y)), degree, identical)
    c0 = _J0_OVER_PI[degree]
    sq_x = c0 * sq_x**degree
    sq_y = c0 * sq_y**degree
    for _ in range(depth - 1):
        k = _pair_level(sq_x, sq_y, k, degree, identical)
        sq_x = c0 * sq_x**degree
        sq_y = c0 * sq_y**degree
    return k


def gaussian(x, y, gamma):
    """exp(-gamma ||x - y||^2)."""
    if not gamma > 0:
        raise ValueError("gamma must be positive, got %r" % (gamma,))
    x, y = _check_pair(x, y)
    d = x - y
    return math.exp(-gamma * float(np.dot(d, d)))


def polynomial(x, y, degree, coef0=1.0, scale=1.0):
    """(scale <x, y> + coef0)^degree."""
    x, y = _check_pair(x, y)
    return (scale * float(np.dot(x, y)) + coef0) ** degree


def linear(x, y):
    """<x, y>."""
    x, y = _check_pair(x, y)
    return float(np.dot(x, y))


def evaluate(spec, x, y):
    """Evaluate one kernel value k(x, y) under ``spec``."""
    if spec.family is KernelFamily.ARC_COSINE:
        return arc_cosine(x, y, spec.degree, spec.depth)
    if spec.family is KernelFamily.GAUSSIAN:
        return gaussian(x, y, spec.gamma)
    if spec.family is KernelFamily.POLYNOMIAL:
        return polynomial(x, y, spec.degree, spec.coef0, spec.scale)
    return linear(x, y)


# ---------------------------------------------------------------------------
# Gram matrices


@dataclass(frozen=True)
class GramMatrix:
    """Square kernel matrix over one sample set, exactly symmetric.

    ``spec`` records how the matrix was built and is None for matrices
    assembled by other means (e.g. convex combination of base Grams).
    """

    values: np.ndarray
    spec: KernelSpec | None = None

    def __post_init__(self):
        v = self.values
        if not isinstance(v, np.ndarray) or v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ShapeError("Gram matrix must be square 2-d, got %r" % (np.shape(v),))
        if v.shape[0] < 1:
            raise ShapeError("Gram matrix needs at least one sample")
        if v.dtype != np.float64:
            raise ShapeError("Gram matrix must be float64, got %s" % v.dtype)
        if not np.array_equal(v, v.T):
            raise ShapeError("Gram matrix is not exactly symmetric")

    @property
    def n(self):
        return self.values.shape[0]


def _mirror_upper(k):
    """Copy the upper triangle onto the lower one, in place."""
    iu, ju = np.triu_indices_from(k, 1)
    k[ju, iu] = k[iu, ju]
    return k


def _as_matrix(x, name):
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError("%s must be 2-d (samples x features), got shape %r" % (name, arr.shape))
    return arr


def _arc_cosine_block(x_rows, x_cols, degree, depth, same):
    """Arc-cosine kernel block between two sample sets.

    With ``same`` set, the diagonal angle is pinned to zero at every
    composition level, which keeps the degree-0 diagonal at exactly 1
    and the degree-1 diagonal at exactly the squared norms.
    """
    nr = np.linalg.norm(x_rows, axis=1)
    nc = nr if same else np.linalg.norm(x_cols, axis=1)
    if np.any(nr == 0.0) or np.any(nc == 0.0):
        raise ZeroVectorError("arc-cosine kernel undefined for zero-norm rows")
    outer = nr[:, None] * nc[None, :]
    cos = np.clip((x_rows @ x_cols.T) / outer, -1.0, 1.0)
    if same:
        np.fill_diagonal(cos, 1.0)
    theta = np.arccos(cos)
    k = outer**degree * (j_n(theta, degree) / np.pi)
    c0 = _J0_OVER_PI[degree]
    s_rows = c0 * (nr * nr) ** degree
    s_cols = s_rows if same else c0 * (nc * nc) ** degree
    for _ in range(depth - 1):
        if not (np.all(np.isfinite(s_rows)) and np.all(np.isfinite(s_cols))):
            raise DegenerateRecursionError("self-kernel overflowed in arc-cosine recursion")
        if np.any(s_rows <= 0.0) or np.any(s_cols <= 0.0):
            raise DegenerateRecursionError("non-positive self-kernel in arc-cosine recursion")
        scale = np.sqrt(s_rows[:, None] * s_cols[None, :])
        cos = np.clip(k / scale, -1.0, 1.0)
        if same:
            np.fill_diagonal(cos, 1.0)
        theta = np.arccos(cos)
        k = scale**degree * (j_n(theta, degree) / np.pi)
        s_rows = c0 * s_rows**degree
        s_cols = s_rows if same else c0 * s_cols**degree
    return k


def _kernel_block(x_rows, x_cols, spec, same):
    if spec.family is KernelFamily.ARC_COSINE:
        return _arc_cosine_block(x_rows, x_cols, spec.degree, spec.depth, same)
    if spec.family is KernelFamily.GAUSSIAN:
        sq_r = np.einsum("ij,ij->i", x_rows, x_rows)
        sq_c = sq_r if same else np.einsum("ij,ij->i", x_cols, x_cols)
        sq = sq_r[:, None] + sq_c[None, :] - 2.0 * (x_rows @ x_cols.T)
        np.maximum(sq, 0.0, out=sq)
        if same:
            np.fill_diagonal(sq, 0.0)
        return np.exp(-spec.gamma * sq)
    if spec.family is KernelFamily.POLYNOMIAL:
        return (spec.scale * (x_rows @ x_cols.T) + spec.coef0) ** spec.degree
    return x_rows @ x_cols.T


def gram(samples, spec):
    """Kernel matrix of one sample set with itself.

    Returns a GramMatrix whose values are exactly symmetric (the upper
    triangle is mirrored) and whose diagonal is computed at theta = 0
    for angle-based kernels.
    """
    x = _as_matrix(samples, "samples")
    if x.shape[0] < 1:
        raise ShapeError("need at least one sample")
    k = _kernel_block(x, x, spec, same=True)
    return GramMatrix(_mirror_upper(k), spec=spec)


def cross_gram(rows, cols, spec):
    """Rectangular kernel block k(rows_i, cols_j).

    ``rows`` may be empty (yields a 0 x n block); ``cols`` may not.
    Unlike ``gram``, coincident row/col pairs are not detected, so for
    deeply composed arc-cosine kernels a duplicated point resolves its
    zero angle only to arccos round-off (about 1e-8 at the first level).
    """
    xr = _as_matrix(rows, "rows")
    xc = _as_matrix(cols, "cols")
    if xc.shape[0] < 1:
        raise ShapeError("need at least one column sample")
    if xr.shape[1] != xc.shape[1]:
        raise ShapeError(
            "feature dimensions differ: %d vs %d" % (xr.shape[1], xc.shape[1])
        )
    if xr.shape[0] == 0:
        return np.zeros((0, xc.shape[0]))
    return _kernel_block(xr, xc, spec, same=False)
