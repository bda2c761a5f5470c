"""Greedy layerwise construction of multi-layer multiple kernel machines.

Each layer is fitted on the current representation of the training set
and never revisited: combination weights for the layer's base kernels
come from the unsupervised reconstruction objective, kernel PCA turns
the combined Gram matrix into coordinates, and a univariate ANOVA test
keeps the ``width`` most label-relevant ones.  The reduced coordinates
feed the next layer; after the last layer a kernel SVM is trained on
the final representation.

Layers may fit their Gram matrices on a random subsample of the rows
(the whole training set is still pushed through the fitted layer), which
keeps the cubic eigendecomposition affordable.  All randomness flows
from one integer seed, so a fit is reproducible bit for bit; the model
serializer below is deterministic too (fixed header layout, sorted JSON
keys, raw array segments, sha256 trailer), hence two fits with the same
seed produce byte-identical files.
"""
from __future__ import annotations

import hashlib
import io
import json
import struct
from dataclasses import dataclass

import numpy as np

from . import featsel, kpca, svm
from .errors import (
    ChecksumError,
    ModelIOError,
    ShapeError,
    TruncatedModelError,
    UnsupportedVersionError,
)
from .kernels import KernelSpec, cross_gram, gram, parse_kernel
from .kpca import KpcaModel
from .svm import SvmModel
from .umkl import (
    KernelWeights,
    assemble_qp,
    combine,
    problem_from_features,
    solve_simplex_qp,
)

__all__ = [
    "LayerConfig",
    "LayerModel",
    "MlmklModel",
    "DEFAULT_CLASSIFIER_KERNEL",
    "fit_layer",
    "transform_layer",
    "fit",
    "transform",
    "predict",
    "train_classifier",
    "classifier_predict",
    "save",
    "load",
]

DEFAULT_CLASSIFIER_KERNEL = "arccos(n=1,L=1)"


@dataclass(frozen=True)
class LayerConfig:
    """Hyperparameters of one layer.

    ``kpca_components`` defaults to three times the layer width, leaving
    the univariate test a 3x surplus of candidate directions.
    """

    kernels: tuple
    width: int
    kpca_components: int | None = None
    gamma: float = 0.1
    basis_size: int = 10

    def __post_init__(self):
        kernels = tuple(self.kernels)
        if len(kernels) < 1:
            raise ValueError("a layer needs at least one base kernel")
        for k in kernels:
            if not isinstance(k, KernelSpec):
                raise TypeError("kernels must be KernelSpec instances, got %r" % (k,))
        if not isinstance(self.width, (int, np.integer)) or self.width < 1:
            raise ValueError("width must be a positive integer, got %r" % (self.width,))
        if self.kpca_components is not None:
            if (
                not isinstance(self.kpca_components, (int, np.integer))
                or self.kpca_components < self.width
            ):
                raise ValueError(
                    "kpca_components must be an integer >= width, got %r"
                    % (self.kpca_components,)
                )
        if not self.gamma >= 0.0:
            raise ValueError("gamma must be nonnegative, got %r" % (self.gamma,))
        if not isinstance(self.basis_size, (int, np.integer)) or self.basis_size < 1:
            raise ValueError("basis_size must be a positive integer, got %r" % (self.basis_size,))
        object.__setattr__(self, "kernels", kernels)

    @property
    def components(self):
        return self.kpca_components if self.kpca_components is not None else 3 * self.width


@dataclass
class LayerModel:
    """A fitted layer: what is needed to push new points through it."""

    kernels: tuple
    weights: KernelWeights
    kpca: KpcaModel
    scores: np.ndarray  # ANOVA F per kernel principal component
    selected: np.ndarray  # component indices kept, best first
    fit_sample: np.ndarray  # rows the Grams were built on, in layer input space
    fit_indices: np.ndarray | None  # their positions in the training matrix

    @property
    def width(self):
        return self.selected.size

    @property
    def input_dim(self):
        return self.fit_sample.shape[1]


def _combined_cross(rows, cols, kernels, weights):
    out = None
    for wt, spec in zip(weights.mu, kernels):
        if wt == 0.0:
            continue
        block = wt * cross_gram(rows, cols, spec)
        out = block if out is None else out + block
    if out is None:  # all weights zero cannot happen on the simplex
        raise ValueError("kernel weights are all zero")
    return out


def fit_layer(features, labels, config, fit_idx=None):
    """Fit one layer and return it with the transformed training rows.

    ``fit_idx`` selects the rows used for the Gram matrices (None means
    all of them); every row of ``features`` is transformed regardless.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError("features must be 2-d, got shape %r" % (x.shape,))
    xs = x if fit_idx is None else x[np.asarray(fit_idx)]
    problem = problem_from_features(xs, config.kernels, config.gamma, config.basis_size)
    weights = solve_simplex_qp(assemble_qp(problem))
    k_fit = combine(problem.base_grams, weights)
    kp = kpca.fit(k_fit, config.components)
    if fit_idx is None:
        cross = k_fit.values
    else:
        cross = _combined_cross(x, xs, config.kernels, weights)
        # fit rows get their exact same-set kernel values, not the
        # round-off-limited recomputation
        cross[np.asarray(fit_idx)] = k_fit.values
    feats = kpca.transform(kp, cross)
    ranking, reduced = featsel.select(feats, labels, config.width)
    layer = LayerModel(
        kernels=config.kernels,
        weights=weights,
        kpca=kp,
        scores=ranking.scores,
        selected=ranking.selected,
        fit_sample=np.array(xs, copy=True),
        fit_indices=None if fit_idx is None else np.asarray(fit_idx, dtype=np.int64),
    )
    return layer, reduced


def transform_layer(layer, features):
    """Push new rows through a fitted layer."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != layer.input_dim:
        raise ShapeError(
            "expected rows of dimension %d, got shape %r" % (layer.input_dim, x.shape)
        )
    cross = _combined_cross(x, layer.fit_sample, layer.kernels, layer.weights)
    feats = kpca.transform(layer.kpca, cross)
    return feats[:, layer.selected]


@dataclass
class MlmklModel:
    layers: list
    classifier: SvmModel
    metadata: dict

    def __post_init__(self):
        if len(self.layers) < 1:
            raise ValueError("model needs at least one layer")
        for prev, cur in zip(self.layers, self.layers[1:]):
            if cur.input_dim != prev.width:
                raise ShapeError(
                    "layer chain broken: width %d feeds input of dimension %d"
                    % (prev.width, cur.input_dim)
                )
        sv = self.classifier.support_vectors
        if sv is not None and sv.shape[1] != self.layers[-1].width:
            raise ShapeError(
                "classifier support vectors have dimension %d, final width is %d"
                % (sv.shape[1], self.layers[-1].width)
            )

    @property
    def n_layers(self):
        return len(self.layers)

    @property
    def widths(self):
        return tuple(l.width for l in self.layers)


def _fingerprint(x, y):
    h = hashlib.sha256()
    h.update(struct.pack("<QQ", *x.shape))
    h.update(np.ascontiguousarray(x, dtype=np.float64).tobytes())
    h.update(np.ascontiguousarray(y, dtype=np.int64).tobytes())
    return h.hexdigest()


def train_classifier(features, labels, kernel, c=1.0, tol=1e-3, max_iter=1_000_000):
    """Kernel SVM on a feature matrix; the support rows are kept on the model."""
    x = np.asarray(features, dtype=np.float64)
    machine = svm.train_multiclass(
        gram(x, kernel), labels, c=c, tol=tol, kernel=kernel, max_iter=max_iter
    )
    machine.support_vectors = np.array(x[machine.support], copy=True)
    return machine


def classifier_predict(machine, features):
    """Predict labels for feature rows with a classifier that kept its
    support vectors."""
    if machine.support_vectors is None or machine.kernel is None:
        raise ValueError("classifier carries no support vectors or kernel")
    cross = cross_gram(features, machine.support_vectors, machine.kernel)
    return svm.predict(machine, cross)


def fit(
    features,
    labels,
    configs,
    subsample=3000,
    seed=0,
    classifier=None,
    svm_c=1.0,
    svm_tol=1e-3,
    callback=None,
):
    """Train the full stack: layers greedily, then the SVM on top.

    ``callback(index, layer, representation)`` runs after each layer is
    fitted, with the training rows already pushed through it; useful for
    per-layer diagnostics without a second pass.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    configs = list(configs)
    if len(configs) < 1:
        raise ValueError("need at least one layer config")
    if classifier is None:
        classifier = parse_kernel(DEFAULT_CLASSIFIER_KERNEL)
    rng = np.random.default_rng(seed)
    rep = x
    layers = []
    for index, cfg in enumerate(configs):
        n = rep.shape[0]
        if subsample and subsample < n:
            fit_idx = np.sort(rng.choice(n, size=subsample, replace=False))
        else:
            fit_idx = None
        layer, rep = fit_layer(rep, y, cfg, fit_idx)
        layers.append(layer)
        if callback is not None:
            callback(index, layer, rep)
    machine = train_classifier(rep, y, classifier, c=svm_c, tol=svm_tol)
    metadata = {
        "seed": int(seed),
        "subsample": int(subsample) if subsample else 0,
        "classifier": classifier.canonical(),
        "svm_c": float(svm_c),
        "svm_tol": float(svm_tol),
        "data_sha256": _fingerprint(x, y),
        "layer_configs": [
            {
                "kernels": [k.canonical() for k in cfg.kernels],
                "width": int(cfg.width),
                "kpca_components": int(cfg.components),
                "gamma": float(cfg.gamma),
                "basis_size": int(cfg.basis_size),
            }
            for cfg in configs
        ],
    }
    return MlmklModel(layers=layers, classifier=machine, metadata=metadata)


def transform(model, features):
    """Final-layer representation of new rows."""
    rep = np.asarray(features, dtype=np.float64)
    for layer in model.layers:
        rep = transform_layer(layer, rep)
    return rep


def predict(model, features):
    """Class labels for new rows."""
    return classifier_predict(model.classifier, transform(model, features))


# ---------------------------------------------------------------------------
# model files
#
# layout: magic (8) | version u32 | header length u32 | total file length u64
#         | JSON header | concatenated .npy segments | sha256 of all prior bytes
#
# Arrays are written with numpy's own .npy encoder in the order listed in
# the header, so the byte stream is a pure function of the model content.

_MAGIC = b"MLMKLBIN"
_VERSION = 1
_PREFIX = struct.Struct("<IIQ")


def _manifest(model):
    if model.classifier.support_vectors is None:
        raise ValueError("cannot save a classifier without support vectors")
    arrays = []
    layer_headers = []
    for index, layer in enumerate(model.layers):
        prefix = "layer%d/" % index
        arrays.append((prefix + "weights", layer.weights.mu))
        arrays.append((prefix + "alphas", layer.kpca.alphas))
        arrays.append((prefix + "eigenvalues", layer.kpca.eigenvalues))
        arrays.append((prefix + "row_means", layer.kpca.row_means))
        arrays.append((prefix + "scores", layer.scores))
        arrays.append((prefix + "selected", layer.selected))
        arrays.append((prefix + "fit_sample", layer.fit_sample))
        if layer.fit_indices is not None:
            arrays.append((prefix + "fit_indices", layer.fit_indices))
        layer_headers.append(
            {
                "kernels": [k.canonical() for k in layer.kernels],
                "total_mean": layer.kpca.total_mean,
                "subsampled": layer.fit_indices is not None,
            }
        )
    clf = model.classifier
    arrays.append(("classifier/classes", clf.classes))
    arrays.append(("classifier/support", clf.support))
    arrays.append(("classifier/dual_coef", clf.dual_coef))
    arrays.append(("classifier/biases", clf.biases))
    arrays.append(("classifier/support_vectors", clf.support_vectors))
    header = {
        "format": "mlmkl-model",
        "layers": layer_headers,
        "classifier": {
            "kernel": clf.kernel.canonical() if clf.kernel is not None else None,
            "c": clf.c,
        },
        "metadata": model.metadata,
        "arrays": [name for name, _ in arrays],
    }
    return header, arrays


def save(model, path):
    """Write a model file; byte-identical for equal models."""
    header, arrays = _manifest(model)
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    payload = io.BytesIO()
    for _, arr in arrays:
        np.lib.format.write_array(
            payload, np.ascontiguousarray(arr), version=(1, 0), allow_pickle=False
        )
    payload = payload.getvalue()
    total = 8 + _PREFIX.size + len(header_bytes) + len(payload) + 32
    body = _MAGIC + _PREFIX.pack(_VERSION, len(header_bytes), total) + header_bytes + payload
    digest = hashlib.sha256(body).digest()
    with open(path, "wb") as fh:
        fh.write(body)
        fh.write(digest)


def load(path):
    """Read a model file back; inverse of ``save``."""
    with open(path, "rb") as fh:
        blob = fh.read()
    start = 8 + _PREFIX.size
    if len(blob) < start:
        raise TruncatedModelError("file is only %d bytes" % len(blob))
    if blob[:8] != _MAGIC:
        raise ModelIOError("not a model file (bad magic)")
    version, header_len, total = _PREFIX.unpack(blob[8:start])
    if version != _VERSION:
        raise UnsupportedVersionError(
            "file has format version %d, this build reads %d" % (version, _VERSION)
        )
    if len(blob) < total:
        raise TruncatedModelError(
            "file is %d bytes but declares %d" % (len(blob), total)
        )
    if len(blob) > total:
        raise ModelIOError("%d bytes of trailing data" % (len(blob) - total))
    if hashlib.sha256(blob[: total - 32]).digest() != blob[total - 32 :]:
        raise ChecksumError("content does not match its sha256 digest")
    try:
        header = json.loads(blob[start : start + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelIOError("unreadable header: %s" % exc) from None
    stream = io.BytesIO(blob[start + header_len : total - 32])
    arrays = {}
    try:
        for name in header["arrays"]:
            arrays[name] = np.lib.format.read_array(stream, allow_pickle=False)
        layers = []
        for index, lh in enumerate(header["layers"]):
            prefix = "layer%d/" % index
            kernels = tuple(parse_kernel(s) for s in lh["kernels"])
            model_k = KpcaModel(
                alphas=arrays[prefix + "alphas"],
                eigenvalues=arrays[prefix + "eigenvalues"],
                row_means=arrays[prefix + "row_means"],
                total_mean=float(lh["total_mean"]),
            )
            layers.append(
                LayerModel(
                    kernels=kernels,
                    weights=KernelWeights(arrays[prefix + "weights"]),
                    kpca=model_k,
                    scores=arrays[prefix + "scores"],
                    selected=arrays[prefix + "selected"],
                    fit_sample=arrays[prefix + "fit_sample"],
                    fit_indices=arrays.get(prefix + "fit_indices"),
                )
            )
        ch = header["classifier"]
        machine = SvmModel(
            classes=arrays["classifier/classes"],
            support=arrays["classifier/support"],
            dual_coef=arrays["classifier/dual_coef"],
            biases=arrays["classifier/biases"],
            c=float(ch["c"]),
            kernel=parse_kernel(ch["kernel"]) if ch["kernel"] is not None else None,
            support_vectors=arrays["classifier/support_vectors"],
        )
        return MlmklModel(layers=layers, classifier=machine, metadata=header["metadata"])
    except (KeyError, ValueError, IndexError) as exc:
        raise ModelIOError("malformed model content: %s" % exc) from None
