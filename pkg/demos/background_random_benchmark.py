#!/usr/bin/env python3

"""
Desk-scale run on the background-random digit benchmark
=======================================================

Compares a two-layer stack with learned kernel combinations against the
same stack restricted to a single arc-cosine kernel per layer.  Needs
the benchmark files on disk:

    MLMKL_DATA_DIR=/path/to/data python3 demos/background_random_benchmark.py

where the directory (or any subdirectory) contains
mnist_background_random_train.amat and mnist_background_random_test.amat.
Runs at a reduced budget: 2000 train / 500 validation / 2000 test rows,
fit subsample 1000.  Expect minutes, not hours.
"""

import os
import sys
import time
from dataclasses import replace

import numpy as np

from mlmkl import data, pipeline
from mlmkl.kernels import parse_kernel
from mlmkl.pipeline import LayerConfig


def find_file(root, role):
    want = "mnist_background_random_%s.amat" % role
    for dirpath, _, names in os.walk(root):
        if want in names:
            return os.path.join(dirpath, want)
    return None


root = os.environ.get("MLMKL_DATA_DIR")
if not root or not os.path.isdir(root):
    print("set MLMKL_DATA_DIR to the directory holding the benchmark files")
    sys.exit(0)
train_path = find_file(root, "train")
test_path = find_file(root, "test")
if train_path is None or test_path is None:
    print("benchmark .amat files not found under %s" % root)
    sys.exit(0)

print("loading %s" % train_path)
train_all = data.load_amat(train_path)
test_all = data.load_amat(test_path)
train_ds, valid_ds = data.split(train_all, 2000, 500, seed=0)
test_ds = data.Dataset(test_all.features[:2000], test_all.labels[:2000])

arc = parse_kernel("arccos(n=1,L=2)")
multi = [
    LayerConfig(kernels=(arc, parse_kernel("rbf(gamma=0.005)"),
                         parse_kernel("rbf(gamma=0.02)")), width=60),
    LayerConfig(kernels=(arc, parse_kernel("rbf(gamma=1)"),
                         parse_kernel("rbf(gamma=10)")), width=60),
]
single = [replace(cfg, kernels=(arc,)) for cfg in multi]


def run(configs, label):
    start = time.perf_counter()
    model = pipeline.fit(
        train_ds.features, train_ds.labels, configs, subsample=1000, seed=0
    )
    rep_train = pipeline.transform(model, train_ds.features)
    rep_valid = pipeline.transform(model, valid_ds.features)
    rep_test = pipeline.transform(model, test_ds.features)
    kernel = parse_kernel("arccos(n=1,L=1)")

    best = None
    for c in (0.1, 1.0, 10.0, 100.0):
        machine = pipeline.train_classifier(rep_train, train_ds.labels, kernel, c=c)
        err = 100.0 * np.mean(
            pipeline.classifier_predict(machine, rep_valid) != valid_ds.labels
        )
        print("  %s C=%-5g validation error %.2f%%" % (label, c, err))
        if best is None or err < best[0]:
            best = (err, c, machine)
    _, c, machine = best
    test_err = 100.0 * np.mean(
        pipeline.classifier_predict(machine, rep_test) != test_ds.labels
    )
    seconds = time.perf_counter() - start
    for i, layer in enumerate(model.layers, 1):
        mus = "  ".join(
            "%s %.3f" % (k.canonical(), w)
            for k, w in zip(layer.kernels, layer.weights.mu)
        )
        print("  %s layer %d: %s" % (label, i, mus))
    print("%s: test error %.2f%% (C=%g, %.0fs)\n" % (label, test_err, c, seconds))
    return test_err


print("\nlearned combination:")
multi_err = run(multi, "multi")
print("single arc-cosine:")
single_err = run(single, "single")

print("summary: multi %.2f%% vs single %.2f%% (%+.2f points)"
      % (multi_err, single_err, multi_err - single_err))
