import json

import pytest

from mlmkl.config import (
    DEFAULT_SUBSAMPLE,
    SVM_C_GRID,
    config_to_dict,
    load_config,
    parse_config,
)
from mlmkl.errors import ConfigError

MINIMAL = {"layers": [{"kernels": ["linear"], "width": 2}]}


def layered(**extra):
    raw = {"layers": [
        {"kernels": ["arccos(n=1,L=2)", "rbf(gamma=0.5)"], "width": 10},
        {"kernels": ["linear"], "width": 4, "gamma": 0.3,
         "basis_size": 5, "kpca_components": 9},
    ]}
    raw.update(extra)
    return raw


def test_minimal_defaults():
    cfg = parse_config(MINIMAL)
    assert len(cfg.layers) == 1
    layer = cfg.layers[0]
    assert layer.width == 2
    assert layer.components == 6  # three times the width when unset
    assert layer.gamma == 0.1
    assert layer.basis_size == 10
    assert cfg.subsample == DEFAULT_SUBSAMPLE
    assert cfg.split is None
    assert cfg.cv is None
    assert cfg.classifier.kernel.canonical() == "arccos(n=1,L=1)"
    assert cfg.classifier.c == 1.0


def test_explicit_layer_values():
    cfg = parse_config(layered())
    assert [k.canonical() for k in cfg.layers[0].kernels] == [
        "arccos(n=1,L=2)", "rbf(gamma=0.5)"]
    second = cfg.layers[1]
    assert second.components == 9
    assert second.gamma == 0.3
    assert second.basis_size == 5


def test_split_and_classifier_parsing():
    raw = layered(
        split={"train": 100, "valid": 25},
        classifier={"kernel": "rbf(gamma=2)", "C": 10, "tol": 1e-4},
        subsample=50,
        probe_cap=80,
    )
    cfg = parse_config(raw)
    assert cfg.split == (100, 25)
    assert cfg.classifier.kernel.canonical() == "rbf(gamma=2)"
    assert cfg.classifier.c == 10.0
    assert cfg.subsample == 50
    assert cfg.probe_cap == 80


def test_cv_parsing():
    raw = layered(cv={
        "kernels": [["linear"], ["rbf(gamma=1)", "linear"]],
        "gamma": [0.05, 0.1],
        "width": [4, 8],
        "svm_c": [1, 10],
        "repeats": 2,
    })
    cv = parse_config(raw).cv
    assert len(cv.kernel_sets) == 2
    assert [k.canonical() for k in cv.kernel_sets[1]] == ["rbf(gamma=1)", "linear"]
    assert cv.gammas == (0.05, 0.1)
    assert cv.widths == (4, 8)
    assert cv.svm_c == (1.0, 10.0)
    assert cv.repeats == 2


def test_cv_defaults():
    cv = parse_config(layered(cv={})).cv
    assert cv.kernel_sets == ()
    assert cv.gammas == ()
    assert cv.widths == ()
    assert cv.svm_c == SVM_C_GRID
    assert cv.repeats == 3


def test_unknown_keys_rejected_everywhere():
    bad = [
        {"layers": [{"kernels": ["linear"], "width": 2}], "subsmaple": 1},
        {"layers": [{"kernels": ["linear"], "width": 2, "wdith": 3}]},
        layered(classifier={"kernl": "linear"}),
        layered(cv={"gammas": [0.1]}),
        layered(split={"train": 5, "vlaid": 2}),
    ]
    for raw in bad:
        with pytest.raises(ConfigError):
            parse_config(raw)


def test_structural_errors():
    for raw in (
        [],
        {},
        {"layers": []},
        {"layers": [{"width": 2}]},
        {"layers": [{"kernels": ["linear"]}]},
        {"layers": [{"kernels": [], "width": 2}]},
        {"layers": [{"kernels": ["linear"], "width": 2}], "split": {"valid": 3}},
    ):
        with pytest.raises(ConfigError):
            parse_config(raw)


def test_bad_kernel_text_is_config_error():
    with pytest.raises(ConfigError):
        parse_config({"layers": [{"kernels": ["sigmoid"], "width": 2}]})
    with pytest.raises(ConfigError):
        parse_config(layered(classifier={"kernel": "rbf(alpha=1)"}))


def test_booleans_are_not_numbers():
    with pytest.raises(ConfigError):
        parse_config({"layers": [{"kernels": ["linear"], "width": True}]})
    with pytest.raises(ConfigError):
        parse_config(layered(classifier={"C": True}))


def test_numeric_bounds():
    with pytest.raises(ConfigError):
        parse_config({"layers": [{"kernels": ["linear"], "width": 0}]})
    with pytest.raises(ConfigError):
        parse_config(layered(classifier={"C": -1}))
    with pytest.raises(ConfigError):
        parse_config(layered(cv={"svm_c": []}))
    with pytest.raises(ConfigError):
        parse_config(layered(subsample=-1))


def test_load_config_and_bad_json(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(layered(subsample=17)))
    cfg = load_config(path)
    assert cfg.subsample == 17
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(path)


def test_snapshot_reparses_to_same_config():
    raw = layered(split={"train": 40, "valid": 10},
                  classifier={"kernel": "poly(degree=2)", "C": 5})
    cfg = parse_config(raw)
    snap = config_to_dict(cfg)
    again = parse_config(json.loads(json.dumps(snap)))
    assert config_to_dict(again) == snap
    assert again.split == cfg.split
    assert again.classifier.kernel == cfg.classifier.kernel
