import json
import math

import pytest

import saelstm


def test_param_counts():
    counts = saelstm.param_counts()
    assert counts["sae"] == [1050, 3800, 663, 700, 3825, 988]
    assert sum(counts["sae"]) == 11026
    assert counts["classifier"] == [122304, 507]
    assert sum(counts["classifier"]) == 122811


def test_weighted_average_and_softmax():
    per_class = [(0.971879, 0.986131, 0.978953), (0.991466, 0.978024, 0.984699), (0.987558, 0.994367, 0.990951)]
    p, r, f = saelstm.weighted_average(per_class, [11320, 18293, 11894])
    assert abs(p - 0.985004) <= 5e-6
    assert abs(r - 0.984918) <= 5e-6
    assert abs(f - 0.984924) <= 5e-6
    probs = saelstm.softmax([1.0, 2.0, 3.0])
    assert math.isclose(sum(probs), 1.0, abs_tol=1e-12)


def test_confusion_and_report():
    cm = saelstm.confusion_matrix([0, 0, 1, 2], [0, 1, 1, 2], 3)
    assert cm == [[1, 1, 0], [0, 1, 0], [0, 0, 1]]
    report = saelstm.classification_report([0, 0, 1, 2], [0, 1, 1, 2], ["A", "S", "SS"])
    assert report["accuracy"] == 0.75
    with pytest.raises(saelstm.DomainError):
        saelstm.confusion_matrix([0], [5], 3)


def test_pipeline_round_trip(tmp_path):
    data = tmp_path / "data.csv"
    saelstm.write_synthetic(str(data), 300, 2)
    out = tmp_path / "out"
    report = saelstm.run_pipeline(
        {"sae": {"epochs": 2}, "lstm": {"epochs": 2, "units": 16}}, data=data, output_dir=out, seed=3
    )
    assert report["artifact_version"] == saelstm.ARTIFACT_VERSION
    assert 0.0 <= report["accuracy"] <= 1.0
    assert json.loads((out / "report.json").read_text())["accuracy"] == report["accuracy"]

    model = saelstm.Model.load(str(out / "model.bin"))
    assert model.has_classifier
    assert model.sae_params == 11026
    assert model.class_labels == ["A", "S", "SS"]
    rows = [[0.5] * 13, [0.1] * 13]
    assert len(model.encode(rows)[0]) == 13
    labels, probs = model.predict(rows)
    assert len(labels) == 2
    assert all(math.isclose(sum(p), 1.0, abs_tol=1e-12) for p in probs)

    scores = model.importance()
    assert len(scores) == 13
    assert math.isclose(sum(s for _, s in scores), 1.0, abs_tol=1e-12)

    metrics = saelstm.evaluate(model, data)
    assert sum(metrics["per_class"][c]["support"] for c in ("A", "S", "SS")) == 300

    model.save(str(tmp_path / "copy.bin"))
    assert saelstm.Model.load(str(tmp_path / "copy.bin")).predict(rows) == (labels, probs)


def test_errors(tmp_path):
    with pytest.raises(saelstm.ConfigError):
        saelstm.run_pipeline({"test_fraction": 1.5}, data=tmp_path / "missing.csv", output_dir=tmp_path / "o")
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"XXXXXXXXjunk")
    with pytest.raises(saelstm.FormatError):
        saelstm.Model.load(str(bad))
    assert issubclass(saelstm.IntegrityError, saelstm.Error)
    assert issubclass(saelstm.Error, RuntimeError)
