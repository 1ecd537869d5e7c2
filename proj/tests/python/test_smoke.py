"""Smoke tests for the python bindings."""

import json
import math
import os
import subprocess
import tempfile
from pathlib import Path

import pytest

import scaffcite


def test_tokenize_keeps_markers():
    assert scaffcite.tokenize("We use X.") == ["we", "use", "x", "."]
    assert scaffcite.tokenize("described in [4].") == ["described", "in", "[4]", "."]


def test_marker_detection_and_stripping():
    spans = scaffcite.detect_citation_markers(
        "Similar results were reported in the study of Lee et al (2010)."
    )
    assert [s["text"] for s in spans] == ["Lee et al (2010)"]
    assert spans[0]["kind"] == "name_year"

    stripped = scaffcite.strip_citation_markers("A model described in [4].")
    assert stripped == "A model described in."
    assert scaffcite.detect_citation_markers(stripped) == []


def test_section_normalization():
    assert scaffcite.normalize_section_title("5. Experiments") == "experiments"
    assert scaffcite.normalize_section_title("Background") == "related work"
    assert scaffcite.normalize_section_title("Acknowledgments") is None


def test_aggregation_arithmetic():
    kept = scaffcite.aggregate_annotations(
        [("w1", "Method", 1.0), ("w2", "Method", 1.0), ("w3", "Method", 1.0)]
    )
    assert kept == ("Method", 1.0)

    assert (
        scaffcite.aggregate_annotations(
            [("w1", "Method", 1.0), ("w2", "Method", 1.0), ("w3", "Background", 1.0)]
        )
        is None
    )

    qualified, trust = scaffcite.qualify_annotator(
        {f"q{i}": "A" for i in range(4)},
        {"q0": "A", "q1": "A", "q2": "A", "q3": "B"},
    )
    assert qualified and trust == 0.75


def test_metrics():
    f1 = scaffcite.macro_f1(["A", "A", "B"], ["A", "B", "B"], ["A", "B"])
    assert math.isclose(f1, 2.0 / 3.0, rel_tol=1e-12)

    report = scaffcite.classification_report(["A", "A", "B"], ["A", "B", "B"], ["A", "B"])
    assert math.isclose(report["macro"]["f1"], 2.0 / 3.0, rel_tol=1e-12)
    assert report["per_class"][0]["precision"] == 1.0

    with pytest.raises(scaffcite.ScaffciteError):
        scaffcite.macro_f1(["A"], ["C"], ["A", "B"])


def test_gradcheck_ops():
    errors = scaffcite.gradcheck("ops")
    assert errors and max(errors.values()) < 1e-4


@pytest.mark.skipif("SCAFFCITE_CLI" not in os.environ, reason="needs the built CLI")
def test_model_round_trip_through_cli():
    cli = os.environ["SCAFFCITE_CLI"]
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        labels = ["alpha", "beta"]
        rows = [
            ("the quick brown alpha token", "alpha"),
            ("a slow beta marker drifts", "beta"),
            ("alpha signals appear here", "alpha"),
            ("beta cues dominate this one", "beta"),
        ] * 4
        for name in ("train.jsonl", "dev.jsonl"):
            with open(tmp / name, "w") as out:
                for i, (text, label) in enumerate(rows):
                    out.write(json.dumps({"string": text, "label": label, "id": f"{name}-{i}"}))
                    out.write("\n")
        subprocess.run(
            [
                cli, "train",
                "--data.train", str(tmp / "train.jsonl"),
                "--data.dev", str(tmp / "dev.jsonl"),
                "--data.labels", "alpha,beta",
                "--model.embed_dim", "8",
                "--model.hidden_dim", "6",
                "--model.fine_tune_embeddings", "true",
                "--train.max_epochs", "10",
                "--train.patience", "10",
                "--train.batch_size", "4",
                "--out.dir", str(tmp / "run"),
            ],
            check=True,
            capture_output=True,
        )
        model = scaffcite.Model(str(tmp / "run" / "checkpoint.ckpt"))
        assert model.labels == labels
        prediction = model.predict("alpha signals appear here")
        assert prediction["label"] in labels
        assert math.isclose(sum(prediction["probabilities"].values()), 1.0, rel_tol=1e-9)
        assert math.isclose(sum(w for _, w in prediction["attention"]), 1.0, rel_tol=1e-9)
