import copy
import json
import pathlib

import jsonschema
import numpy as np
import pytest

import vicorpus

ROOT = pathlib.Path(__file__).resolve().parents[2]
REPORTS = sorted((ROOT / "fixtures" / "reports").glob("*.json"))
REPORT_SCHEMA = json.loads((ROOT / "schemas" / "report.schema.json").read_text())
RECORD_SCHEMA = json.loads((ROOT / "schemas" / "record.schema.json").read_text())


def load(path):
    return json.loads(path.read_text())


def mutations(report):
    """A few damaged copies of a valid report."""
    out = []
    r = copy.deepcopy(report)
    del r["chars"]
    out.append(r)
    r = copy.deepcopy(report)
    r["page_width"] = "wide"
    out.append(r)
    if report["chars"]:
        r = copy.deepcopy(report)
        r["chars"][0]["rect"]["w"] = None
        out.append(r)
        r = copy.deepcopy(report)
        del r["chars"][0]["para_path"]
        out.append(r)
    r = copy.deepcopy(report)
    r["regions"] = [{"kind": "video"}]
    out.append(r)
    return out


def test_version():
    assert vicorpus.__version__ == "0.1.0"


@pytest.mark.parametrize("path", REPORTS, ids=lambda p: p.name)
def test_schema_verdicts_agree_with_jsonschema(path):
    report = load(path)
    jsonschema.validate(report, REPORT_SCHEMA)
    assert vicorpus.report_schema_violations(json.dumps(report)) == []
    for bad in mutations(report):
        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate(bad, REPORT_SCHEMA)
        assert vicorpus.report_schema_violations(json.dumps(bad)) != []


@pytest.mark.parametrize("path", REPORTS, ids=lambda p: p.name)
def test_annotated_records_match_record_schema(path):
    record = vicorpus.annotate_report(load(path), doc_id=path.stem, fonts_dir=str(ROOT / "fixtures" / "fonts"))
    record["image"] = "images/00000/x.png"
    jsonschema.validate(record, RECORD_SCHEMA)
    assert vicorpus.record_schema_violations(json.dumps(record)) == []
    text = "".join(c["text"] for c in record["chars"])
    assert text == "".join(w["text"] for w in record["words"] if not w["is_latex"] or w["char_indices"])


def test_plain_text_record():
    record = vicorpus.annotate_report(load(ROOT / "fixtures" / "reports" / "01_plain_text.json"))
    assert " ".join(w["text"] for w in record["words"]) == "The quick brown fox jumps over the lazy dog."
    assert len(record["lines"]) == 1


def test_pca_matches_numpy():
    rng = np.random.default_rng(3)
    x = rng.poisson(2.0, size=(60, 12)).astype(float) * np.linspace(3, 0.5, 12)
    model = vicorpus.fit_pca(x, 4)
    values, vectors = np.linalg.eigh(np.cov(x, rowvar=False))
    order = np.argsort(values)[::-1][:4]
    np.testing.assert_allclose(model["explained_variance"], values[order], rtol=1e-9, atol=1e-9)
    for i, j in enumerate(order):
        assert abs(abs(model["components"][i] @ vectors[:, j]) - 1) < 1e-9
    np.testing.assert_allclose(model["mean"], x.mean(axis=0))


def test_pca_rank_deficient():
    t = np.arange(1, 41, dtype=float)
    x = np.stack([1 + t, 2 + 2 * t, 0.5 + 3 * t], axis=1)
    with pytest.raises(vicorpus.InputError):
        vicorpus.fit_pca(x, 2)
    model = vicorpus.fit_pca(x, 2, allow_rank_deficient=True)
    assert model["rank"] == 1
    assert model["explained_variance"][1] < 1e-10


def test_helpers():
    assert vicorpus.sha256_hex(b"abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    assert vicorpus.derive_seed(42, "a") == vicorpus.derive_seed(42, "a")
    assert vicorpus.derive_seed(42, "a") != vicorpus.derive_seed(42, "b")


def test_cli_and_validator(tmp_path):
    code, out, _ = vicorpus.run_cli(["--help"])
    assert code == 0 and "--workers" in out
    code, _, _ = vicorpus.run_cli(["build", "--input", "x", "--out", "y", "--input-format", "xml"])
    assert code == 2
    checked, violations = vicorpus.validate_corpus(str(tmp_path))
    assert checked == 0 and violations
    with pytest.raises(ValueError):
        vicorpus.report_schema_violations("{not json")
