import json

import pytest

from biomt.errors import InvalidConfig, IOFailure
from biomt.runner import PipelineConfig, canonical_hash, run_pipeline
from synthetic import write_workspace


def _files(out):
    return {p.relative_to(out).as_posix(): p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()}


def test_toy_run(tmp_path):
    cfg = PipelineConfig.load(write_workspace(tmp_path, n=60, dev_size=5, with_eval=False,
                                              second_corpus=True))
    summary = run_pipeline(cfg)
    out = tmp_path / "out"
    assert summary.stage("ingest")["output"] == 80
    assert summary.statistics["corpora"]["totals"]
    filt = summary.stage("filter")
    assert filt["kept"] + filt["removed"] == filt["input"] == 80
    dd = summary.stage("dedup")
    assert dd["kept"] + dd["removed"] == dd["input"] == filt["kept"]
    assert filt["report"]["matched_by_pii"] == 1 and filt["report"]["matched_by_title"] == 1
    part = summary.stage("partition")
    assert part["dev"] == 5 and part["terms_appended"] == 2
    assert len((out / "dev.src").read_text().splitlines()) == 5
    train_lines = (out / "train.tgt").read_text().splitlines()
    assert train_lines[-2:] == ["headache", "fever"]
    assert "cefalea" not in (out / "dev.src").read_text()
    manifest = json.loads((out / "dev.manifest.json").read_text())
    assert "seed=42" in manifest["provenance_note"]
    assert json.loads((out / "run_summary.json").read_text())["config_hash"] == cfg.config_hash


def test_reruns_are_byte_identical(tmp_path):
    cfg = write_workspace(tmp_path, n=80, dev_size=8)
    run_pipeline(PipelineConfig.load(cfg))
    first = _files(tmp_path / "out")
    run_pipeline(PipelineConfig.load(cfg))
    assert _files(tmp_path / "out") == first
    assert "model/tt.tsv" in first and "bleu.json" in first


def test_missing_input_names_path(tmp_path):
    cfg = write_workspace(tmp_path, n=20, dev_size=2, with_eval=False)
    (tmp_path / "pubmed.tsv").unlink()
    with pytest.raises(IOFailure) as exc:
        run_pipeline(PipelineConfig.load(cfg))
    assert "pubmed.tsv" in str(exc.value)
    assert not (tmp_path / "out").exists()


def test_failure_writes_partial_summary(tmp_path):
    cfg = write_workspace(tmp_path, n=20, dev_size=50, with_eval=False)
    with pytest.raises(Exception):
        run_pipeline(PipelineConfig.load(cfg))
    partial = json.loads((tmp_path / "out" / "run_summary.partial.json").read_text())
    assert [s["stage"] for s in partial["stages"]] == ["ingest", "filter", "dedup", "append-terms"]
    assert partial["error"]["type"] == "InvalidSpec"


@pytest.mark.parametrize("change", [
    lambda d: d.update(stages=[]),
    lambda d: d["stages"].reverse(),
    lambda d: d["stages"].append({"stage": "dedup"}),
    lambda d: d["stages"].append({"stage": "translate"}),
    lambda d: d.pop("partition"),
    lambda d: d.pop("pair"),
])
def test_invalid_configs(tmp_path, change):
    raw = json.loads(write_workspace(tmp_path, n=10, dev_size=2).read_text())
    change(raw)
    with pytest.raises(InvalidConfig):
        PipelineConfig.from_dict(raw, tmp_path)


def test_canonical_hash_ignores_key_order():
    assert canonical_hash({"a": 1, "b": [1, 2]}) == canonical_hash({"b": [1, 2], "a": 1})
    assert canonical_hash({"a": 1}) != canonical_hash({"a": 2})
    assert len(canonical_hash({})) == 16
