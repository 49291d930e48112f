import json

import pytest

from viewfuse.config import PipelineConfig
from viewfuse.demo import build_demo_corpus
from viewfuse.errors import ConfigError
from viewfuse.gating import gate
from viewfuse.model import VIEW_ORDER, Viewpoint
from viewfuse.pipeline import (
    annotate_object,
    build_providers,
    load_corpus_entries,
    record_to_doc,
    record_to_json,
    run_corpus,
    run_pipeline,
    stable_seed,
)
from viewfuse.providers.mock import build_mock_providers
from viewfuse.synthesis import ViewSelection, assemble_global


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    build_demo_corpus(root, num_objects=4, seed=0, mismatched=[3])
    return root


def load_manifests(corpus_dir, cfg=None):
    manifests, failures = load_corpus_entries(corpus_dir, cfg or PipelineConfig())
    assert failures == []
    return manifests


def test_stable_seed_is_stable_and_distinct():
    assert stable_seed("a", 1) == stable_seed("a", 1)
    assert stable_seed("a", 1) != stable_seed("a", 2)
    assert stable_seed("a", 12) != stable_seed("a1", 2)


def test_single_object_record_structure(corpus):
    cfg = PipelineConfig(seed=42)
    providers, _, _ = build_providers(cfg, mock=True, corpus_dir=corpus)
    manifest = load_manifests(corpus)[0]
    record = annotate_object(manifest, cfg, providers)

    assert record.status == "ok"
    assert len(record.views) == 6
    for vr in record.views:
        assert len(vr.candidates) == cfg.num_candidates
        canonical = [c for c in vr.candidates if c.relevance_weight is not None]
        assert canonical, "every view needs at least one canonical candidate"
        assert sum(c.relevance_weight for c in canonical) == pytest.approx(1.0, abs=1e-9)
        for c in vr.candidates:
            assert (c.relevance_weight is None) == (c.composite_score is None)
        assert sum(vr.bandit.pulls) == cfg.rounds
        assert len(vr.bandit.trace) == cfg.rounds
        assert vr.bandit.selected_candidate_index in vr.bandit.arm_candidate_indices
        chosen = vr.candidates[vr.bandit.selected_candidate_index]
        assert vr.selection.text == chosen.text
        assert vr.selection.score == chosen.composite_score
    assert record.global_annotation is not None
    assert record.gating is not None
    assert set(record.stage_timings) == {"generation", "aggregation", "synthesis", "gating"}


def test_records_are_deterministic(corpus):
    cfg = PipelineConfig(seed=42)
    manifests = load_manifests(corpus)
    a = run_pipeline(manifests, cfg, build_providers(cfg, True, corpus)[0])
    b = run_pipeline(manifests, cfg, build_providers(cfg, True, corpus)[0])
    assert [record_to_json(r) for r in a] == [record_to_json(r) for r in b]


def test_seed_changes_records(corpus):
    manifests = load_manifests(corpus)
    cfg_a, cfg_b = PipelineConfig(seed=1), PipelineConfig(seed=2)
    a = run_pipeline(manifests, cfg_a, build_providers(cfg_a, True, corpus)[0])
    b = run_pipeline(manifests, cfg_b, build_providers(cfg_b, True, corpus)[0])
    assert [record_to_json(r) for r in a] != [record_to_json(r) for r in b]


def test_worker_count_does_not_change_output(corpus):
    manifests = load_manifests(corpus)
    cfg1 = PipelineConfig(seed=42, workers=1)
    cfg4 = PipelineConfig(seed=42, workers=4)
    a = run_pipeline(manifests, cfg1, build_providers(cfg1, True, corpus)[0])
    b = run_pipeline(manifests, cfg4, build_providers(cfg4, True, corpus)[0])
    assert [record_to_json(r) for r in a] == [record_to_json(r) for r in b]


def test_caching_is_transparent(corpus, tmp_path):
    manifests = load_manifests(corpus)
    plain_cfg = PipelineConfig(seed=42)
    cached_cfg = PipelineConfig(seed=42, cache_dir=str(tmp_path / "cache"))
    plain = run_pipeline(manifests, plain_cfg, build_providers(plain_cfg, True, corpus)[0])
    cached = run_pipeline(manifests, cached_cfg, build_providers(cached_cfg, True, corpus)[0])
    assert [record_to_json(r) for r in plain] == [record_to_json(r) for r in cached]


def test_warm_cache_performs_zero_provider_calls(corpus, tmp_path):
    cfg = PipelineConfig(seed=42, cache_dir=str(tmp_path / "cache"))
    manifests = load_manifests(corpus)
    providers, backing, _ = build_providers(cfg, mock=True, corpus_dir=corpus)
    run_pipeline(manifests, cfg, providers)
    assert backing.generator.calls > 0

    providers2, backing2, _ = build_providers(cfg, mock=True, corpus_dir=corpus)
    run_pipeline(manifests, cfg, providers2)
    assert backing2.generator.calls == 0
    assert backing2.text_embedder.calls == 0
    assert backing2.image_embedder.calls == 0
    assert backing2.cloud_embedder.calls == 0


def test_record_is_replayable_from_its_own_doc(corpus):
    cfg = PipelineConfig(seed=42)
    providers, _, _ = build_providers(cfg, mock=True, corpus_dir=corpus)
    manifest = load_manifests(corpus)[0]
    doc = record_to_doc(annotate_object(manifest, cfg, providers))

    selections = [
        ViewSelection(
            view=Viewpoint.from_string(s["view"]), text=s["text"], score=s["score"]
        )
        for s in doc["global"]["per_view"]
    ]
    replayed = assemble_global(selections, doc["global"]["w_fb"])
    assert replayed.core_sentence == doc["global"]["core_sentence"]
    assert replayed.supplementary == doc["global"]["supplementary"]
    assert replayed.full_text == doc["global"]["full_text"]
    assert replayed.score_global == doc["global"]["score_global"]

    g = doc["gating"]
    assert g["passed"] == (g["similarity"] >= g["threshold"])


def test_record_doc_excludes_wall_clock(corpus):
    cfg = PipelineConfig(seed=42)
    providers, _, _ = build_providers(cfg, mock=True, corpus_dir=corpus)
    record = annotate_object(load_manifests(corpus)[0], cfg, providers)
    assert record.stage_timings  # measured in memory
    assert "timing" not in record_to_json(record)
    assert "seconds" not in record_to_json(record)


def test_corrupt_manifest_becomes_failure_entry(tmp_path):
    build_demo_corpus(tmp_path, num_objects=3, seed=1)
    (tmp_path / "obj_zz_broken.json").write_text("{not json at all")
    cfg = PipelineConfig(seed=0)
    manifests, failures = load_corpus_entries(tmp_path, cfg)
    assert len(manifests) == 3
    assert len(failures) == 1
    assert failures[0].object_id == "obj_zz_broken"
    assert failures[0].status == "failed"
    assert "ParseError" in failures[0].error

    doc = record_to_doc(failures[0])
    assert doc["status"] == "failed"
    assert doc["views"] is None


def test_run_corpus_writes_all_outputs(tmp_path):
    corpus_dir = tmp_path / "corpus"
    out_dir = tmp_path / "out"
    build_demo_corpus(corpus_dir, num_objects=4, seed=0, mismatched=[1])
    (corpus_dir / "obj_zz_bad.json").write_text("[]")

    cfg = PipelineConfig(seed=42)
    summary = run_corpus(corpus_dir, cfg, mock=True, out_dir=out_dir)

    assert summary["objects"] == 5
    assert summary["ok"] == 4
    assert summary["failed"] == 1
    assert summary["flagged"] == 1

    records = sorted(p.name for p in (out_dir / "records").iterdir())
    assert records == [
        "obj_000.json", "obj_001.json", "obj_002.json", "obj_003.json", "obj_zz_bad.json",
    ]
    flagged = [json.loads(l) for l in (out_dir / "flagged.jsonl").read_text().splitlines()]
    assert [f["object_id"] for f in flagged] == ["obj_001"]
    assert all(f["similarity"] < cfg.gate_threshold for f in flagged)

    stored_summary = json.loads((out_dir / "run_summary.json").read_text())
    assert stored_summary["objects"] == 5
    assert stored_summary["config"]["seed"] == 42
    assert set(stored_summary["stage_seconds"]) == {
        "aggregation", "gating", "generation", "synthesis",
    }


def test_gating_decision_in_record_matches_direct_gate(corpus):
    cfg = PipelineConfig(seed=42)
    providers, _, _ = build_providers(cfg, mock=True, corpus_dir=corpus)
    manifest = load_manifests(corpus)[0]
    record = annotate_object(manifest, cfg, providers)
    text_emb = providers.text_embedder.embed_text(record.global_annotation.full_text)
    cloud_emb = providers.cloud_embedder.embed_cloud(manifest.point_cloud)
    direct = gate(text_emb, cloud_emb, cfg.gate_threshold)
    assert record.gating == direct


def test_matched_objects_pass_mismatched_fail(tmp_path):
    corpus_dir = tmp_path / "corpus"
    build_demo_corpus(corpus_dir, num_objects=6, seed=3, mismatched=[0, 4])
    cfg = PipelineConfig(seed=7)
    providers, _, _ = build_providers(cfg, mock=True, corpus_dir=corpus_dir)
    records = run_pipeline(load_manifests(corpus_dir, cfg), cfg, providers)
    by_id = {r.object_id: r for r in records}
    assert not by_id["obj_000"].gating.passed
    assert not by_id["obj_004"].gating.passed
    for oid in ("obj_001", "obj_002", "obj_003", "obj_005"):
        assert by_id[oid].gating.passed, oid


def test_build_providers_http_mode_requires_all_roles():
    cfg = PipelineConfig(
        providers={"generate": {"endpoint": "https://x", "request_template": {}}}
    )
    with pytest.raises(ConfigError) as err:
        build_providers(cfg, mock=False)
    assert "embed_text" in str(err.value)


def test_build_providers_http_mode_rejects_bad_keys():
    roles = {
        role: {"endpoint": "https://x", "request_template": {}, "bogus_field": 1}
        for role in ("generate", "embed_text", "embed_image", "embed_cloud")
    }
    with pytest.raises(ConfigError):
        build_providers(PipelineConfig(providers=roles), mock=False)


def test_missing_corpus_dir_rejected(tmp_path):
    with pytest.raises(ConfigError):
        load_corpus_entries(tmp_path / "nope", PipelineConfig())


def test_record_files_have_sorted_keys_and_trailing_newline(corpus):
    cfg = PipelineConfig(seed=42)
    providers, _, _ = build_providers(cfg, mock=True, corpus_dir=corpus)
    text = record_to_json(annotate_object(load_manifests(corpus)[0], cfg, providers))
    assert text.endswith("\n")
    doc = json.loads(text)
    assert list(doc) == sorted(doc)
