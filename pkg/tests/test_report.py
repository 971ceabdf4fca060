import json

import pytest

from reusedetect import (IntegrityError, build_birthmark, build_report, detect,
                         dumps_report, lcs_length, loads_report, parse_program_ir,
                         render_dot)
from synth import insn, make_host_doc, make_library_doc, validate_dot


def bm(doc):
    return build_birthmark(parse_program_ir(doc))


def library_host_report(perturb=False, n_noise=12):
    lib = make_library_doc()
    host = make_host_doc(lib, n_noise=n_noise, perturb=perturb)
    tb, cb = bm(lib), bm(host)
    res = detect(tb, cb)
    return build_report(res, tb, cb), res, tb, cb


def test_self_detection_subgraph_is_dev_fcg():
    lib = make_library_doc()
    b = bm(lib)
    res = detect(b, b)
    report = build_report(res, b, b)
    assert report.subgraph.node_pairs == tuple((f, f) for f in b.dev_ids)
    dev = set(b.dev_ids)
    fcg_dev_edges = {(u, v) for u, v in b.fcg.edges() if u in dev and v in dev}
    assert {(t1, t2) for (t1, _), (t2, _) in report.subgraph.edges} == fcg_dev_edges
    assert all(e.score == 1.0 for e in report.evidence)


def test_fixture_subgraph_contains_exactly_library_internal_edges():
    report, _, tb, cb = library_host_report()
    dev = set(tb.dev_ids)
    lib_edges = {(u, v) for u, v in tb.fcg.edges() if u in dev and v in dev}
    assert {(t1, t2) for (t1, _), (t2, _) in report.subgraph.edges} == lib_edges
    # candidate-side projection carries the same structure under the renaming
    assert {(c1, c2) for (_, c1), (_, c2) in report.subgraph.edges} == {
        ("h_" + u, "h_" + v) for u, v in lib_edges}


def test_perfect_pair_aligns_end_to_end():
    report, _, tb, cb = library_host_report()
    for ev in report.evidence:
        assert ev.score == 1.0
        for pair in ev.mbp_pairs:
            assert pair.score == 1.0
            assert len(pair.op_pairs) == len(pair.target_ops) == len(pair.candidate_ops)


def test_op_pairs_length_equals_recomputed_lcs():
    report, _, _, _ = library_host_report(perturb=True)
    for ev in report.evidence:
        for pair in ev.mbp_pairs:
            assert len(pair.op_pairs) == lcs_length(pair.target_ops, pair.candidate_ops)
            for i, j in pair.op_pairs:
                assert pair.target_ops[i] == pair.candidate_ops[j]


def test_report_embeds_enough_data_to_reverify_scores():
    report, _, _, _ = library_host_report(perturb=True)
    for ev in report.evidence:
        total = sum(len(p.target_ops) for p in ev.mbp_pairs)
        recomputed = sum(
            len(p.target_ops) * (2 * lcs_length(p.target_ops, p.candidate_ops)
                                 / (len(p.target_ops) + len(p.candidate_ops)))
            for p in ev.mbp_pairs)
        assert abs(recomputed / total - ev.score) < 1e-9


def test_provenance_mismatch_raises_integrity_error():
    lib = make_library_doc()
    other = make_library_doc(program_id="otherprog")
    b, ob = bm(lib), bm(other)
    res = detect(b, b)
    with pytest.raises(IntegrityError):
        build_report(res, b, ob)


def test_report_round_trip():
    report, _, _, _ = library_host_report(perturb=True)
    assert loads_report(dumps_report(report)) == report


class TestDot:
    def test_empty_result_renders_two_empty_clusters(self):
        doc = {"program_id": "t", "functions": [
            {"id": "f", "name": "f", "kind": "dev", "entry": "B0",
             "blocks": [{"id": "B0", "insns": [insn("imul"), insn("ret")], "succ": []}],
             "callees": []}]}
        other = {"program_id": "c", "functions": [
            {"id": "g", "name": "g", "kind": "dev", "entry": "B0",
             "blocks": [{"id": "B0", "insns": [insn("lea", "a"), insn("ret")], "succ": []}],
             "callees": []}]}
        tb, cb = bm(doc), bm(other)
        report = build_report(detect(tb, cb), tb, cb)
        dot = render_dot(report)
        assert "cluster_target" in dot and "cluster_candidate" in dot
        assert "->" not in dot  # no edges at all
        validate_dot(dot)

    def test_single_pair_has_one_dashed_scored_edge(self):
        body = [insn("mov", "a"), insn("add"), insn("ret")]
        tb = bm({"program_id": "t", "functions": [
            {"id": "tf", "name": "tf", "kind": "dev", "entry": "B0",
             "blocks": [{"id": "B0", "insns": body, "succ": []}], "callees": []}]})
        cb = bm({"program_id": "c", "functions": [
            {"id": "cf", "name": "cf", "kind": "dev", "entry": "B0",
             "blocks": [{"id": "B0", "insns": body, "succ": []}], "callees": []}]})
        report = build_report(detect(tb, cb), tb, cb)
        dot = render_dot(report)
        assert dot.count("style=dashed") == 1
        assert 'label="1.000"' in dot
        validate_dot(dot)

    def test_fixture_dot_passes_grammar_validator(self):
        report, _, _, _ = library_host_report(perturb=True)
        validate_dot(render_dot(report))

    def test_render_is_pure(self):
        report, _, _, _ = library_host_report()
        assert render_dot(report) == render_dot(report)

    def test_quoting_of_awkward_identifiers(self):
        body = [insn("add"), insn("ret")]
        tb = bm({"program_id": 't"q', "functions": [
            {"id": 'f "x"\\y', "name": "f", "kind": "dev", "entry": "B0",
             "blocks": [{"id": "B0", "insns": body, "succ": []}], "callees": []}]})
        report = build_report(detect(tb, tb), tb, tb)
        validate_dot(render_dot(report))


def test_figures_written(tmp_path):
    report, _, _, _ = library_host_report(perturb=True)
    from reusedetect.figures import render_figures
    paths = render_figures(report, str(tmp_path / "figs"))
    assert len(paths) == 2
    for p in paths:
        assert (tmp_path / "figs").exists()
        with open(p, "rb") as fh:
            assert fh.read(8).startswith(b"\x89PNG")
