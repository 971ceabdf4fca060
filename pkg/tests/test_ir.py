import json

import pytest

from reusedetect import (ValidationError, build_fcg, parse_program_ir,
                         serialize_program_ir)
from synth import fig_cfg_doc, insn


def minimal_doc():
    return {
        "program_id": "p",
        "functions": [
            {"id": "f", "name": "f", "kind": "dev", "entry": "B0",
             "blocks": [{"id": "B0", "insns": [insn("ret")], "succ": []}],
             "callees": []}
        ],
    }


def test_parse_minimal_document():
    prog = parse_program_ir(json.dumps(minimal_doc()))
    assert len(prog.functions) == 1
    assert prog.functions[0].cfg.entry == "B0"
    assert prog.functions[0].cfg.blocks[0].instructions[0].mnemonic == "ret"


def test_dangling_successor_names_function_and_block():
    doc = minimal_doc()
    doc["functions"][0]["blocks"][0]["succ"] = ["BB9"]
    with pytest.raises(ValidationError) as exc:
        parse_program_ir(doc)
    assert "BB9" in str(exc.value)
    assert "B0" in str(exc.value)
    assert "f" in str(exc.value)


def test_fig_cfg_has_five_nodes_six_edges():
    prog = parse_program_ir(fig_cfg_doc())
    cfg = prog.functions[0].cfg
    assert len(cfg.blocks) == 5
    assert len(cfg.edges()) == 6


def test_duplicate_function_id_rejected():
    doc = minimal_doc()
    doc["functions"].append(json.loads(json.dumps(doc["functions"][0])))
    with pytest.raises(ValidationError, match="duplicate function id"):
        parse_program_ir(doc)


def test_duplicate_block_id_rejected():
    doc = minimal_doc()
    doc["functions"][0]["blocks"].append({"id": "B0", "insns": [insn("nop")], "succ": []})
    with pytest.raises(ValidationError, match="duplicate block id"):
        parse_program_ir(doc)


def test_unknown_fields_rejected():
    doc = minimal_doc()
    doc["extra"] = 1
    with pytest.raises(ValidationError, match="unknown field"):
        parse_program_ir(doc)
    doc = minimal_doc()
    doc["functions"][0]["blocks"][0]["insns"][0]["weird"] = True
    with pytest.raises(ValidationError, match="unknown field"):
        parse_program_ir(doc)


def test_lib_stub_must_not_carry_blocks():
    doc = minimal_doc()
    doc["functions"].append({"id": "s", "name": "memcpy", "kind": "lib",
                             "blocks": []})
    with pytest.raises(ValidationError, match="unknown field"):
        parse_program_ir(doc)


def test_empty_block_requires_synthetic_flag():
    doc = minimal_doc()
    doc["functions"][0]["blocks"].insert(
        0, {"id": "stub", "insns": [], "succ": ["B0"]})
    doc["functions"][0]["entry"] = "stub"
    with pytest.raises(ValidationError, match="synthetic"):
        parse_program_ir(doc)
    doc["functions"][0]["blocks"][0]["synthetic"] = True
    prog = parse_program_ir(doc)
    assert prog.functions[0].cfg.blocks[0].synthetic


def test_duplicate_addresses_rejected():
    doc = minimal_doc()
    doc["functions"][0]["blocks"][0]["insns"] = [
        {"m": "nop", "ops": [], "addr": 4}, {"m": "ret", "ops": [], "addr": 4}]
    with pytest.raises(ValidationError, match="addresses"):
        parse_program_ir(doc)


def test_unresolved_callee_dropped_with_warning(caplog):
    doc = minimal_doc()
    doc["functions"][0]["callees"] = ["nowhere"]
    with caplog.at_level("WARNING"):
        prog = parse_program_ir(doc)
    assert prog.call_edges == ()
    assert any("nowhere" in r.message for r in caplog.records)


def test_callee_resolution_by_lib_name():
    doc = minimal_doc()
    doc["functions"][0]["callees"] = ["memcpy"]
    doc["functions"].append({"id": "s_memcpy", "name": "memcpy", "kind": "lib"})
    prog = parse_program_ir(doc)
    assert prog.call_edges == (("f", "s_memcpy"),)
    assert prog.lib_stubs == {"s_memcpy": "memcpy"}


def test_parse_serialize_parse_round_trip():
    doc = fig_cfg_doc()
    doc["functions"][0]["blocks"][0]["insns"][0]["addr"] = 4096
    doc["functions"].append({"id": "s_abort", "name": "abort", "kind": "lib"})
    doc["functions"][0]["callees"] = ["abort"]
    first = parse_program_ir(doc)
    again = parse_program_ir(serialize_program_ir(first))
    assert first == again


def test_fcg_direct_transcription():
    doc = {
        "program_id": "p",
        "functions": [
            {"id": "A", "name": "A", "kind": "dev", "entry": "B0",
             "blocks": [{"id": "B0", "insns": [insn("call", "B"), insn("ret")], "succ": []}],
             "callees": ["B"]},
            {"id": "B", "name": "B", "kind": "dev", "entry": "B0",
             "blocks": [{"id": "B0", "insns": [insn("call", "C"), insn("ret")], "succ": []}],
             "callees": ["C"]},
            {"id": "C", "name": "C", "kind": "dev", "entry": "B0",
             "blocks": [{"id": "B0", "insns": [insn("ret")], "succ": []}],
             "callees": []},
        ],
    }
    fcg = build_fcg(parse_program_ir(doc))
    assert set(fcg.edges()) == {("A", "B"), ("B", "C")}
    assert fcg.nodes == ("A", "B", "C")


def test_fcg_duplicate_call_sites_collapse_to_one_edge():
    doc = minimal_doc()
    doc["functions"][0]["callees"] = ["g", "g"]
    doc["functions"].append(
        {"id": "g", "name": "g", "kind": "dev", "entry": "B0",
         "blocks": [{"id": "B0", "insns": [insn("ret")], "succ": []}], "callees": []})
    prog = parse_program_ir(doc)
    assert prog.call_edges == (("f", "g"), ("f", "g"))
    fcg = build_fcg(prog)
    assert fcg.edges() == [("f", "g")]
    assert len(fcg.edges()) <= len(prog.call_edges)


def test_fcg_no_calls_yields_isolated_nodes():
    doc = fig_cfg_doc()
    fcg = build_fcg(parse_program_ir(doc))
    assert fcg.nodes == ("f0",)
    assert fcg.edges() == []


def test_fcg_nodes_cover_both_kinds():
    doc = minimal_doc()
    doc["functions"].append({"id": "s_memcpy", "name": "memcpy", "kind": "lib"})
    fcg = build_fcg(parse_program_ir(doc))
    assert fcg.nodes == ("f", "s_memcpy")
    assert fcg.lib_nodes == {"s_memcpy"}


def test_invalid_json_rejected():
    with pytest.raises(ValidationError, match="not valid JSON"):
        parse_program_ir("{nope")


def test_bad_kind_rejected():
    doc = minimal_doc()
    doc["functions"][0]["kind"] = "static"
    with pytest.raises(ValidationError, match="kind"):
        parse_program_ir(doc)
