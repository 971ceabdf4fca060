import random

import pytest
from hypothesis import given, strategies as st

from reusedetect import (Instruction, TAXONOMY, ValidationError, collapse_transfer_runs,
                         default_lifting_table, normalize, parse_lifting_table)

TABLE = default_lifting_table()
KNOWN_MNEMONICS = sorted(TABLE.mapping)
JUMP_MNEMONICS = sorted(m for m, c in TABLE.mapping.items() if c == "JUMP")
TRANSFER_MNEMONICS = sorted(m for m, c in TABLE.mapping.items() if c == "TRANSFER")


def test_inc_lifts_to_add():
    assert normalize([Instruction("inc", ("eax",))]) == ["ADD"]


def test_transfer_run_collapses_to_one():
    stream = [Instruction("mov", ("a", "b")), Instruction("mov", ("c", "d")),
              Instruction("push", ("e",)), Instruction("add", ("f", "1"))]
    assert normalize(stream) == ["TRANSFER", "ADD"]


def test_empty_stream():
    assert normalize([]) == []


def test_jumps_dropped_entirely():
    stream = [Instruction("jmp", ("x",)), Instruction("je", ("y",)), Instruction("loop", ("z",))]
    assert normalize(stream) == []


def test_transfer_runs_merge_across_dropped_jump():
    stream = [Instruction("mov", ("a", "b")), Instruction("jne", ("x",)),
              Instruction("push", ("c",))]
    assert normalize(stream) == ["TRANSFER"]


def test_unknown_mnemonic_degrades_to_other():
    assert normalize([Instruction("vfmadd231ps", ("z0", "z1"))]) == ["OTHER"]


def test_operands_never_inspected():
    a = [Instruction("mov", ("rax", "rbx")), Instruction("add", ("rax", "8"))]
    b = [Instruction("mov", ("x9", "[rel foo]")), Instruction("add", ())]
    assert normalize(a) == normalize(b)


def _random_stream(rng, n):
    out = []
    for _ in range(n):
        roll = rng.random()
        if roll < 0.35:
            m = rng.choice(TRANSFER_MNEMONICS)
        elif roll < 0.5:
            m = rng.choice(JUMP_MNEMONICS)
        elif roll < 0.9:
            m = rng.choice(KNOWN_MNEMONICS)
        else:
            m = "mystery%d" % rng.randrange(5)
        out.append(Instruction(m, tuple("op%d" % rng.randrange(30) for _ in range(rng.randrange(3)))))
    return out


def test_random_streams_satisfy_invariants():
    rng = random.Random(5)
    for _ in range(300):
        stream = _random_stream(rng, rng.randrange(0, 40))
        ops = normalize(stream)
        assert all(c in TAXONOMY for c in ops)
        assert "JUMP" not in ops
        for left, right in zip(ops, ops[1:]):
            assert not (left == "TRANSFER" and right == "TRANSFER")
        mutated = [Instruction(i.mnemonic, ("zz%d" % k,)) for k, i in enumerate(stream)]
        assert normalize(mutated) == ops


@given(st.lists(st.sampled_from(sorted(TAXONOMY))))
def test_collapse_is_a_fixpoint(ops):
    collapsed = collapse_transfer_runs(ops)
    assert collapse_transfer_runs(collapsed) == collapsed


@given(st.lists(st.sampled_from(KNOWN_MNEMONICS + ["zzz"]), max_size=30))
def test_normalize_output_invariants(mnemonics):
    ops = normalize([Instruction(m) for m in mnemonics])
    assert "JUMP" not in ops
    assert ("TRANSFER", "TRANSFER") not in list(zip(ops, ops[1:]))


def test_table_rejects_unknown_class():
    with pytest.raises(ValidationError, match="unknown operation class"):
        parse_lifting_table("mov SHAZAM")


def test_table_rejects_malformed_line():
    with pytest.raises(ValidationError, match="expected"):
        parse_lifting_table("mov TRANSFER extra")


def test_table_rejects_conflicting_entries():
    with pytest.raises(ValidationError, match="conflicting"):
        parse_lifting_table("mov TRANSFER\nmov ADD")


def test_table_comments_and_blanks_ignored():
    table = parse_lifting_table("# header\n\nfoo ADD  # trailing\n")
    assert table.lift("foo") == "ADD"
    assert table.lift("bar") == "OTHER"
