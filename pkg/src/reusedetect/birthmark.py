"""Three-level program birthmark: call graph, branch-free paths, normalized ops.

A function's control flow is decomposed into minimum branch paths (MBPs):
straight-line block sequences that start at a node with no predecessor or at
a branching node, follow single-successor nodes, and stop at the next
branching or exit node. Each path's instruction stream is then normalized
into a sequence of high-level operation classes.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import ValidationError
from .ir import Cfg, FunctionCallGraph, Instruction, ProgramIr, build_fcg
from .lifting import JUMP, TRANSFER, LiftingTable, default_lifting_table

BIRTHMARK_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Mbp:
    block_ids: tuple[str, ...]
    ops: tuple[str, ...]
    raw_len: int  # instruction count before normalization


@dataclass(frozen=True)
class FunctionBirthmark:
    function_id: str
    mbps: tuple[Mbp, ...]
    flat_ops: tuple[str, ...]  # normalized over blocks in document order
    library_calls: frozenset[str]


@dataclass(frozen=True)
class ProgramBirthmark:
    program_id: str
    fcg: FunctionCallGraph
    function_marks: dict[str, FunctionBirthmark] = field(hash=False)
    dev_ids: tuple[str, ...] = ()
    lib_stubs: dict[str, str] = field(hash=False, default_factory=dict)  # stub id -> name
    meta: dict[str, list[str]] = field(hash=False, default_factory=dict)

    @property
    def lib_names(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.lib_stubs.values())))


def extract_paths(cfg: Cfg) -> tuple[tuple[str, ...], ...]:
    """Decompose a CFG into minimum-branch block-id paths.

    One path per out-edge of every start node (no predecessors, or more than
    one successor); each walk extends while the current node has exactly one
    successor. Two degeneracies get explicit handling: a node with neither
    predecessors nor successors yields a single-node path, and a CFG that is
    one pure cycle gets its lexicographically smallest block as a synthetic
    start node. Walks stop before revisiting a block so cycles terminate.
    """
    by_id = {b.id: b for b in cfg.blocks}
    in_deg = cfg.in_degrees()
    out_deg = {b.id: len(b.successors) for b in cfg.blocks}

    starts = sorted(bid for bid in by_id if in_deg[bid] == 0 or out_deg[bid] > 1)
    if not starts:
        starts = [sorted(by_id)[0]]  # pure cycle: synthetic start

    paths: list[tuple[str, ...]] = []
    for start in starts:
        succs = sorted(by_id[start].successors)
        if not succs:
            paths.append((start,))
            continue
        for nxt in succs:
            path = [start, nxt]
            seen = {start, nxt}
            cur = nxt
            while out_deg[cur] == 1:
                step = by_id[cur].successors[0]
                if step in seen:
                    break
                path.append(step)
                seen.add(step)
                cur = step
            paths.append(tuple(path))
    return tuple(paths)


def extract_mbps(cfg: Cfg, table: LiftingTable | None = None) -> tuple[Mbp, ...]:
    """Extract MBPs with their normalized operation sequences.

    Ordering is deterministic: paths sorted by (start block id, successor id)
    as produced by :func:`extract_paths`.
    """
    if table is None:
        table = default_lifting_table()
    by_id = {b.id: b for b in cfg.blocks}
    mbps = []
    for path in extract_paths(cfg):
        insns = [ins for bid in path for ins in by_id[bid].instructions]
        mbps.append(Mbp(block_ids=path, ops=tuple(normalize(insns, table)), raw_len=len(insns)))
    return tuple(mbps)


def lift_ops(instructions: list[Instruction] | tuple[Instruction, ...],
             table: LiftingTable) -> list[str]:
    return [table.lift(ins.mnemonic) for ins in instructions]


def drop_jumps(ops: list[str]) -> list[str]:
    return [op for op in ops if op != JUMP]


def collapse_transfer_runs(ops: list[str]) -> list[str]:
    out: list[str] = []
    for op in ops:
        if op == TRANSFER and out and out[-1] == TRANSFER:
            continue
        out.append(op)
    return out


def normalize(instructions: list[Instruction] | tuple[Instruction, ...],
              table: LiftingTable | None = None) -> list[str]:
    """Lift mnemonics to operation classes, remove jumps, collapse transfer runs.

    Operands are never inspected. Jump removal happens before run collapsing
    so that transfer runs separated only by a dropped jump still merge,
    keeping the output free of adjacent TRANSFER pairs.
    """
    if table is None:
        table = default_lifting_table()
    return collapse_transfer_runs(drop_jumps(lift_ops(instructions, table)))


def _function_mark(program: ProgramIr, fid: str, table: LiftingTable) -> FunctionBirthmark:
    rec = program.function(fid)
    assert rec.cfg is not None
    flat_insns = [ins for b in rec.cfg.blocks for ins in b.instructions]
    lib_stubs = program.lib_stubs
    return FunctionBirthmark(
        function_id=fid,
        mbps=extract_mbps(rec.cfg, table),
        flat_ops=tuple(normalize(flat_insns, table)),
        library_calls=frozenset(lib_stubs[c] for c in rec.callees if c in lib_stubs),
    )


def build_birthmark(program: ProgramIr, table: LiftingTable | None = None,
                    parallelism: int = 0) -> ProgramBirthmark:
    """Generate the full birthmark for a validated program.

    ``parallelism`` > 1 builds per-function marks in a thread pool; results
    are assembled in sorted-id order either way, so output is identical.
    """
    if table is None:
        table = default_lifting_table()
    fcg = build_fcg(program)
    dev_ids = program.dev_ids

    if parallelism > 1 and len(dev_ids) > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            marks = list(pool.map(lambda fid: _function_mark(program, fid, table), dev_ids))
    else:
        marks = [_function_mark(program, fid, table) for fid in dev_ids]
    function_marks = dict(zip(dev_ids, marks))

    # Out-of-paper degeneracies are flagged so downstream consumers can tell.
    single_block = sorted(fid for fid, mark in function_marks.items()
                          if any(len(m.block_ids) == 1 for m in mark.mbps))
    cycle_entries = []
    for fid in dev_ids:
        cfg = program.function(fid).cfg
        assert cfg is not None
        in_deg = cfg.in_degrees()
        if all(in_deg[b.id] > 0 and len(b.successors) <= 1 for b in cfg.blocks):
            cycle_entries.append(fid)

    return ProgramBirthmark(
        program_id=program.program_id,
        fcg=fcg,
        function_marks=function_marks,
        dev_ids=dev_ids,
        lib_stubs=dict(sorted(program.lib_stubs.items())),
        meta={
            "single_block_mbps": single_block,
            "synthetic_cycle_entries": sorted(cycle_entries),
        },
    )


def birthmark_to_dict(bm: ProgramBirthmark) -> dict:
    functions = {}
    for fid in sorted(bm.function_marks):
        mark = bm.function_marks[fid]
        functions[fid] = {
            "flat_ops": list(mark.flat_ops),
            "library_calls": sorted(mark.library_calls),
            "mbps": [
                {"blocks": list(m.block_ids), "ops": list(m.ops), "raw_len": m.raw_len}
                for m in mark.mbps
            ],
        }
    return {
        "version": BIRTHMARK_FORMAT_VERSION,
        "program_id": bm.program_id,
        "dev_ids": list(bm.dev_ids),
        "lib_stubs": bm.lib_stubs,
        "fcg": {
            "nodes": list(bm.fcg.nodes),
            "edges": [[u, v] for u, v in bm.fcg.edges()],
        },
        "functions": functions,
        "meta": bm.meta,
    }


def birthmark_from_dict(doc: dict) -> ProgramBirthmark:
    try:
        version = doc["version"]
        if version != BIRTHMARK_FORMAT_VERSION:
            raise ValidationError(f"unsupported birthmark format version {version!r}", "$.version")
        pid = doc["program_id"]
        dev_ids = tuple(doc["dev_ids"])
        lib_stubs = dict(doc["lib_stubs"])
        nodes = tuple(doc["fcg"]["nodes"])
        edges = [(u, v) for u, v in doc["fcg"]["edges"]]
        function_marks = {}
        for fid, f in doc["functions"].items():
            mbps = tuple(
                Mbp(block_ids=tuple(m["blocks"]), ops=tuple(m["ops"]), raw_len=int(m["raw_len"]))
                for m in f["mbps"]
            )
            function_marks[fid] = FunctionBirthmark(
                function_id=fid,
                mbps=mbps,
                flat_ops=tuple(f["flat_ops"]),
                library_calls=frozenset(f["library_calls"]),
            )
        meta = {k: list(v) for k, v in doc.get("meta", {}).items()}
    except ValidationError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"malformed birthmark document: {e!r}") from e

    succ_sets: dict[str, set[str]] = {n: set() for n in nodes}
    pred_sets: dict[str, set[str]] = {n: set() for n in nodes}
    for u, v in edges:
        if u not in succ_sets or v not in succ_sets:
            raise ValidationError(f"fcg edge ({u!r}, {v!r}) references unknown node", "$.fcg.edges")
        succ_sets[u].add(v)
        pred_sets[v].add(u)
    fcg = FunctionCallGraph(
        nodes=nodes,
        lib_nodes=frozenset(lib_stubs),
        succs={n: tuple(sorted(succ_sets[n])) for n in nodes},
        preds={n: tuple(sorted(pred_sets[n])) for n in nodes},
    )
    return ProgramBirthmark(
        program_id=pid,
        fcg=fcg,
        function_marks=function_marks,
        dev_ids=dev_ids,
        lib_stubs=lib_stubs,
        meta=meta,
    )


def dumps_birthmark(bm: ProgramBirthmark) -> str:
    return json.dumps(birthmark_to_dict(bm), indent=2) + "\n"


def loads_birthmark(text: str) -> ProgramBirthmark:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"birthmark document is not valid JSON: {e}") from e
    return birthmark_from_dict(doc)
