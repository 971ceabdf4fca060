"""Disassembly intermediate representation: parsing, validation, graph views.

The pipeline never touches raw binaries. A disassembler-side converter is
expected to produce the JSON document described in the README; everything
downstream works on the validated :class:`ProgramIr`.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from .errors import ValidationError

log = logging.getLogger(__name__)

KIND_DEV = "dev"
KIND_LIB = "lib"

_INSN_KEYS = {"m", "ops", "addr"}
_BLOCK_KEYS = {"id", "insns", "succ", "synthetic"}
_DEV_FUNC_KEYS = {"id", "name", "kind", "entry", "blocks", "callees"}
_LIB_FUNC_KEYS = {"id", "name", "kind", "callees"}
_TOP_KEYS = {"program_id", "functions"}


@dataclass(frozen=True)
class Instruction:
    mnemonic: str
    operands: tuple[str, ...] = ()
    address: int | None = None


@dataclass(frozen=True)
class BasicBlock:
    id: str
    instructions: tuple[Instruction, ...]
    successors: tuple[str, ...]
    synthetic: bool = False


@dataclass(frozen=True)
class Cfg:
    function: str
    blocks: tuple[BasicBlock, ...]  # document order
    entry: str

    def block(self, block_id: str) -> BasicBlock:
        return self._by_id[block_id]

    @property
    def _by_id(self) -> dict[str, BasicBlock]:
        return {b.id: b for b in self.blocks}

    def edges(self) -> list[tuple[str, str]]:
        return [(b.id, s) for b in self.blocks for s in b.successors]

    def in_degrees(self) -> dict[str, int]:
        deg = {b.id: 0 for b in self.blocks}
        for _, dst in self.edges():
            deg[dst] += 1
        return deg


@dataclass(frozen=True)
class FunctionRecord:
    id: str
    name: str
    kind: str  # KIND_DEV | KIND_LIB
    cfg: Cfg | None = None
    callees: tuple[str, ...] = ()  # resolved function ids, call-site order


@dataclass(frozen=True)
class ProgramIr:
    program_id: str
    functions: tuple[FunctionRecord, ...]  # document order
    call_edges: tuple[tuple[str, str], ...]  # (caller id, callee id), per call site

    def function(self, fid: str) -> FunctionRecord:
        return {f.id: f for f in self.functions}[fid]

    @property
    def dev_ids(self) -> tuple[str, ...]:
        return tuple(sorted(f.id for f in self.functions if f.kind == KIND_DEV))

    @property
    def lib_stubs(self) -> dict[str, str]:
        """Library stub id -> symbol name."""
        return {f.id: f.name for f in self.functions if f.kind == KIND_LIB}


@dataclass(frozen=True)
class FunctionCallGraph:
    """Simple directed graph over function ids; duplicate call sites collapse."""

    nodes: tuple[str, ...]  # sorted
    lib_nodes: frozenset[str]
    succs: dict[str, tuple[str, ...]] = field(hash=False)
    preds: dict[str, tuple[str, ...]] = field(hash=False)

    def edges(self) -> list[tuple[str, str]]:
        return [(u, v) for u in self.nodes for v in self.succs[u]]

    def neighbors(self, fid: str) -> tuple[str, ...]:
        return tuple(sorted(set(self.succs[fid]) | set(self.preds[fid])))


def _expect(cond: bool, message: str, path: str) -> None:
    if not cond:
        raise ValidationError(message, path)


def _check_keys(obj: dict, allowed: set[str], required: set[str], path: str) -> None:
    unknown = set(obj) - allowed
    _expect(not unknown, f"unknown field(s) {sorted(unknown)}", path)
    missing = required - set(obj)
    _expect(not missing, f"missing field(s) {sorted(missing)}", path)


def _parse_instruction(obj: object, path: str) -> Instruction:
    _expect(isinstance(obj, dict), "instruction must be an object", path)
    assert isinstance(obj, dict)
    _check_keys(obj, _INSN_KEYS, {"m", "ops"}, path)
    m = obj["m"]
    _expect(isinstance(m, str) and m != "", "mnemonic must be a non-empty string", f"{path}.m")
    _expect(m == m.lower(), "mnemonic must be lowercase", f"{path}.m")
    ops = obj["ops"]
    _expect(isinstance(ops, list) and all(isinstance(o, str) for o in ops),
            "ops must be a list of strings", f"{path}.ops")
    addr = obj.get("addr")
    if addr is not None:
        _expect(isinstance(addr, int) and not isinstance(addr, bool) and addr >= 0,
                "addr must be an unsigned integer", f"{path}.addr")
    return Instruction(mnemonic=m, operands=tuple(ops), address=addr)


def _parse_block(obj: object, path: str) -> BasicBlock:
    _expect(isinstance(obj, dict), "block must be an object", path)
    assert isinstance(obj, dict)
    _check_keys(obj, _BLOCK_KEYS, {"id", "insns", "succ"}, path)
    bid = obj["id"]
    _expect(isinstance(bid, str) and bid != "", "block id must be a non-empty string", f"{path}.id")
    _expect(isinstance(obj["insns"], list), "insns must be a list", f"{path}.insns")
    insns = tuple(_parse_instruction(o, f"{path}.insns[{i}]") for i, o in enumerate(obj["insns"]))
    synthetic = obj.get("synthetic", False)
    _expect(isinstance(synthetic, bool), "synthetic must be a boolean", f"{path}.synthetic")
    _expect(insns or synthetic,
            "empty instruction list is only allowed for blocks flagged synthetic", f"{path}.insns")
    succ = obj["succ"]
    _expect(isinstance(succ, list) and all(isinstance(s, str) for s in succ),
            "succ must be a list of block ids", f"{path}.succ")
    return BasicBlock(id=bid, instructions=insns, successors=tuple(succ), synthetic=synthetic)


def _parse_function(obj: object, path: str) -> tuple[FunctionRecord, tuple[str, ...]]:
    """Returns the record (callees unresolved) plus the raw callee strings."""
    _expect(isinstance(obj, dict), "function must be an object", path)
    assert isinstance(obj, dict)
    kind = obj.get("kind")
    _expect(kind in (KIND_DEV, KIND_LIB), f"kind must be '{KIND_DEV}' or '{KIND_LIB}'", f"{path}.kind")
    fid = obj.get("id")
    _expect(isinstance(fid, str) and fid != "", "function id must be a non-empty string", f"{path}.id")
    name = obj.get("name")
    _expect(isinstance(name, str), "name must be a string", f"{path}.name")

    raw_callees: tuple[str, ...] = ()
    if "callees" in obj:
        callees = obj["callees"]
        _expect(isinstance(callees, list) and all(isinstance(c, str) for c in callees),
                "callees must be a list of strings", f"{path}.callees")
        raw_callees = tuple(callees)

    if kind == KIND_LIB:
        _check_keys(obj, _LIB_FUNC_KEYS, {"id", "name", "kind"}, path)
        return FunctionRecord(id=fid, name=name, kind=KIND_LIB), raw_callees

    _check_keys(obj, _DEV_FUNC_KEYS, {"id", "name", "kind", "entry", "blocks"}, path)
    _expect(isinstance(obj["blocks"], list) and obj["blocks"],
            "dev function must have a non-empty block list", f"{path}.blocks")
    blocks = tuple(_parse_block(b, f"{path}.blocks[{i}]") for i, b in enumerate(obj["blocks"]))

    seen: set[str] = set()
    for i, b in enumerate(blocks):
        _expect(b.id not in seen, f"duplicate block id '{b.id}'", f"{path}.blocks[{i}].id")
        seen.add(b.id)
    for i, b in enumerate(blocks):
        for j, s in enumerate(b.successors):
            _expect(s in seen, f"successor '{s}' of block '{b.id}' not found in function '{fid}'",
                    f"{path}.blocks[{i}].succ[{j}]")

    addrs = [ins.address for b in blocks for ins in b.instructions if ins.address is not None]
    _expect(len(addrs) == len(set(addrs)), "instruction addresses must be unique within a function",
            f"{path}.blocks")

    entry = obj["entry"]
    _expect(isinstance(entry, str) and entry in seen,
            f"entry block '{entry}' not found in function '{fid}'", f"{path}.entry")

    cfg = Cfg(function=fid, blocks=blocks, entry=entry)
    return FunctionRecord(id=fid, name=name, kind=KIND_DEV, cfg=cfg), raw_callees


def parse_program_ir(document: str | bytes | dict) -> ProgramIr:
    """Parse and validate an IR document (JSON text or an already-decoded dict)."""
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as e:
            raise ValidationError(f"document is not valid JSON: {e}") from e
    else:
        doc = document
    _expect(isinstance(doc, dict), "document must be a JSON object", "$")
    _check_keys(doc, _TOP_KEYS, _TOP_KEYS, "$")
    pid = doc["program_id"]
    _expect(isinstance(pid, str) and pid != "", "program_id must be a non-empty string", "$.program_id")
    _expect(isinstance(doc["functions"], list), "functions must be a list", "$.functions")

    parsed: list[tuple[FunctionRecord, tuple[str, ...]]] = []
    ids: set[str] = set()
    for i, f in enumerate(doc["functions"]):
        rec, raw = _parse_function(f, f"functions[{i}]")
        _expect(rec.id not in ids, f"duplicate function id '{rec.id}'", f"functions[{i}].id")
        ids.add(rec.id)
        parsed.append((rec, raw))

    # Callee resolution: a callee string is either a function id or the symbol
    # name of a declared library stub. Unresolvable entries (indirect calls,
    # stripped targets) are dropped with a warning rather than rejected.
    lib_by_name: dict[str, str] = {}
    for rec, _ in parsed:
        if rec.kind == KIND_LIB and rec.name not in lib_by_name:
            lib_by_name[rec.name] = rec.id

    functions: list[FunctionRecord] = []
    call_edges: list[tuple[str, str]] = []
    for rec, raw in parsed:
        resolved: list[str] = []
        for c in raw:
            if c in ids:
                resolved.append(c)
            elif c in lib_by_name:
                resolved.append(lib_by_name[c])
            else:
                log.warning("program %s: dropping unresolved callee '%s' of function '%s'",
                            pid, c, rec.id)
        rec = FunctionRecord(id=rec.id, name=rec.name, kind=rec.kind, cfg=rec.cfg,
                             callees=tuple(resolved))
        functions.append(rec)
        call_edges.extend((rec.id, c) for c in resolved)

    return ProgramIr(program_id=pid, functions=tuple(functions), call_edges=tuple(call_edges))


def serialize_program_ir(program: ProgramIr) -> dict:
    """Inverse of :func:`parse_program_ir`; parse(serialize(p)) == p."""
    funcs = []
    for f in program.functions:
        obj: dict = {"id": f.id, "name": f.name, "kind": f.kind}
        if f.kind == KIND_DEV:
            assert f.cfg is not None
            obj["entry"] = f.cfg.entry
            blocks = []
            for b in f.cfg.blocks:
                blk: dict = {
                    "id": b.id,
                    "insns": [_insn_obj(i) for i in b.instructions],
                    "succ": list(b.successors),
                }
                if b.synthetic:
                    blk["synthetic"] = True
                blocks.append(blk)
            obj["blocks"] = blocks
        if f.callees:
            obj["callees"] = list(f.callees)
        funcs.append(obj)
    return {"program_id": program.program_id, "functions": funcs}


def _insn_obj(ins: Instruction) -> dict:
    obj: dict = {"m": ins.mnemonic, "ops": list(ins.operands)}
    if ins.address is not None:
        obj["addr"] = ins.address
    return obj


def build_fcg(program: ProgramIr) -> FunctionCallGraph:
    """Directed call graph: one node per function, one edge per caller/callee relation."""
    nodes = tuple(sorted(f.id for f in program.functions))
    succ_sets: dict[str, set[str]] = {n: set() for n in nodes}
    pred_sets: dict[str, set[str]] = {n: set() for n in nodes}
    for caller, callee in program.call_edges:
        succ_sets[caller].add(callee)
        pred_sets[callee].add(caller)
    return FunctionCallGraph(
        nodes=nodes,
        lib_nodes=frozenset(program.lib_stubs),
        succs={n: tuple(sorted(succ_sets[n])) for n in nodes},
        preds={n: tuple(sorted(pred_sets[n])) for n in nodes},
    )
