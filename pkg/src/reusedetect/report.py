"""Interpretable reuse evidence: matched subgraph, MBP pairs, operation pairs.

A detection result alone is a number; the report reconstructs the reuse
scene at all three levels so every claim can be re-verified offline: which
matched functions call each other on both sides, which MBP of the candidate
each target MBP aligned to, and the exact operation pairs of that alignment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .birthmark import Mbp, ProgramBirthmark
from .detection import DetectionResult, lcs_pairs, sim_mbp
from .errors import IntegrityError, ValidationError

REPORT_FORMAT_VERSION = 1


@dataclass(frozen=True)
class MatchedSubgraph:
    node_pairs: tuple[tuple[str, str], ...]  # sorted by target id
    edges: tuple[tuple[tuple[str, str], tuple[str, str]], ...]  # pair -> pair


@dataclass(frozen=True)
class MbpAlignment:
    target_blocks: tuple[str, ...]
    candidate_blocks: tuple[str, ...]
    target_ops: tuple[str, ...]
    candidate_ops: tuple[str, ...]
    score: float
    op_pairs: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class AlignmentEvidence:
    target_function: str
    candidate_function: str
    score: float
    mbp_pairs: tuple[MbpAlignment, ...]


@dataclass(frozen=True)
class ReuseReport:
    target: str
    candidate: str
    program_similarity: float
    subgraph: MatchedSubgraph
    evidence: tuple[AlignmentEvidence, ...]
    way2_anchors: tuple[str, ...] = ()
    diagnostics: dict[str, list[str]] = field(hash=False, default_factory=dict)


def _best_alignment(m1: Mbp, candidates: tuple[Mbp, ...]) -> MbpAlignment:
    # Argmax candidate MBP; ties broken by lexicographically smallest block ids.
    best: Mbp | None = None
    best_score = -1.0
    for m2 in sorted(candidates, key=lambda m: m.block_ids):
        s = sim_mbp(m1, m2)
        if s > best_score:
            best, best_score = m2, s
    assert best is not None
    return MbpAlignment(
        target_blocks=m1.block_ids,
        candidate_blocks=best.block_ids,
        target_ops=m1.ops,
        candidate_ops=best.ops,
        score=best_score,
        op_pairs=tuple(lcs_pairs(m1.ops, best.ops)),
    )


def build_report(result: DetectionResult, tb: ProgramBirthmark,
                 cb: ProgramBirthmark) -> ReuseReport:
    """Assemble the three-level evidence for a detection result."""
    if result.target != tb.program_id or result.candidate != cb.program_id:
        raise IntegrityError(
            f"result describes ({result.target!r}, {result.candidate!r}), "
            f"birthmarks describe ({tb.program_id!r}, {cb.program_id!r})")

    pair_of: dict[str, str] = {t: c for t, c, _ in result.matched}
    node_pairs = tuple(sorted(pair_of.items()))

    edges = []
    for t1, c1 in node_pairs:
        for t2 in tb.fcg.succs[t1]:
            c2 = pair_of.get(t2)
            if c2 is not None and c2 in cb.fcg.succs[c1]:
                edges.append(((t1, c1), (t2, c2)))
    subgraph = MatchedSubgraph(node_pairs=node_pairs, edges=tuple(sorted(edges)))

    evidence = []
    for t, c, score in result.matched:
        t_mbps = tb.function_marks[t].mbps
        c_mbps = cb.function_marks[c].mbps
        mbp_pairs = tuple(_best_alignment(m, c_mbps) for m in t_mbps) if c_mbps else ()
        evidence.append(AlignmentEvidence(
            target_function=t, candidate_function=c, score=score, mbp_pairs=mbp_pairs))

    return ReuseReport(
        target=result.target,
        candidate=result.candidate,
        program_similarity=result.program_similarity,
        subgraph=subgraph,
        evidence=tuple(sorted(evidence, key=lambda e: e.target_function)),
        way2_anchors=result.way2_anchors,
        diagnostics=dict(result.diagnostics),
    )


def report_to_dict(report: ReuseReport) -> dict:
    return {
        "version": REPORT_FORMAT_VERSION,
        "target": report.target,
        "candidate": report.candidate,
        "program_similarity": report.program_similarity,
        "subgraph": {
            "node_pairs": [[t, c] for t, c in report.subgraph.node_pairs],
            "edges": [[[t1, c1], [t2, c2]] for (t1, c1), (t2, c2) in report.subgraph.edges],
        },
        "evidence": [
            {
                "target_function": e.target_function,
                "candidate_function": e.candidate_function,
                "score": e.score,
                "mbp_pairs": [
                    {
                        "target_blocks": list(a.target_blocks),
                        "candidate_blocks": list(a.candidate_blocks),
                        "target_ops": list(a.target_ops),
                        "candidate_ops": list(a.candidate_ops),
                        "score": a.score,
                        "op_pairs": [[i, j] for i, j in a.op_pairs],
                    }
                    for a in e.mbp_pairs
                ],
            }
            for e in report.evidence
        ],
        "way2_anchors": list(report.way2_anchors),
        "diagnostics": report.diagnostics,
    }


def dumps_report(report: ReuseReport) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"


def report_from_dict(doc: dict) -> ReuseReport:
    try:
        version = doc["version"]
        if version != REPORT_FORMAT_VERSION:
            raise ValidationError(f"unsupported report format version {version!r}", "$.version")
        subgraph = MatchedSubgraph(
            node_pairs=tuple((t, c) for t, c in doc["subgraph"]["node_pairs"]),
            edges=tuple(((t1, c1), (t2, c2))
                        for (t1, c1), (t2, c2) in doc["subgraph"]["edges"]),
        )
        evidence = tuple(
            AlignmentEvidence(
                target_function=e["target_function"],
                candidate_function=e["candidate_function"],
                score=float(e["score"]),
                mbp_pairs=tuple(
                    MbpAlignment(
                        target_blocks=tuple(a["target_blocks"]),
                        candidate_blocks=tuple(a["candidate_blocks"]),
                        target_ops=tuple(a["target_ops"]),
                        candidate_ops=tuple(a["candidate_ops"]),
                        score=float(a["score"]),
                        op_pairs=tuple((i, j) for i, j in a["op_pairs"]),
                    )
                    for a in e["mbp_pairs"]
                ),
            )
            for e in doc["evidence"]
        )
        return ReuseReport(
            target=doc["target"],
            candidate=doc["candidate"],
            program_similarity=float(doc["program_similarity"]),
            subgraph=subgraph,
            evidence=evidence,
            way2_anchors=tuple(doc.get("way2_anchors", [])),
            diagnostics={k: list(v) for k, v in doc.get("diagnostics", {}).items()},
        )
    except ValidationError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"malformed report document: {e!r}") from e


def loads_report(text: str) -> ReuseReport:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"report document is not valid JSON: {e}") from e
    return report_from_dict(doc)


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def render_dot(report: ReuseReport) -> str:
    """Render the matched subgraph as a DOT document with one cluster per program.

    Matched pairs are linked by dashed inter-cluster edges labeled with their
    similarity score to three decimals. Output bytes are stable for a stable
    report.
    """
    lines = ["digraph reuse {", "  rankdir=LR;", "  node [shape=box];"]

    lines.append("  subgraph cluster_target {")
    lines.append(f"    label={_dot_quote('target: ' + report.target)};")
    for t, _ in report.subgraph.node_pairs:
        lines.append(f"    {_dot_quote('t:' + t)} [label={_dot_quote(t)}];")
    for (t1, _), (t2, _) in report.subgraph.edges:
        lines.append(f"    {_dot_quote('t:' + t1)} -> {_dot_quote('t:' + t2)};")
    lines.append("  }")

    lines.append("  subgraph cluster_candidate {")
    lines.append(f"    label={_dot_quote('candidate: ' + report.candidate)};")
    for _, c in report.subgraph.node_pairs:
        lines.append(f"    {_dot_quote('c:' + c)} [label={_dot_quote(c)}];")
    for (_, c1), (_, c2) in report.subgraph.edges:
        lines.append(f"    {_dot_quote('c:' + c1)} -> {_dot_quote('c:' + c2)};")
    lines.append("  }")

    score_of = {e.target_function: e.score for e in report.evidence}
    for t, c in report.subgraph.node_pairs:
        label = f"{score_of.get(t, 0.0):.3f}"
        lines.append(
            f"  {_dot_quote('t:' + t)} -> {_dot_quote('c:' + c)}"
            f" [style=dashed, constraint=false, label={_dot_quote(label)}];")

    lines.append("}")
    return "\n".join(lines) + "\n"
