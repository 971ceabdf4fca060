"""Reuse detection: anchor recognition, intent search, similarity scoring.

Matching never scores all function pairs. Anchors (identical normalized
instruction sequences, or shared library-call names) seed the matched set;
the search then walks outward over both call graphs, proposing candidate
pairs only in the neighborhood of what is already matched. Proposed pairs
are scored by comparing MBP sets with a length-weighted best-match LCS
similarity and accepted when they clear the threshold.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .birthmark import FunctionBirthmark, Mbp, ProgramBirthmark
from .errors import ValidationError
from .ir import FunctionCallGraph

RESULT_FORMAT_VERSION = 1

ORIGIN_WAY1 = "way1"
ORIGIN_WAY2 = "way2"
ORIGIN_SEARCH = "search"


@dataclass(frozen=True)
class SimilarityConfig:
    threshold: float = 0.5
    max_candidates_per_function: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise ValidationError(f"threshold must be in [0, 1], got {self.threshold}")
        if self.max_candidates_per_function is not None and self.max_candidates_per_function < 1:
            raise ValidationError("max_candidates_per_function must be positive")


@dataclass
class MatchState:
    """Mutable matching state threaded through the detection loop."""

    anchors: set[tuple[str, str]] = field(default_factory=set)
    matched: dict[str, tuple[str, float, str]] = field(default_factory=dict)  # t -> (c, score, origin)
    used_candidates: set[str] = field(default_factory=set)
    priority: dict[str, int] = field(default_factory=dict)

    def add(self, t: str, c: str, score: float, origin: str) -> None:
        assert t not in self.matched and c not in self.used_candidates
        self.matched[t] = (c, score, origin)
        self.used_candidates.add(c)
        self.anchors.add((t, c))

    def frontier(self) -> list[str]:
        """Unmatched targets with at least one matched neighbor, best first."""
        live = [(p, t) for t, p in self.priority.items() if p > 0 and t not in self.matched]
        return [t for _, t in sorted(live, key=lambda item: (-item[0], item[1]))]


@dataclass(frozen=True)
class DetectionResult:
    target: str
    candidate: str
    matched: tuple[tuple[str, str, float], ...]  # dev pairs only, sorted by target id
    way2_anchors: tuple[str, ...]  # library names matched across both programs
    program_similarity: float
    comparison_count: int
    total_pair_count: int
    target_dev_count: int
    candidate_dev_count: int
    diagnostics: dict[str, list[str]] = field(hash=False, default_factory=dict)


def lcs_length(a: tuple[str, ...] | list[str], b: tuple[str, ...] | list[str]) -> int:
    """Classic O(len(a)*len(b)) longest-common-subsequence length."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[-1]))
        prev = cur
    return prev[-1]


def lcs_pairs(a: tuple[str, ...] | list[str], b: tuple[str, ...] | list[str]) -> list[tuple[int, int]]:
    """One canonical LCS alignment as (index in a, index in b) pairs."""
    n, m = len(a), len(b)
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            if a[i - 1] == b[j - 1]:
                table[i][j] = table[i - 1][j - 1] + 1
            else:
                table[i][j] = max(table[i - 1][j], table[i][j - 1])
    pairs: list[tuple[int, int]] = []
    i, j = n, m
    while i > 0 and j > 0:
        if a[i - 1] == b[j - 1] and table[i][j] == table[i - 1][j - 1] + 1:
            pairs.append((i - 1, j - 1))
            i -= 1
            j -= 1
        elif table[i - 1][j] >= table[i][j - 1]:
            i -= 1
        else:
            j -= 1
    pairs.reverse()
    return pairs


def sim_mbp(m1: Mbp, m2: Mbp) -> float:
    """2*LCS / (|ops1| + |ops2|); two empty sequences count as identical."""
    if not m1.ops and not m2.ops:
        return 1.0
    denom = len(m1.ops) + len(m2.ops)
    return 2.0 * lcs_length(m1.ops, m2.ops) / denom


def max_score(m1: Mbp, m2_set: tuple[Mbp, ...]) -> float:
    return max((sim_mbp(m1, m2) for m2 in m2_set), default=0.0)


def sim_mbp_set(m1_set: tuple[Mbp, ...], m2_set: tuple[Mbp, ...]) -> float:
    """Length-weighted mean of each target MBP's best match in the candidate set.

    The direction is fixed: the first argument is the target function's MBP
    set, so the score reads "how much of the target is found in the
    candidate". Degenerate cases: both sets empty -> 1.0; target empty or
    candidate empty -> 0.0; all-empty op sequences fall back to an unweighted
    mean.
    """
    if not m1_set:
        return 1.0 if not m2_set else 0.0
    if not m2_set:
        return 0.0
    total = sum(len(m.ops) for m in m1_set)
    if total == 0:
        return sum(max_score(m, m2_set) for m in m1_set) / len(m1_set)
    return sum(len(m.ops) * max_score(m, m2_set) for m in m1_set) / total


def recognize_anchors(tb: ProgramBirthmark, cb: ProgramBirthmark) -> list[tuple[str, str, str]]:
    """Seed anchors: (target id, candidate id, origin), deterministic order.

    Way 1 pairs developer functions whose entire normalized instruction
    sequences are identical. Way 2 pairs library stubs by shared symbol name.
    Pairs are emitted in lexicographic order; the one-to-one rule is applied
    by the caller.
    """
    by_flat: dict[tuple[str, ...], list[str]] = {}
    for cid in cb.dev_ids:
        by_flat.setdefault(cb.function_marks[cid].flat_ops, []).append(cid)

    out: list[tuple[str, str, str]] = []
    for tid in tb.dev_ids:
        for cid in by_flat.get(tb.function_marks[tid].flat_ops, ()):
            out.append((tid, cid, ORIGIN_WAY1))

    t_by_name: dict[str, str] = {}
    for sid, name in sorted(tb.lib_stubs.items()):
        t_by_name.setdefault(name, sid)
    c_by_name: dict[str, str] = {}
    for sid, name in sorted(cb.lib_stubs.items()):
        c_by_name.setdefault(name, sid)
    for name in sorted(set(t_by_name) & set(c_by_name)):
        out.append((t_by_name[name], c_by_name[name], ORIGIN_WAY2))
    return out


def intent_search(state: MatchState, f_tb: str, fcg_t: FunctionCallGraph,
                  fcg_c: FunctionCallGraph) -> list[str]:
    """Candidate functions for ``f_tb``, proposed via its matched neighbors.

    Pre collects successors of candidates matched to ``f_tb``'s predecessors;
    Suc collects predecessors of candidates matched to ``f_tb``'s successors.
    The proposal set is their intersection when both are non-empty, otherwise
    their union. Library stubs and already-matched candidates are excluded.
    Returns a sorted list of candidate function ids.
    """
    pre: set[str] = set()
    for f_ta in fcg_t.preds[f_tb]:
        hit = state.matched.get(f_ta)
        if hit is not None:
            pre.update(fcg_c.succs[hit[0]])
    suc: set[str] = set()
    for f_td in fcg_t.succs[f_tb]:
        hit = state.matched.get(f_td)
        if hit is not None:
            suc.update(fcg_c.preds[hit[0]])

    ff = (pre & suc) if (pre and suc) else (pre | suc)
    ff -= state.used_candidates
    ff -= fcg_c.lib_nodes
    return sorted(ff)


def _recount_priorities(state: MatchState, tb: ProgramBirthmark) -> None:
    for t in tb.dev_ids:
        if t not in state.matched:
            state.priority[t] = sum(1 for n in tb.fcg.neighbors(t) if n in state.matched)


def detect(tb: ProgramBirthmark, cb: ProgramBirthmark,
           config: SimilarityConfig | None = None) -> DetectionResult:
    """Full reuse detection between a target and a candidate birthmark."""
    if config is None:
        config = SimilarityConfig()

    state = MatchState()
    way2_names: list[str] = []
    for t, c, origin in recognize_anchors(tb, cb):
        if t in state.matched or c in state.used_candidates:
            continue  # one-to-one, first (lexicographic) pair wins
        state.add(t, c, 1.0, origin)
        if origin == ORIGIN_WAY2:
            way2_names.append(tb.lib_stubs[t])

    score_cache: dict[tuple[str, str], float] = {}
    comparisons = 0

    def score(t: str, c: str) -> float:
        nonlocal comparisons
        key = (t, c)
        if key not in score_cache:
            score_cache[key] = sim_mbp_set(tb.function_marks[t].mbps, cb.function_marks[c].mbps)
            comparisons += 1
        return score_cache[key]

    state.priority = {}
    _recount_priorities(state, tb)

    tried_since_accept: set[str] = set()
    while True:
        frontier = [t for t in state.frontier() if t not in tried_since_accept]
        if not frontier:
            break
        f_tb = frontier[0]
        ff = intent_search(state, f_tb, tb.fcg, cb.fcg)
        if config.max_candidates_per_function is not None:
            ff = ff[:config.max_candidates_per_function]

        best_c: str | None = None
        best_score = -1.0
        for c in ff:
            s = score(f_tb, c)
            if s > best_score:
                best_c, best_score = c, s
        if best_c is not None and best_score >= config.threshold:
            state.add(f_tb, best_c, best_score, ORIGIN_SEARCH)
            _recount_priorities(state, tb)
            tried_since_accept.clear()
        else:
            tried_since_accept.add(f_tb)

    dev_matched = tuple(
        (t, state.matched[t][0], state.matched[t][1])
        for t in sorted(state.matched)
        if t in tb.function_marks
    )
    candidate_dev_count = len(cb.dev_ids)
    similarity = len(dev_matched) / candidate_dev_count if candidate_dev_count else 0.0
    unvisited = sorted(
        t for t in tb.dev_ids
        if t not in state.matched and state.priority.get(t, 0) == 0
    )
    return DetectionResult(
        target=tb.program_id,
        candidate=cb.program_id,
        matched=dev_matched,
        way2_anchors=tuple(sorted(way2_names)),
        program_similarity=similarity,
        comparison_count=comparisons,
        total_pair_count=len(tb.dev_ids) * len(cb.dev_ids),
        target_dev_count=len(tb.dev_ids),
        candidate_dev_count=candidate_dev_count,
        diagnostics={"unvisited_targets": unvisited},
    )


def result_to_dict(result: DetectionResult) -> dict:
    return {
        "version": RESULT_FORMAT_VERSION,
        "target": result.target,
        "candidate": result.candidate,
        "matched": [
            {"t": t, "c": c, "score": score} for t, c, score in result.matched
        ],
        "way2_anchors": list(result.way2_anchors),
        "program_similarity": result.program_similarity,
        "comparison_count": result.comparison_count,
        "total_pair_count": result.total_pair_count,
        "target_dev_count": result.target_dev_count,
        "candidate_dev_count": result.candidate_dev_count,
        "diagnostics": result.diagnostics,
    }


def result_from_dict(doc: dict) -> DetectionResult:
    try:
        version = doc["version"]
        if version != RESULT_FORMAT_VERSION:
            raise ValidationError(f"unsupported result format version {version!r}", "$.version")
        return DetectionResult(
            target=doc["target"],
            candidate=doc["candidate"],
            matched=tuple((m["t"], m["c"], float(m["score"])) for m in doc["matched"]),
            way2_anchors=tuple(doc["way2_anchors"]),
            program_similarity=float(doc["program_similarity"]),
            comparison_count=int(doc["comparison_count"]),
            total_pair_count=int(doc["total_pair_count"]),
            target_dev_count=int(doc["target_dev_count"]),
            candidate_dev_count=int(doc["candidate_dev_count"]),
            diagnostics={k: list(v) for k, v in doc.get("diagnostics", {}).items()},
        )
    except ValidationError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"malformed result document: {e!r}") from e


def dumps_result(result: DetectionResult) -> str:
    return json.dumps(result_to_dict(result), indent=2) + "\n"


def loads_result(text: str) -> DetectionResult:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"result document is not valid JSON: {e}") from e
    return result_from_dict(doc)
