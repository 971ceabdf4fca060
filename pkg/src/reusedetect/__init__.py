"""Partial software reuse detection for disassembled binaries.

The pipeline: parse a disassembly IR document, generate a three-level
birthmark (call graph, minimum branch paths, normalized operations), match
functions between two programs by anchor recognition plus call-graph-guided
search, and emit interpretable evidence for every match.
"""

__version__ = "0.1.0"

from .birthmark import (FunctionBirthmark, Mbp, ProgramBirthmark, build_birthmark,
                        collapse_transfer_runs, drop_jumps, dumps_birthmark,
                        extract_mbps, extract_paths, loads_birthmark, normalize)
from .detection import (DetectionResult, MatchState, SimilarityConfig, detect,
                        dumps_result, intent_search, lcs_length, lcs_pairs,
                        loads_result, recognize_anchors, sim_mbp, sim_mbp_set)
from .errors import IntegrityError, ValidationError
from .evaluation import (GroundTruth, Metrics, dumps_metrics, loads_ground_truth,
                         reduction_ratio, score_against_truth)
from .ir import (BasicBlock, Cfg, FunctionCallGraph, FunctionRecord, Instruction,
                 ProgramIr, build_fcg, parse_program_ir, serialize_program_ir)
from .lifting import (LiftingTable, TAXONOMY, default_lifting_table,
                      load_lifting_table, parse_lifting_table)
from .report import (AlignmentEvidence, MatchedSubgraph, ReuseReport, build_report,
                     dumps_report, loads_report, render_dot)

__all__ = [
    "AlignmentEvidence", "BasicBlock", "Cfg", "DetectionResult", "FunctionBirthmark",
    "FunctionCallGraph", "FunctionRecord", "GroundTruth", "Instruction",
    "IntegrityError", "LiftingTable", "MatchState", "MatchedSubgraph", "Mbp",
    "Metrics", "ProgramBirthmark", "ProgramIr", "ReuseReport", "SimilarityConfig",
    "TAXONOMY", "ValidationError", "build_birthmark", "build_fcg", "build_report",
    "collapse_transfer_runs", "default_lifting_table", "detect", "drop_jumps",
    "dumps_birthmark", "dumps_metrics", "dumps_report", "dumps_result",
    "extract_mbps", "extract_paths", "intent_search", "lcs_length", "lcs_pairs",
    "load_lifting_table", "loads_birthmark", "loads_ground_truth", "loads_report",
    "loads_result", "normalize", "parse_lifting_table", "parse_program_ir",
    "recognize_anchors", "reduction_ratio", "render_dot", "score_against_truth",
    "serialize_program_ir", "sim_mbp", "sim_mbp_set",
]
