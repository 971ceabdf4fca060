"""Mnemonic -> operation-class lifting table.

The table is a plain text file ("mnemonic  CLASS" per line, '#' comments) so
new mnemonics or foreign ISAs can be covered without code changes. Mnemonics
absent from the table degrade to OTHER instead of erroring.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .errors import ValidationError

TRANSFER = "TRANSFER"
JUMP = "JUMP"
OTHER = "OTHER"

# Fixed taxonomy of high-level operation classes.
TAXONOMY = frozenset({
    TRANSFER, "ADD", "SUB", "MUL", "DIV", "AND", "OR", "XOR", "NOT", "SHIFT",
    "COMPARE", "CALL", "RET", JUMP, "ADDRESS", "STACKFRAME", "FLOAT_ARITH",
    "STRING_OP", "NOP", OTHER,
})

DEFAULT_TABLE_RESOURCE = "x86_lifting.txt"


@dataclass(frozen=True)
class LiftingTable:
    mapping: dict[str, str]

    def lift(self, mnemonic: str) -> str:
        return self.mapping.get(mnemonic, OTHER)


def parse_lifting_table(text: str, origin: str = "<table>") -> LiftingTable:
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValidationError(f"expected 'mnemonic CLASS', got {line!r}", f"{origin}:{lineno}")
        mnemonic, cls = parts
        if cls not in TAXONOMY:
            raise ValidationError(f"unknown operation class {cls!r}", f"{origin}:{lineno}")
        if mnemonic != mnemonic.lower():
            raise ValidationError(f"mnemonic {mnemonic!r} must be lowercase", f"{origin}:{lineno}")
        if mnemonic in mapping and mapping[mnemonic] != cls:
            raise ValidationError(f"conflicting classes for mnemonic {mnemonic!r}", f"{origin}:{lineno}")
        mapping[mnemonic] = cls
    return LiftingTable(mapping=mapping)


def load_lifting_table(path: str) -> LiftingTable:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_lifting_table(fh.read(), origin=path)


@lru_cache(maxsize=1)
def default_lifting_table() -> LiftingTable:
    text = resources.files("reusedetect").joinpath(f"data/{DEFAULT_TABLE_RESOURCE}").read_text("utf-8")
    return parse_lifting_table(text, origin=DEFAULT_TABLE_RESOURCE)
