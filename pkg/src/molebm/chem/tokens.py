"""SMILES tokenization.

Greedy longest-match over a fixed grammar: bracket atoms and %nn ring
closures are single tokens, Cl/Br are single tokens (splitting them would
let the decoder emit bare "l"/"r" which no parser accepts), everything
else is one character.
"""

from __future__ import annotations

from typing import NamedTuple

ATOM = "atom"
AROMATIC_ATOM = "aromatic-atom"
BRACKET_ATOM = "bracket-atom"
BOND = "bond"
BRANCH_OPEN = "branch-open"
BRANCH_CLOSE = "branch-close"
RING_DIGIT = "ring-digit"
RING_PERCENT = "ring-percent"
BEGIN = "begin"
END = "end"
PAD = "pad"

SENTINEL_KINDS = frozenset({BEGIN, END, PAD})

_TWO_CHAR_ELEMENTS = ("Cl", "Br")
_ORGANIC_UPPER = frozenset("BCNOPSFI")
_AROMATIC_LOWER = frozenset("bcnops")
_BOND_CHARS = frozenset("-=#/\\:")


class Token(NamedTuple):
    kind: str
    text: str


class TokenizeError(ValueError):
    """Raised for characters outside the grammar or unterminated brackets."""


def tokenize(smiles: str) -> list[Token]:
    if not smiles.isascii():
        raise TokenizeError("SMILES must be ASCII")
    out: list[Token] = []
    i, n = 0, len(smiles)
    while i < n:
        ch = smiles[i]
        if ch == "[":
            j = smiles.find("]", i)
            if j < 0:
                raise TokenizeError(f"unterminated bracket atom at position {i}")
            out.append(Token(BRACKET_ATOM, smiles[i : j + 1]))
            i = j + 1
        elif smiles.startswith(_TWO_CHAR_ELEMENTS, i):
            out.append(Token(ATOM, smiles[i : i + 2]))
            i += 2
        elif ch in _ORGANIC_UPPER:
            out.append(Token(ATOM, ch))
            i += 1
        elif ch in _AROMATIC_LOWER:
            out.append(Token(AROMATIC_ATOM, ch))
            i += 1
        elif ch in _BOND_CHARS:
            out.append(Token(BOND, ch))
            i += 1
        elif ch == "(":
            out.append(Token(BRANCH_OPEN, ch))
            i += 1
        elif ch == ")":
            out.append(Token(BRANCH_CLOSE, ch))
            i += 1
        elif ch == "%":
            if i + 2 >= n or not smiles[i + 1 : i + 3].isdigit():
                raise TokenizeError(f"'%' needs two digits at position {i}")
            out.append(Token(RING_PERCENT, smiles[i : i + 3]))
            i += 3
        elif ch.isdigit():
            out.append(Token(RING_DIGIT, ch))
            i += 1
        else:
            raise TokenizeError(f"unrecognized character {ch!r} at position {i}")
    return out


def detokenize(tokens: list[Token]) -> str:
    return "".join(t.text for t in tokens if t.kind not in SENTINEL_KINDS)
