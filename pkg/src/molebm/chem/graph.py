"""SMILES parsing to a molecular graph.

The parser walks the token stream with a branch stack and a ring-closure
table. Bond symbols apply to the next atom or ring closure. A default
bond is aromatic when both endpoints are aromatic atoms, single otherwise.
Stereo markers (/, \\, @) are accepted and recorded but carry no graph
semantics here.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from . import tokens as tk

SINGLE = "single"
DOUBLE = "double"
TRIPLE = "triple"
AROMATIC = "aromatic"

BOND_ORDER_VALUE = {SINGLE: 1, DOUBLE: 2, TRIPLE: 3, AROMATIC: 1}

_SYMBOL_TO_ORDER = {"-": SINGLE, "=": DOUBLE, "#": TRIPLE, ":": AROMATIC,
                    "/": SINGLE, "\\": SINGLE}

_BRACKET_RE = re.compile(
    r"""\[
        (?P<isotope>\d+)?
        (?P<element>Cl|Br|[BCNOPSFI]|[bcnops]|H)
        (?P<chiral>@{1,2})?
        (?P<hcount>H\d*)?
        (?P<charge>\+{1,3}|-{1,3}|\+\d+|-\d+)?
        (?::\d+)?
    \]""",
    re.VERBOSE,
)


class ParseError(ValueError):
    """Raised for token streams that do not form a molecule."""


@dataclass
class Atom:
    element: str            # normalized to title case ("C", "Cl")
    aromatic: bool = False
    charge: int = 0
    h_count: Optional[int] = None   # None: fill implicitly; int: fixed by bracket
    bracket: bool = False
    isotope: Optional[int] = None
    chiral: Optional[str] = None


class Bond(NamedTuple):
    a: int
    b: int
    order: str


@dataclass
class MolGraph:
    atoms: list[Atom] = field(default_factory=list)
    bonds: list[Bond] = field(default_factory=list)

    def neighbors(self, i: int) -> list[tuple[int, str]]:
        out = []
        for bond in self.bonds:
            if bond.a == i:
                out.append((bond.b, bond.order))
            elif bond.b == i:
                out.append((bond.a, bond.order))
        return out

    def adjacency(self) -> list[list[tuple[int, str]]]:
        adj: list[list[tuple[int, str]]] = [[] for _ in self.atoms]
        for bond in self.bonds:
            adj[bond.a].append((bond.b, bond.order))
            adj[bond.b].append((bond.a, bond.order))
        return adj


def _parse_bracket(text: str) -> Atom:
    m = _BRACKET_RE.fullmatch(text)
    if m is None:
        raise ParseError(f"malformed bracket atom {text!r}")
    raw = m.group("element")
    aromatic = raw.islower()
    hcount = 0
    if m.group("hcount"):
        digits = m.group("hcount")[1:]
        hcount = int(digits) if digits else 1
    charge = 0
    if m.group("charge"):
        c = m.group("charge")
        sign = 1 if c[0] == "+" else -1
        charge = sign * (int(c[1:]) if c[1:].isdigit() else len(c))
    return Atom(
        element=raw.capitalize(),
        aromatic=aromatic,
        charge=charge,
        h_count=hcount,
        bracket=True,
        isotope=int(m.group("isotope")) if m.group("isotope") else None,
        chiral=m.group("chiral"),
    )


def parse(tokens: list[tk.Token]) -> MolGraph:
    g = MolGraph()
    prev: Optional[int] = None          # atom awaiting the next bond
    pending: Optional[str] = None       # explicit bond symbol not yet used
    fresh_branch = False                # inside '(' with no atom emitted yet
    branch_stack: list[tuple[int, int]] = []
    # ring digit -> (open atom, bond symbol at open, open position)
    open_rings: dict[str, tuple[int, Optional[str], int]] = {}
    seen_pairs: set[tuple[int, int]] = set()

    def add_bond(a: int, b: int, symbol: Optional[str]) -> None:
        if a == b:
            raise ParseError("ring closure bonds an atom to itself")
        key = (min(a, b), max(a, b))
        if key in seen_pairs:
            raise ParseError(f"duplicate bond between atoms {a} and {b}")
        seen_pairs.add(key)
        if symbol is not None:
            order = _SYMBOL_TO_ORDER[symbol]
        elif g.atoms[a].aromatic and g.atoms[b].aromatic:
            order = AROMATIC
        else:
            order = SINGLE
        g.bonds.append(Bond(a, b, order))

    def close_ring(digit: str, pos: int) -> None:
        nonlocal pending
        if prev is None:
            raise ParseError(f"ring digit before any atom at position {pos}")
        if fresh_branch:
            # A branch must start with an atom or a bond symbol; a ring
            # closure here would silently attach to the atom before '('.
            raise ParseError(f"ring digit directly after '(' at position {pos}")
        if digit in open_rings:
            a, open_sym, _ = open_rings.pop(digit)
            if open_sym is not None and pending is not None and open_sym != pending:
                raise ParseError(f"conflicting bond symbols on ring {digit}")
            add_bond(a, prev, open_sym if open_sym is not None else pending)
        else:
            open_rings[digit] = (prev, pending, pos)
        pending = None

    for pos, token in enumerate(tokens):
        if token.kind in tk.SENTINEL_KINDS:
            continue
        if token.kind in (tk.ATOM, tk.AROMATIC_ATOM, tk.BRACKET_ATOM):
            if token.kind == tk.BRACKET_ATOM:
                atom = _parse_bracket(token.text)
            else:
                atom = Atom(element=token.text.capitalize(),
                            aromatic=token.kind == tk.AROMATIC_ATOM)
            g.atoms.append(atom)
            idx = len(g.atoms) - 1
            if prev is not None:
                add_bond(prev, idx, pending)
            elif pending is not None:
                raise ParseError("bond symbol before the first atom")
            pending = None
            prev = idx
            fresh_branch = False
        elif token.kind == tk.BOND:
            if pending is not None:
                raise ParseError(f"two bond symbols in a row at position {pos}")
            if prev is None:
                raise ParseError("bond symbol before the first atom")
            pending = token.text
        elif token.kind == tk.BRANCH_OPEN:
            if prev is None:
                raise ParseError("branch open before any atom")
            if pending is not None:
                raise ParseError("bond symbol directly before '('")
            if fresh_branch:
                raise ParseError(f"branch must start with an atom at position {pos}")
            branch_stack.append((prev, len(g.atoms)))
            fresh_branch = True
        elif token.kind == tk.BRANCH_CLOSE:
            if not branch_stack:
                raise ParseError(f"unmatched ')' at position {pos}")
            if pending is not None:
                raise ParseError("bond symbol with no following atom")
            prev, atoms_at_open = branch_stack.pop()
            if len(g.atoms) == atoms_at_open:
                raise ParseError(f"empty branch at position {pos}")
            fresh_branch = False
        elif token.kind == tk.RING_DIGIT:
            close_ring(token.text, pos)
        elif token.kind == tk.RING_PERCENT:
            close_ring(token.text[1:], pos)
        else:
            raise ParseError(f"unexpected token kind {token.kind!r}")

    if not g.atoms:
        raise ParseError("empty input")
    if pending is not None:
        raise ParseError("bond symbol with no following atom")
    if branch_stack:
        raise ParseError("unclosed '('")
    if open_rings:
        digit, (_, _, pos) = next(iter(open_rings.items()))
        raise ParseError(f"ring digit {digit} opened at position {pos} never closed")
    return g


def parse_smiles(smiles: str) -> MolGraph:
    return parse(tk.tokenize(smiles))
