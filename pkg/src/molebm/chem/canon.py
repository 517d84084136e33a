"""Canonical SMILES via Morgan-style invariant refinement.

Atoms start from (element, degree, charge, H count, aromatic) invariants,
refined by sorted neighbor ranks until the partition is stable. Remaining
ties are broken one atom at a time (smallest index in the smallest tied
class) with re-refinement, which resolves symmetric atoms in a way that
cannot change the emitted string. Output is a deterministic DFS from the
minimal-rank atom. Stereo markers are dropped: two spellings differing
only in stereo collapse to one canonical form.
"""

from __future__ import annotations

import bisect

from .graph import (AROMATIC, BOND_ORDER_VALUE, DOUBLE, MolGraph, SINGLE,
                    TRIPLE, parse_smiles)
from .valence import bare_fill, hydrogen_counts

_AROMATIC_LOWER_OK = frozenset({"B", "C", "N", "O", "P", "S"})


def _dense_ranks(keys: list) -> list[int]:
    order = {k: r for r, k in enumerate(sorted(set(keys)))}
    return [order[k] for k in keys]


def _refine(ranks: list[int], neighbor_lists: list[list[int]]) -> list[int]:
    while True:
        keys = [
            (ranks[i], tuple(sorted(ranks[j] for j in neighbor_lists[i])))
            for i in range(len(ranks))
        ]
        new = _dense_ranks(keys)
        if new == ranks:
            return ranks
        ranks = new


def canonical_ranks(g: MolGraph) -> list[int]:
    h = hydrogen_counts(g)
    neighbor_lists = [[j for j, _ in nbrs] for nbrs in g.adjacency()]
    keys = [
        (a.element, len(neighbor_lists[i]), a.charge, h[i], a.aromatic)
        for i, a in enumerate(g.atoms)
    ]
    ranks = _refine(_dense_ranks(keys), neighbor_lists)
    while len(set(ranks)) < len(ranks):
        counts: dict[int, int] = {}
        for r in ranks:
            counts[r] = counts.get(r, 0) + 1
        tied = min(r for r, c in counts.items() if c > 1)
        chosen = min(i for i, r in enumerate(ranks) if r == tied)
        ranks = [2 * r for r in ranks]
        ranks[chosen] -= 1
        ranks = _refine(_dense_ranks(ranks), neighbor_lists)
    return ranks


def _atom_text(g: MolGraph, i: int, h: int, sigma: int) -> str:
    atom = g.atoms[i]
    symbol = atom.element.lower() if atom.aromatic else atom.element
    if atom.aromatic and atom.element not in _AROMATIC_LOWER_OK:
        raise ValueError(f"no aromatic symbol for element {atom.element}")
    plain_h = bare_fill(atom.element, atom.aromatic, sigma)
    needs_bracket = (
        atom.charge != 0
        or atom.isotope is not None
        or atom.element == "H"
        or plain_h != h
    )
    if not needs_bracket:
        return symbol
    parts = ["["]
    if atom.isotope is not None:
        parts.append(str(atom.isotope))
    parts.append(symbol)
    if h == 1:
        parts.append("H")
    elif h > 1:
        parts.append(f"H{h}")
    if atom.charge:
        sign = "+" if atom.charge > 0 else "-"
        mag = abs(atom.charge)
        parts.append(sign if mag == 1 else f"{sign}{mag}")
    parts.append("]")
    return "".join(parts)


def _bond_text(order: str, a_aromatic: bool, b_aromatic: bool) -> str:
    if order == SINGLE:
        # A bare bond between two aromatic atoms reads back as aromatic.
        return "-" if (a_aromatic and b_aromatic) else ""
    if order == DOUBLE:
        return "="
    if order == TRIPLE:
        return "#"
    if order == AROMATIC:
        return "" if (a_aromatic and b_aromatic) else ":"
    raise ValueError(f"unknown bond order {order!r}")


def canonicalize(g: MolGraph) -> str:
    return _write(g, canonical_ranks(g))


def random_smiles(g: MolGraph, rng) -> str:
    """A valid respelling of g from a random start atom in random order.
    Exercises the same emission path as canonicalize."""
    return _write(g, list(rng.permutation(len(g.atoms))))


def _write(g: MolGraph, ranks: list[int]) -> str:
    h = hydrogen_counts(g)
    adj = g.adjacency()
    sigma = [0] * len(g.atoms)
    for bond in g.bonds:
        sigma[bond.a] += BOND_ORDER_VALUE[bond.order]
        sigma[bond.b] += BOND_ORDER_VALUE[bond.order]

    root = min(range(len(g.atoms)), key=lambda i: ranks[i])
    nbrs_sorted = [sorted(ns, key=lambda t: ranks[t[0]]) for ns in adj]

    # Proper depth-first tree (atoms marked on entry, not on push): every
    # non-tree edge then runs descendant -> ancestor, so a ring closure
    # always opens at the atom emitted first.
    visited = {root}
    parent: dict[int, int] = {}
    children: dict[int, list[int]] = {i: [] for i in range(len(g.atoms))}
    ring_bonds: list[tuple[int, int, str]] = []   # (open atom, close atom, order)
    seen_rings: set[tuple[int, int]] = set()
    stack: list[tuple[int, int]] = [(root, 0)]
    while stack:
        v, i = stack.pop()
        ns = nbrs_sorted[v]
        while i < len(ns):
            w, order = ns[i]
            i += 1
            if w not in visited:
                visited.add(w)
                parent[w] = v
                children[v].append(w)
                stack.append((v, i))
                stack.append((w, 0))
                break
            if parent.get(v) != w:
                key = (min(v, w), max(v, w))
                if key not in seen_rings:
                    seen_rings.add(key)
                    ring_bonds.append((w, v, order))
    if len(visited) != len(g.atoms):
        raise ValueError("disconnected graph cannot be written as one SMILES")

    order_of = {}
    for bond in g.bonds:
        order_of[(bond.a, bond.b)] = bond.order
        order_of[(bond.b, bond.a)] = bond.order
    digit_of: dict[tuple[int, int], int] = {}
    opens_at: dict[int, list[tuple[int, int, str]]] = {}
    closes_at: dict[int, list[tuple[int, int, str]]] = {}
    for a, b, order in ring_bonds:
        opens_at.setdefault(a, []).append((a, b, order))
        closes_at.setdefault(b, []).append((a, b, order))

    free_digits = list(range(1, 100))
    out: list[str] = []

    def digit_text(d: int) -> str:
        return str(d) if d < 10 else f"%{d:02d}"

    def emit(v: int) -> None:
        out.append(_atom_text(g, v, h[v], sigma[v]))
        for a, b, order in sorted(opens_at.get(v, []), key=lambda t: ranks[t[1]]):
            d = free_digits.pop(0)
            digit_of[(a, b)] = d
            out.append(_bond_text(order, g.atoms[a].aromatic, g.atoms[b].aromatic)
                       + digit_text(d))
        for a, b, _ in sorted(closes_at.get(v, []),
                              key=lambda t: digit_of[(t[0], t[1])]):
            d = digit_of.pop((a, b))
            bisect.insort(free_digits, d)
            out.append(digit_text(d))
        kids = children[v]
        for k, w in enumerate(kids):
            bond = _bond_text(order_of[(v, w)],
                              g.atoms[v].aromatic, g.atoms[w].aromatic)
            if k < len(kids) - 1:
                out.append("(" + bond)
                emit(w)
                out.append(")")
            else:
                out.append(bond)
                emit(w)

    emit(root)
    return "".join(out)


def canonical_smiles(smiles: str) -> str:
    return canonicalize(parse_smiles(smiles))
