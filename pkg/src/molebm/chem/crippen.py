"""Wildman-Crippen style logP as a sum of atom contributions.

Atoms are typed by element, aromaticity, and neighbor classes — a coarser
scheme than the published SMARTS table, with contributions fitted once
against a reference implementation (see tools/fit_crippen) and frozen in
crippen_params.py. Hydrogens are implicit; each heavy atom adds its H
count times the H contribution for that element class. Atoms whose type
is missing from the table fall back to an element average and flag the
result.
"""

from __future__ import annotations

from typing import NamedTuple

from .crippen_params import CONTRIBUTIONS, ELEMENT_DEFAULTS
from .graph import AROMATIC, DOUBLE, MolGraph, SINGLE, TRIPLE
from .valence import hydrogen_counts

_HETERO = frozenset({"N", "O", "P", "S", "F", "Cl", "Br", "I"})


class LogPResult(NamedTuple):
    value: float
    flagged: bool


def _carbon_type(g: MolGraph, i: int, nbrs) -> str:
    orders = [o for _, o in nbrs]
    elements = [g.atoms[j].element for j, _ in nbrs]
    if g.atoms[i].aromatic:
        if sum(1 for o in orders if o == AROMATIC) >= 3:
            return "c_fused"
        plain = [(j, o) for j, o in nbrs if o != AROMATIC]
        if any(g.atoms[j].aromatic for j, _ in plain):
            return "c_link"
        if any(g.atoms[j].element in _HETERO for j, _ in plain):
            return "c_het"
        if plain:
            return "c_C"
        return "c_H"
    if TRIPLE in orders:
        return "C_sp"
    if DOUBLE in orders:
        if any(e in _HETERO for e in elements):
            return "C_sp2_het"
        return "C_sp2"
    if any(e in _HETERO for e in elements):
        return "C_sp3_het_12" if len(nbrs) <= 2 else "C_sp3_het_34"
    return "C_sp3_12" if len(nbrs) <= 2 else "C_sp3_34"


def _has_carbonyl_neighbor(g: MolGraph, j: int, adj) -> bool:
    return any(
        o == DOUBLE and g.atoms[k].element == "O" for k, o in adj[j]
    )


def _nitrogen_type(g: MolGraph, i: int, nbrs, adj) -> str:
    atom = g.atoms[i]
    if atom.aromatic:
        return "n_ar_pos" if atom.charge > 0 else "n_ar"
    if atom.charge > 0:
        return "N_pos"
    orders = [o for _, o in nbrs]
    if TRIPLE in orders:
        return "N_sp"
    if DOUBLE in orders:
        return "N_sp2"
    if any(g.atoms[j].element == "C" and _has_carbonyl_neighbor(g, j, adj)
           for j, o in nbrs if o == SINGLE):
        return "N_amide"
    if any(g.atoms[j].aromatic for j, _ in nbrs):
        return "N_anilinic"
    return {0: "N_1", 1: "N_1", 2: "N_2"}.get(len(nbrs), "N_3")


def _oxygen_type(g: MolGraph, i: int, h: int, nbrs, adj) -> str:
    atom = g.atoms[i]
    if atom.aromatic:
        return "o_ar"
    if atom.charge < 0:
        return "O_neg"
    if any(o == DOUBLE for _, o in nbrs):
        return "O_carbonyl"
    if h > 0:
        return "O_OH"
    if any(g.atoms[j].element == "C" and _has_carbonyl_neighbor(g, j, adj)
           for j, _ in nbrs):
        return "O_ester"
    if any(g.atoms[j].aromatic for j, _ in nbrs):
        return "O_ether_ar"
    return "O_ether"


def atom_type(g: MolGraph, i: int, h: int, adj) -> str:
    atom = g.atoms[i]
    nbrs = adj[i]
    if atom.element == "C":
        return _carbon_type(g, i, nbrs)
    if atom.element == "N":
        return _nitrogen_type(g, i, nbrs, adj)
    if atom.element == "O":
        return _oxygen_type(g, i, h, nbrs, adj)
    if atom.element == "S":
        if atom.aromatic:
            return "s_ar"
        if any(o == DOUBLE and g.atoms[j].element == "O" for j, o in nbrs):
            return "S_ox"
        return "S"
    if atom.element in ("P", "B", "F", "Cl", "Br", "I"):
        return atom.element
    return f"unknown:{atom.element}"


def _h_type(element: str) -> str:
    if element == "C":
        return "H_C"
    if element == "N":
        return "H_N"
    if element == "O":
        return "H_O"
    return "H_other"


def logp(g: MolGraph) -> LogPResult:
    h = hydrogen_counts(g)
    adj = g.adjacency()
    total = 0.0
    flagged = False
    for i, atom in enumerate(g.atoms):
        t = atom_type(g, i, h[i], adj)
        c = CONTRIBUTIONS.get(t)
        if c is None:
            c = ELEMENT_DEFAULTS.get(atom.element, 0.0)
            flagged = True
        total += c
        if h[i]:
            hc = CONTRIBUTIONS.get(_h_type(atom.element))
            if hc is None:
                hc = ELEMENT_DEFAULTS.get("H", 0.0)
                flagged = True
            total += h[i] * hc
    return LogPResult(total, flagged)


def logp_smiles(smiles: str) -> LogPResult:
    from .graph import parse_smiles

    return logp(parse_smiles(smiles))
