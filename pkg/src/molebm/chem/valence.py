"""Valence validation and implicit hydrogen resolution.

An atom's used valence is the sum of its bond orders plus hydrogens, with
|charge| counted against the allowance. Aromatic bonds count 1 sigma each;
an aromatic atom may additionally claim one pi unit for the delocalized
system. Whether each atom actually can hold its claimed pi bond is settled
by a perfect-matching feasibility check over the aromatic subgraph, which
is what rejects strings like c1cccc1 that satisfy the per-atom sums.
"""

from __future__ import annotations

from typing import NamedTuple, Optional

from .graph import AROMATIC, BOND_ORDER_VALUE, MolGraph

VALENCES: dict[str, tuple[int, ...]] = {
    "B": (3,),
    "C": (4,),
    "N": (3, 5),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
    "H": (1,),
}

# Aromatic subsystems in drug-like molecules are small rings; beyond this
# many atoms the matching search is skipped rather than risk blowup.
_MATCHING_CAP = 60


class ValenceError(KeyError):
    """Raised when an element has no entry in the valence table."""


class ValenceReport(NamedTuple):
    ok: bool
    reason: Optional[str]
    h_counts: Optional[list[int]]   # resolved implicit+explicit H per atom


def allowed_valences(element: str) -> tuple[int, ...]:
    try:
        return VALENCES[element]
    except KeyError:
        raise ValenceError(element) from None


def _aromatic_bridges(g: MolGraph) -> set[tuple[int, int]]:
    """Bridge edges of the aromatic-bond subgraph (edges on no cycle)."""
    adj: dict[int, list[int]] = {}
    for bond in g.bonds:
        if bond.order == AROMATIC:
            adj.setdefault(bond.a, []).append(bond.b)
            adj.setdefault(bond.b, []).append(bond.a)
    disc: dict[int, int] = {}
    low: dict[int, int] = {}
    bridges: set[tuple[int, int]] = set()
    counter = [0]
    for root in adj:
        if root in disc:
            continue
        # iterative Tarjan; recursion would overflow on long fuzz inputs
        stack: list[tuple[int, int, int]] = [(root, -1, 0)]
        while stack:
            v, parent, i = stack.pop()
            if i == 0:
                disc[v] = low[v] = counter[0]
                counter[0] += 1
            if i < len(adj[v]):
                stack.append((v, parent, i + 1))
                w = adj[v][i]
                if w == parent:
                    continue
                if w in disc:
                    low[v] = min(low[v], disc[w])
                else:
                    stack.append((w, v, 0))
            elif parent >= 0:
                low[parent] = min(low[parent], low[v])
                if low[v] > disc[parent]:
                    bridges.add((min(parent, v), max(parent, v)))
    return bridges


def _perfect_matching_exists(nodes: list[int], adj: dict[int, list[int]]) -> bool:
    """Backtracking search for a perfect matching on a small graph."""
    if len(nodes) % 2 == 1:
        return False
    unmatched = set(nodes)

    def solve() -> bool:
        if not unmatched:
            return True
        v = min(unmatched)
        unmatched.discard(v)
        for w in adj[v]:
            if w in unmatched:
                unmatched.discard(w)
                if solve():
                    return True
                unmatched.add(w)
        unmatched.add(v)
        return False

    return solve()


def check_valence(g: MolGraph) -> ValenceReport:
    def invalid(reason: str) -> ValenceReport:
        return ValenceReport(False, reason, None)

    adj = g.adjacency()
    sigma = [0] * len(g.atoms)
    n_aromatic_bonds = [0] * len(g.atoms)
    for bond in g.bonds:
        a_ar, b_ar = g.atoms[bond.a].aromatic, g.atoms[bond.b].aromatic
        if bond.order == AROMATIC and not (a_ar and b_ar):
            return invalid(
                f"aromatic bond {bond.a}-{bond.b} touches a non-aromatic atom")
        value = BOND_ORDER_VALUE[bond.order]
        sigma[bond.a] += value
        sigma[bond.b] += value
        if bond.order == AROMATIC:
            n_aromatic_bonds[bond.a] += 1
            n_aromatic_bonds[bond.b] += 1

    bridges = _aromatic_bridges(g)
    for bond in g.bonds:
        key = (min(bond.a, bond.b), max(bond.a, bond.b))
        if bond.order == AROMATIC and key in bridges:
            return invalid(
                f"aromatic bond {bond.a}-{bond.b} lies in no ring")

    h_counts: list[int] = []
    takes_pi: list[bool] = []
    for i, atom in enumerate(g.atoms):
        try:
            allowed = allowed_valences(atom.element)
        except ValenceError:
            return invalid(f"atom {i}: element {atom.element} not in valence table")

        if atom.aromatic:
            if n_aromatic_bonds[i] < 2:
                return invalid(f"atom {i}: aromatic atom outside an aromatic ring")
            in_cycle = sum(
                1 for j, order in adj[i]
                if order == AROMATIC and (min(i, j), max(i, j)) not in bridges)
            if in_cycle < 2:
                return invalid(f"atom {i}: aromatic bonds at atom form no ring")

        used = sigma[i] + abs(atom.charge) + (atom.h_count or 0)
        fits = [v for v in allowed if used <= v]
        if not fits:
            return invalid(
                f"atom {i}: {atom.element} valence {used} exceeds {allowed}")
        pi = False
        # An aromatic atom contributes a pi bond only when it has headroom
        # within its smallest fitting valence; otherwise it donates a lone
        # pair (pyrrole/N-alkylated N, furan O, thiophene S).
        if atom.aromatic and used + 1 <= min(fits):
            used += 1
            pi = True
        if atom.h_count is None:
            fill = min(fits) - used
        else:
            fill = 0
        h_counts.append((atom.h_count or 0) + fill)
        takes_pi.append(pi)

    # Pi-claiming atoms must pair up along aromatic bonds (one Kekulé
    # double bond each); an odd aromatic ring has no such pairing.
    pi_nodes = [i for i, t in enumerate(takes_pi) if t]
    if pi_nodes:
        node_set = set(pi_nodes)
        pi_adj = {i: [j for j, order in adj[i]
                      if order == AROMATIC and j in node_set]
                  for i in pi_nodes}
        seen: set[int] = set()
        for start in pi_nodes:
            if start in seen:
                continue
            component = [start]
            seen.add(start)
            k = 0
            while k < len(component):
                for j in pi_adj[component[k]]:
                    if j not in seen:
                        seen.add(j)
                        component.append(j)
                k += 1
            if len(component) <= _MATCHING_CAP and not _perfect_matching_exists(
                    component, pi_adj):
                return invalid(
                    "aromatic system has no Kekulé assignment "
                    f"(atoms {sorted(component)})")

    return ValenceReport(True, None, h_counts)


def bare_fill(element: str, aromatic: bool, sigma: int) -> Optional[int]:
    """H count a reader infers for an unbracketed atom with this sigma sum,
    or None when no allowed valence fits."""
    try:
        allowed = allowed_valences(element)
    except ValenceError:
        return None
    used = sigma
    fits = [v for v in allowed if used <= v]
    if not fits:
        return None
    if aromatic and used + 1 <= min(fits):
        used += 1
    return min(fits) - used


def hydrogen_counts(g: MolGraph) -> list[int]:
    """Resolved H per atom; raises on invalid graphs."""
    report = check_valence(g)
    if not report.ok:
        raise ValueError(f"invalid molecule: {report.reason}")
    assert report.h_counts is not None
    return report.h_counts
