"""Generate a synthetic drug-like SMILES corpus.

No public molecule dataset is downloadable in this environment, so the
training corpus is produced by a seeded fragment grammar: aromatic and
aliphatic ring systems joined by short linkers and decorated with common
substituents, mirroring the size and token range of commercial screening
libraries. Every emitted string is valence-checked and canonicalized by
the package's own chemistry core, then deduplicated.

Usage: python3 tools/make_corpus.py --n 50000 --seed 7 --out data/corpus.txt
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from molebm.chem.canon import canonicalize            # noqa: E402
from molebm.chem.graph import (AROMATIC, Atom, Bond, DOUBLE, MolGraph,  # noqa: E402
                               SINGLE, TRIPLE)
from molebm.chem.tokens import tokenize               # noqa: E402
from molebm.chem.valence import check_valence         # noqa: E402


def A(element, aromatic=False, charge=0, h=None, bracket=False):
    return (element, aromatic, charge, h, bracket)


def ring_path_bonds(n, order):
    return [(i, (i + 1) % n, order) for i in range(n)]


# (name, atoms, bonds, substitutable positions, weight)
AROMATIC_RINGS = [
    ("benzene", [A("C", True)] * 6, ring_path_bonds(6, AROMATIC), [0, 1, 2, 3, 4, 5], 6.0),
    ("pyridine", [A("N", True)] + [A("C", True)] * 5, ring_path_bonds(6, AROMATIC), [1, 2, 3, 4, 5], 3.0),
    ("pyrimidine", [A("N", True), A("C", True), A("N", True)] + [A("C", True)] * 3,
     ring_path_bonds(6, AROMATIC), [1, 3, 4, 5], 1.5),
    ("pyrazine", [A("N", True), A("C", True), A("C", True), A("N", True), A("C", True), A("C", True)],
     ring_path_bonds(6, AROMATIC), [1, 2, 4, 5], 0.8),
    ("pyrrole", [A("N", True, h=1, bracket=True)] + [A("C", True)] * 4,
     ring_path_bonds(5, AROMATIC), [2, 3], 1.0),
    ("imidazole", [A("N", True, h=1, bracket=True), A("C", True), A("N", True), A("C", True), A("C", True)],
     ring_path_bonds(5, AROMATIC), [1, 4], 1.2),
    ("pyrazole", [A("N", True, h=1, bracket=True), A("N", True), A("C", True), A("C", True), A("C", True)],
     ring_path_bonds(5, AROMATIC), [2, 3, 4], 0.8),
    ("furan", [A("O", True)] + [A("C", True)] * 4, ring_path_bonds(5, AROMATIC), [1, 2, 3, 4], 0.8),
    ("thiophene", [A("S", True)] + [A("C", True)] * 4, ring_path_bonds(5, AROMATIC), [1, 2, 3, 4], 1.0),
    ("oxazole", [A("O", True), A("C", True), A("N", True), A("C", True), A("C", True)],
     ring_path_bonds(5, AROMATIC), [1, 3, 4], 0.6),
    ("thiazole", [A("S", True), A("C", True), A("N", True), A("C", True), A("C", True)],
     ring_path_bonds(5, AROMATIC), [1, 3, 4], 0.8),
]

ALIPHATIC_RINGS = [
    ("cyclohexane", [A("C")] * 6, ring_path_bonds(6, SINGLE), [0, 1, 2, 3, 4, 5], 2.0),
    ("cyclopentane", [A("C")] * 5, ring_path_bonds(5, SINGLE), [0, 1, 2, 3, 4], 1.2),
    ("cyclopropane", [A("C")] * 3, ring_path_bonds(3, SINGLE), [0, 1, 2], 0.5),
    ("cyclobutane", [A("C")] * 4, ring_path_bonds(4, SINGLE), [0, 1, 2, 3], 0.4),
    ("piperidine", [A("N")] + [A("C")] * 5, ring_path_bonds(6, SINGLE), [0, 2, 3, 4], 2.0),
    ("piperazine", [A("N"), A("C"), A("C"), A("N"), A("C"), A("C")],
     ring_path_bonds(6, SINGLE), [0, 3], 1.5),
    ("morpholine", [A("O"), A("C"), A("C"), A("N"), A("C"), A("C")],
     ring_path_bonds(6, SINGLE), [3], 1.5),
    ("pyrrolidine", [A("N")] + [A("C")] * 4, ring_path_bonds(5, SINGLE), [0, 2, 3], 1.2),
    ("oxolane", [A("O")] + [A("C")] * 4, ring_path_bonds(5, SINGLE), [2, 3], 0.8),
    ("oxane", [A("O")] + [A("C")] * 5, ring_path_bonds(6, SINGLE), [2, 3, 4], 0.8),
]

_BENZO = ring_path_bonds(6, AROMATIC)
_FUSED_TAIL = [(4, 6, AROMATIC), (6, 7, AROMATIC), (7, 8, AROMATIC), (8, 5, AROMATIC)]

FUSED_RINGS = [
    ("naphthalene", [A("C", True)] * 10,
     _BENZO + [(4, 6, AROMATIC), (6, 7, AROMATIC), (7, 8, AROMATIC),
               (8, 9, AROMATIC), (9, 5, AROMATIC)],
     [0, 1, 2, 3, 6, 7, 8, 9], 1.0),
    ("indole", [A("C", True)] * 6 + [A("N", True, h=1, bracket=True), A("C", True), A("C", True)],
     _BENZO + _FUSED_TAIL, [0, 1, 2, 3, 7, 8], 1.2),
    ("benzofuran", [A("C", True)] * 6 + [A("O", True), A("C", True), A("C", True)],
     _BENZO + _FUSED_TAIL, [0, 1, 2, 3, 7, 8], 0.6),
    ("benzothiophene", [A("C", True)] * 6 + [A("S", True), A("C", True), A("C", True)],
     _BENZO + _FUSED_TAIL, [0, 1, 2, 3, 7, 8], 0.5),
    ("benzimidazole", [A("C", True)] * 6 + [A("N", True, h=1, bracket=True), A("C", True), A("N", True)],
     _BENZO + _FUSED_TAIL, [0, 1, 2, 3, 7], 0.7),
    ("quinoline", [A("C", True)] * 10,
     _BENZO + [(4, 6, AROMATIC), (6, 7, AROMATIC), (7, 8, AROMATIC),
               (8, 9, AROMATIC), (9, 5, AROMATIC)],
     [0, 1, 2, 3, 7, 8, 9], 0.8),
]
# quinoline nitrogen: replace atom 6 after copying
FUSED_RINGS[5] = ("quinoline",
                  [A("C", True)] * 6 + [A("N", True), A("C", True), A("C", True), A("C", True)],
                  FUSED_RINGS[5][2], [0, 1, 2, 3, 7, 8, 9], 0.8)

# (atoms, bonds, entry index, exit index, weight); empty atoms = direct bond
LINKERS = [
    ([], [], None, None, 3.0),
    ([A("C")], [], 0, 0, 2.0),
    ([A("C"), A("C")], [(0, 1, SINGLE)], 0, 1, 1.5),
    ([A("O")], [], 0, 0, 1.5),
    ([A("N")], [], 0, 0, 1.0),
    ([A("S")], [], 0, 0, 0.5),
    ([A("C"), A("O")], [(0, 1, DOUBLE)], 0, 0, 0.8),                      # ketone
    ([A("C"), A("O"), A("N")], [(0, 1, DOUBLE), (0, 2, SINGLE)], 0, 2, 2.0),   # amide
    ([A("C"), A("O"), A("O")], [(0, 1, DOUBLE), (0, 2, SINGLE)], 0, 2, 1.0),   # ester
    ([A("C"), A("C")], [(0, 1, DOUBLE)], 0, 1, 0.6),
    ([A("S"), A("O"), A("O")], [(0, 1, DOUBLE), (0, 2, DOUBLE)], 0, 0, 0.6),   # sulfonyl
    ([A("C"), A("N")], [(0, 1, SINGLE)], 0, 1, 0.8),
    ([A("N"), A("C"), A("C")], [(0, 1, SINGLE), (1, 2, SINGLE)], 0, 2, 0.6),
]

# (atoms, bonds, attach index, weight)
SUBSTITUENTS = [
    ([A("F")], [], 0, 2.5),
    ([A("Cl")], [], 0, 2.0),
    ([A("Br")], [], 0, 0.8),
    ([A("I")], [], 0, 0.2),
    ([A("C")], [], 0, 3.0),                                               # methyl
    ([A("C"), A("C")], [(0, 1, SINGLE)], 0, 1.0),
    ([A("C"), A("C"), A("C")], [(0, 1, SINGLE), (0, 2, SINGLE)], 0, 0.6), # isopropyl
    ([A("O")], [], 0, 2.0),                                               # hydroxyl
    ([A("O"), A("C")], [(0, 1, SINGLE)], 0, 2.0),                         # methoxy
    ([A("N")], [], 0, 1.2),                                               # amino
    ([A("N"), A("C"), A("C")], [(0, 1, SINGLE), (0, 2, SINGLE)], 0, 0.8), # dimethylamino
    ([A("C"), A("N")], [(0, 1, TRIPLE)], 0, 1.0),                         # nitrile
    ([A("C"), A("F"), A("F"), A("F")],
     [(0, 1, SINGLE), (0, 2, SINGLE), (0, 3, SINGLE)], 0, 1.2),           # CF3
    ([A("N", charge=1, h=0, bracket=True), A("O"), A("O", charge=-1, h=0, bracket=True)],
     [(0, 1, DOUBLE), (0, 2, SINGLE)], 0, 0.8),                           # nitro
    ([A("C"), A("O"), A("O")], [(0, 1, DOUBLE), (0, 2, SINGLE)], 0, 0.8), # carboxyl
    ([A("C"), A("O"), A("O"), A("C")],
     [(0, 1, DOUBLE), (0, 2, SINGLE), (2, 3, SINGLE)], 0, 0.6),           # methyl ester
    ([A("C"), A("O"), A("N")], [(0, 1, DOUBLE), (0, 2, SINGLE)], 0, 0.6), # amide
    ([A("S"), A("C")], [(0, 1, SINGLE)], 0, 0.4),                         # thiomethyl
    ([A("C"), A("O")], [(0, 1, DOUBLE)], 0, 0.4),                         # formyl
]

CHAIN_ATOMS = [("C", 8.0), ("O", 1.0), ("N", 1.0)]


class Assembler:
    def __init__(self):
        self.atoms: list[Atom] = []
        self.bonds: list[Bond] = []

    def add_fragment(self, atoms, bonds):
        base = len(self.atoms)
        for element, aromatic, charge, h, bracket in atoms:
            self.atoms.append(Atom(element=element, aromatic=aromatic,
                                   charge=charge, h_count=h, bracket=bracket))
        for i, j, order in bonds:
            self.bonds.append(Bond(base + i, base + j, order))
        return base

    def bond(self, a, b, order=SINGLE):
        self.bonds.append(Bond(a, b, order))

    def graph(self) -> MolGraph:
        return MolGraph(atoms=list(self.atoms), bonds=list(self.bonds))


def _weighted(rng, items):
    w = np.array([it[-1] for it in items], dtype=np.float64)
    return items[rng.choice(len(items), p=w / w.sum())]


def _build_ring_unit(rng, asm: Assembler):
    u = rng.random()
    if u < 0.62:
        pool = AROMATIC_RINGS
    elif u < 0.85:
        pool = ALIPHATIC_RINGS
    else:
        pool = FUSED_RINGS
    _, atoms, bonds, subst, _ = _weighted(rng, pool)
    base = asm.add_fragment(atoms, bonds)
    return [base + p for p in subst]


def _attach(rng, asm: Assembler, a, b):
    """Join atoms a and b through a randomly chosen linker."""
    atoms, bonds, entry, exit_, _ = _weighted(rng, LINKERS)
    if not atoms:
        asm.bond(a, b)
        return
    base = asm.add_fragment(atoms, bonds)
    asm.bond(a, base + entry)
    asm.bond(base + exit_, b)


def _decorate(rng, asm: Assembler, pos):
    atoms, bonds, attach, _ = _weighted(rng, SUBSTITUENTS)
    base = asm.add_fragment(atoms, bonds)
    asm.bond(pos, base + attach)


def _chain_molecule(rng, asm: Assembler):
    n = int(rng.integers(3, 9))
    prev = None
    positions = []
    for _ in range(n):
        element = _weighted(rng, CHAIN_ATOMS)[0]
        idx = asm.add_fragment([A(element)], [])
        if prev is not None:
            order = DOUBLE if (element == "C" and asm.atoms[prev].element == "C"
                               and rng.random() < 0.12) else SINGLE
            asm.bond(prev, idx, order)
        if element == "C":
            positions.append(idx)
        prev = idx
    return positions


def make_molecule(rng) -> str | None:
    asm = Assembler()
    if rng.random() < 0.10:
        free = _chain_molecule(rng, asm)
    else:
        n_rings = int(rng.choice([1, 2, 3], p=[0.3, 0.5, 0.2]))
        units = [_build_ring_unit(rng, asm) for _ in range(n_rings)]
        for prev_unit, unit in zip(units, units[1:]):
            if not prev_unit or not unit:
                return None     # ring ran out of open positions
            a = prev_unit.pop(int(rng.integers(len(prev_unit))))
            b = unit.pop(int(rng.integers(len(unit))))
            _attach(rng, asm, a, b)
        free = [p for unit in units for p in unit]
    n_sub = int(rng.choice([0, 1, 2, 3], p=[0.25, 0.4, 0.25, 0.10]))
    rng.shuffle(free)
    for pos in free[:n_sub]:
        _decorate(rng, asm, pos)

    g = asm.graph()
    if not check_valence(g).ok:
        return None
    try:
        smiles = canonicalize(g)
    except ValueError:
        return None
    if len(tokenize(smiles)) > 48:
        return None
    return smiles


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, required=True)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", type=Path, required=True)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    seen: set[str] = set()
    out: list[str] = []
    attempts = 0
    while len(out) < args.n:
        attempts += 1
        if attempts > 60 * args.n:
            raise RuntimeError("generator stalled before reaching target count")
        s = make_molecule(rng)
        if s is None or s in seen:
            continue
        seen.add(s)
        out.append(s)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text("".join(s + "\n" for s in out), encoding="utf-8")
    print(f"wrote {len(out)} molecules to {args.out} ({attempts} attempts)")


if __name__ == "__main__":
    main()
