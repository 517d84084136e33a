"""Fit crippen.py atom-type contributions against a reference toolkit.

Builds a design matrix of native atom-type counts over a probe set (small
molecules covering every type, plus a corpus sample for realistic
co-occurrence), reads reference CrippenClogP totals produced by
tools/oracle_logp.mjs, solves ridge-regularized least squares, and writes
src/molebm/chem/crippen_params.py.

Two-step usage:
  python3 tools/fit_crippen.py --emit-smiles > /tmp/fit_in.txt
  node tools/oracle_logp.mjs /tmp/fit_in.txt /tmp/fit_out.csv
  python3 tools/fit_crippen.py --fit /tmp/fit_out.csv
"""

from __future__ import annotations

import argparse
import sys
from collections import Counter
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from molebm.chem.crippen import _h_type, atom_type      # noqa: E402
from molebm.chem.graph import parse_smiles              # noqa: E402
from molebm.chem.valence import hydrogen_counts         # noqa: E402

PROBES = [
    # alkanes / branched: C_sp3_12, C_sp3_34, H_C
    "C", "CC", "CCC", "CCCC", "CCCCC", "CCCCCC", "CC(C)C", "CC(C)(C)C",
    "CC(C)CC", "CCC(C)(C)CC", "C1CCCCC1", "C1CCCC1", "C1CC1", "C1CCCCCC1",
    # alkenes / alkynes
    "C=C", "CC=C", "CC=CC", "CC(C)=C", "C=CC=C", "C#C", "CC#C", "CC#CC",
    # hetero-substituted sp3 carbons
    "CO", "CCO", "CCCO", "CC(C)O", "CC(C)(C)O", "CN", "CCN", "CCCN",
    "CCl", "CCCl", "CBr", "CCBr", "CI", "CF", "CCF", "FC(F)F", "FC(F)(F)F",
    "ClCCl", "ClC(Cl)Cl", "OCCO", "OCCN", "NCCN", "COC", "CCOC", "CCOCC",
    "COCC(C)C", "CSC", "CS", "CCS", "CCSC", "CSCC",
    # carbonyls, acids, esters, amides
    "CC(C)=O", "CCC(C)=O", "CC=O", "CCC=O", "CC(=O)O", "CCC(=O)O",
    "CC(=O)OC", "CC(=O)OCC", "COC(C)=O", "CC(N)=O", "CC(=O)NC",
    "CC(=O)N(C)C", "CNC(C)=O", "CC(=O)NCC", "OC(=O)CC(=O)O",
    # amines by degree
    "CNC", "CN(C)C", "CCNCC", "CCN(CC)CC", "NCCO", "CNCC",
    # nitriles, imines, nitro
    "CC#N", "CCC#N", "N#CC#N", "CC=NC", "CC=NO", "C[N+](=O)[O-]",
    "CC[N+](=O)[O-]",
    # benzene family: c_H, c_C, c_link, c_fused
    "c1ccccc1", "Cc1ccccc1", "CCc1ccccc1", "Cc1ccccc1C", "Cc1ccc(C)cc1",
    "CC(C)c1ccccc1", "c1ccc(cc1)-c1ccccc1", "Cc1cccc(C)c1C",
    "c1ccc2ccccc2c1", "Cc1ccc2ccccc2c1", "c1ccc2cc3ccccc3cc2c1",
    # aromatic heteroatoms and c_het
    "Oc1ccccc1", "COc1ccccc1", "CCOc1ccccc1", "Nc1ccccc1", "CNc1ccccc1",
    "CN(C)c1ccccc1", "Clc1ccccc1", "Fc1ccccc1", "Brc1ccccc1", "Ic1ccccc1",
    "Clc1ccc(Cl)cc1", "Fc1ccc(F)cc1", "Sc1ccccc1", "CSc1ccccc1",
    "Oc1ccc(O)cc1", "Oc1ccc(Cl)cc1", "Nc1ccc(N)cc1", "Oc1ccccc1O",
    # aromatic N rings
    "c1ccncc1", "Cc1ccncc1", "c1ccnnc1", "c1cncnc1", "c1cnccn1",
    "c1cc[nH]c1", "Cc1cc[nH]c1", "c1cn[nH]c1", "c1cnc[nH]1", "Cn1cccc1",
    "c1ccc2[nH]ccc2c1", "c1ccc2ncccc2c1",
    # aromatic O / S rings
    "c1ccoc1", "Cc1ccoc1", "c1ccsc1", "Cc1ccsc1", "c1ccc2occc2c1",
    "c1ccc2sccc2c1", "c1ocnc1", "c1scnc1",
    # mixed aromatic + aliphatic workhorses
    "OCc1ccccc1", "NCc1ccccc1", "ClCc1ccccc1", "CC(=O)c1ccccc1",
    "CC(=O)Nc1ccccc1", "CC(=O)Oc1ccccc1", "COC(=O)c1ccccc1",
    "OC(=O)c1ccccc1", "NC(=O)c1ccccc1", "N#Cc1ccccc1", "FC(F)(F)c1ccccc1",
    "O=Cc1ccccc1", "[O-][N+](=O)c1ccccc1", "Cc1ccc([N+](=O)[O-])cc1",
    # sulfur oxidation states
    "CS(C)=O", "CS(C)(=O)=O", "CS(=O)(=O)c1ccccc1", "NS(=O)(=O)c1ccccc1",
    # phosphorus / boron
    "CP(C)C", "COP(=O)(OC)OC", "CCP(CC)CC", "OB(O)c1ccccc1", "CB(O)O",
    # saturated heterocycles
    "C1CCNCC1", "C1CCOCC1", "C1CCSCC1", "C1CNCCN1", "C1COCCN1", "C1CCNC1",
    "C1CCOC1", "CN1CCCC1", "CN1CCCCC1", "CN1CCOCC1", "CC1CCNCC1",
    # charged nitrogen
    "C[N+](C)(C)C", "CC[N+](C)(C)C", "c1cc[nH+]cc1", "C[n+]1ccccc1",
    # larger drug-like probes
    "CC(=O)Oc1ccccc1C(=O)O", "CC(C)Cc1ccc(C(C)C(=O)O)cc1",
    "Clc1ccc(cc1)C(=O)Nc1ccncc1", "COc1ccc2[nH]ccc2c1",
    "O=C(Nc1ccccc1)N1CCOCC1", "Cc1ccsc1C(=O)N1CCCC1",
]


def type_counts(smiles: str) -> Counter:
    g = parse_smiles(smiles)
    h = hydrogen_counts(g)
    adj = g.adjacency()
    counts: Counter = Counter()
    for i, atom in enumerate(g.atoms):
        counts[atom_type(g, i, h[i], adj)] += 1
        if h[i]:
            counts[_h_type(atom.element)] += h[i]
    return counts


def corpus_sample(n: int, seed: int) -> list[str]:
    lines = Path("data/corpus.txt").read_text().split()
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(lines), size=n, replace=False)
    return [lines[i] for i in idx]


def emit_smiles() -> None:
    for s in PROBES + corpus_sample(400, seed=11):
        print(s)


def fit(oracle_csv: Path) -> None:
    rows = []
    for line in oracle_csv.read_text().splitlines()[1:]:
        smiles, value = line.rsplit(",", 1)
        rows.append((smiles, float(value)))

    all_types: list[str] = []
    counts_list = []
    for smiles, _ in rows:
        c = type_counts(smiles)
        counts_list.append(c)
        for t in c:
            if t not in all_types:
                all_types.append(t)
    all_types.sort()
    X = np.zeros((len(rows), len(all_types)))
    y = np.array([v for _, v in rows])
    for r, c in enumerate(counts_list):
        for t, k in c.items():
            X[r, all_types.index(t)] = k

    # Small ridge pins the gauge freedom of perfectly co-occurring types
    # (e.g. every O_OH brings exactly one H_O) without biasing predictions.
    lam = 1e-3
    A = X.T @ X + lam * np.eye(len(all_types))
    w = np.linalg.solve(A, X.T @ y)

    pred = X @ w
    resid = pred - y
    r = np.corrcoef(pred, y)[0, 1]
    print(f"fit over {len(rows)} molecules, {len(all_types)} types")
    print(f"pearson r = {r:.4f}, MAE = {np.abs(resid).mean():.3f}, "
          f"max |err| = {np.abs(resid).max():.3f}")

    contributions = dict(zip(all_types, w))
    by_element: dict[str, list[float]] = {}
    for t, v in contributions.items():
        el = t.split("_")[0].split(":")[0].capitalize() if not t.startswith("H_") else "H"
        if t in ("F", "Cl", "Br", "I", "P", "B", "S"):
            el = t
        by_element.setdefault(el, []).append(v)
    defaults = {el: float(np.mean(vs)) for el, vs in by_element.items()}

    out = Path(__file__).resolve().parent.parent / "src/molebm/chem/crippen_params.py"
    lines = [
        '"""Atom-contribution table for crippen.logp.',
        "",
        "Generated by tools/fit_crippen.py: least-squares fit of the native",
        "atom typing against reference CrippenClogP totals over "
        f"{len(rows)} molecules",
        f"(fit r = {r:.4f}, MAE = {np.abs(resid).mean():.3f}). "
        "Regenerate rather than edit.",
        '"""',
        "",
        "CONTRIBUTIONS: dict[str, float] = {",
    ]
    for t in all_types:
        lines.append(f"    {t!r}: {contributions[t]:.6f},")
    lines.append("}")
    lines.append("")
    lines.append("ELEMENT_DEFAULTS: dict[str, float] = {")
    for el in sorted(defaults):
        lines.append(f"    {el!r}: {defaults[el]:.6f},")
    lines.append("}")
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {out}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--emit-smiles", action="store_true")
    ap.add_argument("--fit", type=Path)
    args = ap.parse_args()
    if args.emit_smiles:
        emit_smiles()
    elif args.fit:
        fit(args.fit)
    else:
        ap.error("need --emit-smiles or --fit")


if __name__ == "__main__":
    main()
