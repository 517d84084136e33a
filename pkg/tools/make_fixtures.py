"""Build oracle-verdict fixture files for the test suite.

Emits candidate SMILES lists for the reference toolkit to certify
(tools/oracle_fixtures.mjs), then assembles committed fixtures under
tests/fixtures/. Verdicts are computed once and committed so the test
suite runs with no toolkit installed.

  python3 tools/make_fixtures.py --emit
  node tools/oracle_fixtures.mjs /tmp/fx_parser.txt /tmp/fx_parser.csv
  node tools/oracle_fixtures.mjs /tmp/fx_valence.txt /tmp/fx_valence.csv
  node tools/oracle_fixtures.mjs /tmp/fx_canon.txt /tmp/fx_canon.csv
  node tools/oracle_fixtures.mjs /tmp/fx_logp.txt /tmp/fx_logp.csv
  python3 tools/make_fixtures.py --assemble
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from molebm.chem.canon import random_smiles                  # noqa: E402
from molebm.chem.graph import ParseError, _parse_bracket, parse_smiles  # noqa: E402
from molebm.chem import tokens as tk                         # noqa: E402
from molebm.chem.tokens import Token, detokenize, tokenize   # noqa: E402

ROOT = Path(__file__).resolve().parent.parent
FIXDIR = ROOT / "tests" / "fixtures"

# Hand-picked valid strings exercising grammar corners.
VALID_EDGE = [
    "C", "CC", "O=C=O", "C#N", "N#N", "CC(C)(C)C", "C1CC1", "C1CCCCCC1",
    "C%10CCCCC%10", "C=1CCCCC=1", "C1CCCCC=1", "c1ccccc1", "c1ccncc1",
    "c1cc[nH]c1", "Cn1cccc1", "c1ccoc1", "c1ccsc1", "c1cnc[nH]1",
    "c1ccc2ccccc2c1", "c1ccc2[nH]ccc2c1", "c1ccc2ncccc2c1",
    "c1ccc(cc1)-c1ccccc1", "C[N+](C)(C)C", "C[N+](=O)[O-]",
    "OC(=O)c1ccccc1",
    "CC(=O)Oc1ccccc1C(=O)O", "CC(C)Cc1ccc(C(C)C(=O)O)cc1",
    "CS(C)(=O)=O", "COP(=O)(OC)OC", "FC(F)(F)c1ccccc1", "ClCCCl",
    "CCOC(=O)C1CCN(CC1)C(C)=O", "OCC(O)CO", "CC(N)C(=O)O",
    "c1ccc2cc3ccccc3cc2c1", "c1ccc2c(c1)ccc1ccccc12", "C(C2CC2)C",
    "[13CH4]", "[nH]1cccc1", "C(#N)c1ccccc1",
    "CN1CCC(CC1)Oc1ccccc1",
]

# Invalid strings where the native checker and any standard toolkit agree:
# malformed syntax, over-valent neutral atoms, impossible aromatic systems.
# Deliberately excludes the documented convention gaps (conflicting ring-bond
# symbols, non-ring default-aromatic bonds, partial aromatic flags a
# perception-based toolkit demotes, pinned-table valence differences).
INVALID_EDGE = [
    "C(C", "C)C", "C1CC", "C=", "CC(=)O", "C11", "C12CC12", "(C)C",
    "C%12C", "C(()C)C", "C(2CC2)C",
    "C(C)(C)(C)(C)C", "O(C)(C)C", "FC(F)(F)(F)F", "F(C)C", "OO(C)C",
    "c1cccc1", "cc", "ccc", "cC", "c1ccccc1c",
    "CC(C)(C)(C)=C",
    "CN(=O)(=O)=O",
    "S(F)(F)(F)(F)(F)(F)F", "Br(C)C",
    "CC(=O)(=O)C",
    "[CH4]C",
    "c1cc1", "C1coccC1",
    "C#C#C", "C1=C1",
    # All-aromatic phenalene: 13 pi centres, so no Kekulé assignment exists.
    "c1cc2cccc3cccc(c1)c23",
]


def _bucket(t: Token) -> str:
    # Mutations stay within register: splicing an aromatic atom into an
    # aliphatic context (or vice versa) measures toolkit aromaticity
    # conventions rather than checker correctness.
    if t.kind == tk.AROMATIC_ATOM:
        return "arom"
    if t.kind == tk.ATOM:
        return "aliph"
    if t.kind == tk.BRACKET_ATOM:
        return "arom" if _parse_bracket(t.text).aromatic else "aliph"
    return "struct"


def _mutants(rng, lines, n):
    pool: dict[str, list[Token]] = {"arom": [], "aliph": [], "struct": []}
    for s in lines[:400]:
        for t in tokenize(s):
            pool[_bucket(t)].append(t)

    def draw(bucket):
        p = pool[bucket]
        return p[int(rng.integers(len(p)))]

    out = []
    while len(out) < n:
        s = lines[int(rng.integers(len(lines)))]
        toks = tokenize(s)
        op = rng.integers(6)
        i = int(rng.integers(len(toks)))
        if op == 0 and len(toks) > 2:
            toks = toks[:i] + toks[i + 1:]
        elif op == 1:
            anchor = _bucket(toks[min(i, len(toks) - 1)])
            # Structural tokens may land anywhere; atoms only beside their own kind.
            b = anchor if rng.random() < 0.5 and anchor != "struct" else "struct"
            toks = toks[:i] + [draw(b)] + toks[i:]
        elif op == 2:
            toks = toks[:i] + [draw(_bucket(toks[i]))] + toks[i + 1:]
        elif op == 3 and len(toks) > 1:
            same = [j for j, t in enumerate(toks) if _bucket(t) == _bucket(toks[i]) and j != i]
            if not same:
                continue
            j = same[int(rng.integers(len(same)))]
            toks = list(toks)
            toks[i], toks[j] = toks[j], toks[i]
        elif op == 4 and len(toks) > 4:
            toks = toks[: int(rng.integers(2, len(toks)))]
        else:
            j = min(len(toks), i + int(rng.integers(1, 5)))
            toks = toks[:i] + toks[i:j] + toks[i:]
        mutant = detokenize(toks)
        if mutant and mutant != s:
            out.append(mutant)
    return out


def emit():
    rng = np.random.default_rng(2024)
    corpus = ROOT.joinpath("data/corpus.txt").read_text().split()
    heldout = ROOT.joinpath("data/heldout.txt").read_text().split()

    # parser corpus: corpus molecules + edge lists = 200 strings
    pick = [corpus[i] for i in rng.choice(len(corpus), 200 - len(VALID_EDGE) - len(INVALID_EDGE), replace=False)]
    parser_lines = pick + VALID_EDGE + INVALID_EDGE
    assert len(parser_lines) == 200, len(parser_lines)
    Path("/tmp/fx_parser.txt").write_text("\n".join(parser_lines) + "\n")

    # valence corpus: 5k originals + 5k mutants
    orig = [corpus[i] for i in rng.choice(len(corpus), 5000, replace=False)]
    muts = _mutants(rng, corpus, 5000)
    Path("/tmp/fx_valence.txt").write_text("\n".join(orig + muts) + "\n")

    # canonicalization classes: ~333 molecules respelled 3 ways
    base = [heldout[i] for i in rng.choice(len(heldout), 334, replace=False)]
    spellings = []
    for s in base:
        g = parse_smiles(s)
        seen = {s}
        spellings.append(s)
        tries = 0
        while len(seen) < 3 and tries < 20:
            tries += 1
            r = random_smiles(g, rng)
            if r not in seen:
                seen.add(r)
                spellings.append(r)
    spellings = spellings[:1000]
    Path("/tmp/fx_canon.txt").write_text("\n".join(spellings) + "\n")

    # logp reference over held-out molecules
    pick = [heldout[i] for i in rng.choice(len(heldout), 1000, replace=False)]
    Path("/tmp/fx_logp.txt").write_text("\n".join(pick) + "\n")
    print("emitted /tmp/fx_{parser,valence,canon,logp}.txt")


def assemble():
    FIXDIR.mkdir(parents=True, exist_ok=True)
    for name in ("parser", "valence", "canon", "logp"):
        src = Path(f"/tmp/fx_{name}.csv")
        dst = FIXDIR / f"{name}_oracle.csv"
        dst.write_bytes(src.read_bytes())
        n = len(dst.read_text().splitlines()) - 1
        print(f"{dst}: {n} rows")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--emit", action="store_true")
    ap.add_argument("--assemble", action="store_true")
    args = ap.parse_args()
    if args.emit:
        emit()
    elif args.assemble:
        assemble()
    else:
        ap.error("need --emit or --assemble")


if __name__ == "__main__":
    main()
