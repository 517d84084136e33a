"""Synthetic accessibility score, Ertl-Schuffenhauer form.

Score = fragment-commonality term minus complexity penalties, mapped to
[1, 10] (1 = easy to make, 10 = hard). Two deliberate deviations from the
published implementation, both driven by what the toolkit bridge exposes:

* Fragment environments are folded Morgan presence bits (radius 2,
  2^17 slots), not unfolded environment counts. score1 is the mean table
  score over the set bits, and the symmetry correction compares heavy-atom
  count against the number of unique bits.
* The fragment-commonality table is fitted on the training corpus rather
  than taken from the published PubChem-derived table (which keys on
  unfolded environment ids and is not portable to folded bits). A bit's
  score is log10(doc_frequency / median), clipped to [-4, 4]; unseen bits
  score -4. The raw-score calibration (the [1, 10] mapping endpoints) is
  fitted from corpus percentiles at the same time.

The fitted table ships as data/fragments.csv.gz; `rdkit-oracle fit-table`
regenerates it from a feature dump.
"""

import csv
import gzip
import importlib.resources
import math
import re
from dataclasses import dataclass

N_BITS = 131072
RADIUS = 2
UNSEEN = -4.0


@dataclass(frozen=True)
class FragmentTable:
    scores: dict          # bit index -> commonality score
    raw_min: float        # raw score mapped to 10
    raw_max: float        # raw score mapped to 1


def default_table_path():
    return importlib.resources.files("rdkit_oracle").joinpath(
        "data/fragments.csv.gz")


def load_table(path=None) -> FragmentTable:
    """Read a fragment table. First line is a calibration comment."""
    if path is None:
        path = default_table_path()
    with gzip.open(str(path), "rt", newline="") as f:
        head = f.readline()
        m = re.search(r"min=(-?[\d.]+)\s+max=(-?[\d.]+)", head)
        if not m:
            raise ValueError(f"no calibration header in {path}")
        raw_min, raw_max = float(m.group(1)), float(m.group(2))
        reader = csv.reader(f)
        next(reader)  # column header
        scores = {int(b): float(s) for b, s in reader}
    return FragmentTable(scores=scores, raw_min=raw_min, raw_max=raw_max)


def save_table(table: FragmentTable, path):
    with gzip.open(str(path), "wt", newline="") as f:
        f.write(f"# sas fragment table; radius {RADIUS}, folded {N_BITS}; "
                f"calibration min={table.raw_min:.6f} "
                f"max={table.raw_max:.6f}\n")
        w = csv.writer(f)
        w.writerow(["bit", "score"])
        for bit in sorted(table.scores):
            w.writerow([bit, f"{table.scores[bit]:.6f}"])


def raw_score(features: dict, scores: dict) -> float:
    """Pre-calibration score: commonality minus penalties.

    features carries the per-molecule toolkit output: bits (set Morgan
    bit indices), natoms (heavy atoms), stereo/spiro/bridge counts and
    the macrocycle flag.
    """
    bits = features["bits"]
    natoms = max(int(features["natoms"]), 1)
    if bits:
        score1 = sum(scores.get(b, UNSEEN) for b in bits) / len(bits)
    else:
        score1 = UNSEEN

    size_penalty = natoms ** 1.005 - natoms
    stereo_penalty = math.log10(features.get("stereo", 0) + 1)
    spiro_penalty = math.log10(features.get("spiro", 0) + 1)
    bridge_penalty = math.log10(features.get("bridge", 0) + 1)
    macro_penalty = math.log10(2) if features.get("macro") else 0.0
    score2 = -(size_penalty + stereo_penalty + spiro_penalty
               + bridge_penalty + macro_penalty)

    # Symmetry correction: many atoms covered by few distinct environments.
    score3 = 0.0
    if bits and natoms > len(bits):
        score3 = 0.5 * math.log(natoms / len(bits))

    return score1 + score2 + score3


def sa_score(features: dict, table: FragmentTable) -> float:
    raw = raw_score(features, table.scores)
    span = table.raw_max - table.raw_min
    sas = 11.0 - (raw - table.raw_min) / span * 9.0
    # Soften the top end so near-worst-case molecules stay ordered
    # without saturating at the clip.
    if sas > 8.0:
        sas = 8.0 + math.log(sas - 7.0)
    return min(10.0, max(1.0, sas))


def fit_table(feature_rows, lo_pct=0.5, hi_pct=99.5) -> FragmentTable:
    """Fit scores and calibration from corpus feature dicts.

    Commonality is document frequency (molecules containing the bit);
    calibration endpoints are raw-score percentiles over the corpus, so
    the corpus itself spreads across most of the [1, 10] range.
    """
    rows = [r for r in feature_rows if r.get("valid") and r.get("bits")]
    if len(rows) < 100:
        raise ValueError(f"need >=100 valid molecules to fit, got {len(rows)}")

    counts = {}
    for r in rows:
        for b in set(r["bits"]):
            counts[b] = counts.get(b, 0) + 1
    median = sorted(counts.values())[len(counts) // 2]
    scores = {
        b: min(4.0, max(-4.0, math.log10(c / median)))
        for b, c in counts.items()
    }

    raws = sorted(raw_score(r, scores) for r in rows)

    def pct(p):
        k = min(len(raws) - 1, max(0, round(p / 100 * (len(raws) - 1))))
        return raws[k]

    raw_min, raw_max = pct(lo_pct), pct(hi_pct)
    if raw_max - raw_min < 1e-9:
        raise ValueError("degenerate raw-score spread; corpus too uniform")
    return FragmentTable(scores=scores, raw_min=raw_min, raw_max=raw_max)
