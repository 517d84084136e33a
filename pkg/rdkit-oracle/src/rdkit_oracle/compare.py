"""Agreement report between native verdicts and toolkit verdicts.

Inputs are two CSVs over the same input lines, in the same order:

* native: smiles,valid,canonical,logp   (the generator's own checker)
* oracle: smiles,oracle_valid,oracle_canonical,oracle_logp,
          oracle_qed,oracle_sas        (this package's certify output)

Canonical forms are compared as partitions, not strings: the two
canonicalizers disagree on the textual form almost everywhere, and the
meaningful question is whether they group the same inputs together. A row
agrees when the set of rows sharing its native canonical form equals the
set sharing its oracle canonical form.
"""

import csv
import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np


@dataclass
class CompareReport:
    rows: int
    validity_agreement: float
    validity_agree_count: int
    both_valid: int
    partition_agreement: float
    partition_agree_count: int
    logp_pearson_r: float
    logp_mean_abs_diff: float

    def format(self) -> str:
        lines = [
            f"rows: {self.rows}",
            f"validity_agreement: {self.validity_agreement:.6f} "
            f"({self.validity_agree_count}/{self.rows})",
            f"both_valid: {self.both_valid}",
            f"canonical_partition_agreement: {self.partition_agreement:.6f} "
            f"({self.partition_agree_count}/{self.both_valid})",
            f"logp_pearson_r: {self.logp_pearson_r:.6f}",
            f"logp_mean_abs_diff: {self.logp_mean_abs_diff:.6f}",
        ]
        return "\n".join(lines) + "\n"


def _read_csv(path, required):
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        missing = [c for c in required if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        return list(reader)


def load_native(path):
    return _read_csv(path, ["smiles", "valid", "canonical", "logp"])


def load_oracle(path):
    return _read_csv(path, ["smiles", "oracle_valid", "oracle_canonical",
                            "oracle_logp"])


def compare_rows(native, oracle) -> CompareReport:
    if len(native) != len(oracle):
        raise ValueError(
            f"row mismatch: native has {len(native)} rows, "
            f"oracle has {len(oracle)}")
    for i, (n, o) in enumerate(zip(native, oracle)):
        if n["smiles"] != o["smiles"]:
            raise ValueError(
                f"row mismatch at line {i + 2}: native input "
                f"{n['smiles']!r} != oracle input {o['smiles']!r}")

    n_valid = [r["valid"] == "1" for r in native]
    o_valid = [r["oracle_valid"] == "1" for r in oracle]
    agree_v = sum(a == b for a, b in zip(n_valid, o_valid))

    both = [i for i in range(len(native)) if n_valid[i] and o_valid[i]]

    # Partition agreement over the both-valid rows (see module docstring).
    n_class = defaultdict(list)
    o_class = defaultdict(list)
    for i in both:
        n_class[native[i]["canonical"]].append(i)
        o_class[oracle[i]["oracle_canonical"]].append(i)
    agree_p = sum(
        1 for i in both
        if n_class[native[i]["canonical"]]
        == o_class[oracle[i]["oracle_canonical"]])

    if both:
        x = np.array([float(native[i]["logp"]) for i in both])
        y = np.array([float(oracle[i]["oracle_logp"]) for i in both])
        mad = float(np.abs(x - y).mean())
        if np.allclose(x, x[0]) and np.allclose(y, y[0]):
            r = 1.0 if abs(x[0] - y[0]) < 1e-12 else float("nan")
        elif len(both) >= 2:
            r = float(np.corrcoef(x, y)[0, 1])
        else:
            r = float("nan")
    else:
        mad, r = float("nan"), float("nan")

    return CompareReport(
        rows=len(native),
        validity_agreement=agree_v / len(native) if native else float("nan"),
        validity_agree_count=agree_v,
        both_valid=len(both),
        partition_agreement=agree_p / len(both) if both else float("nan"),
        partition_agree_count=agree_p,
        logp_pearson_r=r,
        logp_mean_abs_diff=mad,
    )


def gaussian_kde_grid(values, n_grid=256):
    """Gaussian KDE with Silverman bandwidth on an evenly padded grid."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("no values to density-estimate")
    std = v.std()
    q25, q75 = np.percentile(v, [25, 75])
    spread = min(std, (q75 - q25) / 1.34) if q75 > q25 else std
    bw = 0.9 * spread * v.size ** (-0.2)
    if bw <= 0:
        bw = max(1e-3, 1e-3 * abs(float(v.mean())))
    xs = np.linspace(v.min() - 3 * bw, v.max() + 3 * bw, n_grid)
    dens = np.exp(-0.5 * ((xs[:, None] - v[None, :]) / bw) ** 2)
    dens = dens.sum(axis=1) / (v.size * bw * math.sqrt(2 * math.pi))
    return xs, dens


def write_kde(path, values, source, prop, n_grid=256):
    xs, dens = gaussian_kde_grid(values, n_grid)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["x", "density", "source", "property"])
        for x, d in zip(xs, dens):
            w.writerow([f"{x:.6g}", f"{d:.6g}", source, prop])
