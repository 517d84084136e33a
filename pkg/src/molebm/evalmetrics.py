"""Evaluation: validity / uniqueness / novelty, property export, distances.

Metric conventions (the literature is split, so both denominators ship):
  validity    = n_valid / n_generated
  uniqueness  = |unique canonical among valid| / n_valid      (primary)
  novelty     = |unique not in training index| / |unique|     (primary)
plus the alternate normalizations unique/generated and novel/valid in the
same report. Invalid samples are counted, never resampled or repaired.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import langevin as lv
from . import model as md
from .chem.canon import canonicalize
from .chem.crippen import logp
from .chem.graph import ParseError, parse_smiles
from .chem.tokens import TokenizeError
from .chem.valence import check_valence
from .chem.vocab import Vocabulary

DECODE_TAG = 0xDEC0


@dataclass
class GenerationReport:
    n_generated: int = 0
    n_parse_ok: int = 0
    n_valid: int = 0
    n_unique: int = 0
    n_novel: int = 0
    n_truncated: int = 0
    validity: float = 0.0
    uniqueness: float = 0.0
    novelty: float = 0.0
    uniqueness_over_generated: float = 0.0
    novelty_over_valid: float = 0.0

    def rows(self):
        return [(k, getattr(self, k)) for k in (
            "n_generated", "n_parse_ok", "n_valid", "n_unique", "n_novel",
            "n_truncated", "validity", "uniqueness", "novelty",
            "uniqueness_over_generated", "novelty_over_valid")]


@dataclass
class ScoredSample:
    text: str            # canonical spelling when valid, raw decode otherwise
    valid: bool
    truncated: bool


def classify(smiles: str):
    """(parsed, valid, canonical-or-None) under the native toolkit."""
    try:
        g = parse_smiles(smiles)
    except (TokenizeError, ParseError):
        return False, False, None
    if not check_valence(g).ok:
        return True, False, None
    return True, True, canonicalize(g)


def score_decodes(decoded, train_index):
    """Score already-decoded strings. decoded: [(text, truncated)]."""
    report = GenerationReport(n_generated=len(decoded))
    samples = []
    canon_valid = []
    for text, truncated in decoded:
        report.n_truncated += bool(truncated)
        parsed, valid, canon = classify(text)
        report.n_parse_ok += parsed
        if valid:
            report.n_valid += 1
            canon_valid.append(canon)
            samples.append(ScoredSample(canon, True, truncated))
        else:
            samples.append(ScoredSample(text, False, truncated))
    unique = set(canon_valid)
    novel = unique - set(train_index)
    report.n_unique = len(unique)
    report.n_novel = len(novel)
    if report.n_generated:
        report.validity = report.n_valid / report.n_generated
        report.uniqueness_over_generated = report.n_unique / report.n_generated
    if report.n_valid:
        report.uniqueness = report.n_unique / report.n_valid
        report.novelty_over_valid = report.n_novel / report.n_valid
    if report.n_unique:
        report.novelty = report.n_novel / report.n_unique
    return report, samples


def generate_and_score(params: md.ModelParams, vocab: Vocabulary, n: int,
                       train_index, seed=0, prior_cfg=lv.PRIOR_DEFAULTS,
                       max_len=md.MAX_LEN):
    """Draw n prior samples, decode, and score. Returns (report, samples).

    A sequence containing a sentinel id mid-stream renders those ids
    literally (so the string fails to parse) rather than being silently
    cleaned: validity must reflect what the decoder actually emitted.
    """
    zs, _ = lv.sample_prior(params, n, prior_cfg, seed=seed)
    rng = np.random.default_rng(
        np.random.SeedSequence((seed, DECODE_TAG)))
    seqs, trunc = md.decode_sample_batch(params, zs, rng, max_len=max_len)
    decoded = [(render_ids(vocab, ids), bool(t))
               for ids, t in zip(seqs, trunc)]
    return score_decodes(decoded, train_index)


def render_ids(vocab: Vocabulary, ids):
    """Literal text of a sampled id sequence, sentinels included."""
    return "".join(vocab.index_to_text[i] for i in ids)


def write_report(path, report: GenerationReport):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["metric", "value"])
        for k, v in report.rows():
            w.writerow([k, f"{v:.6g}" if isinstance(v, float) else v])


def write_samples(path, samples):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["smiles", "valid"])
        for s in samples:
            w.writerow([s.text, int(s.valid)])


# ---------------------------------------------------------------- properties

def property_table(smiles_lines, source):
    """Native logP rows for valid molecules; invalid lines are counted.

    Returns (rows, n_skipped) with rows of (canonical, logp, source); the
    qed/sas columns are filled by the external oracle, never here.
    """
    rows = []
    skipped = 0
    for s in smiles_lines:
        _, valid, canon = classify(s)
        if not valid:
            skipped += 1
            continue
        rows.append((canon, logp(parse_smiles(s)).value, source))
    return rows, skipped


def write_property_table(path, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["smiles", "logp", "qed", "sas", "source"])
        for canon, lp, source in rows:
            w.writerow([canon, f"{lp:.6g}", "", "", source])


# ----------------------------------------------------------------- distances

def distribution_distance(a, b):
    """Empirical 1-Wasserstein distance between two float samples."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise ValueError("empty sample")
    if a.size == b.size:
        return float(np.mean(np.abs(a - b)))
    m = max(a.size, b.size)
    q = (np.arange(m) + 0.5) / m
    qa = np.quantile(a, q, method="linear")
    qb = np.quantile(b, q, method="linear")
    return float(np.mean(np.abs(qa - qb)))


def silverman_bandwidth(values):
    v = np.asarray(values, dtype=np.float64)
    sigma = v.std(ddof=1) if v.size > 1 else 0.0
    iqr = np.subtract(*np.percentile(v, [75, 25]))
    if iqr > 0:
        sigma = min(sigma, iqr / 1.34)
    if sigma == 0:
        sigma = max(abs(v.mean()), 1.0) * 1e-3   # degenerate sample guard
    return 0.9 * sigma * v.size ** (-0.2)


def kde_grid(values, n_grid=256, lo=None, hi=None):
    """Gaussian KDE (Silverman bandwidth) on a regular grid -> (x, density)."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("empty sample")
    bw = silverman_bandwidth(v)
    if lo is None:
        lo = v.min() - 3 * bw
    if hi is None:
        hi = v.max() + 3 * bw
    x = np.linspace(lo, hi, n_grid)
    dens = np.zeros(n_grid)
    norm = 1.0 / (v.size * bw * np.sqrt(2 * np.pi))
    for chunk in np.array_split(v, max(1, v.size // 2048)):
        dens += np.exp(-0.5 * ((x[:, None] - chunk[None, :]) / bw) ** 2) \
            .sum(axis=1)
    return x, dens * norm


def write_kde(path, named_samples, n_grid=256):
    """named_samples: {(property, source): values}. Shared grid per property."""
    by_prop = {}
    for (prop, source), vals in named_samples.items():
        by_prop.setdefault(prop, []).append((source, np.asarray(vals)))
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["x", "density", "source", "property"])
        for prop, entries in by_prop.items():
            allv = np.concatenate([v for _, v in entries])
            bw = silverman_bandwidth(allv)
            lo, hi = allv.min() - 3 * bw, allv.max() + 3 * bw
            for source, vals in entries:
                x, dens = kde_grid(vals, n_grid=n_grid, lo=lo, hi=hi)
                for xi, di in zip(x, dens):
                    w.writerow([f"{xi:.6g}", f"{di:.6g}", source, prop])
