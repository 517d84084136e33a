"""Corpus ingestion: split, vocabulary, canonical training index.

A corpus is one SMILES string per line. Ingestion keeps only lines that
tokenize, parse, and pass the valence check — a generative model trained
on strings our own checker rejects would depress every downstream
validity number for no reason. Skipped lines are counted and sampled
into the report, never silently dropped.

Artifacts written to the output directory:
  train.txt / val.txt   seeded 95/5 split, original spellings
  vocab.txt             one token per line; first three are the sentinels
  train_index.txt       sorted unique canonical SMILES of the train split
  ingest.json           counts and skip examples
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .chem.canon import canonical_smiles
from .chem.graph import ParseError, parse_smiles
from .chem.tokens import TokenizeError, tokenize
from .chem.valence import check_valence
from .chem.vocab import Vocabulary

PAD, BOS, EOS = 0, 1, 2

_SPLIT_TAG = 0x51D5


class DataError(Exception):
    pass


def pad_batch(seqs):
    """List of id sequences -> (n, max_len) int64 matrix padded with PAD."""
    n = len(seqs)
    width = max(len(s) for s in seqs)
    out = np.full((n, width), PAD, dtype=np.int64)
    for i, s in enumerate(seqs):
        out[i, : len(s)] = s
    return out


@dataclass
class IngestReport:
    n_lines: int = 0
    n_kept: int = 0
    n_skipped: int = 0
    n_train: int = 0
    n_val: int = 0
    vocab_size: int = 0
    skipped_examples: list = field(default_factory=list)

    def to_json(self):
        return json.dumps(self.__dict__, indent=2)


def ingest(corpus_path, out_dir, seed=0, val_frac=0.05):
    """Build the training artifacts from a raw corpus file."""
    kept = []
    report = IngestReport()
    with open(corpus_path) as f:
        for line in f:
            s = line.strip()
            if not s:
                continue
            report.n_lines += 1
            try:
                g = parse_smiles(s)
                verdict = check_valence(g)
                if not verdict.ok:
                    raise DataError(verdict.reason)
                canon = canonical_smiles(s)
            except (TokenizeError, ParseError, DataError) as e:
                report.n_skipped += 1
                if len(report.skipped_examples) < 10:
                    report.skipped_examples.append(f"{s}: {e}")
                continue
            kept.append((s, canon))
    if not kept:
        raise DataError(f"{corpus_path}: no usable lines")
    report.n_kept = len(kept)

    rng = np.random.default_rng(np.random.SeedSequence((seed, _SPLIT_TAG)))
    perm = rng.permutation(len(kept))
    n_val = 0
    if val_frac > 0 and len(kept) > 1:
        n_val = max(1, int(round(len(kept) * val_frac)))
    val_ids = set(perm[:n_val].tolist())
    train = [kept[i] for i in range(len(kept)) if i not in val_ids]
    val = [kept[i] for i in sorted(val_ids)]
    report.n_train, report.n_val = len(train), len(val)

    vocab = Vocabulary.from_smiles([s for s, _ in train])
    report.vocab_size = len(vocab)

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "train.txt"), "w") as f:
        f.write("".join(s + "\n" for s, _ in train))
    with open(os.path.join(out_dir, "val.txt"), "w") as f:
        f.write("".join(s + "\n" for s, _ in val))
    vocab.save(os.path.join(out_dir, "vocab.txt"))
    with open(os.path.join(out_dir, "train_index.txt"), "w") as f:
        f.write("".join(c + "\n" for c in sorted({c for _, c in train})))
    with open(os.path.join(out_dir, "ingest.json"), "w") as f:
        f.write(report.to_json() + "\n")
    return report


def load_lines(path):
    with open(path) as f:
        return [line.strip() for line in f if line.strip()]
