"""Token vocabulary mapping token text to dense indices.

The three sentinels occupy the lowest indices (pad first so index 0 works
as the mask value everywhere). Real tokens follow in sorted order, which
makes the vocabulary file a pure function of the token set.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import tokens as tk

PAD_TEXT = "<pad>"
BEGIN_TEXT = "<bos>"
END_TEXT = "<eos>"
_SENTINELS = (PAD_TEXT, BEGIN_TEXT, END_TEXT)


class VocabError(ValueError):
    """Raised for tokens missing from the vocabulary or a malformed file."""


class Vocabulary:
    def __init__(self, token_texts: list[str]):
        """token_texts excludes sentinels; order is preserved as given."""
        for s in _SENTINELS:
            if s in token_texts:
                raise VocabError(f"sentinel {s!r} cannot be a corpus token")
        if len(set(token_texts)) != len(token_texts):
            raise VocabError("duplicate token text")
        self.index_to_text: list[str] = list(_SENTINELS) + list(token_texts)
        self.text_to_index: dict[str, int] = {
            t: i for i, t in enumerate(self.index_to_text)
        }
        self.pad = self.text_to_index[PAD_TEXT]
        self.begin = self.text_to_index[BEGIN_TEXT]
        self.end = self.text_to_index[END_TEXT]

    def __len__(self) -> int:
        return len(self.index_to_text)

    @classmethod
    def from_smiles(cls, corpus: list[str]) -> "Vocabulary":
        seen: set[str] = set()
        for smiles in corpus:
            seen.update(t.text for t in tk.tokenize(smiles))
        return cls(sorted(seen))

    def encode(self, smiles: str) -> np.ndarray:
        """Indices with begin/end sentinels attached. Unseen tokens are an
        error: the vocabulary is frozen at training time."""
        idx = [self.begin]
        for t in tk.tokenize(smiles):
            j = self.text_to_index.get(t.text)
            if j is None:
                raise VocabError(f"token {t.text!r} not in vocabulary")
            idx.append(j)
        idx.append(self.end)
        return np.asarray(idx, dtype=np.int64)

    def decode(self, indices) -> str:
        """Token texts joined up to the first end sentinel; begin/pad skipped."""
        parts: list[str] = []
        for j in np.asarray(indices).ravel():
            j = int(j)
            if not 0 <= j < len(self.index_to_text):
                raise VocabError(f"index {j} out of range")
            if j == self.end:
                break
            if j in (self.begin, self.pad):
                continue
            parts.append(self.index_to_text[j])
        return "".join(parts)

    def save(self, path) -> None:
        Path(path).write_text(
            "".join(t + "\n" for t in self.index_to_text), encoding="utf-8"
        )

    @classmethod
    def load(cls, path) -> "Vocabulary":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if lines[: len(_SENTINELS)] != list(_SENTINELS):
            raise VocabError(f"{path}: expected sentinels {_SENTINELS} first")
        return cls(lines[len(_SENTINELS) :])
