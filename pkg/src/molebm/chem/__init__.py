"""Chemistry core: SMILES tokens, parsing, valence, canonical form, logP."""

from .canon import canonical_smiles, canonicalize
from .crippen import logp, logp_smiles
from .graph import MolGraph, ParseError, parse, parse_smiles
from .tokens import Token, TokenizeError, detokenize, tokenize
from .valence import ValenceReport, check_valence, hydrogen_counts
from .vocab import VocabError, Vocabulary

__all__ = [
    "MolGraph", "ParseError", "Token", "TokenizeError", "ValenceReport",
    "VocabError", "Vocabulary", "canonical_smiles", "canonicalize",
    "check_valence", "detokenize", "hydrogen_counts", "logp", "logp_smiles",
    "parse", "parse_smiles", "tokenize",
]
