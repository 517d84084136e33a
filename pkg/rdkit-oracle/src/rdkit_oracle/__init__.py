"""Verification harness around a reference cheminformatics toolkit.

Certifies SMILES verdicts (validity, canonical form, logP) through the
toolkit and computes drug-likeness (QED) and synthetic-accessibility (SAS)
scores from toolkit-derived features. Strictly a verifier/augmenter: results
flow out as CSV files and never back into any training loop.
"""

__version__ = "0.1.0"
