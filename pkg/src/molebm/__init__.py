"""Latent-space energy-based prior model for SMILES molecule generation.

Library layout:

- ``autodiff``    reverse-mode AD over dense float64 arrays
- ``chem``        SMILES tokenizer, parser, valence check, canonical form, logP
- ``model``       energy prior over the latent space + LSTM decoder
- ``langevin``    short-run Langevin chains for prior and posterior sampling
- ``trainer``     maximum-likelihood training loop with Adam and checkpoints
- ``evalmetrics`` validity/uniqueness/novelty report, property tables, KDE
- ``data``        corpus ingestion: splits, vocabulary, canonical index
- ``cli``         the ``molebm`` command line
"""

__version__ = "0.1.0"
