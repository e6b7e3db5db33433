"""Batch analytics for multi-community social-media corpora.

Subpackages cover corpus ingestion and tokenization, per-term trend and
changepoint analysis, embedding-based semantic graphs, perceptual-hash
meme clustering, and multivariate point-process influence estimation,
plus a pipeline CLI that orchestrates all of it.
"""

__version__ = "0.1.0"
