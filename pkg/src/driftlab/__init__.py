"""Diachronic word embeddings: per-period SGNS training, Procrustes alignment,
semantic shift scoring, intrinsic evaluation and sentiment-transfer analysis."""

__version__ = "0.1.0"
