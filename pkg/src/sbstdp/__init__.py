"""Defect-prediction-guided search-based test generation laboratory."""
__version__ = "0.1.0"
