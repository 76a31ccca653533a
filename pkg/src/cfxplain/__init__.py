"""Explainable carbon-footprint estimation from Spanish bank-transaction descriptions."""
from .corpus import SECTORS, Sector, Transaction
from .textprep import NormalizationConfig, ProcessedDoc, default_config, preprocess

__version__ = "0.1.0"

__all__ = ["SECTORS", "Sector", "Transaction", "NormalizationConfig", "ProcessedDoc", "default_config", "preprocess"]
