"""Exact verification of hyper-Hermitian four-metrics built from a potential pair."""
from __future__ import annotations

__version__ = "0.1.0"
