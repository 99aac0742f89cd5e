"""Concurrent NetKAT: pomset semantics, guarded traces and normal forms."""

__version__ = "0.1.0"
