"""Pipelined Idealized Algol: resource-annotated types, SMT-backed inference and timed games."""

__version__ = "0.1.0"
