"""Test-augmented, multi-advisor debloater for the MiniC language."""

__version__ = "0.1.0"
