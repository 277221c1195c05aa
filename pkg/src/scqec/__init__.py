"""Surface-code communication simulators and space-time resource estimation."""

__version__ = "0.1.0"
