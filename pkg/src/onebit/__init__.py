"""One-bit compressive sensing with partial support information."""

__version__ = "0.3.0"
