"""Brown-measure boundary tools for X = p + iq with atomic p and q."""
__version__ = "0.1.0"
