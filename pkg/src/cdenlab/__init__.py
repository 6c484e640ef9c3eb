"""cdenlab: desk-scale simulator for certified-deniability signatures and NIZKs."""

__version__ = "0.1.0"
