"""Two-phase memory model engine: an infinite model with unbounded addresses,
a finite model that may run out of memory, and a small IR interpreter that
checks the latter refines the former."""

__version__ = "0.1.0"
