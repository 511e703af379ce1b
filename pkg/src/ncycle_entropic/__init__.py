"""Linear and entropic inequalities for the n-cycle scenario."""

__version__ = "0.3.1"
