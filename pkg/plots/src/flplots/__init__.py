"""Presentational layer over fiberloop CSV artifacts.

Strictly no physics: every figure is a pure function of CSV content and the
rendering options passed on the command line.
"""

__version__ = "0.1.0"
