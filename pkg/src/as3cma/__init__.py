"""CMA-ES with adaptive scenario subset selection for worst-case optimization."""

__version__ = "0.1.0"
