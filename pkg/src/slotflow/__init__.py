"""Airport security time-slot reassignment by exact min-cost network flow."""

__version__ = "0.1.0"
