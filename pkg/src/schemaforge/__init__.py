"""Schema-theory laboratory: GA and GP engines, schema-theorem predictions,
an exact enumeration oracle and a Monte Carlo harness."""

__version__ = "0.1.0"
