from ._divband import __version__, simulate, solve, validate

__all__ = ["__version__", "simulate", "solve", "validate"]
