"""pouw: proof-of-useful-work protocol kit and deterministic simulator."""

__version__ = "0.1.0"
