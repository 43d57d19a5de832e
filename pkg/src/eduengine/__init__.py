"""Editor-agnostic interactive programming-course engine."""

__version__ = "0.1.0"
