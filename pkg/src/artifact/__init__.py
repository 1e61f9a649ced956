"""Exact models of parahoric Deligne-Lusztig varieties for inner forms of GL_n."""

__version__ = "0.1.0"
