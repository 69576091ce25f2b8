"""Systoles and homological systoles of hyperbolic surfaces built from pants
graphs with Fenchel-Nielsen coordinates."""

__version__ = "0.1.0"
