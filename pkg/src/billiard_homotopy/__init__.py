"""Homotopical rotation sets and entropy for a billiard flow on the 3-torus
with two orthogonal families of cylindrical scatterers."""

__version__ = "0.1.0"
