"""Numerical checks of superselection structure in quantum and classical mechanics.

Subpackages: ``vnalg`` (finite-dimensional operator algebras), ``galilei``
and ``cocycle`` (group law and multiplier exponents), ``qdyn`` and
``extdyn`` (quantum and classical dynamics with the mass as a variable),
``maxwell`` (lattice electrodynamics with boundary charges) and
``harness`` (scenarios, reports, CLI).
"""
__version__ = "0.1.0"
