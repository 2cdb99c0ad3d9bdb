"""Finite-depth toolkit for Bratteli diagrams, transverse finite relations and
the absorption rewrite of AF-equivalence relations."""

__version__ = "0.1.0"
