"""Exact-arithmetic laboratory for closed geodesics on arithmetic quotients
of products of hyperbolic planes: lengths, holonomy angles, class
multiplicities, and their counting and equidistribution statistics."""

__version__ = "0.1.0"
