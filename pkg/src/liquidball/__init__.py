"""Numerical laboratory for a free-boundary relativistic liquid ball on
fixed background spacetimes: enthalpy-form Euler evolution in spherical
symmetry, an acoustic wave solver, energy functionals, and a
verification suite for the associated geometric identities and
elliptic/Sobolev-type inequalities."""

__version__ = "0.1.0"
