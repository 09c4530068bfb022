"""Exact computation engine: lattices, tables, flag integrals and the quartic curve."""
