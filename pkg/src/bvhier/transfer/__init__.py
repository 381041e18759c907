"""Finite-dimensional BV spaces, contraction data and tree-level homotopy transfer."""
