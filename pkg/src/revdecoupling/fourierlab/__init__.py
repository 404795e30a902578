"""Empirical decoupling measurements on lattice-discretized neighborhoods."""
