"""Exact and stochastic laboratory for fermionic free-field representations
of the sandpile height-one field and the spanning-tree degree field.

Layered design, bottom up: exact Grassmann algebra, finite lattices with a
wired (ghost) boundary, Green's functions and transfer matrices, determinantal
moment formulas, closed-form cumulants with partition-sum oracles, lattice
constants, Monte Carlo samplers, and scaling-limit experiments on the disk.
"""

__version__ = "0.1.0"
