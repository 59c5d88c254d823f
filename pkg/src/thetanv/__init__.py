"""Exact computations around theta components of Jacobi forms of level N and
square-free index: quadratic Gauss sums, theta-transformation coefficients,
the maximal-rank matrices behind the non-vanishing of primitive theta
components, and a coefficient sieve for half-integral weight forms."""

__version__ = "0.1.0"
