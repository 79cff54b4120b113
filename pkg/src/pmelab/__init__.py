"""pmelab: desk-scale numerical laboratory for degenerate diffusion with
advection -- monotone finite-volume solver, exact self-similar reference
solutions, decay-exponent algebra with brute-force cross-checks, and
theorem-by-theorem audit harness."""

__version__ = "0.1.0"
