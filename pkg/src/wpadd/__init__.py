"""Weierstrass wp: evaluation, exact derivative reduction, and addition theorems."""
from .engine import AdditionConfig, run, solve, wp_of_sum
from .evaluator import sigma, wp, wp_deriv, wp_pair
from .lattice import Lattice, half_period_values, invariants_from_periods, reduce_argument
from .symbolic import derivative_form, phi_mu

__all__ = ["AdditionConfig", "Lattice", "derivative_form", "half_period_values", "invariants_from_periods",
           "phi_mu", "reduce_argument", "run", "sigma", "solve", "wp", "wp_deriv", "wp_of_sum", "wp_pair"]
