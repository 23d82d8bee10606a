"""Stochastic HVAC control on a finite-horizon MDP, learned by gradient-based policy iteration."""

__version__ = "0.1.0"
