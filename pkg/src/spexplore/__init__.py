"""Spatio-spectral exploration planning: unmixing, exploration MDP, MCTS and baselines."""

__version__ = "0.1.0"
