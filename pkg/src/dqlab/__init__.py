"""dqlab: a finite-horizon Q-learning laboratory.

Batch fitted-Q iteration and online DQN over pluggable hypothesis spaces,
constructive ReLU approximants for spatially sparse piecewise-constant
targets, covering-number and generalization-bound calculators, and
desk-scale supply-chain and recommender studies behind one CLI.
"""

__version__ = "0.1.0"

from . import approx, capacity, core, envs, nets, qlearn

__all__ = ["approx", "capacity", "core", "envs", "nets", "qlearn", "__version__"]
