"""Multi-objective gradient methods (MoDo, MGDA, static weighting) and their
optimization / generalization / conflict-avoidance trade-off on synthetic problems."""

__version__ = "0.1.0"
