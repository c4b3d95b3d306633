"""Genetic automata: weighted automata evolved by genetic operators on their
matrix representation, applied to the iterated prisoner's dilemma and to
behavioral aggregation of agents."""

__version__ = "0.1.0"
