"""Ant colony reading cycles over keyword-tagged news, with negative pheromone."""

__version__ = "0.1.0"
