"""EPAM discrimination-net learner and GPS means-ends problem solver."""

__version__ = "0.1.0"
