"""
seqfold - Sequential cloth folding with a space-time attention policy.

This package provides a pick-and-place policy that folds cloth by
following a demonstration of sub-goal frames, together with the
particle cloth simulator, data generation, training and evaluation
tools it is built and measured with.
"""

__version__ = "0.1.0"
