"""Learned parameter adaptation for continuous-domain evolutionary algorithms.

A PPO-trained policy observes normalized fitness/genotype statistics of a
running DE or CMA-ES process each generation and emits the algorithm's
control parameters (step size for CMA-ES; scale factor and crossover rate
for DE), benchmarked against the CSA, iDE and jDE adaptive baselines.
"""

__version__ = "0.1.0"
