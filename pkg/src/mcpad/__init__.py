"""Multi-channel face presentation attack detection toolkit.

Registers multi-sensor streams into aligned channel cubes, trains a
pixel-wise supervised detector on configurable channel subsets, builds
known/unseen-attack protocols and reports ISO-style error metrics.
"""

__version__ = "0.1.0"
