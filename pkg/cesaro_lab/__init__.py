"""
Cesàro Lab - finite-limit sets of Cesàro-convergent subsequences.

Compute the bounded/hereditarily-unbounded partition of convex hulls of
nonnegative random variables on atomic probability spaces, build the
certifying equivalent measure, identify {xi < inf}, and check the whole chain
of equivalences exactly and by Monte Carlo.
"""

__version__ = "0.1.0"
