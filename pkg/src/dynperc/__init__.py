"""Random walk on dynamical percolation: simulation and exact analysis.

Library layout:
  graphs        finite simple graphs, degree-biased stationary measure
  chains        ChainSpec, Dirichlet forms, gaps, hitting/commute/mixing
  profiles      spectral profiles, Dirichlet eigenvalues, log-Sobolev
  full_process  the joint (walker, environment) process and its generator
  regeneration  infected-edge bookkeeping and the regeneration chain
  comparisons   full-process vs SRW comparison experiments
  identities    exact identity/inequality checks
  experiments   named, config-driven experiment registry
  cli           `dynperc run | list-experiments | validate-config`
"""

from . import (  # noqa: F401
    chains,
    comparisons,
    full_process,
    graphs,
    identities,
    profiles,
    regeneration,
)

__all__ = [
    "chains",
    "comparisons",
    "full_process",
    "graphs",
    "identities",
    "profiles",
    "regeneration",
]
