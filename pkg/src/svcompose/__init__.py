"""Automated service composition: HTN search over executable service pipelines.

Layers, bottom up: `logic` (states, formulas, theories), `htn` (operators,
methods, forward decomposition), `search` (best-first with pluggable node
evaluation), `services` (the composition problem and its HTN translation),
`runtime` (the HTTP service host and choreography), `automl` (the toy
pipeline-composition case study and CLI).
"""

__version__ = "0.1.0"
