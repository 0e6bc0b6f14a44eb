"""Feasibility-aware service-quality improvement planning.

A CART tree grown on survey scores yields attribute weights and if-then
rules; importance-performance analysis assigns initial priorities; expert
feasibility judgments (AHP) then let the rules re-rank attributes that
cannot realistically be improved.
"""

__version__ = "0.1.0"
