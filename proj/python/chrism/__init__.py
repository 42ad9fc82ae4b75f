"""Probabilistic multiset-rewriting engine for chance-rule programs.

The native extension exposes a single entry point, :class:`Session`, which
loads a program and offers sampling, exact inference, EM learning, and
ambiguity checking over it.
"""

from chrism._chrism import EngineError, LimitError, ProgramError, Session

__all__ = ["Session", "ProgramError", "EngineError", "LimitError"]
