"""Verifiable puzzle environments, rule-based rewards, and on-policy RL tools."""

from .core import (
    PuzzleError,
    PuzzleInstance,
    PuzzleMeta,
    SolutionSet,
    TaskKind,
    parse_instance,
    serialize_instance,
)

__all__ = [
    "PuzzleError",
    "PuzzleInstance",
    "PuzzleMeta",
    "SolutionSet",
    "TaskKind",
    "parse_instance",
    "serialize_instance",
]

__version__ = "0.1.0"
