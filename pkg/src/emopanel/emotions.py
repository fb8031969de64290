"""Seven-component emotion probability vectors."""

from __future__ import annotations

from dataclasses import astuple, dataclass, fields
from typing import Iterable, Sequence

import numpy as np

# Storage order used by the message file and every array in the package.
EMOTIONS: tuple[str, ...] = ("neutral", "happy", "sad", "anger", "disgust", "surprise", "fear")
# Regression terms; neutral is the omitted reference category.
NON_NEUTRAL: tuple[str, ...] = ("happy", "sad", "fear", "disgust", "anger", "surprise")
NEGATIVE: tuple[str, ...] = ("sad", "anger", "disgust", "fear")


@dataclass(frozen=True)
class EmotionTuple:
    neutral: float
    happy: float
    sad: float
    anger: float
    disgust: float
    surprise: float
    fear: float

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> "EmotionTuple":
        if len(values) != len(EMOTIONS):
            raise ValueError(f"emotion tuple needs {len(EMOTIONS)} components, got {len(values)}")
        return cls(*(float(v) for v in values))

    @classmethod
    def pure(cls, name: str) -> "EmotionTuple":
        return cls.from_sequence([1.0 if e == name else 0.0 for e in EMOTIONS])

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    def as_list(self) -> list[float]:
        return list(astuple(self))

    def total(self) -> float:
        return float(sum(astuple(self)))

    def validate(self, tol: float = 1e-6) -> "EmotionTuple":
        """Raise ``ValueError`` unless components lie in [0, 1] and sum to 1 within `tol`."""
        values = astuple(self)
        for f, v in zip(fields(self), values):
            if not np.isfinite(v) or v < 0.0 or v > 1.0:
                raise ValueError(f"emotion component {f.name}={v!r} outside [0, 1]")
        if abs(sum(values) - 1.0) > tol:
            raise ValueError(f"emotion components sum to {sum(values)!r}, not 1")
        return self


def tuples_to_array(tuples: Iterable[EmotionTuple]) -> np.ndarray:
    return np.array([t.as_list() for t in tuples], dtype=float).reshape(-1, len(EMOTIONS))
