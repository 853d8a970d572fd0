"""Dirichlet class beliefs over object classes, with a false-positive slot.

A belief over N classes is a positive vector of length N + 1; index 0 is
reserved for "this object is a false positive" and never receives
observation mass, so its normalized weight shrinks as detections accumulate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ClassBelief:
    """Dirichlet parameters over N classes plus the false-positive slot."""

    beta: np.ndarray

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float)
        object.__setattr__(self, "beta", beta)
        if beta.ndim != 1 or beta.size < 2:
            raise ValueError("belief needs at least one class plus the false-positive slot")
        if not np.all(beta > 0.0):
            raise ValueError("belief parameters must be strictly positive")

    @property
    def num_classes(self) -> int:
        return self.beta.size - 1

    @classmethod
    def uniform(cls, num_classes: int) -> "ClassBelief":
        return cls(np.ones(num_classes + 1))


def ml_class(belief: ClassBelief) -> np.ndarray:
    """Class probabilities proportional to the Dirichlet parameters."""
    return belief.beta / belief.beta.sum()
