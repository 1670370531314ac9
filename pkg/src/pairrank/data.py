"""Validated container for paired-comparison counts."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DataValidationError


def _as_count_matrix(m, what: str) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DataValidationError(f"{what} must be a square matrix, got shape {m.shape}")
    if m.shape[0] < 2:
        raise DataValidationError(f"{what} needs at least two subjects, got {m.shape[0]}")
    if not np.all(np.isfinite(m)):
        raise DataValidationError(f"{what} contains non-finite entries")
    rounded = np.rint(m)
    if np.any(np.abs(m - rounded) > 1e-9):
        raise DataValidationError(f"{what} entries must be integers")
    out = rounded.astype(np.int64)
    if np.any(out < 0):
        raise DataValidationError(f"{what} entries must be nonnegative")
    return out


@dataclass(frozen=True, eq=False)
class ComparisonData:
    """Comparison counts t and win counts a over subjects 0..n.

    Invariants enforced at construction: both matrices square of the same
    shape with zero diagonal, t symmetric, a_ij + a_ji = t_ij off the
    diagonal, all entries nonnegative integers. Arrays are copied and
    frozen, so instances are safe to share.
    """

    t: np.ndarray
    a: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        t = _as_count_matrix(self.t, "t")
        a = _as_count_matrix(self.a, "a")
        if t.shape != a.shape:
            raise DataValidationError(f"shape mismatch: t {t.shape} vs a {a.shape}")
        if np.any(np.diag(t) != 0) or np.any(np.diag(a) != 0):
            raise DataValidationError("diagonals of t and a must be zero")
        if np.any(t != t.T):
            raise DataValidationError("t must be symmetric")
        if np.any(a + a.T != t):
            raise DataValidationError("a_ij + a_ji must equal t_ij for every pair")
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != t.shape[0]:
                raise DataValidationError(
                    f"{len(labels)} labels for {t.shape[0]} subjects"
                )
            if len(set(labels)) != len(labels):
                raise DataValidationError("labels must be unique")
            object.__setattr__(self, "labels", labels)
        t.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "a", a)

    @property
    def n_plus_1(self) -> int:
        return self.t.shape[0]

    @cached_property
    def scores(self) -> np.ndarray:
        """Per-subject win totals a_i."""
        s = self.a.sum(axis=1)
        s.setflags(write=False)
        return s

    @cached_property
    def totals(self) -> np.ndarray:
        """Per-subject comparison totals t_i."""
        s = self.t.sum(axis=1)
        s.setflags(write=False)
        return s

    def label_of(self, index: int) -> str:
        if self.labels is not None:
            return self.labels[index]
        return str(index)

    def index_of(self, label: str) -> int:
        if self.labels is None:
            raise DataValidationError("data carries no labels")
        try:
            return self.labels.index(label)
        except ValueError:
            raise DataValidationError(f"unknown subject label {label!r}") from None
