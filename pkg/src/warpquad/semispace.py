"""Signed ambient spaces R^N with a diagonal +-1 metric, and their quadrics.

Signs are stored in coordinate-construction order (e.g. R x (R^2_1)^a x R^4b
keeps each map block contiguous); ``canonical_permutation`` reorders to the
negatives-first layout for reporting.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DimensionMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class AmbientSpace:
    """R^dim with inner product sum_i signs[i] x_i y_i."""

    signs: tuple[int, ...]
    _signs_arr: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if any(s not in (-1, 1) for s in self.signs):
            raise ValueError("signs must be +1 or -1")
        object.__setattr__(
            self, "_signs_arr", np.asarray(self.signs, dtype=float)
        )

    @property
    def dim(self) -> int:
        return len(self.signs)

    @property
    def index(self) -> int:
        return sum(1 for s in self.signs if s == -1)

    def canonical_permutation(self) -> tuple[int, ...]:
        """Coordinate order mapping to the negatives-first layout."""
        neg = [i for i, s in enumerate(self.signs) if s == -1]
        pos = [i for i, s in enumerate(self.signs) if s == 1]
        return tuple(neg + pos)

    def describe(self) -> str:
        return f"R^{self.dim} (index {self.index})"


def euclidean(dim: int) -> AmbientSpace:
    return AmbientSpace((1,) * dim)


def lorentz_plane() -> AmbientSpace:
    return AmbientSpace((-1, 1))


def concat(*spaces: AmbientSpace) -> AmbientSpace:
    signs: tuple[int, ...] = ()
    for s in spaces:
        signs = signs + s.signs
    return AmbientSpace(signs)


def inner(x, y, space: AmbientSpace) -> float:
    """Signed inner product sum_i signs[i] x[i] y[i]."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != space.dim or y.shape[-1] != space.dim:
        raise DimensionMismatchError(
            f"vectors of length {x.shape[-1]}, {y.shape[-1]} in {space.describe()}"
        )
    return float(np.dot(x * space._signs_arr, y))


@dataclass(frozen=True)
class Quadric:
    """Level set <x, x> = level inside a signed ambient space.

    level is +1/c for the sphere-like quadric and -1/c for the hyperbolic
    one; both are hypersurfaces of constant curvature +-c.
    """

    kind: str  # 'sphere' | 'hyperbolic'
    c: float
    ambient: AmbientSpace

    def __post_init__(self):
        if self.kind not in ("sphere", "hyperbolic"):
            raise ValueError(f"unknown quadric kind {self.kind!r}")
        if self.c <= 0:
            raise ValueError("curvature magnitude c must be positive")

    @property
    def level(self) -> float:
        return 1.0 / self.c if self.kind == "sphere" else -1.0 / self.c

    @property
    def dim(self) -> int:
        return self.ambient.dim - 1

    def describe(self) -> str:
        letter = "S" if self.kind == "sphere" else "H"
        idx = self.ambient.index - (0 if self.kind == "sphere" else 1)
        return f"{letter}^{self.dim}_{idx}(c={self.c:g})"


def quadric_residual(x, q: Quadric) -> float:
    """inner(x, x) minus the quadric level; zero iff x lies on the quadric."""
    return inner(x, x, q.ambient) - q.level
