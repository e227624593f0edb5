"""Deterministic adaptive quadrature and cached cumulative integrals.

The core rule is the Gauss-Kronrod 7-15 pair on each panel, with bisection
until the K15-G7 discrepancy meets the tolerance.  Cumulative integrals keep
a knot table at prescribed panel edges; a point evaluation adds one short
quadrature from the nearest materialized knot, so values are exact up to the
panel tolerance and strictly ordered whenever the integrand is positive
(all K15 weights are positive).
"""

from __future__ import annotations

import math
import threading
from typing import Callable


class QuadratureError(ArithmeticError):
    """Adaptive refinement failed to converge."""


# Gauss-Kronrod 7-15 abscissae/weights on [-1, 1] (symmetric half listed).
_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)


def _gk15(f: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    """One Gauss-Kronrod 7-15 panel: returns (K15 value, |K15-G7| estimate)."""
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fc = f(center)
    kron = _WGK[7] * fc
    gauss = _WG[3] * fc
    for j in range(7):
        dx = half * _XGK[j]
        f1 = f(center - dx)
        f2 = f(center + dx)
        kron += _WGK[j] * (f1 + f2)
        if j % 2 == 1:
            gauss += _WG[j // 2] * (f1 + f2)
    kron *= half
    gauss *= half
    return kron, abs(kron - gauss)


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-12,
    max_depth: int = 60,
) -> float:
    """Adaptive integral of f over [a, b] to absolute tolerance tol.

    Deterministic: the bisection order depends only on (f, a, b, tol).
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b = b, a
        sign = -1.0
    total = 0.0
    stack = [(a, b, 0)]
    while stack:
        lo, hi, depth = stack.pop()
        val, err = _gk15(f, lo, hi)
        share = tol * (hi - lo) / (b - a)
        if err <= max(share, 1e-15 * abs(val)) or (hi - lo) < 1e-14 * (1.0 + abs(lo)):
            total += val
            continue
        if depth >= max_depth:
            raise QuadratureError(
                f"quadrature did not converge on [{lo}, {hi}] (error {err:g})"
            )
        mid = 0.5 * (lo + hi)
        stack.append((mid, hi, depth + 1))
        stack.append((lo, mid, depth + 1))
    return sign * total


class CumulativeIntegral:
    """Cached antiderivative F(t) = integral of f from t0 to t.

    Knots sit at panel edges supplied by ``edge(m)`` (strictly increasing in
    the integer index m, with edge(0) == t0).  ``index_of(t)`` must return the
    greatest m with edge(m) <= t.  Evaluation integrates from the nearest
    materialized edge, so refinement never perturbs previously returned
    values.  Extension of the knot table is guarded by a lock; concurrent
    readers always see a consistent table.
    """

    def __init__(
        self,
        f: Callable[[float], float],
        edge: Callable[[int], float],
        index_of: Callable[[float], int],
        tol: float = 1e-12,
    ):
        self.f = f
        self.edge = edge
        self.index_of = index_of
        self.tol = tol
        self._lock = threading.Lock()
        # knot value at edge(m) for m in [lo_m, hi_m]
        self._vals: dict[int, float] = {0: 0.0}
        self._lo_m = 0
        self._hi_m = 0

    def _ensure(self, m: int) -> None:
        if self._lo_m <= m <= self._hi_m:
            return
        with self._lock:
            while self._hi_m < m:
                j = self._hi_m
                panel = integrate(self.f, self.edge(j), self.edge(j + 1), self.tol)
                self._vals[j + 1] = self._vals[j] + panel
                self._hi_m = j + 1
            while self._lo_m > m:
                j = self._lo_m
                panel = integrate(self.f, self.edge(j - 1), self.edge(j), self.tol)
                self._vals[j - 1] = self._vals[j] - panel
                self._lo_m = j - 1

    def value(self, t: float) -> float:
        m = self.index_of(t)
        left = self.edge(m)
        right = self.edge(m + 1)
        # integrate from the closer edge of the panel containing t
        if t - left <= right - t:
            self._ensure(m)
            return self._vals[m] + integrate(self.f, left, t, self.tol)
        self._ensure(m + 1)
        return self._vals[m + 1] - integrate(self.f, t, right, self.tol)

    def knots(self) -> list[tuple[float, float]]:
        with self._lock:
            return [
                (self.edge(m), self._vals[m])
                for m in range(self._lo_m, self._hi_m + 1)
            ]


def uniform_cumulative(
    f: Callable[[float], float],
    t0: float,
    width: float,
    tol: float = 1e-12,
) -> CumulativeIntegral:
    """Cumulative integral with uniform panels of the given width from t0."""

    def edge(m: int) -> float:
        return t0 + m * width

    def index_of(t: float) -> int:
        return math.floor((t - t0) / width)

    return CumulativeIntegral(f, edge, index_of, tol)
