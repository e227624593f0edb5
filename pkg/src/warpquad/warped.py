"""Warped product metric specification and the timelike/periodic split.

The metric on I x R^{n-1} is

    rho(t)^2 dt^2 + eta_1(t)^2 dx_1^2 + ... + eta_{n-1}(t)^2 dx_{n-1}^2

with all coefficients positive and smooth.  The first ``a`` warping factors
pair with timelike planes in the constructions; the remaining ``b = n-1-a``
are carried by the periodic pair and the step functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .blanusa import BlanusaPair, Gamma, default_gamma
from .expr import FnExpr

# verification window: this many breakpoint gaps on each side of t0
WINDOW_GAPS = 10
# step synthesis covers this margin of extra gaps beyond the window
SYNTH_MARGIN_GAPS = 2


class SpecError(ValueError):
    """Invalid metric specification (input error)."""


class PositivityError(SpecError):
    def __init__(self, name: str, t: float, value: float):
        super().__init__(f"{name} is not positive at t={t!r} (value {value!r})")
        self.name = name
        self.t = t
        self.value = value


class MonotonicityError(SpecError):
    def __init__(self, t: float, value: float):
        super().__init__(f"gamma'({t!r}) = {value!r} <= 0; gamma must be increasing")


@dataclass
class GapStats:
    """Sampled coefficient ranges on one breakpoint gap [t_k, t_{k+1})."""

    k: int
    rho_min: float
    rho_max: float
    eta_min: tuple[float, ...]
    eta_max: tuple[float, ...]


@dataclass
class MetricSpec:
    n: int
    a: int
    interval: tuple[float, float]
    rho: FnExpr
    eta: tuple[FnExpr, ...]
    c: float = 1.0
    target: str = "flat"  # flat | sphere | hyperbolic
    variant: str = "immersion"  # immersion | embedding
    gamma: Optional[Gamma] = None
    safety: float = 2.0
    grid_density: int = 64
    gap_stats: dict[int, GapStats] = field(default_factory=dict, repr=False)
    _pair: Optional[BlanusaPair] = field(default=None, repr=False)
    _validated: bool = field(default=False, repr=False)

    def __post_init__(self):
        if self.n < 2:
            raise SpecError(f"n must be >= 2, got {self.n}")
        if not 0 <= self.a <= self.n - 1:
            raise SpecError(f"a must be in [0, {self.n - 1}], got {self.a}")
        if len(self.eta) != self.n - 1:
            raise SpecError(
                f"expected {self.n - 1} warping functions, got {len(self.eta)}"
            )
        lo, hi = self.interval
        if not lo < hi:
            raise SpecError(f"empty interval ({lo}, {hi})")
        if self.c <= 0:
            raise SpecError("c must be positive")
        if self.target not in ("flat", "sphere", "hyperbolic"):
            raise SpecError(f"unknown target {self.target!r}")
        if self.variant not in ("immersion", "embedding"):
            raise SpecError(f"unknown variant {self.variant!r}")
        if self.safety < 1.0:
            raise SpecError("safety must be >= 1")
        if self.grid_density < 2:
            raise SpecError("grid_density must be >= 2")
        if self.gamma is None:
            self.gamma = default_gamma(self.interval)

    @property
    def b(self) -> int:
        return self.n - 1 - self.a

    @property
    def pair(self) -> BlanusaPair:
        if self._pair is None:
            self._pair = BlanusaPair(self.gamma)
        return self._pair

    @property
    def t0(self) -> float:
        return self.pair.breakpoint(0)

    def gap_points(self, k: int, density: Optional[int] = None) -> list[float]:
        """Sample points in [t_k, t_{k+1}), left endpoint included."""
        d = density or self.grid_density
        lo = self.pair.breakpoint(k)
        hi = self.pair.breakpoint(k + 1)
        return [lo + (hi - lo) * i / d for i in range(d)]

    def window_points(
        self, gaps: int = WINDOW_GAPS, density: Optional[int] = None
    ) -> list[float]:
        pts: list[float] = []
        for k in range(-gaps, gaps):
            pts.extend(self.gap_points(k, density))
        pts.append(self.pair.breakpoint(gaps))
        return pts


@dataclass(frozen=True)
class WarpSplit:
    """eta split into the timelike-paired head and the periodic tail."""

    eta_tilde: tuple[FnExpr, ...]
    eta_bar: tuple[FnExpr, ...]


def validate(spec: MetricSpec) -> MetricSpec:
    """Sample positivity of rho, eta and monotonicity of gamma.

    Sampling covers the synthesis window (WINDOW_GAPS + SYNTH_MARGIN_GAPS
    gaps each side of t0) at grid_density points per gap.  Returns the spec
    annotated with per-gap coefficient ranges; raises PositivityError or
    MonotonicityError on failure.
    """
    if spec._validated:
        return spec
    rho = spec.rho.compiled()
    etas = [e.compiled() for e in spec.eta]
    dgam = spec.gamma.deriv
    gaps = WINDOW_GAPS + SYNTH_MARGIN_GAPS
    for k in range(-gaps, gaps):
        pts = spec.gap_points(k)
        rv = [rho(t) for t in pts]
        evs = [[f(t) for t in pts] for f in etas]
        for t, v in zip(pts, rv):
            if not (v > 0.0) or not math.isfinite(v):
                raise PositivityError("rho", t, v)
        for j, vals in enumerate(evs):
            for t, v in zip(pts, vals):
                if not (v > 0.0) or not math.isfinite(v):
                    raise PositivityError(f"eta_{j + 1}", t, v)
        for t in pts:
            d = dgam(t)
            if not (d > 0.0) or not math.isfinite(d):
                raise MonotonicityError(t, d)
        spec.gap_stats[k] = GapStats(
            k=k,
            rho_min=min(rv),
            rho_max=max(rv),
            eta_min=tuple(min(v) for v in evs),
            eta_max=tuple(max(v) for v in evs),
        )
    spec._validated = True
    return spec


def split(spec: MetricSpec) -> WarpSplit:
    """First a warping functions pair with timelike planes, the rest with
    the periodic construction."""
    return WarpSplit(
        eta_tilde=tuple(spec.eta[: spec.a]),
        eta_bar=tuple(spec.eta[spec.a:]),
    )
