"""Piecewise-constant frequencies S_1, S_2 large enough for the constructions.

S_1 is constant on each [t_{2l+1}, t_{2l+3}) and S_2 on each [t_{2l},
t_{2l+2}).  Values are synthesized per interval so that, with margin
``safety`` on a sampled grid:

  (1) 4 b ((eta_r psi_j)'(t))^2  <  S_j(t)^2 rho(t)^2 / safety        always;
  (2) 8 b c eta_r(t)^2 psi_j(t)^2  <  S_j(t)^2 / safety               sphere;
  (3) delta(t) < Gamma(t) / safety                    sphere immersion;
  (4) Delta(t) < rho(t)^2 / safety                    sphere embedding.

Enlarging steps only shrinks the error terms in (3)-(4) for the presets of
interest, so violated intervals are doubled and retested until the grid is
clean.  The certificate records the attained margins per interval.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Optional

from .blanusa import BlanusaPair
from .warped import (
    MetricSpec,
    SYNTH_MARGIN_GAPS,
    WINDOW_GAPS,
    WarpSplit,
    split,
    validate,
)

MAX_DOUBLINGS = 60

_MARGIN_NAMES = ("freq", "amp", "sph_imm", "sph_emb")


class StepSynthesisError(ArithmeticError):
    """Doubling did not converge; coefficients are pathological here."""


@dataclass
class IntervalCertificate:
    family: str  # 'S1' | 'S2'
    l: int
    value: float
    margins: dict[str, float] = field(default_factory=dict)

    def span_indices(self) -> tuple[int, int]:
        if self.family == "S1":
            return (2 * self.l + 1, 2 * self.l + 3)
        return (2 * self.l, 2 * self.l + 2)


@dataclass
class SynthesisCertificate:
    safety: float
    grid_density: int
    conditions: tuple[str, ...]
    entries: list[IntervalCertificate] = field(default_factory=list)

    def lines(self) -> list[str]:
        out = [
            f"steps.safety: {self.safety:.17g}",
            f"steps.grid_density: {self.grid_density}",
            f"steps.conditions: {','.join(self.conditions) if self.conditions else 'none'}",
        ]
        for e in sorted(self.entries, key=lambda e: (e.family, e.l)):
            margins = " ".join(
                f"{name}={e.margins[name]:.6g}"
                for name in _MARGIN_NAMES
                if name in e.margins
            )
            out.append(
                f"steps.{e.family}[{e.l}]: value={e.value:.17g} {margins}".rstrip()
            )
        return out


class StepPair:
    """The two positive step functions over the breakpoint lattice.

    Immutable to read once synthesized; on-demand range extension is guarded
    by a lock but concurrent extension should still be externally serialized
    with evaluation for reproducible certificates.
    """

    def __init__(self, pair: BlanusaPair, trivial: bool = False):
        self.pair = pair
        self.trivial = trivial
        self.s1: dict[int, float] = {}
        self.s2: dict[int, float] = {}
        self.covered: Optional[tuple[int, int]] = None  # breakpoint index range
        self.certificate = SynthesisCertificate(
            safety=1.0, grid_density=0, conditions=()
        )
        self._extender = None
        self._lock = threading.RLock()

    def S1(self, t: float) -> float:
        if self.trivial:
            return 1.0
        u = self.pair.gamma(t)
        l = math.floor((u - 1.0) / 2.0)
        val = self.s1.get(l)
        if val is None:
            self.ensure_covers(t)
            val = self.s1[l]
        return val

    def S2(self, t: float) -> float:
        if self.trivial:
            return 1.0
        u = self.pair.gamma(t)
        l = math.floor(u / 2.0)
        val = self.s2.get(l)
        if val is None:
            self.ensure_covers(t)
            val = self.s2[l]
        return val

    def ensure_covers(self, t: float) -> None:
        """Extend the synthesized range to include t (plus margin gaps)."""
        if self.trivial:
            return
        u = self.pair.gamma(t)
        lo_k, hi_k = self.covered
        if lo_k <= u <= hi_k and self._complete(lo_k, hi_k):
            return
        with self._lock:
            lo_k, hi_k = self.covered
            new_lo = min(lo_k, math.floor(u) - SYNTH_MARGIN_GAPS)
            new_hi = max(hi_k, math.ceil(u) + SYNTH_MARGIN_GAPS)
            if (new_lo, new_hi) != (lo_k, hi_k):
                self._extender(new_lo, new_hi)
                self.covered = (new_lo, new_hi)

    def _complete(self, lo_k: int, hi_k: int) -> bool:
        return (
            s1_piece_range(lo_k, hi_k)[0] in self.s1
            and s2_piece_range(lo_k, hi_k)[0] in self.s2
        )

    def values_sorted(self) -> tuple[list[tuple[int, float]], list[tuple[int, float]]]:
        return sorted(self.s1.items()), sorted(self.s2.items())


def s1_piece_range(lo_k: int, hi_k: int) -> tuple[int, int]:
    """Inclusive l range of S1 pieces needed to cover gamma in [lo_k, hi_k]."""
    return (math.floor((lo_k - 1) / 2), math.floor((hi_k - 1) / 2))


def s2_piece_range(lo_k: int, hi_k: int) -> tuple[int, int]:
    return (math.floor(lo_k / 2), math.floor(hi_k / 2))


def active_conditions(spec: MetricSpec) -> tuple[str, ...]:
    conds = ["freq"]
    if spec.target == "sphere":
        conds.append("amp")
        if spec.variant == "immersion":
            conds.append("sph_imm")
        else:
            conds.append("sph_emb")
    return tuple(conds)


def synthesize(spec: MetricSpec, pair: Optional[BlanusaPair] = None) -> StepPair:
    """Build a StepPair meeting the conditions required by the spec's kind.

    With b = 0 the conditions are vacuous and the trivial pair (all values 1)
    is returned with an empty certificate.
    """
    validate(spec)
    if pair is None:
        pair = spec.pair
    steps = StepPair(pair, trivial=(spec.b == 0))
    if steps.trivial:
        steps.covered = (-(10 ** 9), 10 ** 9)
        steps.certificate = SynthesisCertificate(
            safety=spec.safety,
            grid_density=spec.grid_density,
            conditions=(),
        )
        return steps

    sp = split(spec)
    steps.certificate = SynthesisCertificate(
        safety=spec.safety,
        grid_density=spec.grid_density,
        conditions=active_conditions(spec),
    )

    def extender(lo_k: int, hi_k: int) -> None:
        _synthesize_range(spec, sp, pair, steps, lo_k, hi_k)

    steps._extender = extender
    span = WINDOW_GAPS + SYNTH_MARGIN_GAPS
    steps.covered = (-span, span)
    extender(-span, span)
    return steps


def audit_margins(
    spec: MetricSpec,
    steps: StepPair,
    density: Optional[int] = None,
    gaps: int = WINDOW_GAPS,
) -> dict[str, float]:
    """Minimum attained margin per active condition on a fresh grid.

    A margin is the ratio by which the condition holds (condition satisfied
    with factor safety iff margin >= safety); the grid density defaults to
    the spec's, and callers checking soundness should pass a denser one.
    """
    if steps.trivial:
        return {}
    margins = _Margins(spec, split(spec), steps.pair, steps)
    grid = [t for k in range(-gaps, gaps) for t in spec.gap_points(k, density)]
    sphere = spec.target == "sphere"
    out: dict[str, float] = {"freq": math.inf}
    if sphere:
        out["amp"] = math.inf
        out["sph_emb" if spec.variant == "embedding" else "sph_imm"] = math.inf
    for t in grid:
        out["freq"] = min(
            out["freq"], margins.freq_margin(1, t), margins.freq_margin(2, t)
        )
        if sphere:
            out["amp"] = min(
                out["amp"], margins.amp_margin(1, t), margins.amp_margin(2, t)
            )
            key = "sph_emb" if spec.variant == "embedding" else "sph_imm"
            out[key] = min(out[key], margins.coupled_margin(t))
    return out


class _Margins:
    """Evaluates the per-condition margins at a point for a given StepPair.

    The raw coefficient accessors below never touch the step values, so they
    are safe to call outside the synthesized range (piece initialization
    samples whole piece spans, which overhang the covered window).
    """

    def __init__(self, spec: MetricSpec, sp: WarpSplit, pair: BlanusaPair, steps: StepPair):
        self.spec = spec
        self.sp = sp
        self.pair = pair
        self.steps = steps
        self._rho = spec.rho.compiled()
        self._etab = [e.compiled() for e in sp.eta_bar]
        self._detab = [e.deriv().compiled() for e in sp.eta_bar]
        self.sphere = spec.target == "sphere"
        self.embedding = spec.variant == "embedding"
        self.scalars = None
        self.refresh()

    def refresh(self) -> None:
        """Rebuild the derived-scalar caches after step values changed."""
        from .atlas import DerivedScalars  # deferred to avoid an import cycle

        self.scalars = DerivedScalars(self.spec, self.sp, self.pair, self.steps)

    def slope_sq_max(self, j: int, t: float) -> float:
        """max_r ((eta_r psi_j)'(t))^2 (step-independent)"""
        psi = self.pair.psi(j, t)
        dpsi = self.pair.psi_deriv(j, t)
        best = 0.0
        for f, df in zip(self._etab, self._detab):
            s = df(t) * psi + f(t) * dpsi
            best = max(best, s * s)
        return best

    def amp_sq_max(self, j: int, t: float) -> float:
        """max_r (eta_r(t) psi_j(t))^2 (step-independent)"""
        psi = self.pair.psi(j, t)
        best = 0.0
        for f in self._etab:
            s = f(t) * psi
            best = max(best, s * s)
        return best

    def freq_margin(self, j: int, t: float) -> float:
        b = self.spec.b
        rho = self._rho(t)
        S = self.steps.S1(t) if j == 1 else self.steps.S2(t)
        denom = 4.0 * b * self.slope_sq_max(j, t)
        if denom == 0.0:
            return math.inf
        return S * S * rho * rho / denom

    def amp_margin(self, j: int, t: float) -> float:
        b = self.spec.b
        S = self.steps.S1(t) if j == 1 else self.steps.S2(t)
        denom = 8.0 * b * self.spec.c * self.amp_sq_max(j, t)
        if denom == 0.0:
            return math.inf
        return S * S / denom

    def coupled_margin(self, t: float) -> float:
        sc = self.scalars
        if self.embedding:
            D = sc.Delta_big(t)
            if D <= 0.0:
                return math.inf
            rho = sc.rho(t)
            return rho * rho / D
        d = sc.delta_small(t)
        if d == 0.0:
            return math.inf
        return sc.Gamma_big(t) / d


def _init_piece_value(
    spec: MetricSpec,
    margins: "_Margins",
    family: str,
    l: int,
) -> float:
    """Closed-form lower bound for one piece from its full span, times safety."""
    j = 1 if family == "S1" else 2
    k0 = 2 * l + 1 if family == "S1" else 2 * l
    pts: list[float] = []
    for k in (k0, k0 + 1):
        pts.extend(spec.gap_points(k))
    pts.append(spec.pair.breakpoint(k0 + 2))
    b = spec.b
    sup = 1.0
    sphere = spec.target == "sphere"
    for t in pts:
        rho = margins._rho(t)
        bound = 4.0 * b * margins.slope_sq_max(j, t) / (rho * rho)
        if sphere:
            bound = max(bound, 8.0 * b * spec.c * margins.amp_sq_max(j, t))
        sup = max(sup, bound)
    return math.sqrt(spec.safety * sup) * (1.0 + 1e-9)


def _synthesize_range(
    spec: MetricSpec,
    sp: WarpSplit,
    pair: BlanusaPair,
    steps: StepPair,
    lo_k: int,
    hi_k: int,
) -> None:
    frozen = {("S1", l) for l in steps.s1} | {("S2", l) for l in steps.s2}
    margins = _Margins(spec, sp, pair, steps)

    new_pieces: list[tuple[str, int]] = []
    lo1, hi1 = s1_piece_range(lo_k, hi_k)
    for l in range(lo1, hi1 + 1):
        if l not in steps.s1:
            steps.s1[l] = _init_piece_value(spec, margins, "S1", l)
            new_pieces.append(("S1", l))
    lo2, hi2 = s2_piece_range(lo_k, hi_k)
    for l in range(lo2, hi2 + 1):
        if l not in steps.s2:
            steps.s2[l] = _init_piece_value(spec, margins, "S2", l)
            new_pieces.append(("S2", l))
    if not new_pieces:
        return

    # grid over the gaps touched by the new pieces only; old grid regions
    # were certified when their pieces were synthesized
    new_gaps: set[int] = set()
    for fam, l in new_pieces:
        k0 = 2 * l + 1 if fam == "S1" else 2 * l
        new_gaps.update((k0, k0 + 1))
    new_gaps = {k for k in new_gaps if lo_k <= k < hi_k}
    grid = [t for k in sorted(new_gaps) for t in spec.gap_points(k)]

    sphere = spec.target == "sphere"
    coupled = sphere  # conditions (3)/(4) apply only for sphere targets
    safety = spec.safety

    def pieces_at(t: float) -> tuple[tuple[str, int], tuple[str, int]]:
        u = pair.gamma(t)
        return ("S1", math.floor((u - 1.0) / 2.0)), ("S2", math.floor(u / 2.0))

    converged = False
    for it in range(MAX_DOUBLINGS):
        if it > 0:
            margins.refresh()  # step values changed; drop per-t caches
        violated: set[tuple[str, int]] = set()
        stuck: set[tuple[str, int]] = set()
        for t in grid:
            p1, p2 = pieces_at(t)
            if margins.freq_margin(1, t) < safety:
                violated.add(p1)
            if margins.freq_margin(2, t) < safety:
                violated.add(p2)
            if sphere:
                if margins.amp_margin(1, t) < safety:
                    violated.add(p1)
                if margins.amp_margin(2, t) < safety:
                    violated.add(p2)
                if coupled and margins.coupled_margin(t) < safety:
                    grow = {p for p in (p1, p2) if p not in frozen}
                    if grow:
                        violated.update(grow)
                    else:
                        stuck.update((p1, p2))
        violated -= frozen
        if stuck and not violated:
            raise StepSynthesisError(
                "range extension requires enlarging already-certified intervals "
                f"{sorted(stuck)}; re-synthesize with a wider initial window"
            )
        if not violated:
            converged = True
            break
        for fam, l in violated:
            table = steps.s1 if fam == "S1" else steps.s2
            table[l] = table[l] * 2.0
    if not converged:
        raise StepSynthesisError(
            f"step synthesis did not converge after {MAX_DOUBLINGS} doublings "
            f"on gamma range [{lo_k}, {hi_k}]"
        )

    # record attained margins per new piece
    per_piece: dict[tuple[str, int], dict[str, float]] = {
        p: {} for p in new_pieces
    }

    def note(piece: tuple[str, int], name: str, value: float) -> None:
        d = per_piece.get(piece)
        if d is not None:
            d[name] = min(d.get(name, math.inf), value)

    for t in grid:
        p1, p2 = pieces_at(t)
        note(p1, "freq", margins.freq_margin(1, t))
        note(p2, "freq", margins.freq_margin(2, t))
        if sphere:
            note(p1, "amp", margins.amp_margin(1, t))
            note(p2, "amp", margins.amp_margin(2, t))
            cm = margins.coupled_margin(t)
            name = "sph_emb" if spec.variant == "embedding" else "sph_imm"
            note(p1, name, cm)
            note(p2, name, cm)

    for fam, l in new_pieces:
        table = steps.s1 if fam == "S1" else steps.s2
        steps.certificate.entries.append(
            IntervalCertificate(
                family=fam, l=l, value=table[l], margins=per_piece[(fam, l)]
            )
        )
