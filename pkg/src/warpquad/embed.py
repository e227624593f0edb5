"""The six explicit maps, their analytic Jacobians, and collision witnesses.

Kinds and targets (n = domain dimension, a = timelike-paired factors):

    f       flat immersion        R^{4n-3-2a}, index a
    f_h     hyperbolic immersion  H^{4n-3-a}_a(-c)   in R^{4n-2-a}, index a+1
    f_s     sphere immersion      S^{4n-3-2a}_a(c)   in R^{4n-2-2a}, index a
    fhat    flat embedding        R^{8n-7-6a}, index a
    fhat_h  hyperbolic embedding  H^{8n-7-5a}_a(-c)  in R^{8n-6-5a}, index a+1
    fhat_s  sphere embedding      S^{8n-5-6a}_a(c)   in R^{8n-4-6a}, index a

Block layout in construction order: an arc-length or radius lead block, the
timelike copy of eta for hyperbolic targets, the a hyperbola blocks, then
the 4b (immersions) or 8b (embeddings) periodic blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .atlas import (
    C_map,
    C_map_deriv,
    DerivedScalars,
    T1,
    T1_prime,
    T2,
    T2_prime,
)
from .blanusa import BlanusaPair
from .semispace import AmbientSpace, Quadric
from .steps import StepPair, synthesize
from .warped import MetricSpec, WarpSplit, split, validate

KINDS = ("f", "f_h", "f_s", "fhat", "fhat_h", "fhat_s")

_KIND_FOR = {
    ("flat", "immersion"): "f",
    ("hyperbolic", "immersion"): "f_h",
    ("sphere", "immersion"): "f_s",
    ("flat", "embedding"): "fhat",
    ("hyperbolic", "embedding"): "fhat_h",
    ("sphere", "embedding"): "fhat_s",
}

_RADICAND_FLOOR = 1e-12


class EvalDomainError(ValueError):
    pass


class RadicandError(ArithmeticError):
    """A radius radicand fell to (or below) zero: synthesis failure."""


class WitnessError(ValueError):
    pass


def kind_for(target: str, variant: str) -> str:
    try:
        return _KIND_FOR[(target, variant)]
    except KeyError:
        raise ValueError(f"no map for target={target!r} variant={variant!r}")


def theorem_signature(kind: str, n: int, a: int) -> tuple[int, int]:
    """(ambient dimension, ambient index) for the kind."""
    table = {
        "f": (4 * n - 3 - 2 * a, a),
        "f_h": (4 * n - 2 - a, a + 1),
        "f_s": (4 * n - 2 - 2 * a, a),
        "fhat": (8 * n - 7 - 6 * a, a),
        "fhat_h": (8 * n - 6 - 5 * a, a + 1),
        "fhat_s": (8 * n - 4 - 6 * a, a),
    }
    return table[kind]


def quadric_signature(kind: str, n: int, a: int) -> Optional[tuple[str, int, int]]:
    """(quadric kind, hypersurface dimension, hypersurface index) or None."""
    table = {
        "f": None,
        "fhat": None,
        "f_h": ("hyperbolic", 4 * n - 3 - a, a),
        "f_s": ("sphere", 4 * n - 3 - 2 * a, a),
        "fhat_h": ("hyperbolic", 8 * n - 7 - 5 * a, a),
        "fhat_s": ("sphere", 8 * n - 5 - 6 * a, a),
    }
    return table[kind]


def block_layout(kind: str, n: int, a: int) -> list[tuple[str, tuple[int, ...]]]:
    """Ordered (name, signs) blocks in construction order."""
    b = n - 1 - a
    hyper = (-1, 1)
    blocks: list[tuple[str, tuple[int, ...]]] = []
    if kind in ("f", "fhat"):
        blocks.append(("arc", (1,)))
    elif kind in ("f_h", "fhat_h"):
        blocks.append(("radius", hyper))
        blocks.append(("eta_copy", (1,) * a))
    elif kind == "f_s":
        blocks.append(("radius", (1, 1)))
    elif kind == "fhat_s":
        blocks.append(("radius", (1, 1, 1, 1)))
    else:
        raise ValueError(f"unknown kind {kind!r}")
    blocks.append(("hyperbola", hyper * a))
    width = 8 * b if kind.startswith("fhat") else 4 * b
    blocks.append(("periodic", (1,) * width))
    return blocks


def ambient_for(kind: str, n: int, a: int) -> AmbientSpace:
    signs: tuple[int, ...] = ()
    for _, block_signs in block_layout(kind, n, a):
        signs = signs + block_signs
    return AmbientSpace(signs)


@dataclass
class EmbeddingModel:
    """A fully instantiated map with analytic Jacobian.

    Immutable after build; eval and jacobian are safe for concurrent use
    subject to the scalar caches' internal guarding.
    """

    kind: str
    spec: MetricSpec
    scalars: DerivedScalars
    ambient: AmbientSpace
    quadric: Optional[Quadric]
    blocks: list[tuple[str, tuple[int, ...]]] = field(default_factory=list)

    @property
    def steps(self) -> StepPair:
        return self.scalars.steps

    @property
    def pair(self) -> BlanusaPair:
        return self.scalars.pair

    def _check_point(self, t: float, x: Sequence[float]) -> None:
        lo, hi = self.spec.interval
        if not (lo < t < hi):
            raise EvalDomainError(f"t={t!r} outside interval ({lo}, {hi})")
        if len(x) != self.spec.n - 1:
            raise EvalDomainError(
                f"expected {self.spec.n - 1} transverse coordinates, got {len(x)}"
            )

    def _radius(self, r2: float) -> float:
        if r2 <= _RADICAND_FLOOR * (1.0 + 1.0 / self.spec.c):
            raise RadicandError(
                f"radius radicand {r2!r} too close to zero; steps too small"
            )
        return math.sqrt(r2)

    def eval(self, t: float, x: Sequence[float]) -> np.ndarray:
        self._check_point(t, x)
        sc = self.scalars
        st = sc._st(t)
        a = self.spec.a
        c = self.spec.c
        kind = self.kind
        y = np.empty(self.ambient.dim)
        if kind == "f":
            y[0] = sc.theta("flat", t)
            off = 1
        elif kind == "fhat":
            y[0] = sc.theta("hat_flat", t)
            off = 1
        elif kind == "f_h":
            R = self._radius(1.0 / c + st.alpha)
            th = sc.theta("h", t)
            y[0] = R * math.cosh(th)
            y[1] = R * math.sinh(th)
            y[2:2 + a] = st.etat
            off = 2 + a
        elif kind == "fhat_h":
            R = self._radius(1.0 / c + 2.0 * st.alpha)
            th = sc.theta("hat_h", t)
            y[0] = R * math.cosh(th)
            y[1] = R * math.sinh(th)
            y[2:2 + a] = st.etat
            off = 2 + a
        elif kind == "f_s":
            R = self._radius(1.0 / c - (st.alpha - st.nt2))
            th = sc.theta("s", t)
            y[0] = R * math.cos(th)
            y[1] = R * math.sin(th)
            off = 2
        elif kind == "fhat_s":
            R = self._radius(0.5 / c + 0.5 * st.nt2 - st.alpha)
            th = sc.theta("hat_s", t)
            y[0:4] = R * C_map(th)
            off = 4
        else:
            raise AssertionError(kind)
        for k in range(a):
            v = st.etat[k]
            y[off + 2 * k] = v * math.cosh(x[k])
            y[off + 2 * k + 1] = v * math.sinh(x[k])
        off += 2 * a
        if kind.startswith("fhat"):
            y[off:] = sc.star_phihat(t, x)
        else:
            y[off:] = sc.star_phi(t, x)
        return y

    def jacobian(self, t: float, x: Sequence[float]) -> np.ndarray:
        """Analytic Jacobian, columns ordered (d/dt, d/dx_1, ..., d/dx_{n-1})."""
        self._check_point(t, x)
        sc = self.scalars
        st = sc._st(t)
        a = self.spec.a
        b = self.spec.b
        c = self.spec.c
        kind = self.kind
        n = self.spec.n
        J = np.zeros((self.ambient.dim, n))
        if kind == "f":
            J[0, 0] = sc.theta_integrand("flat", t)
            off = 1
        elif kind == "fhat":
            J[0, 0] = sc.theta_integrand("hat_flat", t)
            off = 1
        elif kind == "f_h":
            R = self._radius(1.0 / c + st.alpha)
            th = sc.theta("h", t)
            thp = sc.theta_integrand("h", t)
            dR = st.dalpha / (2.0 * R)
            ch, sh = math.cosh(th), math.sinh(th)
            J[0, 0] = dR * ch + R * thp * sh
            J[1, 0] = dR * sh + R * thp * ch
            J[2:2 + a, 0] = st.detat
            off = 2 + a
        elif kind == "fhat_h":
            R = self._radius(1.0 / c + 2.0 * st.alpha)
            th = sc.theta("hat_h", t)
            thp = sc.theta_integrand("hat_h", t)
            dR = st.dalpha / R
            ch, sh = math.cosh(th), math.sinh(th)
            J[0, 0] = dR * ch + R * thp * sh
            J[1, 0] = dR * sh + R * thp * ch
            J[2:2 + a, 0] = st.detat
            off = 2 + a
        elif kind == "f_s":
            R = self._radius(1.0 / c - (st.alpha - st.nt2))
            th = sc.theta("s", t)
            thp = sc.theta_integrand("s", t)
            dbeta = st.dalpha - 2.0 * st.ntdot
            dR = -dbeta / (2.0 * R)
            co, si = math.cos(th), math.sin(th)
            J[0, 0] = dR * co - R * thp * si
            J[1, 0] = dR * si + R * thp * co
            off = 2
        elif kind == "fhat_s":
            R = self._radius(0.5 / c + 0.5 * st.nt2 - st.alpha)
            th = sc.theta("hat_s", t)
            thp = sc.theta_integrand("hat_s", t)
            dm = st.ntdot - st.dalpha
            dR = dm / (2.0 * R)
            J[0:4, 0] = dR * C_map(th) + R * thp * C_map_deriv(th)
            off = 4
        else:
            raise AssertionError(kind)
        for k in range(a):
            v = st.etat[k]
            d = st.detat[k]
            ch, sh = math.cosh(x[k]), math.sinh(x[k])
            J[off + 2 * k, 0] = d * ch
            J[off + 2 * k + 1, 0] = d * sh
            J[off + 2 * k, 1 + k] = v * sh
            J[off + 2 * k + 1, 1 + k] = v * ch
        off += 2 * a
        for r in range(b):
            u = x[a + r]
            eta = st.etab[r]
            deta = st.detab[r]
            g1 = (deta * st.psi1 + eta * st.dpsi1) / st.S1
            g2 = (deta * st.psi2 + eta * st.dpsi2) / st.S2
            m1 = eta * st.psi1
            m2 = eta * st.psi2
            w1 = st.S1 * u
            w2 = st.S2 * u
            col = 1 + a + r
            if kind.startswith("fhat"):
                base = off + 8 * r
                for i in range(2):
                    ang = (T1, T2)[i]
                    dang = (T1_prime, T2_prime)[i]
                    a1, a2 = ang(w1), ang(w2)
                    d1, d2 = dang(w1), dang(w2)
                    c1, s1 = math.cos(a1), math.sin(a1)
                    c2, s2 = math.cos(a2), math.sin(a2)
                    J[base + 4 * i, 0] = g1 * c1
                    J[base + 4 * i + 1, 0] = g1 * s1
                    J[base + 4 * i + 2, 0] = g2 * c2
                    J[base + 4 * i + 3, 0] = g2 * s2
                    J[base + 4 * i, col] = -m1 * d1 * s1
                    J[base + 4 * i + 1, col] = m1 * d1 * c1
                    J[base + 4 * i + 2, col] = -m2 * d2 * s2
                    J[base + 4 * i + 3, col] = m2 * d2 * c2
            else:
                base = off + 4 * r
                c1, s1 = math.cos(w1), math.sin(w1)
                c2, s2 = math.cos(w2), math.sin(w2)
                J[base, 0] = g1 * c1
                J[base + 1, 0] = g1 * s1
                J[base + 2, 0] = g2 * c2
                J[base + 3, 0] = g2 * s2
                J[base, col] = -m1 * s1
                J[base + 1, col] = m1 * c1
                J[base + 2, col] = -m2 * s2
                J[base + 3, col] = m2 * c2
        return J

    def metric_diag(self, t: float) -> np.ndarray:
        """Target pullback: diag(rho^2, eta_1^2, ..., eta_{n-1}^2)."""
        st = self.scalars._st(t)
        vals = [st.rho] + st.etat + st.etab
        return np.array([v * v for v in vals])

    def collision_witness(
        self,
        k: int,
        l: Sequence[int],
        base_x: Optional[Sequence[float]] = None,
    ) -> tuple[tuple[float, np.ndarray], tuple[float, np.ndarray]]:
        """Two domain points the immersion kinds map to one ambient point.

        At t = t_{2k} the second pair member vanishes and the first has a
        whole number of extra turns: x^1_r = x^2_r + 2 pi l_r / S_1(t_{2k}).
        """
        if self.kind not in ("f", "f_h", "f_s"):
            raise WitnessError(
                f"collision construction applies to immersion kinds, not {self.kind}"
            )
        b = self.spec.b
        if b == 0:
            raise WitnessError("collision witnesses require b > 0")
        if len(l) != b:
            raise WitnessError(f"need {b} winding integers, got {len(l)}")
        if all(int(v) == 0 for v in l):
            raise WitnessError("at least one winding integer must be nonzero")
        t = self.pair.breakpoint(2 * k)
        self.steps.ensure_covers(t)
        a = self.spec.a
        x2 = (
            np.zeros(self.spec.n - 1)
            if base_x is None
            else np.asarray(base_x, dtype=float).copy()
        )
        S1 = self.steps.S1(t)
        x1 = x2.copy()
        for r in range(b):
            x1[a + r] += 2.0 * math.pi * int(l[r]) / S1
        return (t, x1), (t, x2)


def build(spec: MetricSpec, steps: Optional[StepPair] = None) -> EmbeddingModel:
    """Validate, synthesize steps, and assemble the model for the spec's kind."""
    validate(spec)
    sp = split(spec)
    pair = spec.pair
    if steps is None:
        steps = synthesize(spec, pair)
    scalars = DerivedScalars(spec, sp, pair, steps)
    kind = kind_for(spec.target, spec.variant)
    ambient = ambient_for(kind, spec.n, spec.a)
    expect = theorem_signature(kind, spec.n, spec.a)
    assert (ambient.dim, ambient.index) == expect, (ambient, expect)
    qsig = quadric_signature(kind, spec.n, spec.a)
    quadric = None
    if qsig is not None:
        quadric = Quadric(kind=qsig[0], c=spec.c, ambient=ambient)
        assert quadric.dim == qsig[1]
    return EmbeddingModel(
        kind=kind,
        spec=spec,
        scalars=scalars,
        ambient=ambient,
        quadric=quadric,
        blocks=block_layout(kind, spec.n, spec.a),
    )
