"""Building-block maps and derived scalars for the six constructions.

Scalar layer (all functions of t on the interval I):

    eps2   = sum_r [ ((eta_r psi_1)')^2/S_1^2 + ((eta_r psi_2)')^2/S_2^2 ]
    alpha  = sum_r eta_r^2 (psi_1^2/S_1^2 + psi_2^2/S_2^2)
    alpha' = sum_r [ (eta_r^2 psi_1^2)'/S_1^2 + (eta_r^2 psi_2^2)'/S_2^2 ]
    beta   = alpha - |eta_tilde|^2
    delta  = | alpha'^2/4 - alpha' <eta_tilde', eta_tilde> |
    Gamma  = (1/2c + |et|^2)(rho^2 - eps2 + |et'|^2 (1 - |et|^2/(1/2c + |et|^2)))
    G      = rho^2 + |et'|^2 - 2 eps2
             - 2 ((|et|^2/2 - alpha)')^2 / (4 (1/2c + |et|^2/2 - alpha))
    Delta  = 2 eps2 + (alpha'^2 - 2 alpha' <et', et>)/(1/c + |et|^2 - 2 alpha)

where the sums run over the periodic-handled warping factors and et is the
timelike-paired head of eta.  The six arc-length reparametrizations theta_*
integrate closed-form positive integrands from t0 = gamma^{-1}(0); they are
cached as knot tables with panel edges an eighth of a breakpoint gap apart,
and point values add one short quadrature from the nearest knot.
"""

from __future__ import annotations

import math
import threading
from functools import lru_cache
from typing import Optional

import numpy as np

from .blanusa import BlanusaPair
from .quadrature import CumulativeIntegral, integrate, uniform_cumulative
from .warped import MetricSpec, WarpSplit

THETA_KINDS = ("flat", "h", "s", "hat_flat", "hat_h", "hat_s")
_PANELS_PER_GAP = 8
_THETA_TOL = 1e-12
# |u| beyond which 1 - T1'(u)^2 rounds to 1.0 and T2 continues linearly
_T2_LINEAR_CUTOFF = 25.0


class NonpositiveIntegrandError(ArithmeticError):
    """A theta radicand failed to stay positive (step synthesis too small)."""

    def __init__(self, kind: str, t: float, radicand: float):
        super().__init__(
            f"theta[{kind}] radicand {radicand!r} <= 0 at t={t!r}; "
            "step synthesis did not certify this range"
        )
        self.kind = kind
        self.t = t
        self.radicand = radicand


def h_map(u: float) -> np.ndarray:
    """(cosh u, sinh u): the unit timelike hyperbola in the Lorentz plane."""
    return np.array([math.cosh(u), math.sinh(u)])


def g_map(u: float) -> np.ndarray:
    """(cos u, sin u): the unit circle."""
    return np.array([math.cos(u), math.sin(u)])


def T1(u: float) -> float:
    """(pi/4)(1 + tanh u), an increasing diffeomorphism of R onto (0, pi/2)."""
    return 0.25 * math.pi * (1.0 + math.tanh(u))


def T1_prime(u: float) -> float:
    if abs(u) > 350.0:  # sech^2 underflows
        return 0.0
    ch = math.cosh(u)
    return 0.25 * math.pi / (ch * ch)


def T2_prime(u: float) -> float:
    d = T1_prime(u)
    return math.sqrt(1.0 - d * d)


_T2_CACHE = uniform_cumulative(T2_prime, 0.0, 0.5, tol=1e-13)
_T2_HIGH = None
_T2_LOW = None
_T2_LOCK = threading.Lock()


def T2(u: float) -> float:
    """Arc-length partner of T1: integral of sqrt(1 - T1'^2) from 0.

    T1'(u)^2 + T2'(u)^2 = 1, so (cos T1, sin T1, cos T2, sin T2) traces a
    unit-speed curve on a torus.  Beyond |u| = 25 the integrand is 1.0 to
    double precision and T2 continues linearly.
    """
    global _T2_HIGH, _T2_LOW
    if u > _T2_LINEAR_CUTOFF:
        if _T2_HIGH is None:
            with _T2_LOCK:
                _T2_HIGH = _T2_CACHE.value(_T2_LINEAR_CUTOFF)
        return _T2_HIGH + (u - _T2_LINEAR_CUTOFF)
    if u < -_T2_LINEAR_CUTOFF:
        if _T2_LOW is None:
            with _T2_LOCK:
                _T2_LOW = _T2_CACHE.value(-_T2_LINEAR_CUTOFF)
        return _T2_LOW + (u + _T2_LINEAR_CUTOFF)
    return _T2_CACHE.value(u)


def C_map(u: float) -> np.ndarray:
    """(cos T1, sin T1, cos T2, sin T2); squared Euclidean norm 2."""
    a = T1(u)
    b = T2(u)
    return np.array([math.cos(a), math.sin(a), math.cos(b), math.sin(b)])


def C_map_deriv(u: float) -> np.ndarray:
    a = T1(u)
    b = T2(u)
    da = T1_prime(u)
    db = T2_prime(u)
    return np.array(
        [-da * math.sin(a), da * math.cos(a), -db * math.sin(b), db * math.cos(b)]
    )


class _State:
    """Everything t-dependent the maps need, computed once per t."""

    __slots__ = (
        "t", "rho", "psi1", "psi2", "dpsi1", "dpsi2", "S1", "S2",
        "etat", "detat", "etab", "detab", "nt2", "ndt2", "ntdot",
        "eps2", "alpha", "dalpha",
    )


class DerivedScalars:
    """Bundle of spec, split, periodic pair and steps with cached evaluation.

    Read paths are thread-safe; the per-t memo and theta knot tables are
    guarded so concurrent readers never observe partial updates.
    """

    def __init__(
        self,
        spec: MetricSpec,
        sp: WarpSplit,
        pair: BlanusaPair,
        steps,
    ):
        self.spec = spec
        self.split = sp
        self.pair = pair
        self.steps = steps
        self.c = spec.c
        self.a = spec.a
        self.b = spec.b
        self._rho = spec.rho.compiled()
        self._etat = [e.compiled() for e in sp.eta_tilde]
        self._detat = [e.deriv().compiled() for e in sp.eta_tilde]
        self._etab = [e.compiled() for e in sp.eta_bar]
        self._detab = [e.deriv().compiled() for e in sp.eta_bar]
        self._memo: dict[float, _State] = {}
        self._memo_lock = threading.Lock()
        self._theta: dict[str, CumulativeIntegral] = {}
        self._theta_memo: dict[tuple[str, float], float] = {}
        self._theta_lock = threading.Lock()
        self.t0 = pair.breakpoint(0)
        gamma = pair.gamma
        self._edge = lru_cache(maxsize=None)(
            lambda m: gamma.inverse(m / _PANELS_PER_GAP)
        )

    # -- per-t state ------------------------------------------------------

    def _st(self, t: float) -> _State:
        st = self._memo.get(t)
        if st is not None:
            return st
        st = _State()
        st.t = t
        st.rho = self._rho(t)
        st.psi1 = self.pair.psi(1, t)
        st.psi2 = self.pair.psi(2, t)
        st.dpsi1 = self.pair.psi_deriv(1, t)
        st.dpsi2 = self.pair.psi_deriv(2, t)
        st.S1 = self.steps.S1(t)
        st.S2 = self.steps.S2(t)
        st.etat = [f(t) for f in self._etat]
        st.detat = [f(t) for f in self._detat]
        st.etab = [f(t) for f in self._etab]
        st.detab = [f(t) for f in self._detab]
        st.nt2 = sum(v * v for v in st.etat)
        st.ndt2 = sum(v * v for v in st.detat)
        st.ntdot = sum(v * d for v, d in zip(st.etat, st.detat))
        s1sq = st.S1 * st.S1
        s2sq = st.S2 * st.S2
        eps2 = 0.0
        alpha = 0.0
        dalpha = 0.0
        for v, d in zip(st.etab, st.detab):
            g1 = d * st.psi1 + v * st.dpsi1
            g2 = d * st.psi2 + v * st.dpsi2
            eps2 += g1 * g1 / s1sq + g2 * g2 / s2sq
            p1 = v * st.psi1
            p2 = v * st.psi2
            alpha += p1 * p1 / s1sq + p2 * p2 / s2sq
            dalpha += 2.0 * p1 * g1 / s1sq + 2.0 * p2 * g2 / s2sq
        st.eps2 = eps2
        st.alpha = alpha
        st.dalpha = dalpha
        with self._memo_lock:
            if len(self._memo) > 400000:
                self._memo.clear()
            self._memo[t] = st
        return st

    # -- scalar functions ---------------------------------------------------

    def rho(self, t: float) -> float:
        return self._st(t).rho

    def psi(self, j: int, t: float) -> float:
        st = self._st(t)
        return st.psi1 if j == 1 else st.psi2

    def psi_deriv(self, j: int, t: float) -> float:
        st = self._st(t)
        return st.dpsi1 if j == 1 else st.dpsi2

    def S(self, j: int, t: float) -> float:
        st = self._st(t)
        return st.S1 if j == 1 else st.S2

    def eta_bar_vals(self, t: float) -> list[float]:
        return self._st(t).etab

    def eta_bar_derivs(self, t: float) -> list[float]:
        return self._st(t).detab

    def eta_tilde_vals(self, t: float) -> list[float]:
        return self._st(t).etat

    def eta_tilde_derivs(self, t: float) -> list[float]:
        return self._st(t).detat

    def epsilon2(self, t: float) -> float:
        return self._st(t).eps2

    def epsilon(self, t: float) -> float:
        return math.sqrt(self._st(t).eps2)

    def alpha(self, t: float) -> float:
        return self._st(t).alpha

    def alpha_deriv(self, t: float) -> float:
        return self._st(t).dalpha

    def beta(self, t: float) -> float:
        st = self._st(t)
        return st.alpha - st.nt2

    def beta_deriv(self, t: float) -> float:
        st = self._st(t)
        return st.dalpha - 2.0 * st.ntdot

    def delta_small(self, t: float) -> float:
        st = self._st(t)
        return abs(st.dalpha * st.dalpha / 4.0 - st.dalpha * st.ntdot)

    def Gamma_big(self, t: float) -> float:
        st = self._st(t)
        w = 0.5 / self.c + st.nt2
        return w * (
            st.rho * st.rho
            - st.eps2
            + st.ndt2 * (1.0 - st.nt2 / w)
        )

    def G_fun(self, t: float) -> float:
        st = self._st(t)
        m = 0.5 * st.nt2 - st.alpha
        dm = st.ntdot - st.dalpha
        r2 = 0.5 / self.c + m
        return (
            st.rho * st.rho
            + st.ndt2
            - 2.0 * st.eps2
            - 2.0 * dm * dm / (4.0 * r2)
        )

    def Delta_big(self, t: float) -> float:
        st = self._st(t)
        denom = 1.0 / self.c + st.nt2 - 2.0 * st.alpha
        return 2.0 * st.eps2 + (
            st.dalpha * st.dalpha - 2.0 * st.dalpha * st.ntdot
        ) / denom

    # -- theta integrands and integrals --------------------------------------

    def theta_integrand(self, kind: str, t: float) -> float:
        st = self._st(t)
        c = self.c
        rho2 = st.rho * st.rho
        if kind == "flat":
            rad = rho2 + st.ndt2 - st.eps2
        elif kind == "hat_flat":
            rad = rho2 + st.ndt2 - 2.0 * st.eps2
        elif kind == "h":
            r2 = 1.0 / c + st.alpha
            rad = (rho2 - st.eps2 + st.dalpha * st.dalpha / (4.0 * r2)) / r2
        elif kind == "hat_h":
            r2 = 1.0 / c + 2.0 * st.alpha
            rad = (rho2 - 2.0 * st.eps2 + st.dalpha * st.dalpha / r2) / r2
        elif kind == "s":
            beta = st.alpha - st.nt2
            dbeta = st.dalpha - 2.0 * st.ntdot
            r2 = 1.0 / c - beta
            rad = (rho2 + st.ndt2 - st.eps2 - dbeta * dbeta / (4.0 * r2)) / r2
        elif kind == "hat_s":
            r2 = 0.5 / c + 0.5 * st.nt2 - st.alpha
            rad = self.G_fun(t) / r2
        else:
            raise ValueError(f"unknown theta kind {kind!r}")
        if rad <= 0.0:
            raise NonpositiveIntegrandError(kind, t, rad)
        return math.sqrt(rad)

    def _theta_cache(self, kind: str) -> CumulativeIntegral:
        cache = self._theta.get(kind)
        if cache is None:
            with self._theta_lock:
                cache = self._theta.get(kind)
                if cache is None:
                    gamma = self.pair.gamma
                    edge = self._edge

                    def index_of(t: float) -> int:
                        return math.floor(_PANELS_PER_GAP * gamma(t))

                    cache = CumulativeIntegral(
                        lambda t, k=kind: self.theta_integrand(k, t),
                        edge,
                        index_of,
                        tol=_THETA_TOL,
                    )
                    self._theta[kind] = cache
        return cache

    def theta(self, kind: str, t: float) -> float:
        """Integral of the kind's integrand from t0 to t; strictly increasing."""
        if kind not in THETA_KINDS:
            raise ValueError(f"unknown theta kind {kind!r}")
        key = (kind, t)
        got = self._theta_memo.get(key)
        if got is not None:
            return got
        val = self._theta_cache(kind).value(t)
        with self._theta_lock:
            if len(self._theta_memo) > 400000:
                self._theta_memo.clear()
            self._theta_memo[key] = val
        return val

    # -- maps ----------------------------------------------------------------

    def phi(self, j: int, t: float, u: float) -> np.ndarray:
        """(psi_j/S_j)(cos(S_j u), sin(S_j u))"""
        st = self._st(t)
        psi = st.psi1 if j == 1 else st.psi2
        S = st.S1 if j == 1 else st.S2
        w = S * u
        r = psi / S
        return np.array([r * math.cos(w), r * math.sin(w)])

    def phihat(self, j: int, i: int, t: float, u: float) -> np.ndarray:
        """(psi_j/S_j)(cos(T_i(S_j u)), sin(T_i(S_j u)))"""
        st = self._st(t)
        psi = st.psi1 if j == 1 else st.psi2
        S = st.S1 if j == 1 else st.S2
        w = T1(S * u) if i == 1 else T2(S * u)
        r = psi / S
        return np.array([r * math.cos(w), r * math.sin(w)])

    def star_h(self, t: float, x) -> np.ndarray:
        """(eta_1 h(x_1), ..., eta_a h(x_a)) in (R^2_1)^a"""
        st = self._st(t)
        out = np.empty(2 * self.a)
        for k in range(self.a):
            v = st.etat[k]
            out[2 * k] = v * math.cosh(x[k])
            out[2 * k + 1] = v * math.sinh(x[k])
        return out

    def star_phi(self, t: float, x) -> np.ndarray:
        """Blockwise eta_r phi(t, x_r) into R^{4b}"""
        st = self._st(t)
        out = np.empty(4 * self.b)
        for r in range(self.b):
            u = x[self.a + r]
            eta = st.etab[r]
            w1 = st.S1 * u
            w2 = st.S2 * u
            c1 = eta * st.psi1 / st.S1
            c2 = eta * st.psi2 / st.S2
            base = 4 * r
            out[base] = c1 * math.cos(w1)
            out[base + 1] = c1 * math.sin(w1)
            out[base + 2] = c2 * math.cos(w2)
            out[base + 3] = c2 * math.sin(w2)
        return out

    def star_phihat(self, t: float, x) -> np.ndarray:
        """Blockwise eta_r (phi_11, phi_21, phi_12, phi_22)(t, x_r) into R^{8b}"""
        st = self._st(t)
        out = np.empty(8 * self.b)
        for r in range(self.b):
            u = x[self.a + r]
            eta = st.etab[r]
            c1 = eta * st.psi1 / st.S1
            c2 = eta * st.psi2 / st.S2
            w1 = st.S1 * u
            w2 = st.S2 * u
            base = 8 * r
            for i, Tf in ((0, T1), (1, T2)):
                a1 = Tf(w1)
                a2 = Tf(w2)
                out[base + 4 * i] = c1 * math.cos(a1)
                out[base + 4 * i + 1] = c1 * math.sin(a1)
                out[base + 4 * i + 2] = c2 * math.cos(a2)
                out[base + 4 * i + 3] = c2 * math.sin(a2)
        return out
