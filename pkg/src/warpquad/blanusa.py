"""The smooth periodic pair psi_1, psi_2 and the reparametrization gamma.

xi(u) = sin(pi u) exp(-1/sin^2(pi u)) vanishes to infinite order at the
integers.  With A = integral of xi over [0,1] and F(u) = integral of xi from
0 to u, the pair

    psi_hat_1(u) = sqrt(F(u+1)/A),   psi_hat_2(u) = sqrt(F(u)/A)

is smooth, 2-periodic, satisfies psi_hat_1^2 + psi_hat_2^2 = 1, and each
member is flat (all derivatives zero) at alternating integers.  Composing
with an increasing diffeomorphism gamma: I -> R transports the pair to any
open interval; the breakpoint lattice is t_k = gamma^{-1}(k).
"""

from __future__ import annotations

import math
import threading
from typing import Optional

from .expr import FnExpr, parse
from .quadrature import integrate

# below this, exp(-1/sin^2) underflows to 0 anyway
_XI_FLAT = 1e-8

# psi values below this are in the flat region; the derivative is returned
# as exactly 0 there to avoid 0/0
PSI_FLAT_THRESHOLD = 1e-9


def xi(u: float) -> float:
    """sin(pi u) exp(-1/sin^2(pi u)), extended by 0 at the integers."""
    s = math.sin(math.pi * u)
    if abs(s) < _XI_FLAT:
        return 0.0
    return s * math.exp(-1.0 / (s * s))


class _XiTable:
    """Cumulative table of F(u) = integral of xi on [0, 1].

    Grid step 0.001; cell values by Gauss-Kronrod panels, mirrored across
    u = 1/2 so that F(u) + F(1-u) = A holds to rounding.  Interpolation is
    cubic Hermite with the exact slopes F' = xi, which keeps the pair
    identity psi_1^2 + psi_2^2 = 1 at interpolation level.  Built lazily,
    guarded for concurrent readers.
    """

    N = 1000

    def __init__(self):
        self._lock = threading.Lock()
        self._built = False
        self._F: Optional[list[float]] = None
        self._slope: Optional[list[float]] = None
        self.A = 0.0

    def _build(self) -> None:
        n = self.N
        h = 1.0 / n
        panels = [0.0] * n
        half = n // 2
        for k in range(half):
            panels[k] = integrate(xi, k * h, (k + 1) * h, tol=1e-16)
        for k in range(half, n):
            panels[k] = panels[n - 1 - k]  # xi(1-u) = xi(u)
        F = [0.0] * (n + 1)
        acc = 0.0
        for k in range(n):
            acc += panels[k]
            F[k + 1] = acc
        slope = [0.0] * (n + 1)
        for i in range(half + 1):
            slope[i] = xi(i * h)
        for i in range(half + 1, n + 1):
            slope[i] = slope[n - i]
        self._F = F
        self._slope = slope
        self.A = F[n]
        self._built = True

    def ensure(self) -> None:
        if not self._built:
            with self._lock:
                if not self._built:
                    self._build()

    def _interp(self, x: float) -> float:
        """Hermite evaluation of F on [0, 1]."""
        n = self.N
        if x <= 0.0:
            return 0.0
        if x >= 1.0:
            return self.A
        pos = x * n
        i = min(int(pos), n - 1)
        s = pos - i
        h = 1.0 / n
        F0 = self._F[i]
        F1 = self._F[i + 1]
        m0 = self._slope[i] * h
        m1 = self._slope[i + 1] * h
        s2 = s * s
        s3 = s2 * s
        val = (
            (2 * s3 - 3 * s2 + 1) * F0
            + (s3 - 2 * s2 + s) * m0
            + (-2 * s3 + 3 * s2) * F1
            + (s3 - s2) * m1
        )
        if val < 0.0:
            return 0.0
        if val > self.A:
            return self.A
        return val

    def F_periodic(self, u: float) -> float:
        """integral of xi from 0 to u; 2-periodic since F(2) = 0."""
        self.ensure()
        r = u % 2.0
        if r <= 1.0:
            return self._interp(r)
        return self._interp(2.0 - r)  # F is symmetric about u = 1


_TABLE = _XiTable()


def normalization() -> float:
    """A = integral of xi over [0, 1] (cached)."""
    _TABLE.ensure()
    return _TABLE.A


def xi_integral(u: float) -> float:
    """F(u) = integral of xi from 0 to u (periodic reduction)."""
    return _TABLE.F_periodic(u)


def psi_hat(j: int, u: float) -> float:
    """The periodic pair member: sqrt(F(u + 1)/A) for j=1, sqrt(F(u)/A) for j=2."""
    if j not in (1, 2):
        raise ValueError("j must be 1 or 2")
    _TABLE.ensure()
    F = _TABLE.F_periodic(u + 1.0) if j == 1 else _TABLE.F_periodic(u)
    ratio = F / _TABLE.A
    if ratio <= 0.0:
        return 0.0
    if ratio >= 1.0:
        return 1.0
    return math.sqrt(ratio)


def psi_hat_deriv(j: int, u: float) -> float:
    """Exact derivative xi(u + offset)/(2 A psi_hat_j(u)); 0 in the flat region."""
    p = psi_hat(j, u)
    if p <= PSI_FLAT_THRESHOLD:
        return 0.0
    off = 1.0 if j == 1 else 0.0
    return xi(u + off) / (2.0 * _TABLE.A * p)


class GammaError(ValueError):
    pass


class Gamma:
    """An increasing smooth diffeomorphism of the open interval I onto R.

    Holds the forward map and its symbolic derivative; the inverse is
    numerical (bracketing bisection plus Newton polish, tolerance 1e-12).
    """

    def __init__(self, forward: FnExpr, interval: tuple[float, float]):
        self.forward = forward
        self.derivative = forward.deriv()
        self.interval = (float(interval[0]), float(interval[1]))
        self._f = forward.compiled()
        self._df = self.derivative.compiled()
        self._lock = threading.Lock()
        self._breakpoints: dict[int, float] = {}

    def __call__(self, t: float) -> float:
        return self._f(t)

    def deriv(self, t: float) -> float:
        return self._df(t)

    def _anchor(self) -> float:
        lo, hi = self.interval
        if math.isinf(lo) and math.isinf(hi):
            return 0.0
        if math.isinf(hi):
            return lo + 1.0
        if math.isinf(lo):
            return hi - 1.0
        return 0.5 * (lo + hi)

    def _bracket(self, u: float) -> tuple[float, float]:
        lo, hi = self.interval
        t = self._anchor()
        v = self._f(t)
        if v == u:
            return t, t
        if v < u:
            # walk right: double steps on an unbounded side, halve the gap
            # to a finite endpoint
            a = t
            step = 1.0
            for _ in range(2000):
                b = a + step if math.isinf(hi) else hi - 0.5 * (hi - a)
                if b <= a:
                    break
                if self._f(b) >= u:
                    return a, b
                a = b
                step *= 2.0
            raise GammaError(f"gamma never reaches {u!r}")
        a = t
        step = 1.0
        for _ in range(2000):
            b = a - step if math.isinf(lo) else lo + 0.5 * (a - lo)
            if b >= a:
                break
            if self._f(b) <= u:
                return b, a
            a = b
            step *= 2.0
        raise GammaError(f"gamma never reaches {u!r}")

    def inverse(self, u: float) -> float:
        """t with gamma(t) = u, to |gamma(t) - u| <= 1e-12 (1 + |u|)."""
        a, b = self._bracket(u)
        if a == b:
            return a
        tol = 1e-12 * (1.0 + abs(u))
        # bisection to a tight interval (monotone, always valid)
        for _ in range(200):
            mid = 0.5 * (a + b)
            if mid == a or mid == b:
                break
            if self._f(mid) < u:
                a = mid
            else:
                b = mid
            if (b - a) <= 1e-15 * (1.0 + abs(a)):
                break
        t = 0.5 * (a + b)
        # Newton polish
        for _ in range(4):
            r = self._f(t) - u
            if abs(r) <= tol:
                break
            d = self._df(t)
            if d <= 0.0:
                break
            step = r / d
            t2 = t - step
            if t2 <= a or t2 >= b:
                break
            t = t2
        return t

    def breakpoint(self, k: int) -> float:
        """t_k = gamma^{-1}(k), cached."""
        got = self._breakpoints.get(k)
        if got is not None:
            return got
        val = self.inverse(float(k))
        with self._lock:
            self._breakpoints[k] = val
        return val


def default_gamma(interval: tuple[float, float]) -> Gamma:
    """The artifact's default diffeomorphism for each interval shape.

    R -> identity; (p, q) -> tan(pi ((t-p)/(q-p) - 1/2)); (p, inf) ->
    log(t - p); (-inf, q) -> -log(q - t).
    """
    lo, hi = float(interval[0]), float(interval[1])
    if math.isinf(lo) and math.isinf(hi):
        src = "t"
    elif math.isinf(hi):
        src = f"log(t - ({lo!r}))"
    elif math.isinf(lo):
        src = f"-log(({hi!r}) - t)"
    else:
        if not hi > lo:
            raise GammaError(f"empty interval ({lo}, {hi})")
        src = f"tan(pi*((t - ({lo!r}))/({(hi - lo)!r}) - 1/2))"
    return Gamma(parse(src), (lo, hi))


class BlanusaPair:
    """psi_j = psi_hat_j o gamma on the interval I, with derivatives.

    Immutable after construction (the shared xi table is built lazily under
    a lock); all evaluation methods are safe for concurrent use.
    """

    def __init__(self, gamma: Gamma):
        self.gamma = gamma
        _TABLE.ensure()
        self.A = _TABLE.A

    @property
    def interval(self) -> tuple[float, float]:
        return self.gamma.interval

    def _check_domain(self, t: float) -> None:
        lo, hi = self.gamma.interval
        if not (lo < t < hi):
            raise ValueError(f"t={t!r} outside the interval ({lo}, {hi})")

    def psi(self, j: int, t: float) -> float:
        self._check_domain(t)
        return psi_hat(j, self.gamma(t))

    def psi_deriv(self, j: int, t: float) -> float:
        """d/dt psi_j = xi(gamma(t) + offset) gamma'(t) / (2 A psi_j(t)).

        Returns exactly 0 once psi_j is below the flat threshold; all
        derivatives vanish there.
        """
        self._check_domain(t)
        u = self.gamma(t)
        p = psi_hat(j, u)
        if p <= PSI_FLAT_THRESHOLD:
            return 0.0
        off = 1.0 if j == 1 else 0.0
        return xi(u + off) * self.gamma.deriv(t) / (2.0 * self.A * p)

    def breakpoint(self, k: int) -> float:
        return self.gamma.breakpoint(k)

    def f_integral(self, u: float) -> float:
        return xi_integral(u)
