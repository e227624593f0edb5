"""Verification battery: pullback isometry, quadric membership, injectivity,
breakpoint smoothness, Jacobian cross-checks, and the structured report.

All checks are deterministic given (spec, seed): random sampling uses a
seeded generator and the grid x-samples come from an unscrambled Halton
sequence, so two runs produce byte-identical reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import qmc

from .embed import EmbeddingModel
from .semispace import quadric_residual
from .steps import audit_margins
from .warped import WINDOW_GAPS

THRESHOLDS = {
    "isometry_analytic": 1e-6,
    "isometry_fd": 1e-4,
    "quadric": 1e-8,
    "collision": 1e-10,       # witness pairs collide below this (relative)
    "witness_separation": 1e-3,  # embedding kinds separate witness pairs above
    "random_separation": 1e-12,
    "smoothness": 1e-6,
    "jacobian": 1e-5,
}

_SMOOTHNESS_BREAKPOINTS = range(-5, 5)  # 10 breakpoints
_WITNESS_KS = (0, 1, -1)


@dataclass
class CollisionFinding:
    label: str
    expected: str  # 'collide' | 'separate'
    status: str    # 'collided' | 'separated'
    distance: float  # relative to the pair's coordinate scale

    def ok(self) -> bool:
        return (self.status == "collided") == (self.expected == "collide")


@dataclass
class GridSpec:
    gaps: int
    density: int
    x_samples: int
    x_box: float
    t_lo: float
    t_hi: float


@dataclass
class VerificationReport:
    kind: str
    max_metric_error: float
    max_metric_error_fd: float
    max_quadric_residual: Optional[float]
    collision_checks: list[CollisionFinding]
    smoothness_max_jump: Optional[float]
    jacobian_agreement: float
    steps_min_margin: Optional[float]
    grid: GridSpec
    seed: int
    checks: list[tuple[str, bool, float, float]] = field(default_factory=list)

    def all_pass(self) -> bool:
        return all(ok for _, ok, _, _ in self.checks)


def default_grid(model: EmbeddingModel, density: Optional[int] = None,
                 x_box: float = 3.0, x_samples: int = 8,
                 gaps: int = WINDOW_GAPS) -> tuple[list[float], np.ndarray]:
    """t-samples over the window gaps and Halton x-samples per t."""
    spec = model.spec
    d = density or spec.grid_density
    ts = [t for k in range(-gaps, gaps) for t in spec.gap_points(k, d)]
    dim = spec.n - 1
    halton = qmc.Halton(d=dim, scramble=False)
    pts = halton.random(len(ts) * x_samples)
    xs = (2.0 * pts - 1.0) * x_box
    return ts, xs.reshape(len(ts), x_samples, dim)


def fd_jacobian(model: EmbeddingModel, t: float, x: Sequence[float],
                rel: float = 1e-6) -> np.ndarray:
    """Central finite-difference Jacobian, the independent cross-check.

    Steps along the periodic coordinates are capped by the local step
    frequency: those blocks oscillate like cos(S_j u), so the truncation
    term carries a factor S_j^2 and a frequency-blind step loses accuracy.
    """
    x = np.asarray(x, dtype=float)
    n = model.spec.n
    a = model.spec.a
    J = np.empty((model.ambient.dim, n))
    dt = rel * (1.0 + abs(t))
    J[:, 0] = (model.eval(t + dt, x) - model.eval(t - dt, x)) / (2.0 * dt)
    s_max = 1.0
    if model.spec.b > 0:
        s_max = max(model.steps.S1(t), model.steps.S2(t), 1.0)
    for i in range(n - 1):
        dx = rel * (1.0 + abs(x[i]))
        if i >= a:
            dx = min(dx, 2e-4 / s_max)
        xp = x.copy()
        xm = x.copy()
        xp[i] += dx
        xm[i] -= dx
        J[:, 1 + i] = (model.eval(t, xp) - model.eval(t, xm)) / (2.0 * dx)
    return J


def pullback_error(model: EmbeddingModel, t: float, x: Sequence[float],
                   J: Optional[np.ndarray] = None) -> float:
    """max-norm of (J^T G J - target diagonal), scaled by 1 + ||target||."""
    if J is None:
        J = model.jacobian(t, x)
    signs = np.asarray(model.ambient.signs, dtype=float)
    pullback = (J * signs[:, None]).T @ J
    target = np.diag(model.metric_diag(t))
    scale = 1.0 + np.max(np.abs(target))
    return float(np.max(np.abs(pullback - target)) / scale)


def check_isometry(model: EmbeddingModel, ts: Sequence[float],
                   xs: np.ndarray, use_fd: bool = False) -> float:
    """Max relative pullback error over the grid."""
    worst = 0.0
    for i, t in enumerate(ts):
        for x in xs[i]:
            J = fd_jacobian(model, t, x) if use_fd else None
            worst = max(worst, pullback_error(model, t, x, J))
    return worst


def isometry_profile(model: EmbeddingModel, ts: Sequence[float],
                     xs: np.ndarray) -> list[float]:
    """Per-t max pullback error over the x-samples (for figures/tables)."""
    out = []
    for i, t in enumerate(ts):
        out.append(max(pullback_error(model, t, x) for x in xs[i]))
    return out


_QUADRIC_GAPS = 5


def check_quadric(model: EmbeddingModel, samples: int, seed: int,
                  x_box: float = 3.0) -> Optional[float]:
    """Max |<y,y> - level|/(1 + |level|) at random domain points.

    Returns None for flat kinds (no quadric to check).  Points are drawn
    from the central breakpoint gaps: coordinates of an exactly-on-quadric
    point carry relative rounding, so the representable residual grows like
    1e-16 max|y|^2 and warped coefficients reach 1e5 at the window edge.
    The full window is still covered by the (relative) isometry check.
    """
    if model.quadric is None:
        return None
    rng = np.random.default_rng(seed)
    t_lo = model.pair.breakpoint(-_QUADRIC_GAPS)
    t_hi = model.pair.breakpoint(_QUADRIC_GAPS)
    scale = 1.0 + abs(model.quadric.level)
    worst = 0.0
    for _ in range(samples):
        t = rng.uniform(t_lo, t_hi)
        x = rng.uniform(-x_box, x_box, size=model.spec.n - 1)
        res = abs(quadric_residual(model.eval(t, x), model.quadric)) / scale
        worst = max(worst, res)
    return worst


def _pair_distance(model: EmbeddingModel, p1, p2) -> float:
    y1 = model.eval(*p1)
    y2 = model.eval(*p2)
    scale = max(np.max(np.abs(y1)), np.max(np.abs(y2)), 1e-300)
    return float(np.linalg.norm(y1 - y2) / scale)


def _witness_points(model: EmbeddingModel, k: int, l: Sequence[int]):
    """The near-collision construction, usable for any kind."""
    t = model.pair.breakpoint(2 * k)
    model.steps.ensure_covers(t)
    a = model.spec.a
    x2 = np.zeros(model.spec.n - 1)
    x1 = x2.copy()
    S1 = model.steps.S1(t)
    for r in range(model.spec.b):
        x1[a + r] += 2.0 * math.pi * int(l[r]) / S1
    return (t, x1), (t, x2)


def _witness_windings(b: int) -> list[tuple[int, ...]]:
    out = [tuple(1 if i == r else 0 for i in range(b)) for r in range(b)]
    if b > 1:
        out.append((1,) * b)
    return out


def check_injectivity(model: EmbeddingModel, seed: int, count: int,
                      x_box: float = 3.0) -> list[CollisionFinding]:
    """Witness pairs (collide for immersions, separate for embeddings) plus
    random distinct pairs (always separate).  Findings are data, not errors."""
    findings: list[CollisionFinding] = []
    immersion = model.kind in ("f", "f_h", "f_s")
    if model.spec.b > 0:
        expected = "collide" if immersion else "separate"
        thresh = (
            THRESHOLDS["collision"] if immersion
            else THRESHOLDS["witness_separation"]
        )
        for k in _WITNESS_KS:
            for l in _witness_windings(model.spec.b):
                p1, p2 = _witness_points(model, k, l)
                dist = _pair_distance(model, p1, p2)
                status = "collided" if dist < thresh else "separated"
                findings.append(
                    CollisionFinding(
                        label=f"witness k={k} l={','.join(str(v) for v in l)}",
                        expected=expected,
                        status=status,
                        distance=dist,
                    )
                )
    rng = np.random.default_rng(seed)
    t_lo = model.pair.breakpoint(-WINDOW_GAPS)
    t_hi = model.pair.breakpoint(WINDOW_GAPS)
    dim = model.spec.n - 1
    for i in range(count):
        t1 = rng.uniform(t_lo, t_hi)
        t2 = rng.uniform(t_lo, t_hi)
        x1 = rng.uniform(-x_box, x_box, size=dim)
        x2 = rng.uniform(-x_box, x_box, size=dim)
        if t1 == t2 and np.array_equal(x1, x2):
            continue
        dist = _pair_distance(model, (t1, x1), (t2, x2))
        status = (
            "separated" if dist > THRESHOLDS["random_separation"] else "collided"
        )
        findings.append(
            CollisionFinding(
                label=f"random pair {i}",
                expected="separate",
                status=status,
                distance=dist,
            )
        )
    return findings


def check_smoothness(model: EmbeddingModel,
                     breakpoints=_SMOOTHNESS_BREAKPOINTS) -> Optional[float]:
    """Max |FD+ - FD-| of t -> eta_r psi_j / S_j across breakpoints.

    The quotient is smooth despite the S_j jumps because the numerator
    vanishes to all orders where the denominator jumps; second-order
    one-sided differences keep truncation below the 1e-6 threshold.
    """
    spec = model.spec
    if spec.b == 0:
        return None
    sc = model.scalars
    pair = model.pair
    steps = model.steps

    def q(r: int, j: int, t: float) -> float:
        eta = sc.eta_bar_vals(t)[r]
        psi = sc.psi(j, t)
        S = steps.S1(t) if j == 1 else steps.S2(t)
        return eta * psi / S

    worst = 0.0
    for k in breakpoints:
        tk = pair.breakpoint(k)
        steps.ensure_covers(tk)
        d = 1e-6 * (1.0 + abs(tk))
        for r in range(spec.b):
            for j in (1, 2):
                q0 = q(r, j, tk)
                fd_plus = (
                    -3.0 * q0 + 4.0 * q(r, j, tk + d) - q(r, j, tk + 2 * d)
                ) / (2.0 * d)
                fd_minus = (
                    3.0 * q0 - 4.0 * q(r, j, tk - d) + q(r, j, tk - 2 * d)
                ) / (2.0 * d)
                worst = max(worst, abs(fd_plus - fd_minus))
    return worst


def check_jacobian(model: EmbeddingModel, seed: int, count: int = 50,
                   x_box: float = 3.0) -> float:
    """Max relative deviation between analytic and central-FD Jacobians."""
    rng = np.random.default_rng(seed + 1)
    t_lo = model.pair.breakpoint(-WINDOW_GAPS)
    t_hi = model.pair.breakpoint(WINDOW_GAPS)
    worst = 0.0
    for _ in range(count):
        t = rng.uniform(t_lo, t_hi)
        x = rng.uniform(-x_box, x_box, size=model.spec.n - 1)
        Ja = model.jacobian(t, x)
        Jf = fd_jacobian(model, t, x)
        scale = 1.0 + np.max(np.abs(Ja))
        worst = max(worst, float(np.max(np.abs(Ja - Jf)) / scale))
    return worst


def run_verification(
    model: EmbeddingModel,
    grid_density: Optional[int] = None,
    seed: int = 0,
    x_box: float = 3.0,
    x_samples: int = 8,
    quadric_samples: int = 1000,
    pair_samples: int = 1000,
    margin_density_factor: int = 4,
) -> VerificationReport:
    """Run the complete battery and assemble the report."""
    spec = model.spec
    ts, xs = default_grid(model, grid_density, x_box, x_samples)
    err_analytic = check_isometry(model, ts, xs, use_fd=False)
    err_fd = check_isometry(model, ts, xs, use_fd=True)
    quad = check_quadric(model, quadric_samples, seed, x_box)
    findings = check_injectivity(model, seed, pair_samples, x_box)
    smooth = check_smoothness(model)
    jac = check_jacobian(model, seed)
    margins = audit_margins(
        spec, model.steps,
        density=(grid_density or spec.grid_density) * margin_density_factor,
    )
    min_margin = min(margins.values()) if margins else None

    checks: list[tuple[str, bool, float, float]] = []
    checks.append(
        ("isometry_analytic", err_analytic < THRESHOLDS["isometry_analytic"],
         err_analytic, THRESHOLDS["isometry_analytic"])
    )
    checks.append(
        ("isometry_fd", err_fd < THRESHOLDS["isometry_fd"],
         err_fd, THRESHOLDS["isometry_fd"])
    )
    if quad is not None:
        checks.append(
            ("quadric", quad < THRESHOLDS["quadric"], quad, THRESHOLDS["quadric"])
        )
    witness = [f for f in findings if f.label.startswith("witness")]
    if witness:
        if model.kind in ("f", "f_h", "f_s"):
            val = max(f.distance for f in witness)
            checks.append(
                ("collision", all(f.ok() for f in witness),
                 val, THRESHOLDS["collision"])
            )
        else:
            val = min(f.distance for f in witness)
            checks.append(
                ("witness_separation", all(f.ok() for f in witness),
                 val, THRESHOLDS["witness_separation"])
            )
    randoms = [f for f in findings if f.label.startswith("random")]
    if randoms:
        val = min(f.distance for f in randoms)
        checks.append(
            ("random_separation", all(f.ok() for f in randoms),
             val, THRESHOLDS["random_separation"])
        )
    if smooth is not None:
        checks.append(
            ("smoothness", smooth < THRESHOLDS["smoothness"],
             smooth, THRESHOLDS["smoothness"])
        )
    checks.append(
        ("jacobian", jac < THRESHOLDS["jacobian"], jac, THRESHOLDS["jacobian"])
    )
    if min_margin is not None:
        half = spec.safety / 2.0
        checks.append(("steps_margin", min_margin >= half, min_margin, half))

    return VerificationReport(
        kind=model.kind,
        max_metric_error=err_analytic,
        max_metric_error_fd=err_fd,
        max_quadric_residual=quad,
        collision_checks=findings,
        smoothness_max_jump=smooth,
        jacobian_agreement=jac,
        steps_min_margin=min_margin,
        grid=GridSpec(
            gaps=2 * WINDOW_GAPS,
            density=grid_density or spec.grid_density,
            x_samples=x_samples,
            x_box=x_box,
            t_lo=model.pair.breakpoint(-WINDOW_GAPS),
            t_hi=model.pair.breakpoint(WINDOW_GAPS),
        ),
        seed=seed,
        checks=checks,
    )


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def report_lines(model: EmbeddingModel, report: VerificationReport) -> list[str]:
    """The line-based report: 'key: value' lines then one CHECK line per check."""
    spec = model.spec
    lines = [
        f"kind: {model.kind}",
        f"n: {spec.n}",
        f"a: {spec.a}",
        f"c: {_fmt(spec.c)}",
        f"target: {spec.target}",
        f"variant: {spec.variant}",
        f"ambient: {model.ambient.describe()}",
        f"quadric: {model.quadric.describe() if model.quadric else 'none'}",
        f"seed: {report.seed}",
        f"grid.gaps: {report.grid.gaps}",
        f"grid.density: {report.grid.density}",
        f"grid.x_samples: {report.grid.x_samples}",
        f"grid.x_box: {_fmt(report.grid.x_box)}",
        f"grid.t_range: {_fmt(report.grid.t_lo)}..{_fmt(report.grid.t_hi)}",
    ]
    lines.extend(model.steps.certificate.lines())
    lines.append(f"metric.max_rel_error: {_fmt(report.max_metric_error)}")
    lines.append(f"metric.max_rel_error_fd: {_fmt(report.max_metric_error_fd)}")
    if report.max_quadric_residual is None:
        lines.append("quadric.max_residual: skipped")
    else:
        lines.append(f"quadric.max_residual: {_fmt(report.max_quadric_residual)}")
    for f in report.collision_checks:
        if f.label.startswith("witness"):
            lines.append(
                f"collision.{f.label.replace(' ', '.')}: "
                f"{f.status} dist={_fmt(f.distance)}"
            )
    randoms = [f for f in report.collision_checks if f.label.startswith("random")]
    if randoms:
        lines.append(f"collision.random_pairs: {len(randoms)}")
        lines.append(
            "collision.random_min_dist: "
            f"{_fmt(min(f.distance for f in randoms))}"
        )
    if report.smoothness_max_jump is None:
        lines.append("smoothness.max_jump: skipped")
    else:
        lines.append(f"smoothness.max_jump: {_fmt(report.smoothness_max_jump)}")
    lines.append(f"jacobian.max_rel_diff: {_fmt(report.jacobian_agreement)}")
    if report.steps_min_margin is not None:
        lines.append(f"steps.min_margin: {_fmt(report.steps_min_margin)}")
    for name, ok, val, thresh in report.checks:
        lines.append(
            f"CHECK {name} {'PASS' if ok else 'FAIL'} {_fmt(val)} {_fmt(thresh)}"
        )
    return lines
