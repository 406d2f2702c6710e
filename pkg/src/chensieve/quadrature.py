"""Adaptive Gauss-Kronrod integration (1 to 4 nested dimensions) and a
bounded scalar maximiser.

Every integral in the package goes through :func:`integrate_1d` or
:func:`integrate_nested`.  The 1D routine is a global adaptive G7/K15 scheme:
the subinterval with the largest error estimate is bisected until the summed
estimate drops below ``max(abs_tol, rel_tol * |value|)``.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ConvergenceError

# Kronrod 15-point nodes (non-negative half) and weights, with the embedded
# 7-point Gauss weights on the odd-indexed nodes.
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
K_WEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
G_WEIGHTS = np.zeros(15)
G_WEIGHTS[1:7:2] = _WG[:3]
G_WEIGHTS[7] = _WG[3]
G_WEIGHTS[9:15:2] = _WG[2::-1]

_EPS = np.finfo(float).eps
_MAX_INTERVALS = 20000


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 0.0
    max_depth: int = 50
    dimension: int = 1

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if not self.rel_tol >= 0:
            raise ValueError("rel_tol must be non-negative")
        if self.max_depth < 10:
            raise ValueError("max_depth must be at least 10")
        if self.dimension not in (1, 2, 3, 4):
            raise ValueError("dimension must be in 1..4")

    def inner(self) -> "QuadratureConfig":
        """Config for the next nesting level: one order tighter."""
        return replace(self, abs_tol=self.abs_tol / 10, rel_tol=self.rel_tol / 10,
                       dimension=max(1, self.dimension - 1))


DEFAULT_TOLERANCES = {1: 1e-10, 2: 1e-8, 3: 1e-7, 4: 1e-6}


def default_config(dimension: int = 1) -> QuadratureConfig:
    return QuadratureConfig(abs_tol=DEFAULT_TOLERANCES[dimension], dimension=dimension)


@dataclass(frozen=True)
class IntegralResult:
    value: float
    error_estimate: float
    evaluations: int


def _gk15(f, a, b, vectorized):
    centre = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = centre + half * NODES
    if vectorized:
        fx = np.asarray(f(x), dtype=float)
    else:
        fx = np.fromiter((f(xi) for xi in x), dtype=float, count=15)
    if not np.all(np.isfinite(fx)):
        bad = x[~np.isfinite(fx)][0]
        raise ConvergenceError(f"integrand not finite at x={bad!r}")
    kron = half * float(K_WEIGHTS @ fx)
    gauss = half * float(G_WEIGHTS @ fx)
    # QUADPACK-style error scaling.
    mean = kron / (b - a) if b != a else 0.0
    resasc = abs(half) * float(K_WEIGHTS @ np.abs(fx - mean))
    resabs = abs(half) * float(K_WEIGHTS @ np.abs(fx))
    err = abs(kron - gauss)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    if resabs > np.finfo(float).tiny / (50 * _EPS):
        err = max(err, 50 * _EPS * resabs)
    return kron, err


def integrate_1d(f: Callable, a: float, b: float, cfg: QuadratureConfig | None = None,
                 *, vectorized: bool = False,
                 points: Iterable[float] | None = None) -> IntegralResult:
    """Integrate ``f`` over ``[a, b]``.

    With ``vectorized=True`` the integrand receives an ndarray of 15 nodes per
    call.  ``points`` are interior breakpoints (kinks, jumps) used to seed the
    initial partition.  ``b < a`` integrates with reversed sign.
    """
    cfg = cfg or default_config(1)
    if a == b:
        return IntegralResult(0.0, 0.0, 0)
    if b < a:
        r = integrate_1d(f, b, a, cfg, vectorized=vectorized, points=points)
        return IntegralResult(-r.value, r.error_estimate, r.evaluations)

    cuts = [a]
    if points is not None:
        cuts += sorted(p for p in set(points) if a < p < b)
    cuts.append(b)

    heap = []
    total = 0.0
    total_err = 0.0
    evals = 0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        val, err = _gk15(f, lo, hi, vectorized)
        evals += 15
        total += val
        total_err += err
        heapq.heappush(heap, (-err, lo, hi, val, 0))

    min_width = (b - a) * 2.0 ** (-cfg.max_depth)
    while total_err > max(cfg.abs_tol, cfg.rel_tol * abs(total)):
        neg_err, lo, hi, val, depth = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if depth >= cfg.max_depth or hi - lo <= min_width or len(heap) > _MAX_INTERVALS \
                or not lo < mid < hi:
            heapq.heappush(heap, (neg_err, lo, hi, val, depth))
            best = IntegralResult(total, total_err, evals)
            raise ConvergenceError(
                f"integrate_1d: tolerance {cfg.abs_tol:g} not met on [{a}, {b}] "
                f"(estimate {total!r}, error {total_err:.3g})", best)
        v1, e1 = _gk15(f, lo, mid, vectorized)
        v2, e2 = _gk15(f, mid, hi, vectorized)
        evals += 30
        total += v1 + v2 - val
        total_err += e1 + e2 + neg_err
        heapq.heappush(heap, (-e1, lo, mid, v1, depth + 1))
        heapq.heappush(heap, (-e2, mid, hi, v2, depth + 1))

    # Re-sum to shed accumulated cancellation from the running updates.
    total = math.fsum(item[3] for item in heap)
    total_err = math.fsum(-item[0] for item in heap)
    return IntegralResult(total, total_err, evals)


Limit = float | Callable[..., float]


def _eval_limit(lim, outer):
    return lim(*outer) if callable(lim) else float(lim)


def integrate_nested(f: Callable, limits: Sequence[tuple[Limit, Limit]],
                     cfg: QuadratureConfig | None = None, *, vectorized: bool = False,
                     points: Sequence | None = None) -> IntegralResult:
    """Iterated integral of ``f(x1, ..., xd)``.

    ``limits[k]`` is ``(lower, upper)`` for ``x_{k+1}``; each may be a number
    or a callable of the outer variables ``x1..xk``.  Regions where
    ``lower >= upper`` contribute zero.  ``points[k]``, if given, is a
    sequence of breakpoints or a callable of the outer variables returning one.
    ``vectorized`` applies to the innermost variable only.
    """
    d = len(limits)
    if not 1 <= d <= 4:
        raise ValueError("integrate_nested supports 1 to 4 dimensions")
    cfg = cfg or default_config(d)
    points = list(points) if points is not None else [None] * d
    stats = {"evals": 0, "inner_err": 0.0}

    def level(k, outer, c):
        lo = _eval_limit(limits[k][0], outer)
        hi = _eval_limit(limits[k][1], outer)
        if not lo < hi:
            return 0.0
        pts = points[k]
        if callable(pts):
            pts = pts(*outer)
        if k == d - 1:
            r = integrate_1d(lambda x: f(*outer, x), lo, hi, c,
                             vectorized=vectorized, points=pts)
        else:
            ci = c.inner()
            r = integrate_1d(lambda x: level(k + 1, outer + (x,), ci), lo, hi, c, points=pts)
        stats["evals"] += r.evaluations if k == d - 1 else 0
        if k > 0:
            stats["inner_err"] = max(stats["inner_err"], r.error_estimate)
        return r.value if k > 0 else r

    top = level(0, (), cfg)
    if not isinstance(top, IntegralResult):
        return IntegralResult(0.0, 0.0, 0)
    lo0 = _eval_limit(limits[0][0], ())
    hi0 = _eval_limit(limits[0][1], ())
    err = top.error_estimate + stats["inner_err"] * (hi0 - lo0)
    return IntegralResult(top.value, err, max(stats["evals"], top.evaluations))


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def maximize_1d(f: Callable[[float], float], a: float, b: float, tol: float = 1e-6,
                n_scan: int = 64) -> tuple[float, float]:
    """Maximise ``f`` on ``[a, b]``: coarse scan, then golden-section search
    on the bracket around the best scan point.  Returns ``(argmax, max)``."""
    if not a < b:
        raise ValueError("maximize_1d needs a < b")
    xs = np.linspace(a, b, n_scan)
    fs = [f(x) for x in xs]
    k = int(np.argmax(fs))
    best_x, best_f = float(xs[k]), float(fs[k])
    lo = float(xs[max(k - 1, 0)])
    hi = float(xs[min(k + 1, n_scan - 1)])

    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INVPHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INVPHI * (hi - lo)
            f2 = f(x2)
    for x, fx in ((x1, f1), (x2, f2)):
        if fx > best_f:
            best_x, best_f = float(x), float(fx)
    return best_x, best_f
