"""Linear-sieve functions F, f (and A = sF/2e^gamma, a = sf/2e^gamma),
Buchstab's omega, and the sigma / sigma_0 auxiliary integrals.

Two independent routes to A and a are provided:

* :func:`lower_sieve_a` / :func:`upper_sieve_A` evaluate the piecewise
  closed forms, whose nested-integral branches are tabulated once by
  cumulative adaptive quadrature and interpolated thereafter;
* :func:`sieve_pair_ode` integrates the coupled delay system
  ``(sF)' = f(s-1), (sf)' = F(s-1)`` by the method of steps.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, DomainError
from .quadrature import QuadratureConfig, default_config, integrate_1d

EULER_GAMMA = float(np.euler_gamma)
TWO_E_GAMMA = 2.0 * math.exp(EULER_GAMMA)
OMEGA_LIMIT = math.exp(-EULER_GAMMA)
OMEGA_CAP = 0.561522
OMEGA_CAP_FROM = 3.4

KNOT_STEP = 1e-3


def _hermite(t, h, y0, y1, d0, d1):
    t2 = t * t
    t3 = t2 * t
    return ((2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0
            + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1)


# ---------------------------------------------------------------------------
# Buchstab's function

class OmegaGrid:
    """Buchstab's omega on a uniform grid starting at u = 1.

    Closed forms are used on [1, 3]; beyond, ``u*omega(u)`` is advanced with
    the end-corrected trapezoid rule (fourth order), the delayed values being
    grid nodes.  Between nodes the function is cubic-Hermite interpolated;
    beyond ``u_max`` it returns e^-gamma.
    """

    def __init__(self, step: float = KNOT_STEP, u_max: float = 20.0):
        per_unit = round(1.0 / step)
        if per_unit < 2 or abs(per_unit * step - 1.0) > 1e-12:
            raise DomainError("omega grid step must divide 1")
        if u_max <= 3.0:
            raise DomainError("omega grid must extend beyond u = 3")
        self.step = h = 1.0 / per_unit
        self.u_max = u_max
        n = int(math.ceil((u_max - 1.0) * per_unit))
        u = 1.0 + h * np.arange(n + 1)
        w = np.empty(n + 1)
        d = np.empty(n + 1)
        i2, i3 = per_unit, 2 * per_unit
        w[:i2 + 1] = 1.0 / u[:i2 + 1]
        d[:i2 + 1] = -1.0 / u[:i2 + 1] ** 2
        w[i2:i3 + 1] = (1.0 + np.log(u[i2:i3 + 1] - 1.0)) / u[i2:i3 + 1]
        # right-derivative at u = 2 (the left one is -1/4)
        d[i2:i3 + 1] = (w[0:i2 + 1] - w[i2:i3 + 1]) / u[i2:i3 + 1]
        y = u[i3] * w[i3]
        for k in range(i3, n):
            j = k - i2
            y += 0.5 * h * (w[j] + w[j + 1]) - h * h / 12.0 * (d[j + 1] - d[j])
            w[k + 1] = y / u[k + 1]
            d[k + 1] = (w[j + 1] - w[k + 1]) / u[k + 1]
        self.u = u
        self.values = w
        self.slopes = d
        self._n = n

    def __call__(self, x):
        """omega(x) for x >= 1, extended by 0 below 1 (array-friendly)."""
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, OMEGA_LIMIT)
        out[x < 1.0] = 0.0
        m = (x >= 1.0) & (x <= 2.0)
        out[m] = 1.0 / x[m]
        m = (x > 2.0) & (x <= 3.0)
        out[m] = (1.0 + np.log(x[m] - 1.0)) / x[m]
        m = (x > 3.0) & (x < self.u[-1])
        if m.any():
            xm = x[m]
            k = np.minimum(((xm - 1.0) / self.step).astype(np.int64), self._n - 1)
            t = (xm - self.u[k]) / self.step
            out[m] = _hermite(t, self.step, self.values[k], self.values[k + 1],
                              self.slopes[k], self.slopes[k + 1])
        return out if out.ndim else float(out)

    def capped(self, x):
        """omega with the constant cap 0.561522 applied for arguments >= 3.4."""
        x = np.asarray(x, dtype=float)
        out = np.where(x >= OMEGA_CAP_FROM, OMEGA_CAP, self(x))
        return out if out.ndim else float(out)

    def pairs(self):
        return list(zip(self.u.tolist(), self.values.tolist()))


@lru_cache(maxsize=4)
def omega_grid(step: float = KNOT_STEP, u_max: float = 20.0) -> OmegaGrid:
    return OmegaGrid(step, u_max)


def buchstab_omega(u, grid: OmegaGrid | None = None):
    """Buchstab's omega(u) for u >= 1."""
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 1.0) or np.any(np.isnan(arr)):
        raise DomainError("buchstab_omega needs u >= 1")
    return (grid or omega_grid())(u)


# ---------------------------------------------------------------------------
# Closed forms of a(s) and A(s)

class _Cumulative:
    """x -> integral_{x0}^{x} g(t) dt tabulated on a uniform knot grid and
    cubic-Hermite interpolated using the exact slope g."""

    def __init__(self, g, x0: float, x1: float, step: float, cfg: QuadratureConfig):
        n = int(round((x1 - x0) / step))
        self.x0, self.step, self.n = x0, step, n
        knots = x0 + step * np.arange(n + 1)
        vals = np.zeros(n + 1)
        acc = 0.0
        for k in range(n):
            acc += integrate_1d(g, knots[k], knots[k + 1], cfg, vectorized=True).value
            vals[k + 1] = acc
        self.knots = knots
        self.values = vals
        self.slopes = np.asarray(g(knots), dtype=float)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k = np.clip(((x - self.x0) / self.step).astype(np.int64), 0, self.n - 1)
        t = (x - self.knots[k]) / self.step
        return _hermite(t, self.step, self.values[k], self.values[k + 1],
                        self.slopes[k], self.slopes[k + 1])


class _ClosedForms:
    def __init__(self, step: float = KNOT_STEP):
        cfg = QuadratureConfig(abs_tol=1e-15, rel_tol=1e-14)
        # I(x) = int_2^x log(u-1)/u du
        self.I = _Cumulative(lambda u: np.log(u - 1.0) / u, 2.0, 7.0, step, cfg)
        # J(y) = int_3^y I(t-1)/t dt
        self.J = _Cumulative(lambda t: self.I(t - 1.0) / t, 3.0, 7.0, step, cfg)
        # P(y) = int_4^y J(t-1)/t dt
        self.P = _Cumulative(lambda t: self.J(t - 1.0) / t, 4.0, 7.0, step, cfg)
        # K(y) = int_5^y P(t-1)/t dt
        self.K = _Cumulative(lambda t: self.P(t - 1.0) / t, 5.0, 7.0, step, cfg)

    def a(self, s):
        out = np.zeros_like(s)
        m = s > 2.0
        out[m] = np.log(s[m] - 1.0)
        m = s > 4.0
        out[m] += self.J(s[m] - 1.0)
        m = s > 6.0
        out[m] += self.K(s[m] - 1.0)
        return out

    def A(self, s):
        out = np.ones_like(s)
        m = s > 3.0
        out[m] += self.I(s[m] - 1.0)
        m = s > 5.0
        out[m] += self.P(s[m] - 1.0)
        return out


@lru_cache(maxsize=1)
def _closed_forms() -> _ClosedForms:
    return _ClosedForms()


def _checked(s, lo, hi, name):
    arr = np.asarray(s, dtype=float)
    if np.any(~(arr > lo)) or np.any(~(arr <= hi)):
        raise DomainError(f"{name} defined for {lo} < s <= {hi}")
    return arr


def lower_sieve_a(s):
    """a(s) = s f(s) / 2e^gamma on (0, 8]."""
    arr = _checked(s, 0.0, 8.0, "a(s)")
    out = _closed_forms().a(np.atleast_1d(arr))
    return out.reshape(arr.shape) if arr.ndim else float(out[0])


def upper_sieve_A(s):
    """A(s) = s F(s) / 2e^gamma on (0, 7]."""
    arr = _checked(s, 0.0, 7.0, "A(s)")
    out = _closed_forms().A(np.atleast_1d(arr))
    return out.reshape(arr.shape) if arr.ndim else float(out[0])


# ---------------------------------------------------------------------------
# Delay-ODE oracle

@dataclass(frozen=True)
class SieveFunctionTable:
    knots: np.ndarray
    valuesF: np.ndarray
    valuesf: np.ndarray
    valuesA: np.ndarray
    valuesa: np.ndarray
    slopesA: np.ndarray
    slopesa: np.ndarray
    omega_grid: tuple
    step: float

    def _interp(self, s, vals, slopes, seed):
        s = np.asarray(s, dtype=float)
        if np.any(~(s > 0.0)) or np.any(s > self.knots[-1] + 1e-12):
            raise DomainError(f"table covers 0 < s <= {self.knots[-1]}")
        flat = np.atleast_1d(s)
        out = np.full(flat.shape, seed)
        m = flat > 2.0
        if m.any():
            n = len(self.knots) - 1
            k = np.minimum((flat[m] / self.step).astype(np.int64), n - 1)
            t = (flat[m] - self.knots[k]) / self.step
            out[m] = _hermite(t, self.step, vals[k], vals[k + 1], slopes[k], slopes[k + 1])
        return out.reshape(s.shape) if s.ndim else float(out[0])

    def A(self, s):
        return self._interp(s, self.valuesA, self.slopesA, 1.0)

    def a(self, s):
        return self._interp(s, self.valuesa, self.slopesa, 0.0)

    def F(self, s):
        return TWO_E_GAMMA * np.asarray(self.A(s)) / np.asarray(s)

    def f(self, s):
        return TWO_E_GAMMA * np.asarray(self.a(s)) / np.asarray(s)

    def write_csv(self, functions_path, omega_path):
        with open(functions_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["s", "F", "f", "A", "a"])
            for row in zip(self.knots, self.valuesF, self.valuesf, self.valuesA, self.valuesa):
                w.writerow([f"{v:.10g}" for v in row])
        with open(omega_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["u", "omega"])
            for u, om in self.omega_grid:
                w.writerow([f"{u:.10g}", f"{om:.10g}"])


def _march(s_max, step):
    m = round(1.0 / step)
    h = 1.0 / m
    n = int(math.ceil(s_max * m - 1e-9))
    n0 = 2 * m
    s = h * np.arange(n + 1)
    A = np.ones(n + 1)
    a = np.zeros(n + 1)
    dA = np.zeros(n + 1)
    da = np.zeros(n + 1)      # right-derivative at s = 2
    da[n0] = 1.0
    da_left2 = 0.0

    def deriv_a(k, side):
        return da_left2 if (k == n0 and side == "left") else da[k]

    for k in range(n0, n):
        j0, j1 = k - m, k + 1 - m
        x0, x1 = s[j0], s[j1]
        # A' = a(s-1)/(s-1),  a' = A(s-1)/(s-1)
        gA0, gA1 = a[j0] / x0, a[j1] / x1
        ga0, ga1 = A[j0] / x0, A[j1] / x1
        gA0p = (deriv_a(j0, "right") * x0 - a[j0]) / x0 ** 2
        gA1p = (deriv_a(j1, "left") * x1 - a[j1]) / x1 ** 2
        ga0p = (dA[j0] * x0 - A[j0]) / x0 ** 2
        ga1p = (dA[j1] * x1 - A[j1]) / x1 ** 2
        A[k + 1] = A[k] + 0.5 * h * (gA0 + gA1) - h * h / 12.0 * (gA1p - gA0p)
        a[k + 1] = a[k] + 0.5 * h * (ga0 + ga1) - h * h / 12.0 * (ga1p - ga0p)
        dA[k + 1] = a[k + 1 - m] / s[k + 1 - m]
        da[k + 1] = A[k + 1 - m] / s[k + 1 - m]
    return s, A, a, dA, da


def sieve_pair_ode(s_max: float = 8.0, step: float = KNOT_STEP, tol: float = 1e-9,
                   omega: OmegaGrid | None = None) -> SieveFunctionTable:
    """Integrate the coupled delay system for (F, f) from the seed
    F = 2e^gamma/s, f = 0 on (0, 2].

    The run is repeated at half the step; if the Richardson estimate of the
    error at ``step`` exceeds ``tol`` a :class:`ConvergenceError` is raised.
    """
    if s_max > 10.0 or s_max <= 2.0:
        raise DomainError("sieve_pair_ode needs 2 < s_max <= 10")
    if not step > 0:
        raise DomainError("step must be positive")
    m = round(1.0 / step)
    if m < 1 or abs(m * step - 1.0) > 1e-9:
        raise DomainError("step must divide 1")
    s, A, a, dA, da = _march(s_max, step)
    _, A2, a2, _, _ = _march(s_max, step / 2)
    err = max(np.max(np.abs(A - A2[::2][:len(A)])), np.max(np.abs(a - a2[::2][:len(a)])))
    err *= 16.0 / 15.0
    if err > tol:
        raise ConvergenceError(f"step {step} too coarse: estimated error {err:.3g} > {tol:g}")
    grid = omega or omega_grid()
    knots = s[1:]
    return SieveFunctionTable(
        knots=knots,
        valuesF=TWO_E_GAMMA * A[1:] / knots,
        valuesf=TWO_E_GAMMA * a[1:] / knots,
        valuesA=A[1:], valuesa=a[1:],
        slopesA=dA[1:], slopesa=da[1:],
        omega_grid=tuple(grid.pairs()),
        step=1.0 / m,
    )


# ---------------------------------------------------------------------------
# sigma and sigma_0

def sigma_integral(a: float, b: float, c: float, cfg: QuadratureConfig | None = None) -> float:
    """int_a^b log(c/(t-1)) dt/t."""
    if not a > 1.0:
        raise DomainError("sigma_integral needs a > 1")
    if b < a:
        raise DomainError("sigma_integral needs a <= b")
    if not c > 0.0:
        raise DomainError("sigma_integral needs c > 0")
    if a == b:
        return 0.0
    f = lambda t: np.log(c / (t - 1.0)) / t
    return integrate_1d(f, a, b, cfg or default_config(1), vectorized=True).value


@lru_cache(maxsize=1)
def _sigma0_denominator() -> float:
    return 1.0 - sigma_integral(3.0, 5.0, 4.0)


def sigma0(t: float) -> float:
    """sigma(3, t+2, t+1) / (1 - sigma(3, 5, 4)) for t >= 1."""
    if not t >= 1.0:
        raise DomainError("sigma0 needs t >= 1")
    return sigma_integral(3.0, t + 2.0, t + 1.0) / _sigma0_denominator()
