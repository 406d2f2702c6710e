"""Lower-bound tables for the double-sieve gap functions H(s) and h(s) on the
grid s_i = 2 + i/10, and the Psi constants used above N^{1/4}.

H(s_2..s_10) are taken as given seeds; H(s_11..s_29) follow by the linear
recursion with coefficients ``c_{i,j}``, and h(s_0..s_29) by a step-function
minorant of int_{s-1}^5 H(t)/t dt.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np

from .errors import DomainError
from .quadrature import QuadratureConfig, default_config, integrate_1d, integrate_nested, maximize_1d
from .special_functions import OmegaGrid, omega_grid, sigma0

N_GRID = 30
S_GRID = tuple(round(2.0 + i / 10.0, 12) for i in range(N_GRID))
SEED_RANGE = range(2, 11)
H_RANGE = range(2, 30)
PROPAGATED_RANGE = range(11, 30)

SEEDS = {
    2: 0.0223939, 3: 0.0217196, 4: 0.0202876, 5: 0.0181433, 6: 0.0158644,
    7: 0.0129923, 8: 0.0100686, 9: 0.0078162, 10: 0.0072943,
}

# Published values, kept as reference data for regression checks.
PRINTED_H = {
    **SEEDS,
    11: 0.0061642, 12: 0.0052233, 13: 0.0044073, 14: 0.0036995, 15: 0.0030860,
    16: 0.0025551, 17: 0.0020972, 18: 0.0017038, 19: 0.0013680, 20: 0.0010835,
    21: 0.0008451, 22: 0.0006482, 23: 0.0004882, 24: 0.0003602, 25: 0.0002592,
    26: 0.0001803, 27: 0.0001187, 28: 0.0000702, 29: 0.0000313,
}
PRINTED_h = dict(enumerate([
    0.0232385, 0.0211041, 0.0191556, 0.0173631, 0.0157035, 0.0141585,
    0.0127132, 0.0113556, 0.0100756, 0.0088648, 0.0077162, 0.0066236,
    0.0055818, 0.0046164, 0.0037529, 0.0030123, 0.0023901, 0.0018997,
    0.0015336, 0.0012593, 0.0010120, 0.0008099, 0.0006440, 0.0005084,
    0.0003980, 0.0003085, 0.0002365, 0.0001791, 0.0001336, 0.0000981,
]))


def s_grid(i: int) -> float:
    if not 0 <= i < N_GRID:
        raise DomainError(f"grid index {i} outside 0..{N_GRID - 1}")
    return S_GRID[i]


def _cell(i):
    return (1.0 if i == 2 else S_GRID[i - 1]), S_GRID[i]


@lru_cache(maxsize=None)
def _sigma0_moment(i: int) -> float:
    """int sigma0(t)/t dt over the i-th seed cell."""
    lo, hi = _cell(i)
    return integrate_1d(lambda t: sigma0(t) / t, lo, hi, default_config(1)).value


def coeff_c(i: int, j: int, cfg: QuadratureConfig | None = None) -> float:
    """Weight of H(s_i) in the lower bound for H(s_j), i in 2..10, j in 11..29."""
    if i not in SEED_RANGE or j not in PROPAGATED_RANGE:
        raise DomainError("coeff_c needs 2 <= i <= 10 and 11 <= j <= 29")
    lo, hi = _cell(i)
    sj1 = S_GRID[j] - 1.0
    value = math.log(4.0 / sj1) * _sigma0_moment(i)
    a, b = max(lo, S_GRID[j] - 2.0), min(hi, 3.0)
    if a < b:
        value += integrate_1d(lambda t: np.log((t + 1.0) / sj1) / t, a, b,
                              cfg or default_config(1), vectorized=True).value
    return value


def propagate_H(seeds: Mapping[int, float] = SEEDS) -> dict[int, float]:
    """H lower bounds at s_11..s_29 from seeds at s_2..s_10."""
    missing = [i for i in SEED_RANGE if i not in seeds]
    if missing:
        raise DomainError(f"seeds missing for indices {missing}")
    if any(seeds[i] < 0 for i in SEED_RANGE):
        raise DomainError("seeds must be nonnegative")
    return {j: math.fsum(coeff_c(i, j) * seeds[i] for i in SEED_RANGE)
            for j in PROPAGATED_RANGE}


def propagate_h(H: Mapping[int, float]) -> dict[int, float]:
    """h lower bounds at s_0..s_29 from the full H table (indices 2..29)."""
    missing = [i for i in H_RANGE if i not in H]
    if missing:
        raise DomainError(f"H table missing indices {missing}")
    s = S_GRID
    out = {}
    for j in range(N_GRID):
        head = H[2] * math.log(s[max(2, j - 10)] / (s[j] - 1.0))
        tail = math.fsum(H[i] * math.log(s[i] / s[i - 1]) for i in range(max(3, j - 9), 30))
        out[j] = head + tail
    return out


def _grid_index_at_or_above(s: float) -> int:
    return max(0, math.ceil(round((s - 2.0) * 10.0, 9)))


@dataclass(frozen=True)
class BoundTable:
    """H lower bounds for i = 2..29 and h lower bounds for i = 0..29."""

    H: dict = field(default_factory=dict)
    h: dict = field(default_factory=dict)
    seed_range: tuple = (2, 10)

    @classmethod
    def build(cls, seeds: Mapping[int, float] = SEEDS) -> "BoundTable":
        H = {i: float(seeds[i]) for i in SEED_RANGE}
        H.update(propagate_H(seeds))
        return cls(H=H, h=propagate_h(H))

    @classmethod
    def zero(cls) -> "BoundTable":
        return cls(H={i: 0.0 for i in H_RANGE}, h={i: 0.0 for i in range(N_GRID)})

    @classmethod
    def printed(cls) -> "BoundTable":
        return cls(H=dict(PRINTED_H), h=dict(PRINTED_h))

    def lookup_H(self, s: float) -> float:
        """Minorant of the decreasing H: value at the first grid point >= s."""
        if not s >= S_GRID[2] - 1e-12:
            raise DomainError("lookup_H needs s >= 2.2")
        if s > S_GRID[-1] + 1e-12:
            return 0.0
        return self.H[max(2, _grid_index_at_or_above(s))]

    def lookup_h(self, s: float) -> float:
        if not s >= S_GRID[0] - 1e-12:
            raise DomainError("lookup_h needs s >= 2")
        if s > S_GRID[-1] + 1e-12:
            return 0.0
        return self.h[_grid_index_at_or_above(s)]

    def h_bound(self, s: float) -> float:
        """Lower bound for h(s) anywhere: 0 off the table (h >= 0)."""
        if s < S_GRID[0] - 1e-12 or s > S_GRID[-1] + 1e-12:
            return 0.0
        return self.lookup_h(s)

    def H_bound(self, s: float) -> float:
        if s < S_GRID[2] - 1e-12 or s > S_GRID[-1] + 1e-12:
            return 0.0
        return self.lookup_H(s)

    def is_monotone(self) -> bool:
        H = [self.H[i] for i in H_RANGE]
        h = [self.h[i] for i in range(N_GRID)]
        return all(x >= y for x, y in zip(H, H[1:])) and all(x >= y for x, y in zip(h, h[1:]))

    def to_dict(self) -> dict:
        return {
            "H": [{"i": i, "s": S_GRID[i], "bound": self.H[i]} for i in sorted(self.H)],
            "h": [{"i": i, "s": S_GRID[i], "bound": self.h[i]} for i in sorted(self.h)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "BoundTable":
        data = json.loads(text)
        return cls(H={int(r["i"]): float(r["bound"]) for r in data["H"]},
                   h={int(r["i"]): float(r["bound"]) for r in data["h"]})

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["table", "i", "s", "bound"])
        for name, tab in (("H", self.H), ("h", self.h)):
            for i in sorted(tab):
                w.writerow([name, i, f"{S_GRID[i]:.1f}", repr(tab[i])])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "BoundTable":
        H, h = {}, {}
        for row in csv.DictReader(io.StringIO(text)):
            (H if row["table"] == "H" else h)[int(row["i"])] = float(row["bound"])
        return cls(H=H, h=h)


@lru_cache(maxsize=1)
def default_bound_table() -> BoundTable:
    return BoundTable.build()


# ---------------------------------------------------------------------------
# Psi constants

@dataclass(frozen=True)
class PsiRow:
    i: int
    s: float
    s_prime: float
    psi1: float | None = None
    psi2: float | None = None
    kappa1: float | None = None
    kappa2: float | None = None
    kappa3: float | None = None


@dataclass(frozen=True)
class PsiTable:
    rows: dict

    def __getitem__(self, i: int) -> PsiRow:
        if i not in self.rows:
            raise DomainError(f"no Psi row for index {i}")
        return self.rows[i]

    def best(self, i: int) -> float:
        """The tabulated saving at s_i: Psi_2 where given, else Psi_1."""
        row = self[i]
        return row.psi2 if row.psi2 is not None else row.psi1

    def indices(self):
        return sorted(self.rows)


_PSI_ROWS = (
    PsiRow(3, 2.3, 4.50, psi2=0.015247971, kappa1=3.54, kappa2=2.88, kappa3=2.43),
    PsiRow(4, 2.4, 4.46, psi2=0.013898757, kappa1=3.57, kappa2=2.87, kappa3=2.40),
    PsiRow(5, 2.5, 4.12, psi2=0.011776059, kappa1=3.56, kappa2=2.91, kappa3=2.50),
    PsiRow(6, 2.6, 3.58, psi1=0.009405211),
    PsiRow(7, 2.7, 3.47, psi1=0.006558950),
    PsiRow(8, 2.8, 3.34, psi1=0.003536751),
    PsiRow(9, 2.9, 3.19, psi1=0.001056651),
    PsiRow(10, 3.0, 3.00, psi1=0.0),
)


def psi_table() -> PsiTable:
    return PsiTable({r.i: r for r in _PSI_ROWS})


PHI_RANGE = (2.0, 6.0)


def psi1_triple(phi: float, s: float, s_prime: float, cfg: QuadratureConfig | None = None,
                omega: OmegaGrid | None = None) -> float:
    """int over 1/s' <= t <= u <= v <= 1/s of omega((phi-t-u-v)/u) / (t u^2 v)."""
    lo, hi = 1.0 / s_prime, 1.0 / s
    if not lo < hi:
        return 0.0
    om = omega or omega_grid()
    f = lambda v, u, t: om((phi - t - u - v) / u) / (t * u * u * v)
    limits = [(lo, hi), (lo, lambda v: v), (lo, lambda v, u: u)]
    return integrate_nested(f, limits, cfg or default_config(3), vectorized=True).value


def psi1(s: float, s_prime: float, phi_range: tuple = PHI_RANGE,
         cfg: QuadratureConfig | None = None, n_scan: int = 64) -> float:
    """Psi_1(s) for 2 <= s <= 3 <= s' <= 5, maximising over phi in ``phi_range``."""
    if not (2.0 <= s <= 3.0 <= s_prime <= 5.0):
        raise DomainError("psi1 needs 2 <= s <= 3 <= s' <= 5")
    one = default_config(1)
    first = -integrate_1d(lambda t: np.log(t - 1.0) / t, 2.0, s_prime - 1.0, one,
                          vectorized=True).value
    second = 0.5 * integrate_1d(lambda t: np.log(s_prime * t - 1.0) / (t * (1.0 - t)),
                                1.0 - 1.0 / s, 1.0 - 1.0 / s_prime, one, vectorized=True).value
    if s == s_prime:
        return 0.0
    _, third = maximize_1d(lambda phi: psi1_triple(phi, s, s_prime, cfg), *phi_range,
                           n_scan=n_scan)
    return first + second - third
