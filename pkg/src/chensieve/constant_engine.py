"""Bound formulas for sums of sieve counts over primes in N^phi-ranges and
the assembly of the constant F(kappa1, kappa2) bounding D_{1,2}(N)/Theta(N).

Every bound comes as a classical linear-sieve part (through A or a) and a
double-sieve saving (through H, h or Psi).  Savings use the step-function
minorants of the decreasing H and h on the grid s_i; on each cell the
remaining weight is integrated in closed form.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .bound_tables import S_GRID, BoundTable, PsiTable, default_bound_table, psi_table
from .errors import ConvergenceError, DomainError
from .quadrature import DEFAULT_TOLERANCES, QuadratureConfig, integrate_1d, integrate_nested
from .special_functions import OMEGA_CAP, OMEGA_CAP_FROM, lower_sieve_a, omega_grid, upper_sieve_A

REFERENCE_KAPPA1_INV = 13.27
REFERENCE_KAPPA2_INV = 8.24


@dataclass(frozen=True)
class KappaParams:
    kappa1: float
    kappa2: float
    delta: float = 0.0
    omega_cap_mode: bool = True

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise DomainError("invalid kappa parameters: " + "; ".join(problems))

    def violations(self) -> list[str]:
        k1, k2 = self.kappa1, self.kappa2
        out = []
        if not (k2 > k1 >= 1.0 / 18.0):
            out.append("need kappa2 > kappa1 >= 1/18")
        if not 3 * k1 + k2 < 0.5:
            out.append("need 3 kappa1 + kappa2 < 1/2")
        if not 3 * k1 - k2 < 1.0 / 6.0:
            out.append("need 3 kappa1 - kappa2 < 1/6")
        if self.delta != 0.0:
            out.append("delta is fixed at 0")
        return out

    @classmethod
    def from_inverse(cls, k1_inv: float = REFERENCE_KAPPA1_INV, k2_inv: float = REFERENCE_KAPPA2_INV,
                     **kw) -> "KappaParams":
        return cls(1.0 / k1_inv, 1.0 / k2_inv, **kw)


def reference_params(**kw) -> KappaParams:
    return KappaParams.from_inverse(**kw)


# ---------------------------------------------------------------------------
# helpers

def _configs(tol_scale: float) -> dict[int, QuadratureConfig]:
    if not tol_scale > 0:
        raise DomainError("tolerance scale must be positive")
    return {d: QuadratureConfig(abs_tol=t * tol_scale, dimension=d)
            for d, t in DEFAULT_TOLERANCES.items()}


def _log_weight(t, kappa):
    """Antiderivative of 1/(t(1-2 kappa t))."""
    return math.log(t / (1.0 - 2.0 * kappa * t))


def _step_cells(lo, hi, first=0):
    """Cells (a, b, i) of [lo, hi] cut by the grid, i the right grid index."""
    for i in range(max(first, 1), len(S_GRID)):
        a, b = max(lo, S_GRID[i - 1]), min(hi, S_GRID[i])
        if a < b:
            yield a, b, i


def _H_saving(table: BoundTable, lo, hi, kappa):
    """int_lo^hi H(t)/(t(1-2 kappa t)) dt with H at the right end of each cell."""
    return math.fsum(table.H[i] * (_log_weight(b, kappa) - _log_weight(a, kappa))
                     for a, b, i in _step_cells(lo, hi, first=3))


def _h_inner(table: BoundTable, lo, hi, c, kappa):
    """int_lo^hi h(u)/(u(c - 2 kappa u)) du with the step minorant of h."""
    tot = 0.0
    for a, b, i in _step_cells(lo, hi, first=1):
        tot += table.h[i] * (math.log(b / (c - 2 * kappa * b)) - math.log(a / (c - 2 * kappa * a)))
    return tot / c


def _a_kinks(*_):
    return (2.0, 4.0, 6.0)


def _classical_upper(lo, hi, kappa, cfg):
    """8 int_lo^hi A(t)/(t(1-2 kappa t)) dt."""
    if not lo < hi:
        return 0.0
    f = lambda t: upper_sieve_A(t) / (t * (1.0 - 2.0 * kappa * t))
    return 8.0 * integrate_1d(f, lo, hi, cfg, vectorized=True, points=(3.0, 5.0)).value


def _result(main, saving, split, sign):
    return (main, saving) if split else main + sign * saving


# ---------------------------------------------------------------------------
# Propositions

def prop41_upper(phi1: float, phi2: float, kappa: float, table: BoundTable | None = None,
                 *, split: bool = False, cfg: QuadratureConfig | None = None):
    """Upper bound 8 int (A - H)/(t(1 - 2 kappa t)) over [(1/2-phi2)/kappa, (1/2-phi1)/kappa]
    for a sum over N^phi1 <= p < N^phi2."""
    if not (0 < phi1 <= phi2 <= 0.25) or not kappa > 0 or phi2 + kappa > 0.5 + 1e-15:
        raise DomainError("prop41 needs 0 < phi1 <= phi2 <= 1/4 and phi2 + kappa <= 1/2")
    table = table or default_bound_table()
    lo, hi = (0.5 - phi2) / kappa, (0.5 - phi1) / kappa
    main = _classical_upper(lo, hi, kappa, cfg or _configs(1.0)[1])
    saving = 8.0 * _H_saving(table, lo, hi, kappa) if lo < hi else 0.0
    return _result(main, saving, split, -1)


def _double_bound(phi1, phi2, u_lo, u_hi, kappa, table, cfg2, cfg1):
    """(a-part, h-part) of 8 int_phi1^phi2 int_{u_lo(t)}^{u_hi(t)} (.)/(t u (1-2t-2 kappa u))."""
    if not phi1 < phi2:
        return 0.0, 0.0
    f = lambda t, u: lower_sieve_a(u) / (t * u * (1.0 - 2.0 * t - 2.0 * kappa * u))
    main = integrate_nested(f, [(phi1, phi2), (u_lo, u_hi)], cfg2, vectorized=True,
                            points=[None, _a_kinks]).value

    def g(t):
        lo, hi = u_lo(t), u_hi(t)
        return _h_inner(table, lo, hi, 1.0 - 2.0 * t, kappa) / t if lo < hi else 0.0

    saving = integrate_1d(g, phi1, phi2, cfg1).value
    return 8.0 * main, 8.0 * saving


def prop42_lower(phi1: float, phi2: float, kappa: float, table: BoundTable | None = None,
                 *, split: bool = False, cfg: dict | None = None):
    """Lower bound for the double sum over N^phi1 <= p1 < p2 < N^phi2."""
    if not (0 < phi1 <= phi2 < 1.0 / 6.0) or not kappa > 0 or 2 * phi2 + kappa > 0.5 + 1e-15:
        raise DomainError("prop42 needs 0 < phi1 <= phi2 < 1/6 and 2 phi2 + kappa <= 1/2")
    cfg = cfg or _configs(1.0)
    main, saving = _double_bound(phi1, phi2, lambda t: (0.5 - phi2 - t) / kappa,
                                 lambda t: (0.5 - 2 * t) / kappa, kappa,
                                 table or default_bound_table(), cfg[2], cfg[1])
    return _result(main, saving, split, +1)


def prop43_lower(phi1: float, phi2: float, phi3: float, phi4: float, kappa: float,
                 table: BoundTable | None = None, *, split: bool = False,
                 cfg: dict | None = None):
    """Lower bound for the double sum over N^phi1 <= p1 < N^phi2, N^phi3 <= p2 < N^phi4."""
    eps = 1e-15
    if not (0 < phi1 <= phi2 <= phi3 <= phi4) or not kappa > 0 \
            or 2 * phi2 + phi4 > 0.5 + eps or phi2 + phi4 + kappa > 0.5 + eps:
        raise DomainError("prop43 needs 0 < phi1 <= phi2 <= phi3 <= phi4, "
                          "2 phi2 + phi4 <= 1/2 and phi2 + phi4 + kappa <= 1/2")
    cfg = cfg or _configs(1.0)
    main, saving = _double_bound(phi1, phi2, lambda t: (0.5 - phi4 - t) / kappa,
                                 lambda t: (0.5 - phi3 - t) / kappa, kappa,
                                 table or default_bound_table(), cfg[2], cfg[1])
    return _result(main, saving, split, +1)


def prop44_upper(kappa: float, phi: float, s: float, s_prime: float, psi: float,
                 *, split: bool = False, cfg: QuadratureConfig | None = None):
    """Upper bound 8 int_{(1/2-phi)/kappa}^s (A - psi)/(t(1-2 kappa t)) for a sum over
    N^{1/2 - s kappa} <= p < N^phi."""
    if not (2.0 <= s <= 3.0 <= s_prime <= 5.0):
        raise DomainError("prop44 needs 2 <= s <= 3 <= s' <= 5")
    if not kappa > 0 or not (0.25 <= 0.5 - s * kappa + 1e-15 and 0.5 - s * kappa < phi):
        raise DomainError("prop44 needs 1/4 <= 1/2 - s kappa < phi")
    if psi < 0:
        raise DomainError("psi must be nonnegative")
    lo = (0.5 - phi) / kappa
    main = _classical_upper(lo, s, kappa, cfg or _configs(1.0)[1])
    saving = 8.0 * psi * (_log_weight(s, kappa) - _log_weight(lo, kappa))
    return _result(main, saving, split, -1)


# ---------------------------------------------------------------------------
# Terms

def h_lower_refined(table: BoundTable, s: float) -> float:
    """h(s) >= h(s') + int_{s-1}^{s'-1} H(t)/t dt, s' the first grid point >= s."""
    if s > S_GRID[-1] + 1e-12:
        return 0.0
    if s < S_GRID[0]:
        return table.h_bound(s)
    j = next(i for i in range(len(S_GRID)) if S_GRID[i] >= s - 1e-12)
    lo, hi = s - 1.0, S_GRID[j] - 1.0
    tail = math.fsum(table.H[i] * math.log(b / a) for a, b, i in _step_cells(lo, hi, first=3))
    return table.h[j] + tail


def g4_coefficients(kappa1: float) -> dict[int, float]:
    """Weights of H(s_i) in the G4 minorant."""
    lo, hi = 1.0 / (4 * kappa1), 1.0 / (2 * kappa1) - 1.0
    return {i: _log_weight(b, kappa1) - _log_weight(a, kappa1)
            for a, b, i in _step_cells(lo, hi, first=3)}


def psi_slices(kappa1: float, psi: PsiTable) -> list[tuple[int, float, float]]:
    """(i, lower, upper) t-ranges carrying the Psi saving at s_i."""
    start, stop = 1.0 / (6 * kappa1), 1.0 / (4 * kappa1)
    out = []
    for i in psi.indices():
        lo = start if i == psi.indices()[0] else max(S_GRID[i - 1], start)
        hi = S_GRID[i]
        if lo < hi and hi <= stop + 1e-12:
            out.append((i, lo, hi))
    return out


def g3_coefficients(kappa1: float, psi: PsiTable) -> dict[int, float]:
    return {i: _log_weight(b, kappa1) - _log_weight(a, kappa1)
            for i, a, b in psi_slices(kappa1, psi)}


def _h_cell_coefficients(weight, lo, hi):
    """g_i = int over cell i of [lo, hi] of weight(u) du."""
    cfg = QuadratureConfig(abs_tol=1e-13)
    return {i: integrate_1d(weight, a, b, cfg, vectorized=True).value
            for a, b, i in _step_cells(lo, hi, first=1)}


def g5_coefficients(k1: float, k2: float) -> dict[int, float]:
    u0, u1, u2 = (0.5 - 2 * k2) / k1, (0.5 - k1 - k2) / k1, (0.5 - 2 * k1) / k1
    w1 = lambda u: np.log(2 * k2 / (1 - 2 * k2 - 2 * k1 * u)) / (u * (1 - 2 * k1 * u))
    w2 = lambda u: np.log(1 / (2 * k1) - 1 - u) / (u * (1 - 2 * k1 * u))
    out = _h_cell_coefficients(w1, u0, u1)
    for i, v in _h_cell_coefficients(w2, u1, u2).items():
        out[i] = out.get(i, 0.0) + v
    return out


def g6_coefficients(k1: float, k2: float) -> dict[int, float]:
    u0, u1 = (0.5 - 2 * k2) / k1, (0.5 - k1 - k2) / k1
    v1 = lambda u: (np.log(k2 * (1 - 2 * k1 - 2 * k1 * u) / (k1 * (1 - 2 * k2 - 2 * k1 * u)))
                    / (u * (1 - 2 * k1 * u)))
    v2 = lambda u: (np.log((1 - 2 * k1 - 2 * k1 * u) * (1 - 2 * k2 - 2 * k1 * u) / (4 * k1 * k2))
                    / (u * (1 - 2 * k1 * u)))
    out = _h_cell_coefficients(v1, 2.0, u0)
    for i, v in _h_cell_coefficients(v2, u0, u1).items():
        out[i] = out.get(i, 0.0) + v
    return out


def _omega_fn(cap_mode: bool):
    grid = omega_grid()
    return grid.capped if cap_mode else grid


def _quadruple(k1, k2, upper4, cap_mode, cfg):
    """The two-piece quadruple integrals of omega((1-t1-t2-t3-t4)/t2)."""
    om = _omega_fn(cap_mode)
    kinks = (2.0, 3.0, OMEGA_CAP_FROM) if cap_mode else (2.0, 3.0)

    def f(t1, t2, t3, t4):
        return om((1.0 - t1 - t2 - t3 - t4) / t2) / (t2 * t2 * t3 * t4)

    def t4_points(t1, t2, t3):
        return [1.0 - t1 - t2 - t3 - c * t2 for c in kinks]

    def part(lo, hi, w1):
        lims = [(lo, hi), (lambda t1: t1, k2), (lambda t1, t2: t2, k2), upper4]
        g = lambda t1, t2, t3, t4: w1(t1) * f(t1, t2, t3, t4)
        return integrate_nested(g, lims, cfg, vectorized=True,
                                points=[None, None, None, t4_points]).value

    return (36.0 / 5.0 * part(k1, 0.1, lambda t: 1.0 / (t * (1.0 - t)))
            + 8.0 * part(0.1, k2, lambda t: 1.0 / t))


def term_F7(p: KappaParams, cfg=None) -> float:
    hi = 2.0 / (1.0 - 6.0 * p.kappa1) - 1.0
    return 8.0 * integrate_1d(lambda t: np.log(t - 1.0) / t, 2.0, hi, cfg, vectorized=True).value


def term_F8(p: KappaParams, cfg=None) -> float:
    f1 = lambda t: np.log(2.0 - 3.0 * t) / (t * (1.0 - t) ** 2)
    f2 = lambda t: np.log(2.0 - 3.0 * t) / (t * (1.0 - t))
    return (36.0 / 5.0 * integrate_1d(f1, p.kappa1, 0.1, cfg, vectorized=True).value
            + 8.0 * integrate_1d(f2, 0.1, 1.0 / 3.0, cfg, vectorized=True).value)


def term_F9(p: KappaParams, cfg=None) -> float:
    k1 = p.kappa1
    f = lambda t: np.log((1.0 + 6.0 * k1 - 2.0 * t) / (1.0 - 6.0 * k1)) / (t * (1.0 - t))
    return 8.0 * integrate_1d(f, p.kappa2, 0.5 - 3.0 * k1, cfg, vectorized=True).value


def term_F10(p: KappaParams, cfg=None) -> float:
    return _quadruple(p.kappa1, p.kappa2, (lambda t1, t2, t3: t3, p.kappa2),
                      p.omega_cap_mode, cfg)


def term_F11(p: KappaParams, cfg=None) -> float:
    k1 = p.kappa1
    return _quadruple(k1, p.kappa2, (p.kappa2, lambda t1, t2, t3: 0.5 - 2.0 * k1 - t3),
                      p.omega_cap_mode, cfg)


@dataclass
class TermBreakdown:
    F: dict
    G: dict
    raw_integrals: dict
    final: float
    params: dict = field(default_factory=dict)

    @staticmethod
    def assemble(F: dict) -> float:
        return 0.25 * (3 * F[1] + F[2] - F[3] - F[4] + F[5] + F[6]
                       - 2 * F[7] - F[8] - F[9] - F[10] - F[11])

    def main(self, i: int) -> float:
        """The classical linear-sieve part of F_i."""
        if i in (3, 4):
            return self.raw_integrals[i]
        if i in (2, 5, 6):
            return self.F[i] - self.G[i]
        return self.F[i]

    def to_dict(self) -> dict:
        return {"F": {str(k): v for k, v in sorted(self.F.items())},
                "G": {str(k): v for k, v in sorted(self.G.items())},
                "raw": {str(k): v for k, v in sorted(self.raw_integrals.items())},
                "final": self.final, "params": self.params}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "TermBreakdown":
        ints = lambda m: {int(k): float(v) for k, v in m.items()}
        return cls(ints(d["F"]), ints(d["G"]), ints(d["raw"]), float(d["final"]),
                   d.get("params", {}))

    @classmethod
    def from_json(cls, text: str) -> "TermBreakdown":
        return cls.from_dict(json.loads(text))


def _named(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except ConvergenceError as e:
        raise ConvergenceError(f"{name}: {e}", e.result) from e


def compute_terms(params: KappaParams | None = None, tables: BoundTable | None = None,
                  psi: PsiTable | None = None, *, double_sieve: bool = True,
                  tol_scale: float = 1.0) -> TermBreakdown:
    """Evaluate F1..F11 and G2..G6.  ``double_sieve=False`` zeroes every saving."""
    p = params or reference_params()
    tables = tables or default_bound_table()
    psi = psi or psi_table()
    cfg = _configs(tol_scale)
    k1, k2 = p.kappa1, p.kappa2
    if not double_sieve:
        tables = BoundTable.zero()
        psi = PsiTable({i: type(r)(r.i, r.s, r.s_prime, psi1=0.0) for i, r in psi.rows.items()})

    F, G, raw = {}, {}, {}
    F[1] = 8.0 * lower_sieve_a(1 / (2 * k1)) + 8.0 * tables.h_bound(1 / (2 * k1))
    G[2] = 8.0 * h_lower_refined(tables, 1 / (2 * k2))
    F[2] = 8.0 * lower_sieve_a(1 / (2 * k2)) + G[2]

    # N^kappa1 <= p < N^{1/4}: prop41_upper.
    main_a, G[4] = _named("F4", prop41_upper, k1, 0.25, k1, tables, split=True, cfg=cfg[1])
    # N^{1/4} <= p < N^{1/2-3 kappa1}: classical.
    raw[4] = main_a + _named("F4", _classical_upper, 3.0, 1 / (4 * k1), k1, cfg[1])
    # Upsilon_3: Psi slices above 1/(6 kappa1), classical between them and 1/(4 kappa1).
    slices = psi_slices(k1, psi)
    psi_part = 0.0
    covered = 1 / (6 * k1)
    raw3 = main_a
    for i, lo, hi in slices:
        m, sv = _named("F3", prop44_upper, k1, 0.5 - lo * k1, S_GRID[i], psi[i].s_prime,
                       psi.best(i), split=True, cfg=cfg[1])
        raw3 += m
        psi_part += sv
        covered = hi
    raw3 += _named("F3", _classical_upper, covered, 1 / (4 * k1), k1, cfg[1])
    raw[3] = raw3
    G[3] = G[4] + psi_part
    F[3] = raw[3] - G[3]
    F[4] = raw[4] - G[4]

    F5m, G[5] = _named("F5", prop42_lower, k1, k2, k1, tables, split=True, cfg=cfg)
    F[5] = F5m + G[5]

    # Upsilon_6: slices (a), (b) by prop43_lower, (c) classical.
    ma, sa = _named("F6", prop43_lower, k1, k2, k2, 0.5 - 2 * k2, k1, tables, split=True, cfg=cfg)
    mb, sb = _named("F6", prop43_lower, k1, 1.5 * k1, 0.5 - 2 * k2, 0.5 - 3 * k1, k1, tables,
                    split=True, cfg=cfg)
    # (c) lies outside prop43_lower's hypotheses; only the a-part is used.
    mc, _ = _named("F6", _double_bound, 1.5 * k1, k2, lambda t: (3 * k1 - t) / k1,
                   lambda t: (2 * k2 - t) / k1, k1, BoundTable.zero(), cfg[2], cfg[1])
    G[6] = sa + sb
    F[6] = ma + mb + mc + G[6]

    F[7] = _named("F7", term_F7, p, cfg[1])
    F[8] = _named("F8", term_F8, p, cfg[1])
    F[9] = _named("F9", term_F9, p, cfg[1])
    F[10] = _named("F10", term_F10, p, cfg[4])
    F[11] = _named("F11", term_F11, p, cfg[4])

    final = TermBreakdown.assemble(F)
    return TermBreakdown(F, G, raw, final, params=asdict(p) | {"double_sieve": double_sieve})


def constant_F(params: KappaParams | None = None, **kw) -> float:
    return compute_terms(params, **kw).final


def savings_split(terms: TermBreakdown) -> tuple[float, float]:
    """Contributions to the final constant of the full double sieve (H, h) and
    of its simplified Psi version."""
    G = terms.G
    first = 0.25 * (G[2] + 2 * G[4] + G[5] + G[6])
    second = 0.25 * (G[3] - G[4])
    return first, second


@dataclass
class ScanResult:
    best: KappaParams | None
    best_value: float | None
    ranked: list
    skipped: list


def scan(grid, **kw) -> ScanResult:
    """Evaluate constant_F over (kappa1, kappa2) pairs or KappaParams; invalid points
    are skipped and reported.  Ties keep the earlier grid point."""
    ranked, skipped = [], []
    for item in grid:
        if isinstance(item, KappaParams):
            params = item
        else:
            k1, k2 = item
            try:
                params = KappaParams(float(k1), float(k2))
            except DomainError as e:
                skipped.append(((k1, k2), str(e)))
                continue
        ranked.append((params, constant_F(params, **kw)))
    order = sorted(range(len(ranked)), key=lambda j: (-ranked[j][1], j))
    ranked = [ranked[j] for j in order]
    if not ranked:
        return ScanResult(None, None, [], skipped)
    return ScanResult(ranked[0][0], ranked[0][1], ranked, skipped)
