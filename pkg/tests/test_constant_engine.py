import math

import pytest
from scipy import integrate

from chensieve.bound_tables import BoundTable, psi_table
from chensieve.constant_engine import (KappaParams, TermBreakdown, compute_terms, g3_coefficients,
                                       g4_coefficients, g5_coefficients, g6_coefficients,
                                       h_lower_refined, reference_params, prop41_upper, prop42_lower,
                                       prop43_lower, prop44_upper, savings_split, scan, term_F7,
                                       term_F8, term_F9)
from chensieve.bound_tables import S_GRID
from chensieve.errors import DomainError
from chensieve.special_functions import upper_sieve_A

K1, K2 = 1 / 13.27, 1 / 8.24


def test_params_validation():
    p = reference_params()
    assert p.kappa1 == K1 and p.delta == 0
    with pytest.raises(DomainError):
        KappaParams(0.1, 0.1)
    with pytest.raises(DomainError):
        KappaParams(0.05, 0.1)
    with pytest.raises(DomainError):
        KappaParams(K1, K2, delta=0.01)


def test_prop41_zero_table_is_classical():
    lo, hi = 0.25 / K1, (0.5 - K1) / K1
    ref = 8 * integrate.quad(lambda t: upper_sieve_A(t) / (t * (1 - 2 * K1 * t)), lo, hi,
                             points=[5.0], epsabs=1e-12)[0]
    assert prop41_upper(K1, 0.25, K1, BoundTable.zero()) == pytest.approx(ref, abs=1e-8)


def test_prop41_saving_matches_g4(table):
    _, saving = prop41_upper(K1, 0.25, K1, table, split=True)
    g = g4_coefficients(K1)
    assert min(g) == 14 and max(g) == 29
    assert g[14] == pytest.approx(math.log(2 * K1 * S_GRID[14] / (1 - 2 * K1 * S_GRID[14])))
    assert saving == pytest.approx(8 * sum(g[i] * table.H[i] for i in g), abs=1e-14)
    assert saving >= 0.008860


def test_prop41_empty_and_domain():
    assert prop41_upper(0.2, 0.2, K1) == 0.0
    with pytest.raises(DomainError):
        prop41_upper(0.2, 0.3, K1)


def test_prop42_saving_matches_g5(table):
    _, saving = prop42_lower(K1, K2, K1, table, split=True)
    g = g5_coefficients(K1, K2)
    assert min(g) == 15 and max(g) == 27
    assert saving == pytest.approx(8 * sum(g[i] * table.h[i] for i in g), abs=1e-9)
    assert saving >= 0.001359


def test_prop42_main_against_scipy():
    main = prop42_lower(K1, K2, K1, BoundTable.zero())
    from chensieve.special_functions import lower_sieve_a
    f = lambda u, t: lower_sieve_a(u) / (t * u * (1 - 2 * t - 2 * K1 * u))
    ref = 8 * integrate.dblquad(f, K1, K2, lambda t: (0.5 - K2 - t) / K1,
                                lambda t: (0.5 - 2 * t) / K1, epsabs=1e-10)[0]
    assert main == pytest.approx(ref, abs=1e-6)


def test_prop42_degenerate_and_domain():
    assert prop42_lower(0.1, 0.1, K1) == 0.0
    with pytest.raises(DomainError):
        prop42_lower(0.1, 0.2, K1)


def test_prop43_saving_matches_g6(table):
    sa = prop43_lower(K1, K2, K2, 0.5 - 2 * K2, K1, table, split=True)[1]
    sb = prop43_lower(K1, 1.5 * K1, 0.5 - 2 * K2, 0.5 - 3 * K1, K1, table, split=True)[1]
    g = g6_coefficients(K1, K2)
    assert min(g) == 1 and max(g) == 21
    assert sa + sb == pytest.approx(8 * sum(g[i] * table.h[i] for i in g), abs=1e-9)
    assert sa + sb >= 0.060469


def test_prop43_degenerate_and_domain():
    assert prop43_lower(K1, K2, 0.2, 0.2, K1) == 0.0
    with pytest.raises(DomainError):
        prop43_lower(K1, K2, 0.1, 0.3, K1)


def test_prop44():
    classical = prop44_upper(K1, 0.5 - 2.8 * K1, 2.9, 3.19, 0.0)
    with_psi, saving = prop44_upper(K1, 0.5 - 2.8 * K1, 2.9, 3.19, 0.001056651, split=True)
    assert with_psi == classical
    g = g3_coefficients(K1, psi_table())
    assert saving == pytest.approx(8 * 0.001056651 * g[9], abs=1e-15)
    with pytest.raises(DomainError):
        prop44_upper(K1, 0.3, 3.5, 4.0, 0.0)


def test_g3_first_coefficient():
    g = g3_coefficients(K1, psi_table())
    assert g[3] == pytest.approx(math.log(4 * K1 * S_GRID[3] / (1 - 2 * K1 * S_GRID[3])))
    assert sorted(g) == list(range(3, 11))


def test_h_refined_bound(table):
    v = h_lower_refined(table, 4.12)
    assert v == pytest.approx(table.h[22] + table.H[12] * math.log(3.2 / 3.12))
    assert v >= table.h[22]
    assert h_lower_refined(table, 6.635) == 0.0


def test_simple_terms():
    p = reference_params()
    assert term_F7(p) == pytest.approx(0.585179, abs=5e-5)
    assert term_F8(p) == pytest.approx(5.279581, abs=5e-5)
    assert term_F9(p) == pytest.approx(5.372410, abs=5e-5)


def test_F8_against_scipy():
    f1 = lambda t: math.log(2 - 3 * t) / (t * (1 - t) ** 2)
    f2 = lambda t: math.log(2 - 3 * t) / (t * (1 - t))
    ref = 36 / 5 * integrate.quad(f1, K1, 0.1)[0] + 8 * integrate.quad(f2, 0.1, 1 / 3)[0]
    assert term_F8(reference_params()) == pytest.approx(ref, abs=1e-9)


def test_assembly_identity(terms):
    assert TermBreakdown.assemble(terms.F) == terms.final
    assert terms.F[3] == terms.raw_integrals[3] - terms.G[3]
    assert terms.F[4] == terms.raw_integrals[4] - terms.G[4]


def test_all_terms_nonnegative(terms):
    assert all(v >= 0 for v in terms.F.values()) and all(v > 0 for v in terms.G.values())


def test_json_round_trip(terms):
    back = TermBreakdown.from_json(terms.to_json())
    assert back.F == terms.F and back.G == terms.G and back.final == terms.final


def test_cap_mode_dominates(terms, terms_exact_omega):
    assert terms_exact_omega.F[10] <= terms.F[10]
    assert terms_exact_omega.F[11] <= terms.F[11]


def test_savings_only_help(terms, terms_no_savings):
    assert terms_no_savings.final < terms.final
    assert all(v == 0 for v in terms_no_savings.G.values())
    assert terms_no_savings.F[4] > terms.F[4]


def test_zero_table_zeroes_G4():
    t = compute_terms(reference_params(), BoundTable.zero())
    assert t.G[4] == 0.0


def test_savings_split_sums(terms):
    a, b = savings_split(terms)
    assert a + b == pytest.approx(sum(terms.G.values()) / 4)


def test_scan_invalid_only():
    res = scan([(0.1, 0.1)])
    assert res.best is None and res.ranked == [] and len(res.skipped) == 1


def test_scan_singleton(terms):
    res = scan([reference_params()])
    assert res.best_value == terms.final
