"""Brute-force arithmetic at desk scale: D(N), D_{1,2}(N), the singular
series C_N, Theta(N), sieve counts S(A; P(N), z) for A = {N - p : p <= N},
and an exact check of Buchstab's identity.

Sieve convention: P(z) is the product of primes q <= z with (q, N) = 1, so
S(A; z) counts a in A having no such prime factor.  The Buchstab identity
then reads

    S(A; z2) = S(A; z1) - sum_{z1 < q <= z2, (q, N) = 1} S(A_q; q - 1),

with A_q = {a/q : a in A, q | a}.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, astuple
from functools import cached_property, lru_cache

import numpy as np

from .errors import DomainError, ResourceError

FLAT_LIMIT = 10**7
MAX_LIMIT = 10**8
_SEGMENT = 1 << 22


@dataclass(frozen=True, eq=False)
class FactorTable:
    """Smallest prime factor of every integer up to ``limit`` (spf[0] = spf[1] = 0)."""

    limit: int
    spf: np.ndarray

    @cached_property
    def big_omega_array(self) -> np.ndarray:
        m = np.arange(self.limit + 1, dtype=np.int64)
        count = np.zeros(self.limit + 1, dtype=np.int8)
        live = m > 1
        while live.any():
            idx = np.nonzero(live)[0]
            count[idx] += 1
            m[idx] //= self.spf[m[idx]]
            live[idx] = m[idx] > 1
        return count

    @cached_property
    def primes(self) -> np.ndarray:
        n = np.arange(self.limit + 1)
        return n[(n >= 2) & (self.spf == n)]

    def is_prime(self, n: int) -> bool:
        self._check(n)
        return n >= 2 and int(self.spf[n]) == n

    def _check(self, n):
        if not 0 <= n <= self.limit:
            raise DomainError(f"{n} outside factor table range 0..{self.limit}")


def _flat_spf(limit):
    spf = np.zeros(limit + 1, dtype=np.uint32)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            seg = spf[p * p::p]
            seg[seg == 0] = p
    n = np.arange(limit + 1, dtype=np.uint32)
    rest = (spf == 0) & (n >= 2)
    spf[rest] = n[rest]
    return spf


def _segmented_spf(limit):
    root = math.isqrt(limit)
    base = _flat_spf(root)
    small = np.nonzero((base == np.arange(root + 1)) & (np.arange(root + 1) >= 2))[0]
    spf = np.zeros(limit + 1, dtype=np.uint32)
    for lo in range(0, limit + 1, _SEGMENT):
        hi = min(lo + _SEGMENT, limit + 1)
        block = spf[lo:hi]
        for p in small:
            p = int(p)
            start = max(p * p, (lo + p - 1) // p * p)
            if start >= hi:
                continue
            view = block[start - lo::p]
            view[view == 0] = p
        n = np.arange(lo, hi, dtype=np.uint32)
        rest = (block == 0) & (n >= 2)
        block[rest] = n[rest]
    return spf


def build_spf(limit: int, cap: int = MAX_LIMIT) -> FactorTable:
    """Smallest-prime-factor table; segmented above 10^7, refused above ``cap``."""
    if limit < 2:
        raise DomainError("build_spf needs limit >= 2")
    if limit > cap:
        raise ResourceError(f"limit {limit} exceeds the configured cap {cap}")
    spf = _flat_spf(limit) if limit <= FLAT_LIMIT else _segmented_spf(limit)
    return FactorTable(limit, spf)


def big_omega(n: int, table: FactorTable) -> int:
    """Number of prime factors of n with multiplicity; Omega(1) = 0."""
    if n < 1:
        raise DomainError("big_omega needs n >= 1")
    table._check(n)
    k = 0
    while n > 1:
        n //= int(table.spf[n])
        k += 1
    return k


def _check_N(N, table=None):
    if N < 4 or N % 2:
        raise DomainError("N must be even and >= 4")
    if table is not None:
        table._check(N)


def _shifted(N, table):
    """a = N - p for primes p <= N."""
    pr = table.primes
    return N - pr[pr <= N]


def count_D(N: int, table: FactorTable) -> int:
    """#{p <= N : N - p prime}."""
    _check_N(N, table)
    return int(np.count_nonzero(table.big_omega_array[_shifted(N, table)] == 1))


def count_D12(N: int, table: FactorTable) -> int:
    """#{p <= N : Omega(N - p) <= 2}."""
    _check_N(N, table)
    a = _shifted(N, table)
    a = a[a >= 1]
    return int(np.count_nonzero(table.big_omega_array[a] <= 2))


@lru_cache(maxsize=8)
def _odd_primes(pmax: int) -> np.ndarray:
    spf = _flat_spf(pmax)
    n = np.arange(pmax + 1)
    return n[(n >= 3) & (spf == n)].astype(float)


def _odd_prime_divisors(N):
    out, m, q = [], N, 3
    while m % 2 == 0:
        m //= 2
    while q * q <= m:
        if m % q == 0:
            out.append(q)
            while m % q == 0:
                m //= q
        q += 2
    if m > 1:
        out.append(m)
    return out


def singular_series_with_tail(N: int, pmax: int = 10**6) -> tuple[float, float]:
    """C_N with the infinite product truncated at ``pmax``, and a bound on the
    truncation error of that product (it lies in [value - tail, value])."""
    if N % 2 or N < 2:
        raise DomainError("singular series needs even N")
    if pmax < 1000:
        raise DomainError("pmax must be at least 1000")
    p = _odd_primes(pmax)
    product = math.exp(math.fsum(np.log1p(-1.0 / (p - 1.0) ** 2)))
    finite = math.prod((q - 1) / (q - 2) for q in _odd_prime_divisors(N))
    value = finite * product
    # sum_{p > pmax} -log(1 - 1/(p-1)^2) <= 2 sum_{n >= pmax} 1/n^2 < 2/(pmax - 1)
    tail = value * (2.0 / (pmax - 1))
    return value, tail


def singular_series(N: int, pmax: int = 10**6) -> float:
    return singular_series_with_tail(N, pmax)[0]


def theta_of_N(N: int, pmax: int = 10**6) -> float:
    """Theta(N) = C_N N / (log N)^2."""
    _check_N(N)
    return singular_series(N, pmax) * N / math.log(N) ** 2


def _least_coprime_factor(N, table):
    """lcf[v] = least prime q | v with (q, N) = 1, or N + 1 if none, for 0 <= v <= N."""
    big = N + 1
    lcf = np.full(N + 1, big, dtype=np.int64)
    pr = table.primes[table.primes <= N]
    for q in pr[::-1]:
        q = int(q)
        if N % q:
            lcf[q::q] = q
    return lcf


def sieve_count(N: int, z: float, table: FactorTable) -> int:
    """S(A; P(N), z): elements N - p with no prime factor q <= z, (q, N) = 1."""
    _check_N(N, table)
    if z < 2:
        raise DomainError("sieve_count needs z >= 2")
    a = _shifted(N, table)
    a = a[a >= 1]
    sifted = np.zeros(N + 1, dtype=bool)
    for q in table.primes[table.primes <= min(z, N)]:
        q = int(q)
        if N % q:
            sifted[q::q] = True
    return int(np.count_nonzero(~sifted[a]))


def buchstab_check(N: int, z1: float, z2: float, table: FactorTable) -> tuple[int, int]:
    """Both sides of S(A; z2) = S(A; z1) - sum_{z1<q<=z2} S(A_q; q-1)."""
    _check_N(N, table)
    if not 2 <= z1 <= z2 <= N:
        raise DomainError("buchstab_check needs 2 <= z1 <= z2 <= N")
    lhs = sieve_count(N, z2, table)
    a = _shifted(N, table)
    a = a[a >= 1]
    lcf = _least_coprime_factor(N, table)
    rhs = int(np.count_nonzero(lcf[a] > z1))
    # enumerate pairs (q, a/q) over distinct prime factors q of each a
    m = a.copy()
    while True:
        live = m > 1
        if not live.any():
            break
        q = table.spf[m[live]].astype(np.int64)
        owners = a[live]
        sel = (q > z1) & (q <= z2) & (N % q != 0)
        b = owners[sel] // q[sel]
        rhs -= int(np.count_nonzero(lcf[b] > q[sel] - 1))
        mm = m[live]
        while True:
            div = mm % q == 0
            if not div.any():
                break
            mm[div] //= q[div]
        m[live] = mm
    return lhs, rhs


@dataclass(frozen=True)
class EmpiricalReport:
    N: int
    D: int
    D12: int
    C_N: float
    theta: float
    ratio_goldbach: float
    ratio_chen: float

    CSV_HEADER = ("N", "D", "D12", "C_N", "Theta", "D_over_2Theta", "D12_over_Theta")

    def csv_row(self) -> list[str]:
        N, D, D12, *reals = astuple(self)
        return [str(N), str(D), str(D12)] + [f"{x:.8g}" for x in reals]


def empirical_report(N_list, pmax: int = 10**6, table: FactorTable | None = None
                     ) -> list[EmpiricalReport]:
    N_list = list(N_list)
    if not N_list:
        return []
    for N in N_list:
        _check_N(N)
    table = table or build_spf(max(N_list))
    rows = []
    for N in N_list:
        D, D12 = count_D(N, table), count_D12(N, table)
        C = singular_series(N, pmax)
        theta = C * N / math.log(N) ** 2
        rows.append(EmpiricalReport(N, D, D12, C, theta, D / (2 * theta), D12 / theta))
    return rows


def write_report_csv(rows, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(EmpiricalReport.CSV_HEADER)
    for r in rows:
        w.writerow(r.csv_row())
