"""Arithmetic tables and multiplicative weights.

Provides:
- SpfTable / build_spf: smallest-prime-factor sieve up to a limit.
- factorize / omega / mu_squared / tau: exact factor data from the table.
- MultiplicativeWeight / weight_value: the weight families g used by the
  moment sums (unit, y^omega, mu^2 y^omega, and the character-splitting
  indicator h_chi).
- class_prime_sums: empirical prime sums per character value class,
  with li(x) for density comparison.
- log_integral: li(x) = integral from 2 of dt/log t.

All tables are immutable after construction and safe to share across
worker processes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.integrate import quad

from .characters import DirichletCharacter

LIMIT_CAP = 10**8


@dataclass(frozen=True, eq=False)
class SpfTable:
    """Smallest prime factor of every n up to a limit.

    Attributes:
        limit: largest indexable n.
        spf: uint32 array of length limit+1; spf[n] is the smallest
            prime factor of n for n >= 2 (spf[0] = 0 and spf[1] = 1 are
            sentinels).
    """

    limit: int
    spf: np.ndarray


def build_spf(x: int, cap: int = LIMIT_CAP) -> SpfTable:
    """Sieve smallest prime factors for all 2 <= n <= x.

    Args:
        x: table limit, 2 <= x <= cap.
        cap: memory guard (4 bytes per entry).

    Returns:
        SpfTable with spf[p] = p at primes and spf[n] <= sqrt(n) or
        spf[n] = n everywhere.

    Raises:
        ValueError: x out of range.
    """
    if x < 2 or x > cap:
        raise ValueError(f"sieve limit {x} outside [2, {cap}]")
    spf = np.zeros(x + 1, dtype=np.uint32)
    spf[1] = 1
    # Ascending p and write-once-on-zero keep the smallest factor.
    for p in range(2, math.isqrt(x) + 1):
        if spf[p] == 0:
            spf[p] = p
            sl = spf[p * p :: p]
            sl[sl == 0] = p
    rest = np.nonzero(spf == 0)[0]
    spf[rest] = rest
    spf.flags.writeable = False
    return SpfTable(x, spf)


def factorize(n: int, table: SpfTable) -> List[Tuple[int, int]]:
    """Exact factorization of n, primes ascending.

    Args:
        n: 2 <= n <= table.limit (n = 1 returns the empty list).
        table: smallest-prime-factor table.

    Returns:
        List of (prime, exponent) pairs.

    Raises:
        ValueError: n out of range.
    """
    if n == 1:
        return []
    if n < 1 or n > table.limit:
        raise ValueError(f"{n} outside table range [1, {table.limit}]")
    spf = table.spf
    out: List[Tuple[int, int]] = []
    while n > 1:
        p = int(spf[n])
        a = 0
        while n % p == 0:
            n //= p
            a += 1
        out.append((p, a))
    return out


def omega(n: int, table: SpfTable) -> int:
    """Number of distinct prime factors."""
    return len(factorize(n, table))


def mu_squared(n: int, table: SpfTable) -> int:
    """Squarefree indicator: 1 if n is squarefree, else 0."""
    return int(all(a == 1 for _, a in factorize(n, table)))


def tau(n: int, table: SpfTable) -> int:
    """Number of divisors."""
    t = 1
    for _, a in factorize(n, table):
        t *= a + 1
    return t


def primes_up_to(x: int, table: SpfTable) -> np.ndarray:
    """All primes <= x as an int64 array."""
    if x > table.limit:
        raise ValueError(f"{x} exceeds table limit {table.limit}")
    ns = np.arange(2, x + 1, dtype=np.int64)
    return ns[table.spf[2 : x + 1] == ns]


class WeightFamily(enum.Enum):
    """The closed family of multiplicative weights g."""

    UNIT = "unit"
    Y_OMEGA = "yomega"
    MU2_Y_OMEGA = "mu2yomega"
    H_CHI = "hchi"


@dataclass(frozen=True)
class MultiplicativeWeight:
    """A nonnegative multiplicative weight g with g(1) = 1.

    Attributes:
        family: which of the four closed families.
        y: parameter of the omega families (ignored otherwise).
        chi: the splitting character for H_CHI (required there); h_chi
            is 1 at primes chi maps to 1 and 0 at all other primes, and
            constant on prime powers.
    """

    family: WeightFamily
    y: float = 1.0
    chi: Optional[DirichletCharacter] = None

    def __post_init__(self):
        if self.family in (WeightFamily.Y_OMEGA, WeightFamily.MU2_Y_OMEGA):
            if self.y < 0:
                raise ValueError("y must be nonnegative")
        if self.family is WeightFamily.H_CHI and self.chi is None:
            raise ValueError("H_CHI weight requires a character")


def weight_value(g: MultiplicativeWeight, n: int, table: SpfTable) -> float:
    """g(n) for the given family.

    UNIT -> 1; Y_OMEGA -> y^omega(n); MU2_Y_OMEGA -> mu^2(n) y^omega(n);
    H_CHI -> product over p | n of [chi(p) = 1].
    """
    if g.family is WeightFamily.UNIT:
        return 1.0
    fac = factorize(n, table)
    if g.family is WeightFamily.Y_OMEGA:
        return float(g.y) ** len(fac)
    if g.family is WeightFamily.MU2_Y_OMEGA:
        if any(a > 1 for _, a in fac):
            return 0.0
        return float(g.y) ** len(fac)
    chi = g.chi
    for p, _ in fac:
        e = chi.evaluate(p)
        if e.is_zero or e.value != 0:
            return 0.0
    return 1.0


@dataclass(frozen=True)
class ClassWeights:
    """Per-class prime densities z_k with their total y = sum z_k."""

    r: int
    z: Tuple[float, ...]

    @property
    def y(self) -> float:
        return float(sum(self.z))


@dataclass(frozen=True)
class ClassPrimeSums:
    """Empirical g-weighted prime sums split by character value class.

    Attributes:
        r: character order (number of classes).
        sums: sums[k] = sum of g(p) over p <= x with chi(p) = zeta_r^k.
        excluded: sum of g(p) over p <= x dividing the modulus (these
            primes belong to no class).
        li_value: li(x), for z_k ~ sums[k] / li(x) density estimates.
    """

    r: int
    sums: Tuple[float, ...]
    excluded: float
    li_value: float

    def z_estimates(self) -> ClassWeights:
        """Empirical class densities sums[k] / li(x)."""
        return ClassWeights(self.r, tuple(s / self.li_value for s in self.sums))


def log_integral(x: float) -> float:
    """li(x) = integral from 2 to x of dt / log t, by adaptive quadrature.

    The lower limit 2 (offset logarithmic integral) avoids the t = 1
    singularity; only ratios of li values matter downstream.
    """
    if x < 2:
        raise ValueError("li(x) defined here for x >= 2")
    if x == 2:
        return 0.0
    val, _ = quad(lambda t: 1.0 / math.log(t), 2.0, x, limit=200)
    return val


def class_prime_sums(
    chi: DirichletCharacter,
    g: MultiplicativeWeight,
    x: int,
    table: SpfTable,
) -> ClassPrimeSums:
    """g-weighted prime sums per character value class, up to x.

    Args:
        chi: the character whose value classes partition the primes.
        g: weight applied to each prime.
        x: range limit, x <= table.limit.
        table: sieve table covering x.

    Returns:
        ClassPrimeSums; sums over classes plus the excluded primes
        dividing the modulus add up to the full prime sum exactly.
    """
    sums = [0.0] * chi.order
    excluded = 0.0
    for p in primes_up_to(x, table):
        p = int(p)
        w = weight_value(g, p, table)
        e = chi.evaluate(p)
        if e.is_zero:
            excluded += w
        else:
            sums[e.value] += w
    return ClassPrimeSums(chi.order, tuple(sums), excluded, log_integral(max(x, 2)))
