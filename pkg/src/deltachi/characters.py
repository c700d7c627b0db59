"""Dirichlet characters mod q with exact root-of-unity arithmetic.

Character values are never stored as floats.  A value is either zero (on
residues sharing a factor with the modulus) or a power zeta_r^k of the
primitive r-th root of unity for the character's exact order r, and only
the integer exponent k is kept.  Complex numbers appear at the very last
step, when a finished sum is converted for output.

Provides:
- UnityExponent: one character value as an exponent class (or zero).
- DirichletCharacter: a single character mod q with its exact order.
- enumerate_characters: the full dual group of (Z/q)^*, deterministically
  ordered by generator exponent vectors.
- as_complex: exponent -> complex, exact on quadrant angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import List, Optional, Tuple

import numpy as np

MODULUS_CAP = 10**6


@dataclass(frozen=True)
class UnityExponent:
    """A character value: zero, or the exponent k of zeta_r^k.

    Attributes:
        value: None when the character vanishes (residue not coprime to
            the modulus); otherwise an integer k with 0 <= k < r.
    """

    value: Optional[int]

    @staticmethod
    def zero() -> "UnityExponent":
        """The absorbing value chi(a) = 0."""
        return UnityExponent(None)

    @property
    def is_zero(self) -> bool:
        return self.value is None

    def times(self, other: "UnityExponent", r: int) -> "UnityExponent":
        """Product of two character values, as exponents mod r.

        Zero is absorbing; otherwise exponents add mod r.
        """
        if self.value is None or other.value is None:
            return UnityExponent(None)
        return UnityExponent((self.value + other.value) % r)


def as_complex(e: UnityExponent, r: int) -> complex:
    """Convert an exponent class to the complex value it names.

    Quadrant angles (k/r multiples of 1/4) are returned exactly so that
    real characters and fourth-order characters never pick up drift.

    Args:
        e: the exponent class.
        r: the order of the root of unity.

    Returns:
        0 for the zero value, else exp(2*pi*i*k/r).
    """
    if e.value is None:
        return 0j
    k = e.value % r
    if (4 * k) % r == 0:
        return (1 + 0j, 1j, -1 + 0j, -1j)[(4 * k) // r]
    ang = 2.0 * math.pi * k / r
    return complex(math.cos(ang), math.sin(ang))


def _factor(n: int) -> List[Tuple[int, int]]:
    """Trial-division factorization, primes ascending."""
    out: List[Tuple[int, int]] = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            a = 0
            while n % d == 0:
                n //= d
                a += 1
            out.append((d, a))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def _primitive_root(p: int, a: int) -> int:
    """Smallest primitive root mod p, lifted to p^a (p odd prime)."""
    fac = [f for f, _ in _factor(p - 1)]
    g = next(
        g for g in range(2, p + 1) if all(pow(g, (p - 1) // f, p) != 1 for f in fac)
    )
    if a == 1:
        return g
    # g generates mod p^a for every a >= 2 unless g^(p-1) = 1 mod p^2.
    if pow(g, p - 1, p * p) == 1:
        g += p
    return g


def _cycle_dlog(gen: int, order: int, pa: int, start: int = 1) -> np.ndarray:
    """Discrete logs along the orbit start * gen^j mod pa; -1 off-orbit."""
    dlog = np.full(pa, -1, dtype=np.int64)
    t = start % pa
    for j in range(order):
        dlog[t] = j
        t = t * gen % pa
    return dlog


def _component_generators(p: int, a: int) -> List[Tuple[int, np.ndarray]]:
    """Cyclic generators of (Z/p^a)^* as (order, dlog table) pairs.

    Odd p^a is cyclic.  2^1 is trivial, 2^2 is generated by 3, and 2^a
    for a >= 3 splits as {+-1} x <5>, listed in that order.
    """
    pa = p**a
    if p != 2:
        m = pa // p * (p - 1)
        return [(m, _cycle_dlog(_primitive_root(p, a), m, pa))]
    if a == 1:
        return []
    if a == 2:
        return [(2, _cycle_dlog(3, 2, 4))]
    half = pa // 4
    sign = np.full(pa, -1, dtype=np.int64)
    five = np.full(pa, -1, dtype=np.int64)
    for s, start in ((0, 1), (1, pa - 1)):
        t = start
        for j in range(half):
            sign[t] = s
            five[t] = j
            t = t * 5 % pa
    return [(2, sign), (half, five)]


@dataclass(frozen=True, eq=False)
class _UnitGroup:
    """Shared cyclic decomposition of (Z/q)^* for all characters mod q.

    Attributes:
        modulus: q.
        gen_orders: sizes m_i of the cyclic factors.
        comp_moduli: the prime power component each generator lives in.
        dlogs: per generator, discrete-log table indexed by the residue
            mod its component; -1 marks residues off the component group.
    """

    modulus: int
    gen_orders: Tuple[int, ...]
    comp_moduli: Tuple[int, ...]
    dlogs: Tuple[np.ndarray, ...]


def _build_group(q: int) -> _UnitGroup:
    orders: List[int] = []
    moduli: List[int] = []
    dlogs: List[np.ndarray] = []
    for p, a in _factor(q):
        for order, table in _component_generators(p, a):
            orders.append(order)
            moduli.append(p**a)
            dlogs.append(table)
    return _UnitGroup(q, tuple(orders), tuple(moduli), tuple(dlogs))


@dataclass(frozen=True, eq=False)
class DirichletCharacter:
    """One Dirichlet character mod q, exact in integer arithmetic.

    Attributes:
        modulus: q.
        order: exact multiplicative order r (1 for the principal
            character); the exponents of all values have gcd coprime
            to r by construction.
        index: position of this character in the deterministic
            enumeration order for its modulus (lexicographic over
            generator exponent vectors).
    """

    modulus: int
    order: int
    index: int
    _coeffs: Tuple[int, ...]
    _group: _UnitGroup

    @property
    def is_principal(self) -> bool:
        return self.order == 1

    def evaluate(self, n: int) -> UnityExponent:
        """Exponent class of chi(n); zero when gcd(n, q) > 1."""
        a = n % self.modulus
        if math.gcd(a, self.modulus) != 1:
            return UnityExponent.zero()
        k = 0
        for c, mod, dl in zip(self._coeffs, self._group.comp_moduli, self._group.dlogs):
            k += c * int(dl[a % mod])
        return UnityExponent(k % self.order)

    def value(self, n: int) -> complex:
        """chi(n) as a complex number."""
        return as_complex(self.evaluate(n), self.order)

    def exponent_table(self) -> np.ndarray:
        """Dense table t with t[a] = exponent of chi(a), -1 for zero.

        Length-q int64 array; the -1 sentinel encodes the zero value so
        the table can feed integer-indexed hot loops directly.
        """
        q = self.modulus
        table = np.full(q, -1, dtype=np.int64)
        for a in range(q):
            e = self.evaluate(a)
            if e.value is not None:
                table[a] = e.value
        if q == 1:
            table[0] = 0
        return table


def enumerate_characters(q: int, cap: int = MODULUS_CAP) -> List[DirichletCharacter]:
    """All phi(q) Dirichlet characters mod q, deterministically ordered.

    The group (Z/q)^* is decomposed into cyclic factors by factoring q,
    taking a primitive root on each odd prime power and the {+-1} x <5>
    split on 2^a (a >= 3).  A character is an exponent vector e over the
    factors; characters are listed in lexicographic order of e, so the
    principal character always has index 0.

    Args:
        q: modulus, 1 <= q <= cap.
        cap: guard against accidental huge allocations.

    Returns:
        List of DirichletCharacter with index fields 0..phi(q)-1.

    Raises:
        ValueError: q out of range.
    """
    if q < 1 or q > cap:
        raise ValueError(f"modulus {q} outside [1, {cap}]")
    group = _build_group(q)
    chars: List[DirichletCharacter] = []
    for idx, evec in enumerate(product(*(range(m) for m in group.gen_orders))):
        r = 1
        for m, e in zip(group.gen_orders, evec):
            r = math.lcm(r, m // math.gcd(m, e))
        # zeta_m^e = zeta_r^c with c = r*e/m, an exact integer here.
        coeffs = tuple(r * e // m for m, e in zip(group.gen_orders, evec))
        chars.append(DirichletCharacter(q, r, idx, coeffs, group))
    return chars


def character_by_index(q: int, index: int) -> DirichletCharacter:
    """The character addressed (q, index) in the enumeration order."""
    chars = enumerate_characters(q)
    if not 0 <= index < len(chars):
        raise ValueError(f"character index {index} outside [0, {len(chars)})")
    return chars[index]
