"""Window sums over divisors and their exact integrals.

The central object is the window sum of a weighted divisor distribution,

    D(n, f, u, v) = sum of f(d) over d | n with e^u < d <= e^(u+v),

together with its two maxima: the sup over u and window lengths up to V
(delta_sup) and the sup over u at a fixed window length v (delta_star).
Both reduce to finite scans over contiguous runs of the sorted divisors:
a window captures exactly a contiguous run, and which runs are capturable
is decided by the log-spread of the run.

Integrals of |D|^q in u are exact finite sums because u -> D(u, v) is a
step function whose breakpoints are the divisor logs and their shifts by
v; integrals over the window length are exact trapezoids because
v -> m_star(2, v) is piecewise linear between pairwise log-spreads.

Window sums are assembled from per-class integer counts of divisors in
each character-value class; complex numbers enter only through the fixed
cos/sin table of the weight's root of unity, so the arithmetic is exact
whenever those table entries are (orders 1, 2, and 4).

Provides:
- WeightFunction / WeightKind: the window coefficient families f.
- DivisorProfile / build_profile: sorted divisors, logs, coefficient
  classes, and per-class prefix counts.
- window_sum, delta_sup, delta_star, gap_info.
- m_star, m_2V, n_cross: exact window integrals.
- split_bound_check, lemma31_check: inequality checks on one profile.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .characters import DirichletCharacter, UnityExponent, as_complex
from .report import CheckEntry, pass_fail
from .sieve import SpfTable, factorize

# Above this divisor count the all-pairs matrix scan falls back to a
# row-at-a-time loop to bound memory (tau can reach 6720 below 1e8).
_MATRIX_TAU_LIMIT = 2048


class WeightKind(enum.Enum):
    UNIT = "unit"
    MOEBIUS = "mu"
    CHARACTER = "char"


@dataclass(frozen=True)
class WeightFunction:
    """Window coefficient function f with f(1) = 1.

    UNIT weights every divisor 1; MOEBIUS weights squarefree divisors by
    (-1)^omega and the rest 0; CHARACTER weights d by chi(d).
    """

    kind: WeightKind
    chi: Optional[DirichletCharacter] = None

    def __post_init__(self):
        if self.kind is WeightKind.CHARACTER and self.chi is None:
            raise ValueError("CHARACTER weight requires a character")

    @property
    def order(self) -> int:
        """Order r of the root of unity the coefficients live in."""
        if self.kind is WeightKind.UNIT:
            return 1
        if self.kind is WeightKind.MOEBIUS:
            return 2
        return self.chi.order

    def label(self) -> str:
        if self.kind is WeightKind.CHARACTER:
            return f"char:{self.chi.modulus}:{self.chi.index}"
        return self.kind.value


@dataclass(frozen=True, eq=False)
class DivisorProfile:
    """Sorted divisors of n with logs and per-class prefix counts.

    Attributes:
        n: the integer profiled.
        weight: the coefficient function f.
        divisors: ascending int64 array of all divisors, starting at 1.
        logs: float64 natural logs of the divisors, strictly increasing.
        r: order of the coefficient root of unity.
        coeff_class: int64 per-divisor exponent class, -1 where f(d) = 0.
        prefix_counts: (tau+1) x r int64; row m counts divisors among the
            first m in each class, so consecutive rows differ by exactly
            one divisor's contribution.
        cos_tab / sin_tab: class -> real/imag part of zeta_r^k, exact on
            quadrant angles.
    """

    n: int
    weight: WeightFunction
    divisors: np.ndarray
    logs: np.ndarray
    r: int
    coeff_class: np.ndarray
    prefix_counts: np.ndarray
    cos_tab: np.ndarray
    sin_tab: np.ndarray

    @property
    def tau(self) -> int:
        return len(self.divisors)

    def coeff(self, k: int) -> UnityExponent:
        """Coefficient of the k-th divisor as a UnityExponent."""
        c = int(self.coeff_class[k])
        return UnityExponent.zero() if c < 0 else UnityExponent(c)

    def run_counts(self, i: int, j: int) -> np.ndarray:
        """Per-class divisor counts of the run i..j inclusive."""
        return self.prefix_counts[j + 1] - self.prefix_counts[i]

    def run_sum(self, i: int, j: int) -> complex:
        """Sum of coefficients over the run i..j inclusive."""
        c = self.run_counts(i, j)
        return complex(c @ self.cos_tab, c @ self.sin_tab)

    def run_abs2(self, i: int, j: int) -> float:
        """|sum of coefficients|^2 over the run i..j inclusive."""
        c = self.run_counts(i, j)
        re = c @ self.cos_tab
        im = c @ self.sin_tab
        return float(re * re + im * im)

    def coeff_values(self) -> np.ndarray:
        """Complex coefficient of every divisor; 0 where f vanishes."""
        live = self.coeff_class >= 0
        cls = np.where(live, self.coeff_class, 0)
        out = self.cos_tab[cls] + 1j * self.sin_tab[cls]
        out[~live] = 0.0
        return out


@dataclass(frozen=True)
class RunWitness:
    """A window maximum with the run and window realizing it.

    Attributes:
        value: the attained |sum of coefficients|.
        i, j: inclusive run indices into the profile divisors (-1, -1
            when no run was taken).
        u, v: window parameters realizing the run: the window
            (e^u, e^(u+v)] captures exactly divisors i..j.
    """

    value: float
    i: int
    j: int
    u: float
    v: float

    @property
    def empty(self) -> bool:
        return self.i < 0


@dataclass(frozen=True)
class GapInfo:
    """Minimal log-gap statistics of a divisor profile.

    E is the least log-ratio of two distinct divisors (always attained
    by a consecutive pair); E = +inf for n = 1 by convention, making
    e_star = min(1, E) = 1 there.
    """

    e: float
    e_star: float


class IntegralKind(enum.Enum):
    M_STAR_QV = "m_star_qv"
    M_2V = "m_2v"
    N_JQV = "n_jqv"
    TAU_STAR = "tau_star"
    PLANCHEREL_RHS = "plancherel_rhs"
    I_LOWER = "i_lower"


@dataclass(frozen=True)
class IntegralResult:
    """A window integral value with its exactness contract.

    exact is True only for the piecewise-closed-form integrals (the
    breakpoint sums); quadrature results carry a positive error_bound.
    """

    kind: IntegralKind
    value: float
    exact: bool
    error_bound: float = 0.0

    def __post_init__(self):
        if self.exact and self.error_bound != 0.0:
            raise ValueError("exact results carry error_bound 0")


def _divisor_data(n: int, table: SpfTable) -> List[Tuple[int, int, bool]]:
    """All divisors of n as (d, omega(d), squarefree(d)) triples."""
    out = [(1, 0, True)]
    for p, a in factorize(n, table):
        grown = []
        for d, om, sq in out:
            pk = 1
            for e in range(1, a + 1):
                pk *= p
                grown.append((d * pk, om + 1, sq and e == 1))
        out.extend(grown)
    return out


def build_profile(n: int, f: WeightFunction, table: SpfTable) -> DivisorProfile:
    """Profile the divisors of n under the weight f.

    Args:
        n: 1 <= n <= table.limit.
        f: coefficient function.
        table: sieve table covering n.

    Returns:
        DivisorProfile with divisors ascending and prefix counts filled.

    Raises:
        ValueError: n out of range.
    """
    if n < 1 or (n > 1 and n > table.limit):
        raise ValueError(f"{n} outside table range")
    data = sorted(_divisor_data(n, table))
    divisors = np.array([d for d, _, _ in data], dtype=np.int64)
    logs = np.log(divisors.astype(np.float64))
    r = f.order
    if f.kind is WeightKind.UNIT:
        cls = np.zeros(len(data), dtype=np.int64)
    elif f.kind is WeightKind.MOEBIUS:
        cls = np.array(
            [om % 2 if sq else -1 for _, om, sq in data], dtype=np.int64
        )
    else:
        chi = f.chi
        cls = np.empty(len(data), dtype=np.int64)
        for k, (d, _, _) in enumerate(data):
            e = chi.evaluate(d)
            cls[k] = -1 if e.value is None else e.value
    tau = len(divisors)
    onehot = np.zeros((tau, r), dtype=np.int64)
    valid = cls >= 0
    onehot[np.nonzero(valid)[0], cls[valid]] = 1
    prefix = np.zeros((tau + 1, r), dtype=np.int64)
    np.cumsum(onehot, axis=0, out=prefix[1:])
    roots = [as_complex(UnityExponent(k), r) for k in range(r)]
    cos_tab = np.array([z.real for z in roots])
    sin_tab = np.array([z.imag for z in roots])
    for arr in (divisors, logs, cls, prefix, cos_tab, sin_tab):
        arr.flags.writeable = False
    return DivisorProfile(n, f, divisors, logs, r, cls, prefix, cos_tab, sin_tab)


def window_sum(profile: DivisorProfile, u: float, v: float) -> complex:
    """D(n, f, u, v): sum of coefficients over divisors in (e^u, e^(u+v)].

    Membership is raw float comparison on logs; v = 0 gives 0.
    """
    if v < 0:
        raise ValueError("window length must be nonnegative")
    logs = profile.logs
    i = int(np.searchsorted(logs, u, side="right"))
    j = int(np.searchsorted(logs, u + v, side="right")) - 1
    if j < i:
        return 0j
    return profile.run_sum(i, j)


def _prefix_re_im(profile: DivisorProfile) -> Tuple[np.ndarray, np.ndarray]:
    """Float prefix sums of coefficient real/imag parts (exact r <= 4)."""
    oh = profile.prefix_counts
    return oh @ profile.cos_tab, oh @ profile.sin_tab


def _sup_witness_window(
    profile: DivisorProfile, i: int, j: int, V: float
) -> Tuple[float, float]:
    """A window (u, v) with v < V capturing exactly divisors i..j."""
    logs = profile.logs
    spread = float(logs[j] - logs[i])
    room_right = float(logs[j + 1] - logs[j]) if j + 1 < profile.tau else math.inf
    slack = min(V - spread, room_right)
    left_gap = float(logs[i] - logs[i - 1]) if i > 0 else math.inf
    eps = min(slack, left_gap) / 4.0
    return float(logs[i]) - eps, spread + 2.0 * eps


def delta_sup(profile: DivisorProfile, V: float) -> RunWitness:
    """Delta_V(n, f): max |window sum| over windows of length up to V.

    A run i..j of sorted divisors is capturable with some v <= V exactly
    when its log-spread is strictly below V (the half-open window gives
    spread < v), so the sup is a max over admissible contiguous runs.
    The scan is O(admissible pairs); no sliding-window shortcut.

    Args:
        profile: divisor profile.
        V: window length bound, V > 0.

    Returns:
        RunWitness with the maximum and a realizing (run, window).

    Raises:
        ValueError: V <= 0.
    """
    if V <= 0:
        raise ValueError("V must be positive")
    logs = profile.logs
    tau = profile.tau
    pr, pi = _prefix_re_im(profile)
    if tau <= _MATRIX_TAU_LIMIT:
        re = pr[1:][None, :] - pr[:-1][:, None]  # re[i, j] = sum over i..j
        im = pi[1:][None, :] - pi[:-1][:, None]
        abs2 = re * re + im * im
        admissible = (logs[None, :] - logs[:, None] < V) & (
            np.arange(tau)[None, :] >= np.arange(tau)[:, None]
        )
        abs2[~admissible] = -1.0
        flat = int(np.argmax(abs2))
        bi, bj = divmod(flat, tau)
    else:
        best = -1.0
        bi = bj = 0
        for i in range(tau):
            jmax = int(np.searchsorted(logs, logs[i] + V, side="left")) - 1
            if jmax < i:
                continue
            seg = (pr[i + 1 : jmax + 2] - pr[i]) ** 2 + (
                pi[i + 1 : jmax + 2] - pi[i]
            ) ** 2
            k = int(np.argmax(seg))
            if seg[k] > best:
                best = float(seg[k])
                bi, bj = i, i + k
    value = math.sqrt(profile.run_abs2(bi, bj))
    u, v = _sup_witness_window(profile, bi, bj, V)
    return RunWitness(value, bi, bj, u, v)


def _star_candidates(
    profile: DivisorProfile, v: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All (i, j, u) runs realizable by some fixed-length-v window.

    Every maximal captured set is anchored: either its right end sits at
    the window's right edge (u = logs[j] - v) or its left edge sits just
    above a divisor (u = logs[m], capturing from m+1).  Enumerating both
    families per divisor covers every set the sweep over the 2*tau event
    points would visit.
    """
    logs = profile.logs
    tau = profile.tau
    # Right-anchored at k: window (logs[k]-v, logs[k]].
    i_right = np.searchsorted(logs, logs - v, side="right")
    j_right = np.arange(tau)
    u_right = logs - v
    # Left-anchored at m: window (logs[m], logs[m]+v].
    i_left = np.arange(tau) + 1
    j_left = np.searchsorted(logs, logs + v, side="right") - 1
    u_left = logs
    i_all = np.concatenate([i_right, i_left])
    j_all = np.concatenate([j_right, j_left])
    u_all = np.concatenate([u_right, u_left])
    keep = j_all >= i_all
    return i_all[keep], j_all[keep], u_all[keep]


def delta_star(profile: DivisorProfile, v: float) -> RunWitness:
    """Delta*_v(n, f): max |window sum| at the fixed window length v.

    Fixed length makes sub-runs of a captured run generally unreachable,
    so the max is taken over the runs realized between consecutive event
    points {logs[k], logs[k] - v} of the sweep in u, not over arbitrary
    admissible runs.

    Args:
        profile: divisor profile.
        v: window length, v > 0.

    Returns:
        RunWitness; u is the left end of a maximizing u-interval.

    Raises:
        ValueError: v <= 0.
    """
    if v <= 0:
        raise ValueError("v must be positive")
    i_all, j_all, u_all = _star_candidates(profile, v)
    if len(i_all) == 0:
        return RunWitness(0.0, -1, -1, 0.0, v)
    counts = profile.prefix_counts[j_all + 1] - profile.prefix_counts[i_all]
    re = counts @ profile.cos_tab
    im = counts @ profile.sin_tab
    abs2 = re * re + im * im
    k = int(np.argmax(abs2))
    i, j = int(i_all[k]), int(j_all[k])
    return RunWitness(
        math.sqrt(profile.run_abs2(i, j)), i, j, float(u_all[k]), v
    )


def gap_info(profile: DivisorProfile) -> GapInfo:
    """Minimal log-gap E over consecutive divisors; E(1) = +inf, E* = 1."""
    if profile.tau < 2:
        return GapInfo(math.inf, 1.0)
    e = float(np.min(np.diff(profile.logs)))
    return GapInfo(e, min(1.0, e))


def _segment_runs(
    profile: DivisorProfile, us: np.ndarray, v: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Run index ranges [i, j) captured by the window at each u.

    Callers pass segment midpoints, never the event points themselves: at
    an event u = logs[k] - v the float round trip u + v can land one ulp
    below logs[k] and misassign the whole segment, while midpoints sit
    half a segment away from every membership boundary.
    """
    logs = profile.logs
    i_arr = np.searchsorted(logs, us, side="right")
    j_arr = np.searchsorted(logs, us + v, side="right")
    return i_arr, j_arr


def _segment_abs2(
    profile: DivisorProfile, i_arr: np.ndarray, j_arr: np.ndarray
) -> np.ndarray:
    """|window sum|^2 for each half-open run [i, j)."""
    counts = profile.prefix_counts[np.maximum(j_arr, i_arr)] - profile.prefix_counts[i_arr]
    re = counts @ profile.cos_tab
    im = counts @ profile.sin_tab
    return re * re + im * im


def m_star(profile: DivisorProfile, q: float, v: float) -> IntegralResult:
    """Exact integral over u of |D(n, f, u, v)|^q.

    |D| is a step function of u whose breakpoints are the event points
    {logs[k], logs[k] - v}; the integral is the finite sum of segment
    length times segment value^q.

    Args:
        profile: divisor profile.
        q: exponent, real q >= 1.
        v: window length, v > 0.

    Returns:
        IntegralResult (exact).
    """
    if q < 1:
        raise ValueError("q must be at least 1")
    if v <= 0:
        raise ValueError("v must be positive")
    logs = profile.logs
    events = np.unique(np.concatenate([logs, logs - v]))
    mids = 0.5 * (events[:-1] + events[1:])
    i_arr, j_arr = _segment_runs(profile, mids, v)
    abs2 = _segment_abs2(profile, i_arr, j_arr)
    lengths = np.diff(events)
    if q == 2.0:
        vals = abs2
    else:
        vals = np.power(abs2, q / 2.0)
    total = float(np.dot(lengths, vals))
    return IntegralResult(IntegralKind.M_STAR_QV, total, exact=True)


def _m_star2_at(profile: DivisorProfile, vs: np.ndarray) -> np.ndarray:
    """m_star(q=2) evaluated at each window length in vs (vs[k] >= 0)."""
    logs = profile.logs
    out = np.empty(len(vs))
    for k, v in enumerate(vs):
        if v <= 0.0:
            out[k] = 0.0
            continue
        events = np.unique(np.concatenate([logs, logs - v]))
        mids = 0.5 * (events[:-1] + events[1:])
        i_arr, j_arr = _segment_runs(profile, mids, v)
        abs2 = _segment_abs2(profile, i_arr, j_arr)
        out[k] = float(np.dot(np.diff(events), abs2))
    return out


def _pairwise_spreads(profile: DivisorProfile) -> np.ndarray:
    """All positive pairwise log-differences, sorted ascending."""
    logs = profile.logs
    diff = logs[None, :] - logs[:, None]
    return np.sort(diff[diff > 0])


def m_2V(profile: DivisorProfile, V: float) -> IntegralResult:
    """Exact double integral of |D(u, v)|^2 over u in R, v in (0, V).

    v -> m_star(2, v) is piecewise linear with kinks only at pairwise
    log-spreads of divisors, so evaluating it at every breakpoint in
    [0, V] and applying the trapezoid rule integrates it exactly.

    Args:
        profile: divisor profile.
        V: upper window length, V > 0.

    Returns:
        IntegralResult (exact).
    """
    if V <= 0:
        raise ValueError("V must be positive")
    spreads = _pairwise_spreads(profile)
    inner = spreads[(spreads > 0) & (spreads < V)]
    bps = np.unique(np.concatenate([[0.0, V], inner]))
    vals = _m_star2_at(profile, bps)
    total = float(np.trapezoid(vals, bps))
    return IntegralResult(IntegralKind.M_2V, total, exact=True)


def n_cross(
    profile: DivisorProfile, j: int, q: int, v: float, w: float
) -> IntegralResult:
    """Exact integral over u of |D(u, v)|^(2j) * |D(u - w, v)|^(2(q-j)).

    Both factors are step functions of u; the breakpoints of the second
    are the first's shifted by w, so the merged event set makes the
    integrand constant on each segment.  A factor with exponent zero
    counts as 1 (0^0 = 1), except that the integrand is 0 wherever both
    window sums vanish.

    Args:
        profile: divisor profile.
        j: integer, 0 <= j <= q.
        q: integer, q >= 0.
        v: window length, v > 0.
        w: shift between the two windows.

    Returns:
        IntegralResult (exact).
    """
    if not (0 <= j <= q):
        raise ValueError("need 0 <= j <= q")
    if v <= 0:
        raise ValueError("v must be positive")
    logs = profile.logs
    base = np.concatenate([logs, logs - v])
    events = np.unique(np.concatenate([base, base + w]))
    mids = 0.5 * (events[:-1] + events[1:])
    i1, j1 = _segment_runs(profile, mids, v)
    i2, j2 = _segment_runs(profile, mids - w, v)
    a1 = _segment_abs2(profile, i1, j1)
    a2 = _segment_abs2(profile, i2, j2)
    f1 = np.ones_like(a1) if j == 0 else a1**j
    f2 = np.ones_like(a2) if q - j == 0 else a2 ** (q - j)
    integrand = f1 * f2
    integrand[(a1 == 0.0) & (a2 == 0.0)] = 0.0
    total = float(np.dot(np.diff(events), integrand))
    return IntegralResult(IntegralKind.N_JQV, total, exact=True)


def split_bound_check(profile: DivisorProfile, V: float, ell: float) -> CheckEntry:
    """Check Delta_V <= V^(1-ell) Delta*_{V^ell} + Delta_{V^ell}.

    Args:
        profile: divisor profile.
        V: window bound, V >= 1.
        ell: splitting exponent in [0, 1].
    """
    if V < 1:
        raise ValueError("V must be at least 1")
    if not 0 <= ell <= 1:
        raise ValueError("ell must lie in [0, 1]")
    v_small = V**ell
    lhs = delta_sup(profile, V).value
    rhs = V ** (1.0 - ell) * delta_star(profile, v_small).value + delta_sup(
        profile, v_small
    ).value
    return pass_fail(
        f"split:n={profile.n}:f={profile.weight.label()}:V={V}:ell={ell}",
        lhs,
        rhs,
        1e-9,
    )


def lemma31_check(profile: DivisorProfile, q: int, v: float) -> CheckEntry:
    """Check Delta*_v^2 <= 2^5 + 2^(3+2/q) E*^(-2/q) m_star(2q, v)^(1/q).

    Args:
        profile: divisor profile (character or unit-modulus weights).
        q: integer exponent parameter, q >= 1.
        v: window length, v >= 1.
    """
    if q < 1:
        raise ValueError("q must be at least 1")
    if v < 1:
        raise ValueError("v must be at least 1 here")
    lhs = delta_star(profile, v).value ** 2
    estar = gap_info(profile).e_star
    m = m_star(profile, 2 * q, v).value
    rhs = 2**5 + 2 ** (3.0 + 2.0 / q) * estar ** (-2.0 / q) * m ** (1.0 / q)
    return pass_fail(
        f"lemma31:n={profile.n}:f={profile.weight.label()}:q={q}:v={v}",
        lhs,
        rhs,
        1e-9,
    )
