"""Weighted moment sums of window concentration over n up to x.

S_{t,V}(x) = sum over n <= x of g(n) * Delta_V(n, f)^(2t), with the
fixed-length variant using Delta*_v.  The sum is partitioned into
blocks of 2^16 integers, cut additionally at every checkpoint, and each
segment is reduced with compensated summation; segments are folded in
ascending order, so the result is bitwise identical for any worker
count.  Per-n summands are g(n) * (Delta^2)^t where Delta^2 is the
maximized squared run sum, exact in integer arithmetic for coefficient
orders 1, 2, and 4.

A compiled kernel handles those orders (the divisor walk, window scan,
and accumulation all inlined); other orders fall back to the profile
machinery in delta.  Both paths evaluate the same float predicates in
the same order, so they agree bitwise wherever both apply.
"""

from __future__ import annotations

import math
import multiprocessing
import os
from dataclasses import dataclass, replace
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - optional acceleration
    numba = None

from .characters import DirichletCharacter, UnityExponent, as_complex
from .delta import (
    DivisorProfile,
    WeightFunction,
    WeightKind,
    build_profile,
    delta_star,
    delta_sup,
)
from .report import CheckEntry, pass_fail
from .sieve import (
    MultiplicativeWeight,
    SpfTable,
    WeightFamily,
    factorize,
    mu_squared,
    tau,
    weight_value,
)

BLOCK = 1 << 16
THREADS_ENV = "DELTACHI_THREADS"


class MomentMode(Enum):
    SUP = "sup"
    STAR = "star"


class EnvelopeFamily(Enum):
    CHAR = "char"
    MU = "mu"


@dataclass(frozen=True)
class MomentSeries:
    """Partial sums of g(n) * Delta^(2t) along checkpoint values of x.

    Attributes:
        t: moment parameter, t >= 1.
        V: window bound (or fixed length v in STAR mode).
        weight_f: divisor coefficient function.
        weight_g: outer multiplicative weight.
        checkpoints: ascending x values.
        values: matching partial sums; nondecreasing.
        mode: SUP for Delta_V, STAR for Delta*_v.
        truncated: True when a resource cap stopped the run early; the
            series then covers only the checkpoints listed.
    """

    t: float
    V: float
    weight_f: WeightFunction
    weight_g: MultiplicativeWeight
    checkpoints: Tuple[int, ...]
    values: Tuple[float, ...]
    mode: MomentMode
    truncated: bool = False

    @property
    def x(self) -> int:
        return self.checkpoints[-1]

    @property
    def total(self) -> float:
        return self.values[-1]


@dataclass(frozen=True)
class EnvelopeReport:
    """Exponent shapes from the moment growth statements.

    lower_exponents comes with implied window factors (1, U^t, U^(2t));
    entries that do not apply to the family are -inf.  No inequality is
    asserted: the implicit constants are unspecified.
    """

    upper_exponent: float
    lower_exponents: Tuple[float, float, float]
    U: float
    fitted_slope: float = float("nan")
    fit_residual: float = float("nan")


def default_checkpoints(x: int) -> Tuple[int, ...]:
    """Geometric grid 10^(i/2) capped at x, always ending at x."""
    cps = []
    i = 1
    while True:
        c = int(10 ** (i / 2.0))
        if c >= x:
            break
        if c >= 2 and (not cps or c > cps[-1]):
            cps.append(c)
        i += 1
    cps.append(x)
    return tuple(cps)


def _root_tables(r: int) -> Tuple[np.ndarray, np.ndarray]:
    vals = [as_complex(UnityExponent(k), r) for k in range(r)]
    return (
        np.array([v.real for v in vals], dtype=np.float64),
        np.array([v.imag for v in vals], dtype=np.float64),
    )


# --------------------------------------------------------------------------
# compiled fast path

if numba is not None:

    @numba.njit(cache=True)
    def _kernel_segment(
        lo,
        hi,
        spf,
        f_code,  # 0 unit, 1 moebius, 2 character
        chi_table,
        q,
        cos_tab,
        sin_tab,
        g_code,  # 0 unit, 1 y^omega, 2 mu^2 y^omega, 3 h_chi
        y,
        chig_table,
        qg,
        tval,
        V,
        star,
    ):
        total = 0.0
        comp = 0.0
        parr = np.empty(24, np.int64)
        earr = np.empty(24, np.int64)
        divs = np.empty(2048, np.int64)
        kept = np.empty(2048, np.int64)
        cls = np.empty(2048, np.int64)
        logs = np.empty(2048, np.float64)
        pre_re = np.empty(2049, np.float64)
        pre_im = np.empty(2049, np.float64)
        for n in range(lo, hi):
            m = n
            nprimes = 0
            omega = 0
            squarefree = True
            gok = True
            while m > 1:
                p = np.int64(spf[m])
                a = 0
                while m % p == 0:
                    m //= p
                    a += 1
                parr[nprimes] = p
                earr[nprimes] = a
                nprimes += 1
                omega += 1
                if a > 1:
                    squarefree = False
                if g_code == 3 and chig_table[p % qg] != 0:
                    gok = False
            if g_code == 0:
                g = 1.0
            elif g_code == 1:
                g = y ** np.float64(omega)
            elif g_code == 2:
                if not squarefree:
                    continue
                g = y ** np.float64(omega)
            else:
                if not gok:
                    continue
                g = 1.0
            if g == 0.0:
                continue
            cnt = 1
            divs[0] = 1
            for idx in range(nprimes):
                p = parr[idx]
                base = cnt
                pk = np.int64(1)
                for _ in range(earr[idx]):
                    pk *= p
                    for i2 in range(base):
                        divs[cnt] = divs[i2] * pk
                        cnt += 1
            sd = np.sort(divs[:cnt])
            k = 0
            for i2 in range(cnt):
                d = sd[i2]
                if f_code == 0:
                    c = np.int64(0)
                elif f_code == 1:
                    md = d
                    c = np.int64(0)
                    while md > 1:
                        pp = np.int64(spf[md])
                        e2 = 0
                        while md % pp == 0:
                            md //= pp
                            e2 += 1
                        if e2 > 1:
                            c = np.int64(-1)
                            break
                        c ^= 1
                else:
                    c = np.int64(chi_table[d % q])
                if c >= 0:
                    kept[k] = d
                    cls[k] = c
                    k += 1
            for i2 in range(k):
                logs[i2] = math.log(np.float64(kept[i2]))
            pre_re[0] = 0.0
            pre_im[0] = 0.0
            for i2 in range(k):
                pre_re[i2 + 1] = pre_re[i2] + cos_tab[cls[i2]]
                pre_im[i2 + 1] = pre_im[i2] + sin_tab[cls[i2]]
            best = 0.0
            if not star:
                jhi = 0
                for i2 in range(k):
                    if jhi < i2:
                        jhi = i2
                    while jhi + 1 < k and logs[jhi + 1] - logs[i2] < V:
                        jhi += 1
                    for j2 in range(i2, jhi + 1):
                        dre = pre_re[j2 + 1] - pre_re[i2]
                        dim = pre_im[j2 + 1] - pre_im[i2]
                        ab = dre * dre + dim * dim
                        if ab > best:
                            best = ab
            else:
                i0 = 0
                for j2 in range(k):
                    shifted = logs[j2] - V
                    while logs[i0] <= shifted:
                        i0 += 1
                    dre = pre_re[j2 + 1] - pre_re[i0]
                    dim = pre_im[j2 + 1] - pre_im[i0]
                    ab = dre * dre + dim * dim
                    if ab > best:
                        best = ab
                j0 = 0
                for m2 in range(k):
                    target = logs[m2] + V
                    if j0 < m2:
                        j0 = m2
                    while j0 + 1 < k and logs[j0 + 1] <= target:
                        j0 += 1
                    if j0 >= m2 + 1:
                        dre = pre_re[j0 + 1] - pre_re[m2 + 1]
                        dim = pre_im[j0 + 1] - pre_im[m2 + 1]
                        ab = dre * dre + dim * dim
                        if ab > best:
                            best = ab
            term = g * best**tval
            s = total + term
            if abs(total) >= abs(term):
                comp += (total - s) + term
            else:
                comp += (term - s) + total
            total = s
        return total + comp

else:  # pragma: no cover - exercised only without numba
    _kernel_segment = None


_F_CODES = {WeightKind.UNIT: 0, WeightKind.MOEBIUS: 1, WeightKind.CHARACTER: 2}
_G_CODES = {
    WeightFamily.UNIT: 0,
    WeightFamily.Y_OMEGA: 1,
    WeightFamily.MU2_Y_OMEGA: 2,
    WeightFamily.H_CHI: 3,
}


@dataclass(frozen=True)
class _EngineContext:
    table: SpfTable
    f: WeightFunction
    g: MultiplicativeWeight
    t: float
    length: float
    star: bool

    def kernel_args(self):
        f_code = _F_CODES[self.f.kind]
        if self.f.kind is WeightKind.CHARACTER:
            chi_table = self.f.chi.exponent_table()
            q = self.f.chi.modulus
        else:
            chi_table = np.zeros(1, dtype=np.int64)
            q = 1
        cos_tab, sin_tab = _root_tables(self.f.order)
        g_code = _G_CODES[self.g.family]
        if self.g.family is WeightFamily.H_CHI:
            chig_table = self.g.chi.exponent_table()
            qg = self.g.chi.modulus
        else:
            chig_table = np.zeros(1, dtype=np.int64)
            qg = 1
        return (
            self.table.spf,
            f_code,
            chi_table,
            q,
            cos_tab,
            sin_tab,
            g_code,
            self.g.y,
            chig_table,
            qg,
            float(self.t),
            float(self.length),
            self.star,
        )


def _python_segment(lo: int, hi: int, ctx: _EngineContext) -> float:
    """Reference segment sum through the profile machinery."""
    total = 0.0
    comp = 0.0
    for n in range(lo, hi):
        g = weight_value(ctx.g, n, ctx.table)
        if g == 0.0:
            continue
        profile = build_profile(n, ctx.f, ctx.table)
        if ctx.star:
            w = delta_star(profile, ctx.length)
        else:
            w = delta_sup(profile, ctx.length)
        ab = profile.run_abs2(w.i, w.j) if w.j >= w.i >= 0 else 0.0
        term = g * ab ** float(ctx.t)
        s = total + term
        if abs(total) >= abs(term):
            comp += (total - s) + term
        else:
            comp += (term - s) + total
        total = s
    return total + comp


def _kernel_eligible(ctx: _EngineContext) -> bool:
    # The compiled path accumulates coefficients as running floats; for
    # orders 1, 2, 4 the root tables are 0/+-1 and that is exact.
    return numba is not None and ctx.f.order in (1, 2, 4)


def _run_segment(lo: int, hi: int, ctx: _EngineContext) -> float:
    if _kernel_eligible(ctx):
        return float(_kernel_segment(lo, hi, *ctx.kernel_args()))
    return _python_segment(lo, hi, ctx)


_WORK: dict = {}


def _pool_segment(seg: Tuple[int, int]) -> float:
    return _run_segment(seg[0], seg[1], _WORK["ctx"])


def _segments(x: int, checkpoints: Sequence[int]) -> List[Tuple[int, int]]:
    cuts = {1, x + 1}
    cuts.update(c + 1 for c in checkpoints)
    cuts.update(range(BLOCK, x + 1, BLOCK))
    edges = sorted(cuts)
    return list(zip(edges[:-1], edges[1:]))


def resolve_threads(threads: Optional[int]) -> int:
    if threads is not None:
        if threads < 1:
            raise ValueError("threads must be positive")
        return threads
    env = os.environ.get(THREADS_ENV)
    if env:
        n = int(env)
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be positive")
        return n
    return 1


def _series(
    x: int,
    t: float,
    length: float,
    f: WeightFunction,
    g: MultiplicativeWeight,
    table: SpfTable,
    checkpoints: Optional[Sequence[int]],
    threads: Optional[int],
    star: bool,
    max_terms: Optional[int],
) -> MomentSeries:
    if x < 1 or x > table.limit:
        raise ValueError("x must lie in [1, table.limit]")
    if t < 1:
        raise ValueError("t must be at least 1")
    if length <= 0:
        raise ValueError("window length must be positive")
    if checkpoints is None:
        cps = default_checkpoints(x)
    else:
        cps = tuple(sorted({int(c) for c in checkpoints if 1 <= c <= x} | {x}))
    nthreads = resolve_threads(threads)
    ctx = _EngineContext(table, f, g, float(t), float(length), star)
    segs = _segments(x, cps)
    truncated = False
    if max_terms is not None:
        covered = 0
        kept_segs = []
        for lo, hi in segs:
            if covered >= max_terms:
                truncated = True
                break
            kept_segs.append((lo, hi))
            covered += hi - lo
        segs = kept_segs
    if _kernel_eligible(ctx) and segs:
        # Compile in the parent so forked workers inherit machine code.
        _kernel_segment(1, 2, *ctx.kernel_args())
    if nthreads > 1 and len(segs) > 1:
        _WORK["ctx"] = ctx
        with multiprocessing.Pool(processes=nthreads) as pool:
            partials = pool.map(_pool_segment, segs, chunksize=1)
    else:
        partials = [_run_segment(lo, hi, ctx) for lo, hi in segs]
    # Fold in ascending segment order with compensated summation.
    total = 0.0
    comp = 0.0
    values = []
    idx = 0
    top = segs[-1][1] if segs else 1
    for cp in cps:
        if cp + 1 > top:
            break
        while idx < len(segs) and segs[idx][1] <= cp + 1:
            term = partials[idx]
            s = total + term
            if abs(total) >= abs(term):
                comp += (total - s) + term
            else:
                comp += (term - s) + total
            total = s
            idx += 1
        values.append(total + comp)
    kept_cps = cps[: len(values)]
    mode = MomentMode.STAR if star else MomentMode.SUP
    return MomentSeries(
        float(t), float(length), f, g, kept_cps, tuple(values), mode, truncated
    )


def moment_sum(
    x: int,
    t: float,
    V: float,
    f: WeightFunction,
    g: MultiplicativeWeight,
    table: SpfTable,
    checkpoints: Optional[Sequence[int]] = None,
    threads: Optional[int] = None,
    max_terms: Optional[int] = None,
) -> MomentSeries:
    """S_{t,V}(x) = sum over n <= x of g(n) * Delta_V(n, f)^(2t).

    Args:
        x: range bound, x <= table.limit.
        t: moment parameter, t >= 1.
        V: window bound, V > 0.
        f: divisor coefficient function.
        g: outer multiplicative weight.
        table: sieve table covering x.
        checkpoints: ascending x values for partial sums; defaults to
            the geometric grid 10^(i/2) plus x itself.
        threads: worker processes; None reads DELTACHI_THREADS, else 1.
        max_terms: optional resource cap; the series is truncated at a
            segment boundary and marked.

    Returns:
        MomentSeries with deterministic, worker-count-independent sums.
    """
    return _series(x, t, V, f, g, table, checkpoints, threads, False, max_terms)


def moment_sum_star(
    x: int,
    t: float,
    v: float,
    f: WeightFunction,
    g: MultiplicativeWeight,
    table: SpfTable,
    checkpoints: Optional[Sequence[int]] = None,
    threads: Optional[int] = None,
    max_terms: Optional[int] = None,
) -> MomentSeries:
    """Fixed-window variant: summands g(n) * Delta*_v(n, f)^(2t)."""
    return _series(x, t, v, f, g, table, checkpoints, threads, True, max_terms)


def trivial_bound_check(
    x: int,
    t: float,
    V: float,
    f: WeightFunction,
    g: MultiplicativeWeight,
    table: SpfTable,
    threads: Optional[int] = None,
) -> CheckEntry:
    """S_{t,V} <= (floor(V)+1)^(2t) * S_{t,1}: windows of length V are
    covered by floor(V)+1 unit windows."""
    if V < 1:
        raise ValueError("V must be at least 1")
    lhs = moment_sum(x, t, V, f, g, table, checkpoints=[x], threads=threads).total
    base = moment_sum(x, t, 1.0, f, g, table, checkpoints=[x], threads=threads).total
    factor = (math.floor(V) + 1) ** (2.0 * t)
    gtag = g.family.value if g.chi is None else f"{g.family.value}:{g.chi.modulus}"
    if g.family in (WeightFamily.Y_OMEGA, WeightFamily.MU2_Y_OMEGA):
        gtag = f"{gtag}:y={g.y}"
    return pass_fail(
        f"trivial:x={x}:t={t}:V={V}:f={f.label()}:g={gtag}",
        lhs,
        factor * base,
        1e-9,
        witness=f"S_t,V={lhs:.6g} vs {factor:.0f}*S_t,1={factor * base:.6g}",
    )


def lower_floor_check(series: MomentSeries, table: SpfTable) -> CheckEntry:
    """S_{t,V} >= sum of mu^2(n) y^omega(n): every Delta is at least 1.

    Requires g = MU2_Y_OMEGA; checked at every checkpoint, reporting the
    tightest one.
    """
    if series.weight_g.family is not WeightFamily.MU2_Y_OMEGA:
        raise ValueError("floor check needs the squarefree y^omega weight")
    y = series.weight_g.y
    floor_total = 0.0
    comp = 0.0
    floors = []
    idx = 0
    for cp in series.checkpoints:
        for n in range(idx + 1, cp + 1):
            if mu_squared(n, table):
                term = y ** float(len(factorize(n, table)))
                s = floor_total + term
                if abs(floor_total) >= abs(term):
                    comp += (floor_total - s) + term
                else:
                    comp += (term - s) + floor_total
                floor_total = s
        idx = cp
        floors.append(floor_total + comp)
    margins = [v - fl for v, fl in zip(series.values, floors)]
    worst = min(range(len(margins)), key=lambda i: margins[i])
    return pass_fail(
        f"lowerfloor:x={series.x}:t={series.t}:V={series.V}"
        f":f={series.weight_f.label()}:y={y}",
        floors[worst],
        series.values[worst],
        0.0,
        witness=f"tightest at x={series.checkpoints[worst]}",
    )


def hchi_floor_check(
    x: int,
    t: float,
    V: float,
    chi: DirichletCharacter,
    y: float,
    table: SpfTable,
    threads: Optional[int] = None,
) -> CheckEntry:
    """Pointwise floor Delta_V(n, chi) >= h_chi(n) tau(n) V / (1 + log n).

    h_chi is 1 exactly on squarefree n whose primes all satisfy
    chi(p) = 1, so only those n carry a nonzero floor.  The aggregated
    moment bound implied by the floor is recorded in the witness.
    """
    if V > math.log(x):
        raise ValueError("needs V <= log x")
    f = WeightFunction(WeightKind.CHARACTER, chi)
    worst_margin = math.inf
    worst = ""
    worst_lhs = 0.0
    worst_rhs = 1.0
    violations = 0
    checked = 0
    agg_floor = 0.0
    for n in range(1, x + 1):
        if not mu_squared(n, table):
            continue
        fac = factorize(n, table)
        if any(chi.evaluate(p) != UnityExponent(0) for p, _ in fac):
            continue
        checked += 1
        tau_n = 1 << len(fac)
        bound = tau_n * V / (1.0 + math.log(n))
        d = delta_sup(build_profile(n, f, table), V).value
        agg_floor += (y ** len(fac)) * bound ** (2.0 * t)
        margin = d - bound
        if margin < worst_margin:
            worst_margin = margin
            worst = f"n={n}: delta={d:.6g} floor={bound:.6g}"
            worst_lhs = bound
            worst_rhs = d
        if margin < -1e-9:
            violations += 1
    series_total = moment_sum(
        x,
        t,
        V,
        f,
        MultiplicativeWeight(WeightFamily.MU2_Y_OMEGA, y=y),
        table,
        checkpoints=[x],
        threads=threads,
    ).total
    witness = (
        f"{worst}; {violations} violation(s) among {checked} floored n;"
        f" aggregate S={series_total:.6g} vs implied {agg_floor:.6g}"
    )
    return pass_fail(
        f"hchifloor:x={x}:t={t}:V={V}:q={chi.modulus}:y={y}",
        worst_lhs,
        worst_rhs,
        1e-9,
        witness=witness,
    )


def envelope(
    x: int,
    t: float,
    V: float,
    y: float,
    r: int,
    family: EnvelopeFamily,
    series: Optional[MomentSeries] = None,
) -> EnvelopeReport:
    """Exponent shapes for S_{t,V}(x) / x against powers of log x.

    Upper: y - 1 + (2^(2t-1) y - y - t)^+ for character twists, with
    lambda(t) replacing 2^(2t-1) for Moebius coefficients.  Lower
    envelope: y - 1, then 2^t y - t - 1 carrying U^t, and (characters
    only) 2^(2t) y / r - 2t - 1 carrying U^(2t), where U = min(V, log x).
    Shapes only: nothing is asserted.
    """
    from .analytic import lambda_gamma

    if family is EnvelopeFamily.CHAR:
        growth = 2 ** (2 * t - 1)
        third = 2 ** (2 * t) * y / r - 2 * t - 1
    else:
        growth = lambda_gamma(t)
        third = -math.inf
    upper = y - 1 + max(0.0, growth * y - y - t)
    lowers = (y - 1.0, 2**t * y - t - 1.0, third)
    U = min(V, math.log(x))
    report = EnvelopeReport(upper, lowers, U)
    if series is not None:
        try:
            slope, resid = growth_fit(series)
        except ValueError:
            pass  # too few checkpoints to fit; leave the NaN defaults
        else:
            report = replace(report, fitted_slope=slope, fit_residual=resid)
    return report


def growth_fit(series: MomentSeries) -> Tuple[float, float]:
    """Least-squares slope of log(S/x) against log log x.

    Returns (slope, RMS residual).  Informational: at desk scale the
    loglog range is too narrow to discriminate exponents.
    """
    pts = [
        (math.log(math.log(c)), math.log(v / c))
        for c, v in zip(series.checkpoints, series.values)
        if c >= 3 and v > 0
    ]
    if len(pts) < 4:
        raise ValueError("need at least 4 usable checkpoints")
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if xs.max() - xs.min() < 1e-9:
        raise ValueError("degenerate checkpoint grid")
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = float(np.sqrt(np.mean((ys - (slope * xs + intercept)) ** 2)))
    return float(slope), resid
