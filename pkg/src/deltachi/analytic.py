"""Closed-form constants and oscillatory quadrature for twisted sums.

The Fourier-side object is tau(n, chi, theta) = sum over d | n of
chi(d) d^(i theta).  |tau|^2 is a finite cosine/sine sum over pairwise
divisor log-differences, which gives every integral here an explicit
oscillation budget: the bulk is integrated by adaptive Gauss-Kronrod
panels sized to the highest mode, and the tail beyond the cut Theta is
completed in closed form per mode through Si/Ci, so reported error
bounds stay honest at 1e-8 tolerances without astronomical cutoffs.

Provides:
- lambda_gamma / lambda_integral / lambda_binom: the 2t-th circle moment
  of |1 + e^(i theta)| in three independent routes.
- beta_g / beta_yomega: class-weighted prime averages, the latter exact
  in rational arithmetic.
- thresholds, script_L, u_sequence, ConstantBundle.
- tau_char, window_transform: pointwise Fourier-side values.
- tau_star, plancherel_rhs, i_lower: quadrature integrals with error
  bounds; m2v_lower_check and prime_sum_diag diagnostics.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from scipy.special import sici

from .characters import DirichletCharacter
from .delta import DivisorProfile, IntegralKind, IntegralResult, m_2V
from .report import CheckEntry, pass_fail
from .sieve import (
    ClassWeights,
    MultiplicativeWeight,
    SpfTable,
    class_prime_sums,
    primes_up_to,
    weight_value,
)

# 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule
# (QUADPACK dqk15 constants), mirrored to the full symmetric set.
_XGK_HALF = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144838258730,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ]
)
_WGK_HALF = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ]
)
_WG_HALF = np.array(
    [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ]
)

_XGK = np.concatenate([-_XGK_HALF[:-1], _XGK_HALF[::-1]])
_WGK = np.concatenate([_WGK_HALF[:-1], _WGK_HALF[::-1]])
# Gauss nodes are the odd-index Kronrod nodes (indices 1,3,...,13).
_WG = np.zeros(15)
_WG[1:14:2] = np.concatenate([_WG_HALF[:-1], _WG_HALF[::-1]])


@dataclass(frozen=True)
class QuadratureSpec:
    """Adaptive panel quadrature parameters.

    Attributes:
        rel_tol: relative error target for the panel stage.
        abs_floor: absolute error floor below which refinement stops.
        max_panels: hard cap on panel count.
        tail_cut: optional override for the tail cut Theta of the
            half-line integrals; None picks it per operation.
    """

    rel_tol: float = 1e-8
    abs_floor: float = 1e-13
    max_panels: int = 4000
    tail_cut: Optional[float] = None


DEFAULT_QUAD = QuadratureSpec()


def _gk15(f: Callable[[np.ndarray], np.ndarray], a: float, b: float) -> Tuple[float, float]:
    """One Gauss-Kronrod 15(7) panel: (value, error estimate)."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    y = f(c + h * _XGK)
    k = h * float(np.dot(_WGK, y))
    g = h * float(np.dot(_WG, y))
    return k, abs(k - g)


def _adaptive(
    f: Callable[[np.ndarray], np.ndarray],
    breaks: np.ndarray,
    spec: QuadratureSpec,
) -> Tuple[float, float]:
    """Adaptive bisection over initial panels given by breaks.

    Returns (value, error estimate); deterministic for a fixed f.
    """
    heap = []
    counter = 0
    total = 0.0
    active = 0.0  # error mass still refinable
    stuck = 0.0  # error mass on panels too thin to split
    for a, b in zip(breaks[:-1], breaks[1:]):
        v, e = _gk15(f, float(a), float(b))
        total += v
        active += e
        heapq.heappush(heap, (-e, counter, float(a), float(b), v))
        counter += 1
    panels = len(heap)
    while heap and panels < spec.max_panels:
        if active + stuck <= max(spec.rel_tol * abs(total), spec.abs_floor):
            break
        nege, _, a, b, v = heapq.heappop(heap)
        e_old = -nege
        active -= e_old
        if b - a < 1e-13 * max(1.0, abs(a), abs(b)):
            stuck += e_old
            continue
        m = 0.5 * (a + b)
        v1, e1 = _gk15(f, a, m)
        v2, e2 = _gk15(f, m, b)
        total += v1 + v2 - v
        active += e1 + e2
        heapq.heappush(heap, (-e1, counter, a, m, v1))
        heapq.heappush(heap, (-e2, counter + 1, m, b, v2))
        counter += 2
        panels += 1
    return total, max(active + stuck, 0.0)


def _osc_breaks(a: float, b: float, freq: float, max_init: int = 512) -> np.ndarray:
    """Initial panels no wider than about a half period of cos(freq x)."""
    width = math.pi / max(freq, 1e-9)
    n = max(4, min(max_init, int(math.ceil((b - a) / width))))
    return np.linspace(a, b, n + 1)


# ---------------------------------------------------------------------------
# closed-form constants


def lambda_gamma(t: float) -> float:
    """lambda(t) = 2^(2t) Gamma(t + 1/2) / (sqrt(pi) Gamma(t + 1)).

    Args:
        t: real t >= 1.

    Returns:
        lambda(t) to ~1e-12 relative (log-gamma route).
    """
    if t < 1:
        raise ValueError("t must be at least 1")
    return math.exp(
        2 * t * math.log(2.0)
        + math.lgamma(t + 0.5)
        - 0.5 * math.log(math.pi)
        - math.lgamma(t + 1.0)
    )


def lambda_binom(t: int) -> int:
    """lambda(t) at integer t: sum of C(t,k)^2 = C(2t,t), exact."""
    if t < 1 or t != int(t):
        raise ValueError("t must be a positive integer")
    t = int(t)
    return math.comb(2 * t, t)


def lambda_integral(t: float, spec: QuadratureSpec = DEFAULT_QUAD) -> float:
    """lambda(t) by quadrature of (1/2 pi) int |1+e^(i theta)|^(2t).

    The integrand is (2 + 2 cos theta)^t, even, so the integral is taken
    on [0, pi] and doubled.

    Raises:
        RuntimeError: panel stage failed to reach its tolerance.
    """
    if t < 1:
        raise ValueError("t must be at least 1")

    def f(th: np.ndarray) -> np.ndarray:
        return (2.0 + 2.0 * np.cos(th)) ** t

    val, err = _adaptive(f, np.linspace(0.0, math.pi, 9), spec)
    val /= math.pi
    err /= math.pi
    if err > 10 * spec.rel_tol * max(abs(val), 1.0):
        raise RuntimeError(f"lambda_integral did not converge: err={err:g}")
    return val


def beta_g(weights: ClassWeights, t: float) -> float:
    """beta_g(r, t) = 2^(1-2t) sum_k z_k |1 + zeta_r^k|^(2t).

    |1 + zeta^k|^2 = 2 + 2 cos(2 pi k / r).
    """
    if t < 1:
        raise ValueError("t must be at least 1")
    r = weights.r
    total = 0.0
    for k, z in enumerate(weights.z):
        mod2 = 2.0 + 2.0 * math.cos(2.0 * math.pi * k / r)
        total += z * mod2**t
    return total / 2 ** (2 * t - 1)


def beta_yomega(r: int, t: int, y: Union[int, Fraction, float]) -> Fraction:
    """beta for uniform class densities z_k = y/r, exact rationals.

    Expanding |1 + zeta^k|^(2t) binomially and averaging over k kills
    every mode except multiples of r:

        beta = (y / 2^(2t-1)) * sum over j,k <= t with r | k-j
               of C(t,k) C(t,j).

    For t < r only k = j survives and the sum is lambda(t).

    Args:
        r: class count, r >= 2.
        t: integer t >= 1.
        y: total density, any exactly-representable rational.

    Returns:
        Exact Fraction.
    """
    if r < 2:
        raise ValueError("r must be at least 2")
    if t < 1 or t != int(t):
        raise ValueError("t must be a positive integer")
    t = int(t)
    total = 0
    for k in range(t + 1):
        for j in range(t + 1):
            if (k - j) % r == 0:
                total += math.comb(t, k) * math.comb(t, j)
    return Fraction(y) * total / 2 ** (2 * t - 1)


def thresholds(t: float) -> Tuple[float, float]:
    """(y0, y1) = (t / (2^(2t-1) - 1), t / (lambda(t) - 1))."""
    if t < 1:
        raise ValueError("t must be at least 1")
    y0 = t / (2 ** (2 * t - 1) - 1)
    y1 = t / (lambda_gamma(t) - 1.0) if t > 1 else 1.0
    return y0, y1


def script_L(x: float) -> float:
    """exp(sqrt(loglog x * logloglog x)) for x >= 16."""
    if x < 16:
        raise ValueError("script_L needs x >= 16")
    l2 = math.log(math.log(x))
    l3 = math.log(l2)
    return math.exp(math.sqrt(l2 * l3))


def u_sequence(n_steps: int) -> List[Fraction]:
    """u_0 = 2, u_(k+1) = 2 u_k / (1 + u_k), exact rationals.

    The closed form is u_k = 2^(k+1) / (2^(k+1) - 1).
    """
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    us = [Fraction(2)]
    for _ in range(n_steps):
        u = us[-1]
        us.append(2 * u / (1 + u))
    return us


@dataclass(frozen=True)
class ConstantBundle:
    """The closed-form constants at one parameter point t.

    lambda is strictly below 2^(2t-1) for t > 1 with equality at t = 1;
    betag (when class weights are given) lies in [0, 2y].
    """

    t: float
    lam: float
    y0: float
    y1: float
    betag: Optional[float] = None
    script_l: Optional[float] = None


def constant_bundle(
    t: float,
    weights: Optional[ClassWeights] = None,
    x: Optional[float] = None,
) -> ConstantBundle:
    """Assemble lambda, thresholds, and optional beta / script-L values."""
    lam = lambda_gamma(t)
    y0, y1 = thresholds(t)
    bg = beta_g(weights, t) if weights is not None else None
    sl = script_L(x) if x is not None else None
    return ConstantBundle(t, lam, y0, y1, bg, sl)


# ---------------------------------------------------------------------------
# Fourier-side values and integrals


def tau_char(profile: DivisorProfile, theta: float) -> complex:
    """tau(n, chi, theta) = sum over d | n of f(d) d^(i theta)."""
    f = profile.coeff_values()
    phase = np.exp(1j * theta * profile.logs)
    return complex(np.dot(phase, f))


def window_transform(profile: DivisorProfile, v: float, theta: float) -> complex:
    """tau(n, chi, -theta) e^(i v theta / 2) sin(v theta / 2) / (theta / 2).

    The Fourier transform of the length-v window indicator applied to
    the divisor distribution; at theta = 0 the sinc limit gives
    v * tau(n, chi, 0).
    """
    if v <= 0:
        raise ValueError("v must be positive")
    tau_m = tau_char(profile, -theta)
    if theta == 0.0:
        return v * tau_m
    half = 0.5 * theta
    return tau_m * complex(math.cos(v * half), math.sin(v * half)) * math.sin(
        v * half
    ) / half


def _pair_modes(profile: DivisorProfile) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(s, w_re, w_im) over ordered divisor pairs: |tau(theta)|^2 =
    sum w_re cos(s theta) - w_im sin(s theta)."""
    f = profile.coeff_values()
    w = np.outer(f, f.conj())
    s = (profile.logs[:, None] - profile.logs[None, :]).ravel()
    return s, w.real.ravel(), w.imag.ravel()


def _tau_abs2(profile: DivisorProfile) -> Callable[[np.ndarray], np.ndarray]:
    f = profile.coeff_values()
    logs = profile.logs

    def fn(th: np.ndarray) -> np.ndarray:
        z = np.exp(1j * np.outer(th, logs)) @ f
        return (z * z.conj()).real

    return fn


def _tau_abs2_folded(profile: DivisorProfile) -> Callable[[np.ndarray], np.ndarray]:
    f = profile.coeff_values()
    logs = profile.logs

    def fn(th: np.ndarray) -> np.ndarray:
        e = np.exp(1j * np.outer(th, logs))
        zp = e @ f
        zm = e.conj() @ f
        return (zp * zp.conj()).real + (zm * zm.conj()).real

    return fn


def _icos2(s: np.ndarray, theta: float) -> np.ndarray:
    """int_Theta^inf cos(s x) / x^2 dx for s >= 0."""
    si, _ = sici(s * theta)
    return np.cos(s * theta) / theta - s * (0.5 * math.pi - si)


def _isin2(s: np.ndarray, theta: float) -> np.ndarray:
    """int_Theta^inf sin(s x) / x^2 dx for s >= 0."""
    out = np.zeros_like(s)
    pos = s > 0
    sp = s[pos]
    _, ci = sici(sp * theta)
    out[pos] = np.sin(sp * theta) / theta - sp * ci
    return out


def _isin3(a: np.ndarray, theta: float) -> np.ndarray:
    """int_Theta^inf sin(a x) / x^3 dx, odd in a."""
    sign = np.sign(a)
    aa = np.abs(a)
    return sign * (
        np.sin(aa * theta) / (2.0 * theta * theta) + 0.5 * aa * _icos2(aa, theta)
    )


def tau_star(
    profile: DivisorProfile, v: float, spec: QuadratureSpec = DEFAULT_QUAD
) -> IntegralResult:
    """int_0^inf v^2 / (1 + theta^2 v^2) |tau(n, chi, theta)|^2 d theta.

    Bulk on [0, Theta] by adaptive panels.  Beyond Theta the kernel is
    split as 1/theta^2 minus 1/(theta^2 (1 + v^2 theta^2)): the first
    part is completed mode by mode in closed form (Si/Ci), the second is
    bounded by (sum |f_d|)^2 / (3 v^2 Theta^3) and folded into the error
    bound.

    Args:
        profile: divisor profile.
        v: window length, v >= 1.
        spec: quadrature parameters.

    Returns:
        IntegralResult (inexact) with an honest error bound.
    """
    if v < 1:
        raise ValueError("v must be at least 1 here")
    s, w_re, w_im = _pair_modes(profile)
    mass = float(np.sum(np.abs(profile.coeff_values()))) ** 2
    s_max = float(profile.logs[-1])
    val_floor = max(0.25 * math.pi * v, 1e-9)
    theta = spec.tail_cut or min(
        max(64.0, (mass / (3.0 * v * v * spec.rel_tol * val_floor)) ** (1.0 / 3.0)),
        6000.0,
    )
    abs2 = _tau_abs2(profile)

    def f(th: np.ndarray) -> np.ndarray:
        return v * v / (1.0 + th * th * v * v) * abs2(th)

    bulk, panel_err = _adaptive(f, _osc_breaks(0.0, theta, s_max + 1.0, 2048), spec)
    tail_cos = _icos2(np.abs(s), theta)
    tail_sin = np.sign(s) * _isin2(np.abs(s), theta)
    tail_terms = w_re * tail_cos - w_im * tail_sin
    tail = float(np.sum(tail_terms))
    split_bound = mass / (3.0 * v * v * theta**3)
    roundoff = 1e-14 * float(np.sum(np.abs(tail_terms))) + 3e-13 * abs(bulk) + 1e-13
    err = panel_err + split_bound + roundoff
    return IntegralResult(IntegralKind.TAU_STAR, bulk + tail, False, err)


def plancherel_rhs(
    profile: DivisorProfile, V: float, spec: QuadratureSpec = DEFAULT_QUAD
) -> IntegralResult:
    """(V / pi) int over R of (1 - sinc(theta V)) |tau|^2 / theta^2.

    Folding theta -> -theta gives a pure cosine series for the combined
    |tau(theta)|^2 + |tau(-theta)|^2, integrated in three stages: a
    two-term Taylor kernel below delta = 1e-3 / V (remainder in the
    error bound), adaptive panels on [delta, Theta], and per-mode closed
    forms past Theta, where the kernel splits into 1/theta^2 and
    sin(V theta)/(V theta^3) pieces with Si/Ci antiderivatives.

    Args:
        profile: divisor profile.
        V: window bound, V > 0.
        spec: quadrature parameters.

    Returns:
        IntegralResult (inexact); value matches m_2V within the bound.
    """
    if V <= 0:
        raise ValueError("V must be positive")
    s, w_re, _ = _pair_modes(profile)  # folded integrand is even: cos only
    s_abs = np.abs(s)
    folded = _tau_abs2_folded(profile)
    delta = 1e-3 / V
    s_max = float(profile.logs[-1])
    theta = spec.tail_cut or max(32.0 / V, 8.0)

    def f_series(th: np.ndarray) -> np.ndarray:
        x2 = (th * V) ** 2
        kern = V * V * (1.0 / 6.0 - x2 / 120.0)
        return kern * folded(th)

    def f_bulk(th: np.ndarray) -> np.ndarray:
        x = th * V
        kern = (1.0 - np.sin(x) / x) / (th * th)
        return kern * folded(th)

    head, head_err = _adaptive(f_series, np.linspace(0.0, delta, 3), spec)
    # Series remainder: |kernel error| <= V^2 (theta V)^4 / 5040.
    mass2 = 2.0 * float(np.sum(np.abs(w_re)))
    head_err += delta * V * V * (delta * V) ** 4 / 5040.0 * mass2
    bulk, bulk_err = _adaptive(
        f_bulk, _osc_breaks(delta, theta, s_max + V + 1.0, 2048), spec
    )
    tail_terms = w_re * (
        _icos2(s_abs, theta)
        - (_isin3(V + s, theta) + _isin3(V - s, theta)) / (2.0 * V)
    )
    tail = 2.0 * float(np.sum(tail_terms))
    # Accumulation across hundreds of panels plus the staged assembly
    # costs a few hundred ulps of the final magnitude.
    roundoff = (
        1e-14 * 2.0 * float(np.sum(np.abs(tail_terms)))
        + 3e-13 * (abs(head) + abs(bulk) + abs(tail))
        + 1e-13
    )
    value = (V / math.pi) * (head + bulk + tail)
    err = (V / math.pi) * (head_err + bulk_err + roundoff)
    return IntegralResult(IntegralKind.PLANCHEREL_RHS, value, False, err)


def i_lower(
    profile: DivisorProfile, V: float, spec: QuadratureSpec = DEFAULT_QUAD
) -> IntegralResult:
    """I(n) = V^2 int_{-1/V}^{1/V} |tau(n, chi, theta)|^2 d theta."""
    if V <= 0:
        raise ValueError("V must be positive")
    folded = _tau_abs2_folded(profile)
    s_max = float(profile.logs[-1])
    val, err = _adaptive(
        folded, _osc_breaks(0.0, 1.0 / V, s_max + 1.0, 1024), spec
    )
    return IntegralResult(IntegralKind.I_LOWER, V * V * val, False, V * V * err)


def m2v_lower_check(
    profile: DivisorProfile, V: float, spec: QuadratureSpec = DEFAULT_QUAD
) -> CheckEntry:
    """Check m_2V >= (V^2/6) int_{-1/V}^{1/V} (1 - theta^2 V^2/20) |tau|^2.

    The quadrature error of the right side is granted as slack.
    """
    if V <= 0:
        raise ValueError("V must be positive")
    folded = _tau_abs2_folded(profile)
    s_max = float(profile.logs[-1])

    def f(th: np.ndarray) -> np.ndarray:
        return (1.0 - th * th * V * V / 20.0) * folded(th)

    val, err = _adaptive(f, _osc_breaks(0.0, 1.0 / V, s_max + 1.0, 1024), spec)
    bound = V * V / 6.0 * val
    err = V * V / 6.0 * err
    lhs = m_2V(profile, V).value
    return pass_fail(
        f"m2vlower:n={profile.n}:f={profile.weight.label()}:V={V}",
        bound,
        lhs,
        err + 1e-12,
        witness=f"quadrature lower bound {bound:.6g} vs exact m_2V {lhs:.6g}",
    )


def prime_sum_diag(
    chi: DirichletCharacter,
    g: MultiplicativeWeight,
    t: float,
    theta: float,
    x: int,
    table: SpfTable,
) -> Tuple[float, float]:
    """Diagnostic prime sum against its predicted main terms.

    lhs = sum over p <= x with chi(p) != 0 of g(p)/p |1 + chi(p) p^(i
    theta)|^(2t) (primes dividing the modulus carry the zero character
    value and belong to no class).  mainTerms uses empirical class
    densities z_k from class_prime_sums.  Report-only: the O(1) term is
    unspecified.

    Args:
        chi, g: character and weight.
        t: moment parameter t >= 1.
        theta: |theta| <= 1.
        x: prime range, x <= table.limit.
        table: sieve table.

    Returns:
        (lhs, main_terms).
    """
    if abs(theta) > 1:
        raise ValueError("need |theta| <= 1")
    if t < 1:
        raise ValueError("t must be at least 1")
    lhs = 0.0
    for p in primes_up_to(x, table):
        p = int(p)
        z = chi.value(p)
        if z == 0:
            continue
        phase = complex(math.cos(theta * math.log(p)), math.sin(theta * math.log(p)))
        lhs += weight_value(g, p, table) / p * abs(1.0 + z * phase) ** (2.0 * t)
    sums = class_prime_sums(chi, g, x, table)
    zw = sums.z_estimates()
    y = zw.y
    lam = lambda_gamma(t)
    bg = beta_g(zw, t)
    logx = math.log(x)
    main = y * lam * math.log(1.0 + abs(theta) * logx) + bg * 2 ** (
        2 * t - 1
    ) * math.log(logx / (1.0 + abs(theta) * logx))
    return lhs, main
