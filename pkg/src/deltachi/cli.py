"""Command line front end: compute, dump, and verify.

Subcommands mirror the library surface: `chars` lists exponent tables,
`sieve` dumps factorization columns, `delta` evaluates one window
concentration value with its witness, `constants` prints the
closed-form values at a parameter point, `moments` writes checkpoint
series, and `verify` runs the named check suites and emits a report.

All invocations are deterministic: identical flags produce identical
output bytes.  Files are written atomically (temp file in the target
directory, then rename).  Exit codes: 0 success, 1 when a verify suite
contains FAIL entries, 2 for invalid arguments.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import math
import os
import sys
import tempfile
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .analytic import (
    beta_yomega,
    i_lower,
    lambda_binom,
    lambda_gamma,
    lambda_integral,
    m2v_lower_check,
    plancherel_rhs,
    script_L,
    thresholds,
    u_sequence,
)
from .characters import MODULUS_CAP, DirichletCharacter, character_by_index, enumerate_characters
from .delta import (
    DivisorProfile,
    WeightFunction,
    WeightKind,
    build_profile,
    delta_star,
    delta_sup,
    lemma31_check,
    m_2V,
    split_bound_check,
)
from .moments import (
    EnvelopeFamily,
    EnvelopeReport,
    MomentMode,
    MomentSeries,
    envelope,
    growth_fit,
    hchi_floor_check,
    lower_floor_check,
    moment_sum,
    moment_sum_star,
    trivial_bound_check,
)
from .report import CheckEntry, CheckStatus, VerifyReport, pass_fail
from .sieve import (
    LIMIT_CAP,
    MultiplicativeWeight,
    SpfTable,
    WeightFamily,
    build_spf,
    mu_squared,
    omega,
    tau,
)

SUITES = (
    "plancherel",
    "lemma31",
    "split",
    "ulimits",
    "lowerbounds",
    "trivialbound",
    "oracle-equivalence",
    "constants-identities",
    "all",
)

# Sampled n grid for the window-integral identity corpus: mixes smooth,
# prime, prime-power, and highly composite values up to 10^4.
PLANCHEREL_NS = (
    1, 2, 6, 12, 30, 36, 60, 97, 120, 210, 240, 360, 720, 840, 1001,
    1024, 1260, 2310, 2520, 3465, 4096, 5040, 5460, 6300, 7560, 8190,
    9240, 9699, 9900, 10000,
)


class CliError(Exception):
    """Invalid arguments or resources; maps to exit code 2."""


# ---------------------------------------------------------------------------
# Parsing and serialization helpers


def _parse_f(spec: str) -> WeightFunction:
    if spec == "unit":
        return WeightFunction(WeightKind.UNIT)
    if spec == "mu":
        return WeightFunction(WeightKind.MOEBIUS)
    if spec.startswith("char:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise CliError(f"bad weight {spec!r}: expected char:q:index")
        try:
            q, idx = int(parts[1]), int(parts[2])
        except ValueError as exc:
            raise CliError(f"bad weight {spec!r}: {exc}") from None
        try:
            return WeightFunction(WeightKind.CHARACTER, character_by_index(q, idx))
        except ValueError as exc:
            raise CliError(str(exc)) from None
    raise CliError(f"unknown weight {spec!r}: use unit, mu, or char:q:index")


def _parse_g(spec: str) -> MultiplicativeWeight:
    if spec == "unit":
        return MultiplicativeWeight(WeightFamily.UNIT)
    parts = spec.split(":")
    try:
        if parts[0] == "yomega" and len(parts) == 2:
            return MultiplicativeWeight(WeightFamily.Y_OMEGA, y=float(parts[1]))
        if parts[0] == "mu2yomega" and len(parts) == 2:
            return MultiplicativeWeight(WeightFamily.MU2_Y_OMEGA, y=float(parts[1]))
        if parts[0] == "hchi" and len(parts) == 3:
            chi = character_by_index(int(parts[1]), int(parts[2]))
            return MultiplicativeWeight(WeightFamily.H_CHI, chi=chi)
    except ValueError as exc:
        raise CliError(f"bad weight {spec!r}: {exc}") from None
    raise CliError(
        f"unknown weight {spec!r}: use unit, yomega:y, mu2yomega:y, or hchi:q:index"
    )


def _g_label(g: MultiplicativeWeight) -> str:
    if g.family is WeightFamily.UNIT:
        return "unit"
    if g.family is WeightFamily.H_CHI:
        return f"hchi:{g.chi.modulus}:{g.chi.index}"
    return f"{g.family.value}:{_num(g.y)}"


def _num(x: float) -> str:
    """Shortest clean decimal for reports: 2.0 -> 2, 3.5 stays 3.5."""
    return f"{x:.12g}"


def _parse_x(text: str, cap: int) -> int:
    try:
        val = float(text)
    except ValueError:
        raise CliError(f"bad numeric value {text!r}") from None
    if not val.is_integer() or val < 1:
        raise CliError(f"expected a positive integer, got {text!r}")
    if val > cap:
        raise CliError(f"{text} exceeds the supported cap {cap}")
    return int(val)


def _json_safe(x):
    """Replace non-finite floats so the emitted JSON stays strict."""
    if isinstance(x, float):
        return x if math.isfinite(x) else None
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    return x


def _dump_json(doc: Dict) -> str:
    return json.dumps(_json_safe(doc), indent=2, allow_nan=False) + "\n"


def _atomic_write(path: str, data: str) -> None:
    target = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(
        dir=os.path.dirname(target), prefix=".tmp.", suffix=os.path.basename(target)
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
        os.replace(tmp, target)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# chars / sieve / delta / constants


def _cmd_chars(args) -> int:
    if args.modulus < 1 or args.modulus > MODULUS_CAP:
        raise CliError(f"modulus must lie in [1, {MODULUS_CAP}]")
    chars = enumerate_characters(args.modulus)
    if args.json:
        doc = {
            "config": {"command": "chars", "modulus": args.modulus},
            "characters": [
                {
                    "index": c.index,
                    "order": c.order,
                    "principal": c.is_principal,
                    "exponents": c.exponent_table().tolist(),
                }
                for c in chars
            ],
        }
        sys.stdout.write(_dump_json(doc))
        return 0
    print(f"modulus {args.modulus}: {len(chars)} character(s)")
    for c in chars:
        tag = " principal" if c.is_principal else ""
        exps = " ".join(str(v) for v in c.exponent_table().tolist())
        print(f"index {c.index} order {c.order}{tag}: [{exps}]")
    return 0


def _cmd_sieve(args) -> int:
    x = _parse_x(args.limit, LIMIT_CAP)
    table = build_spf(x)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "spf", "omega", "mu2", "tau"])
    for n in range(1, x + 1):
        writer.writerow(
            [n, int(table.spf[n]), omega(n, table), mu_squared(n, table), tau(n, table)]
        )
    _atomic_write(args.dump_csv, buf.getvalue())
    print(f"wrote {x} rows to {args.dump_csv}")
    return 0


def _cmd_delta(args) -> int:
    n = _parse_x(args.n, LIMIT_CAP)
    f = _parse_f(args.weight)
    if args.V <= 0:
        raise CliError("--V must be positive")
    if args.star is not None and args.star <= 0:
        raise CliError("--star must be positive")
    table = build_spf(n)
    profile = build_profile(n, f, table)
    if args.star is not None:
        w = delta_star(profile, args.star)
        mode = "star"
    else:
        w = delta_sup(profile, args.V)
        mode = "sup"
    divisors = profile.divisors.tolist()
    run = None if w.empty else [int(w.i), int(w.j)]
    run_divs = None if w.empty else [divisors[w.i], divisors[w.j]]
    if args.json:
        doc = {
            "config": {
                "command": "delta",
                "n": n,
                "weight": f.label(),
                "V": args.V,
                "star": args.star,
            },
            "mode": mode,
            "value": w.value,
            "run": run,
            "run_divisors": run_divs,
            "window": {"u": w.u, "v": w.v},
        }
        sys.stdout.write(_dump_json(doc))
        return 0
    print(f"delta = {w.value!r}")
    if run is None:
        print("run = (empty)")
    else:
        print(f"run = [{run[0]}, {run[1]}] divisors [{run_divs[0]}, {run_divs[1]}]")
    print(f"window u = {w.u!r}, v = {w.v!r}")
    return 0


def _cmd_constants(args) -> int:
    t = args.t
    if t < 1:
        raise CliError("--t must be at least 1")
    lam = lambda_gamma(t)
    y0, y1 = thresholds(t)
    beta: Optional[Fraction] = None
    if args.r is not None:
        if args.r < 1:
            raise CliError("--r must be a positive integer")
        if not float(t).is_integer():
            raise CliError("--r needs an integer --t (rational beta)")
        beta = beta_yomega(args.r, int(t), Fraction(args.y).limit_denominator(10**9))
    if args.json:
        doc = {
            "config": {"command": "constants", "t": t, "r": args.r, "y": args.y},
            "lambda": lam,
            "y0": y0,
            "y1": y1,
            "beta": None if beta is None else str(beta),
        }
        sys.stdout.write(_dump_json(doc))
        return 0
    print(f"lambda = {_num(lam)}")
    print(f"y0 = {_num(y0)}")
    print(f"y1 = {_num(y1)}")
    if beta is not None:
        print(f"beta = {beta}")
    return 0


# ---------------------------------------------------------------------------
# moments


def _envelope_params(f: WeightFunction, g: MultiplicativeWeight) -> Tuple[EnvelopeFamily, int, float]:
    family = EnvelopeFamily.MU if f.kind is WeightKind.MOEBIUS else EnvelopeFamily.CHAR
    r = f.order if family is EnvelopeFamily.CHAR else 2
    y = g.y if g.family in (WeightFamily.Y_OMEGA, WeightFamily.MU2_Y_OMEGA) else 1.0
    return family, r, y


def _series_doc(
    series: MomentSeries,
    rep: EnvelopeReport,
    slope: Optional[float],
    config: Dict,
) -> Dict:
    return {
        "config": config,
        "series": {
            "t": series.t,
            "V": series.V,
            "mode": series.mode.value,
            "f": series.weight_f.label(),
            "g": _g_label(series.weight_g),
            "checkpoints": list(series.checkpoints),
            "values": list(series.values),
            "truncated": series.truncated,
        },
        "envelope": {
            "upper_exponent": rep.upper_exponent,
            "lower_exponents": list(rep.lower_exponents),
            "U": rep.U,
            "fitted_slope": rep.fitted_slope,
            "fit_residual": rep.fit_residual,
        },
        "slope_hint": slope,
    }


def _series_csv(series: MomentSeries, slope: Optional[float]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "S", "t", "V", "mode", "f", "g", "slope_hint"])
    hint = "" if slope is None else repr(slope)
    for cp, val in zip(series.checkpoints, series.values):
        writer.writerow(
            [
                cp,
                repr(val),
                _num(series.t),
                _num(series.V),
                series.mode.value,
                series.weight_f.label(),
                _g_label(series.weight_g),
                hint,
            ]
        )
    return buf.getvalue()


def _cmd_moments(args) -> int:
    x = _parse_x(args.x, LIMIT_CAP)
    f = _parse_f(args.f)
    g = _parse_g(args.g)
    if args.t < 1:
        raise CliError("--t must be at least 1")
    if args.V <= 0:
        raise CliError("--V must be positive")
    if args.star is not None and args.star <= 0:
        raise CliError("--star must be positive")
    if args.threads is not None and args.threads < 1:
        raise CliError("--threads must be positive")
    table = build_spf(x)
    try:
        if args.star is not None:
            series = moment_sum_star(
                x, args.t, args.star, f, g, table, threads=args.threads
            )
        else:
            series = moment_sum(x, args.t, args.V, f, g, table, threads=args.threads)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    try:
        slope, _resid = growth_fit(series)
    except ValueError:
        slope = None
    family, r, y = _envelope_params(f, g)
    rep = envelope(x, args.t, series.V, y, r, family, series=series)
    config = {
        "command": "moments",
        "x": x,
        "t": args.t,
        "V": args.V,
        "f": f.label(),
        "g": _g_label(g),
        "star": args.star,
        "threads": args.threads,
        "out": args.out,
    }
    doc = _series_doc(series, rep, slope, config)
    if args.out:
        if args.out.endswith(".json"):
            _atomic_write(args.out, _dump_json(doc))
        else:
            _atomic_write(args.out, _series_csv(series, slope))
        print(f"wrote {len(series.checkpoints)} checkpoint(s) to {args.out}")
    if args.json:
        sys.stdout.write(_dump_json(doc))
    if not args.json:
        print(f"S = {series.total!r}")
        if slope is not None:
            print(f"slope_hint = {slope!r}")
        print(f"envelope upper = {_num(rep.upper_exponent)} U = {_num(rep.U)}")
    return 0


# ---------------------------------------------------------------------------
# verify suites

_CORPUS_F = (
    ("char:4:1", lambda: WeightFunction(WeightKind.CHARACTER, character_by_index(4, 1))),
    ("char:5:1", lambda: WeightFunction(WeightKind.CHARACTER, character_by_index(5, 1))),
    ("mu", lambda: WeightFunction(WeightKind.MOEBIUS)),
)


def _aggregate(
    check_id: str, entries: List[CheckEntry], report_only: bool = False
) -> CheckEntry:
    """Collapse a per-n sweep into one entry keeping the worst margin.

    The worst margin is the largest lhs - rhs; the witness records the
    failing count and the tightest case.
    """
    worst = max(entries, key=lambda e: e.lhs - e.rhs)
    n_bad = sum(1 for e in entries if e.status is CheckStatus.FAIL)
    witness = f"{n_bad} failure(s) over {len(entries)} cases; tightest {worst.witness}"
    return pass_fail(
        check_id, worst.lhs, worst.rhs, worst.tolerance, witness,
        report_only=report_only,
    )


def _suite_plancherel(max_n: int) -> List[CheckEntry]:
    table = build_spf(max(max_n, 2))
    out = []
    for label, make_f in _CORPUS_F:
        f = make_f()
        for n in PLANCHEREL_NS:
            if n > max_n:
                continue
            profile = build_profile(n, f, table)
            for V in (1.0, 2.0, 5.0):
                exact = m_2V(profile, V)
                quad = plancherel_rhs(profile, V)
                diff = abs(quad.value - exact.value)
                tol = quad.error_bound + 1e-9 * max(1.0, abs(exact.value))
                out.append(
                    pass_fail(
                        f"plancherel:n={n}:f={label}:V={_num(V)}",
                        diff,
                        0.0,
                        tol,
                        f"exact={exact.value!r} quad={quad.value!r}",
                    )
                )
    return out


def _suite_lemma31(max_n: int) -> List[CheckEntry]:
    table = build_spf(max(max_n, 2))
    weights = [
        ("unit", WeightFunction(WeightKind.UNIT)),
        ("mu", WeightFunction(WeightKind.MOEBIUS)),
        ("char:4:1", WeightFunction(WeightKind.CHARACTER, character_by_index(4, 1))),
        ("char:5:1", WeightFunction(WeightKind.CHARACTER, character_by_index(5, 1))),
    ]
    out = []
    for label, f in weights:
        sweeps = {(q, v): [] for q in (1, 2) for v in (1.0, 2.0)}
        for n in range(1, max_n + 1):
            profile = build_profile(n, f, table)
            for (q, v), acc in sweeps.items():
                acc.append(lemma31_check(profile, q, v))
        for (q, v), acc in sorted(sweeps.items()):
            out.append(
                _aggregate(f"lemma31:f={label}:q={q}:v={_num(v)}:n<={max_n}", acc)
            )
    return out


def _suite_split(max_n: int) -> List[CheckEntry]:
    table = build_spf(max(max_n, 2))
    weights = [
        ("char:4:1", WeightFunction(WeightKind.CHARACTER, character_by_index(4, 1))),
        ("unit", WeightFunction(WeightKind.UNIT)),
    ]
    out = []
    for label, f in weights:
        sweeps = {
            (V, ell): []
            for V in (2.0, 4.0, 8.0)
            for ell in (1.0 / 3.0, 2.0 / 3.0, 6.0 / 7.0)
        }
        for n in range(1, max_n + 1):
            profile = build_profile(n, f, table)
            for (V, ell), acc in sweeps.items():
                acc.append(split_bound_check(profile, V, ell))
        for (V, ell), acc in sorted(sweeps.items()):
            out.append(
                _aggregate(
                    f"split:f={label}:V={_num(V)}:ell={_num(ell)}:n<={max_n}", acc
                )
            )
    return out


def _suite_ulimits() -> List[CheckEntry]:
    us = u_sequence(30)
    out = [
        pass_fail("ulimits:u1", float(us[1] - Fraction(4, 3)), 0.0, 0.0, "u1 = 4/3"),
        pass_fail("ulimits:u2", float(us[2] - Fraction(8, 7)), 0.0, 0.0, "u2 = 8/7"),
    ]
    worst_k, worst = 0, Fraction(0)
    closed_ok = True
    for k, u in enumerate(us):
        closed_ok &= u == Fraction(2 ** (k + 1), 2 ** (k + 1) - 1)
        excess = u - (1 + Fraction(1, 2**k))
        if excess > worst:
            worst_k, worst = k, excess
    out.append(
        pass_fail(
            "ulimits:closed-form:k<=30",
            0.0 if closed_ok else 1.0,
            0.0,
            0.0,
            "u_k = 2^(k+1)/(2^(k+1)-1) exactly",
        )
    )
    out.append(
        pass_fail(
            "ulimits:bound:k<=30",
            float(worst),
            0.0,
            0.0,
            f"max excess over 1+2^-k at k={worst_k}",
        )
    )
    return out


def _moment_corpus(max_n: int):
    chi4 = character_by_index(4, 1)
    chi5 = character_by_index(5, 1)
    for label, chi in (("char:4:1", chi4), ("char:5:1", chi5)):
        f = WeightFunction(WeightKind.CHARACTER, chi)
        for t in (1, 2):
            for y in (0.5, 1.0, 2.0):
                g = MultiplicativeWeight(WeightFamily.MU2_Y_OMEGA, y=y)
                yield label, chi, f, t, y, g


def _suite_lowerbounds(max_n: int, threads: Optional[int]) -> List[CheckEntry]:
    table = build_spf(max(max_n, 16))
    out: List[CheckEntry] = []

    # Kernel-truncation lower bound on the exact window integral.
    for label, make_f in _CORPUS_F:
        f = make_f()
        for V in (1.0, 2.0, 5.0):
            acc = []
            for n in PLANCHEREL_NS:
                if n > max_n:
                    continue
                acc.append(m2v_lower_check(build_profile(n, f, table), V))
            out.append(_aggregate(f"m2vlower:f={label}:V={_num(V)}:corpus", acc))

    # Pointwise floor V*tau/log n for the plain divisor count.  Honest
    # sweep: the claim fails already at n = 2, where the window cannot
    # hold both divisors.
    f_unit = WeightFunction(WeightKind.UNIT)
    worst_n, worst_gap = 0, -math.inf
    n_bad = 0
    for n in range(2, max_n + 1):
        V = min(1.0, math.log(n))
        val = delta_sup(build_profile(n, f_unit, table), V).value
        floor = V * tau(n, table) / math.log(n)
        gap = floor - val
        if gap > 1e-9:
            n_bad += 1
        if gap > worst_gap:
            worst_n, worst_gap = n, gap
    out.append(
        pass_fail(
            f"vtaufloor:2<=n<={max_n}",
            worst_gap,
            0.0,
            1e-9,
            f"{n_bad} violation(s); worst n={worst_n}",
        )
    )

    # Integral-to-pointwise diagnostic: I(n)/(7 log x) against the
    # squared concentration.  Recorded, never fatal.
    x_ref = float(max_n)
    chi4 = WeightFunction(WeightKind.CHARACTER, character_by_index(4, 1))
    for V in (1.0, 2.0):
        acc = []
        for n in range(1, min(max_n, 10**4) + 1):
            if mu_squared(n, table) == 0:
                continue
            profile = build_profile(n, chi4, table)
            low = i_lower(profile, V)
            d = delta_sup(profile, V).value
            acc.append(
                pass_fail(
                    f"ilowerdiag:n={n}",
                    low.value / (7.0 * math.log(x_ref)),
                    d * d,
                    low.error_bound + 1e-12,
                    f"n={n}",
                )
            )
        out.append(
            _aggregate(
                f"ilowerdiag:V={_num(V)}:x={_num(x_ref)}:squarefree",
                acc,
                report_only=True,
            )
        )

    # Aggregate floors of the moment series.
    for label, chi, f, t, y, g in _moment_corpus(max_n):
        for V in (1.0, 2.0, 3.5):
            series = moment_sum(max_n, t, V, f, g, table, threads=threads)
            out.append(lower_floor_check(series, table))
    for label, chi, f, t, y, g in _moment_corpus(max_n):
        for V in (1.0, 2.0, 3.5):
            if V > math.log(max_n):
                continue
            out.append(hchi_floor_check(max_n, t, V, chi, y, table, threads=threads))
    return out


def _suite_trivialbound(max_n: int, threads: Optional[int]) -> List[CheckEntry]:
    table = build_spf(max(max_n, 16))
    out = []
    for label, chi, f, t, y, g in _moment_corpus(max_n):
        for V in (2.0, 3.5):
            out.append(trivial_bound_check(max_n, t, V, f, g, table, threads=threads))
    return out


def _naive_runs_sup(profile: DivisorProfile, V: float) -> float:
    """Brute-force window maximum: test every pair run directly."""
    logs = profile.logs
    vals = profile.coeff_values()
    k = len(logs)
    best = 0.0
    for i in range(k):
        acc = 0.0 + 0.0j
        for j in range(i, k):
            acc += vals[j]
            if logs[j] - logs[i] < V:
                best = max(best, abs(acc))
    return best


def _naive_runs_star(profile: DivisorProfile, v: float) -> float:
    """Fixed-length windows anchored at divisors, direct summation."""
    logs = profile.logs
    vals = profile.coeff_values()
    k = len(logs)
    best = 0.0
    for j in range(k):
        # Right end exactly at divisor j.
        shifted = logs[j] - v
        acc = 0.0 + 0.0j
        for i in range(j, -1, -1):
            if logs[i] <= shifted:
                break
            acc += vals[i]
        best = max(best, abs(acc))
    for m in range(k - 1):
        # Left end just above divisor m; only the full captured run is
        # realizable (dropping the tail would need the left edge to move
        # past m's exit).
        target = logs[m] + v
        acc = 0.0 + 0.0j
        for j in range(m + 1, k):
            if logs[j] > target:
                break
            acc += vals[j]
        best = max(best, abs(acc))
    return best


def _suite_oracle(max_n: int) -> List[CheckEntry]:
    table = build_spf(max(max_n, 2))
    weights = [
        ("unit", WeightFunction(WeightKind.UNIT)),
        ("mu", WeightFunction(WeightKind.MOEBIUS)),
        ("char:4:1", WeightFunction(WeightKind.CHARACTER, character_by_index(4, 1))),
        ("char:5:1", WeightFunction(WeightKind.CHARACTER, character_by_index(5, 1))),
    ]
    lengths = (0.5, 1.0, 3.0)
    out = []
    for label, f in weights:
        sup_acc = {V: [] for V in lengths}
        star_acc = {v: [] for v in lengths}
        for n in range(1, max_n + 1):
            profile = build_profile(n, f, table)
            for V in lengths:
                got = delta_sup(profile, V).value
                want = _naive_runs_sup(profile, V)
                sup_acc[V].append(
                    pass_fail(f"n={n}", abs(got - want), 0.0, 1e-12, f"n={n}")
                )
                got = delta_star(profile, V).value
                want = _naive_runs_star(profile, V)
                star_acc[V].append(
                    pass_fail(f"n={n}", abs(got - want), 0.0, 1e-12, f"n={n}")
                )
        for V in lengths:
            out.append(
                _aggregate(f"oracle:sup:f={label}:V={_num(V)}:n<={max_n}", sup_acc[V])
            )
            out.append(
                _aggregate(f"oracle:star:f={label}:v={_num(V)}:n<={max_n}", star_acc[V])
            )
    return out


def _suite_constants() -> List[CheckEntry]:
    out = [
        pass_fail(
            "constants:lambda(1)=2", abs(lambda_gamma(1.0) - 2.0), 0.0, 1e-12, ""
        )
    ]
    worst = 0.0
    for t in range(1, 13):
        rel = abs(lambda_gamma(t) - lambda_binom(t)) / lambda_binom(t)
        worst = max(worst, rel)
    out.append(
        pass_fail("constants:lambda-gamma-vs-binom:t<=12", worst, 0.0, 1e-10, "")
    )
    worst = 0.0
    for t in range(1, 9):
        got = lambda_integral(t)
        worst = max(worst, abs(got - lambda_binom(t)) / lambda_binom(t))
    out.append(
        pass_fail("constants:lambda-gamma-vs-integral:t<=8", worst, 0.0, 1e-7, "")
    )
    margin = -math.inf
    grid = [1.0 + k / 4.0 for k in range(1, 21)]
    for t in grid:
        margin = max(margin, lambda_gamma(t) - 2.0 ** (2 * t - 1))
    out.append(
        pass_fail(
            "constants:lambda-below-2^(2t-1):t in (1,6]",
            margin,
            0.0,
            -1e-9,
            "strict inequality with margin",
        )
    )
    bad = 0
    for r in range(2, 9):
        for t in range(1, r):
            for y in (Fraction(1, 2), Fraction(1), Fraction(3)):
                want = y * lambda_binom(t) * Fraction(1, 2 ** (2 * t - 1))
                if beta_yomega(r, t, y) != want:
                    bad += 1
    out.append(
        pass_fail(
            "constants:beta-reduces-to-lambda:t<r<=8", float(bad), 0.0, 0.0, "exact"
        )
    )
    out.append(
        pass_fail(
            "constants:beta(5,2,1)=3/4",
            abs(float(beta_yomega(5, 2, 1) - Fraction(3, 4))),
            0.0,
            0.0,
            "exact rational",
        )
    )
    y0, y1 = thresholds(1.0)
    out.append(
        pass_fail(
            "constants:thresholds(1)=(1,1)",
            max(abs(y0 - 1.0), abs(y1 - 1.0)),
            0.0,
            1e-12,
            "",
        )
    )
    y0, y1 = thresholds(2.0)
    out.append(
        pass_fail(
            "constants:thresholds(2)=(2/7,2/5)",
            max(abs(y0 - 2.0 / 7.0), abs(y1 - 2.0 / 5.0)),
            0.0,
            1e-12,
            "",
        )
    )
    x = math.exp(math.exp(math.e))
    out.append(
        pass_fail(
            "constants:scriptL(e^e^e)=e^sqrt(e)",
            abs(script_L(x) - math.exp(math.sqrt(math.e))),
            0.0,
            1e-9,
            "",
        )
    )
    return out


def _run_suite(name: str, max_n: int, threads: Optional[int]) -> VerifyReport:
    report = VerifyReport(suite=name)
    if name in ("plancherel", "all"):
        report.extend(_suite_plancherel(max_n))
    if name in ("lemma31", "all"):
        report.extend(_suite_lemma31(max_n))
    if name in ("split", "all"):
        report.extend(_suite_split(max_n))
    if name in ("ulimits", "all"):
        report.extend(_suite_ulimits())
    if name in ("lowerbounds", "all"):
        report.extend(_suite_lowerbounds(max_n, threads))
    if name in ("trivialbound", "all"):
        report.extend(_suite_trivialbound(max_n, threads))
    if name in ("oracle-equivalence", "all"):
        report.extend(_suite_oracle(min(max_n, 2000)))
    if name in ("constants-identities", "all"):
        report.extend(_suite_constants())
    return report


def _cmd_verify(args) -> int:
    if args.suite not in SUITES:
        raise CliError(f"unknown suite {args.suite!r}")
    if args.max_n < 1:
        raise CliError("--max-n must be positive")
    report = _run_suite(args.suite, args.max_n, args.threads)
    doc = {
        "config": {
            "command": "verify",
            "suite": args.suite,
            "max_n": args.max_n,
            "threads": args.threads,
        },
        **report.to_dict(),
    }
    if args.out:
        _atomic_write(args.out, _dump_json(doc))
    if args.json:
        sys.stdout.write(_dump_json(doc))
    else:
        for e in report.entries:
            print(
                f"{e.status.value:11s} {e.check_id}  "
                f"lhs={e.lhs!r} rhs={e.rhs!r} tol={e.tolerance!r}"
            )
        n = len(report.entries)
        print(
            f"suite {args.suite}: {n - report.n_failed}/{n} ok, "
            f"{report.n_failed} FAIL"
        )
    return 1 if report.n_failed else 0


# ---------------------------------------------------------------------------
# Driver


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deltachi",
        description="Window concentration of twisted divisor sums: "
        "compute, dump, and verify.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chars", help="list the characters of a modulus")
    p.add_argument("--modulus", type=int, required=True)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("sieve", help="dump factorization columns as CSV")
    p.add_argument("--limit", required=True)
    p.add_argument("--dump-csv", required=True)

    p = sub.add_parser("delta", help="one window concentration value")
    p.add_argument("--n", required=True)
    p.add_argument("--weight", required=True, help="unit | mu | char:q:index")
    p.add_argument("--V", type=float, required=True)
    p.add_argument("--star", type=float, default=None, help="fixed window length")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("constants", help="closed-form constants at t")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--r", type=int, default=None)
    p.add_argument("--y", type=float, default=1.0)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("moments", help="checkpointed moment series")
    p.add_argument("--x", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--V", type=float, required=True)
    p.add_argument("--f", required=True, help="unit | mu | char:q:index")
    p.add_argument(
        "--g", required=True, help="unit | yomega:y | mu2yomega:y | hchi:q:index"
    )
    p.add_argument("--star", type=float, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("verify", help="run a named check suite")
    p.add_argument("--suite", required=True, choices=SUITES)
    p.add_argument("--max-n", type=int, default=10000)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--json", action="store_true")

    return parser


_HANDLERS = {
    "chars": _cmd_chars,
    "sieve": _cmd_sieve,
    "delta": _cmd_delta,
    "constants": _cmd_constants,
    "moments": _cmd_moments,
    "verify": _cmd_verify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
