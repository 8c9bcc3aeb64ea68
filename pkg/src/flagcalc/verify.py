"""Executable checks of the algebra/measure dictionary and a positivity-certificate checker."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algebra import AlgebraElement, downward, from_flag, lift, linear_combine, unit
from .errors import InputError
from .flags import Flag, TypeSigma, flag_basis
from .kernels import (SampleSeed, StepKernel, condition_ensemble, ensemble_average, exact_hom,
                      kernel_panel, rooted_panel, sample_model, _as_rooted)
from .models import Model, Theory, subset_encoding

DEFAULT_PANEL = 50


@dataclass
class CheckReport:
    check: str
    passed: bool
    residuals: dict = field(default_factory=dict)
    seed: int | None = None
    inputs: dict = field(default_factory=dict)
    counterexample: object = None

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def __bool__(self):
        return self.passed


def _describe_kernel(kernel) -> dict:
    base, root_types, _ = _as_rooted(kernel)
    out = {"types": list(base.types), "weights": [str(w) for w in base.weights]}
    if root_types:
        out["root_types"] = [base.types[q] for q in root_types]
    return out


def check_chain_rule(theory: Theory, sigma: TypeSigma, m: int, level: int,
                     panel=None, seed: int = 0, panel_size: int = DEFAULT_PANEL) -> CheckReport:
    """Every m-vertex flag and its lift to ``level`` evaluate identically on the panel."""
    if not sigma.k <= m <= level:
        raise InputError(f"need k <= m <= level, got {sigma.k}, {m}, {level}")
    if panel is None:
        panel = kernel_panel(theory, panel_size, seed)
    kernels = rooted_panel(panel, theory, sigma)
    compared = 0
    for flag in flag_basis(theory, sigma, m):
        a = from_flag(flag, theory)
        lifted = lift(a, level)
        for j, W in enumerate(kernels):
            r = exact_hom(W, a) - exact_hom(W, lifted)
            compared += 1
            if r:
                return CheckReport("chain-rule", False, {"residual": r, "compared": compared}, seed,
                                   {"m": m, "level": level, "k": sigma.k},
                                   {"flag": flag, "kernel": _describe_kernel(W), "panel_index": j})
    return CheckReport("chain-rule", True, {"max_residual": Fraction(0), "compared": compared}, seed,
                       {"m": m, "level": level, "k": sigma.k, "kernels": len(kernels)})


def check_multiplicativity(kernel, a: AlgebraElement, b: AlgebraElement) -> CheckReport:
    lhs = exact_hom(kernel, a * b)
    rhs = exact_hom(kernel, a) * exact_hom(kernel, b)
    r = lhs - rhs
    return CheckReport("mult", r == 0, {"residual": r, "product": lhs, "factors": rhs},
                       inputs={"kernel": _describe_kernel(kernel)},
                       counterexample=None if r == 0 else {"kernel": _describe_kernel(kernel)})


def check_cauchy_schwarz(kernel: StepKernel, f: AlgebraElement) -> CheckReport:
    """``phi([[f]])^2 <= phi([[f*f]]) * phi([[1]])`` for the unrooted ``kernel``."""
    avg = exact_hom(kernel, downward(f, 0))
    sq = exact_hom(kernel, downward(f * f, 0))
    norm = exact_hom(kernel, downward(unit(f.theory, f.sigma), 0))
    lhs, rhs = avg * avg, sq * norm
    res = {"lhs": lhs, "rhs": rhs, "gap": rhs - lhs, "equality": lhs == rhs}
    ok = lhs <= rhs
    return CheckReport("cs", ok, res, inputs={"kernel": _describe_kernel(kernel)},
                       counterexample=None if ok else {"kernel": _describe_kernel(kernel)})


def check_iterated_expectation(a: AlgebraElement, k1: int, k2: int) -> CheckReport:
    if not 0 <= k2 <= k1 <= a.sigma.k:
        raise InputError(f"need 0 <= k'' <= k' <= k, got {k2}, {k1}, {a.sigma.k}")
    two_step = downward(downward(a, k1), k2)
    direct = downward(a, k2)
    diff = two_step - direct
    ok = not diff.coeffs
    return CheckReport("iterated", ok, {"nonzero_coefficients": len(diff.coeffs)},
                       inputs={"k": a.sigma.k, "k1": k1, "k2": k2, "level": a.level},
                       counterexample=None if ok else {"difference": diff})


def check_ergodic_decomposition(kernel: StepKernel, a: AlgebraElement) -> CheckReport:
    """``phi([[a]]) == phi([[1]]) * (ensemble average of a)`` for the conditioned kernel."""
    lhs = exact_hom(kernel, downward(a, 0))
    ens = condition_ensemble(kernel, a.sigma)
    norm = exact_hom(kernel, downward(unit(a.theory, a.sigma), 0))
    rhs = norm * ensemble_average(ens, a)
    r = lhs - rhs
    return CheckReport("ergodic", r == 0, {"residual": r, "Z": ens.Z, "normalizer": norm},
                       inputs={"kernel": _describe_kernel(kernel)},
                       counterexample=None if r == 0 else {"kernel": _describe_kernel(kernel)})


def _copies(host: Model, flag: Flag) -> list:
    k = flag.root_size
    root = tuple(range(1, k + 1))
    target = flag.encoding
    return [s for s in itertools.combinations(range(k + 1, host.n + 1), flag.size - k)
            if subset_encoding(host, root + s, k) == target]


def product_gap(host: Model, f1: Flag, f2: Flag) -> Fraction:
    """``p(f1, host) * p(f2, host)`` minus the joint density of disjoint copies, exactly."""
    k = f1.root_size
    free = host.n - k
    r1, r2 = f1.size - k, f2.size - k
    A, B = _copies(host, f1), _copies(host, f2)
    p1 = Fraction(len(A), math.comb(free, r1))
    p2 = Fraction(len(B), math.comb(free, r2))
    # Overlapping ordered pairs by inclusion-exclusion over the shared vertex set.
    ca, cb = Counter(), Counter()
    for copies, counter in ((A, ca), (B, cb)):
        for s in copies:
            for size in range(1, len(s) + 1):
                for t in itertools.combinations(s, size):
                    counter[t] += 1
    overlap = 0
    small, large = (ca, cb) if len(ca) <= len(cb) else (cb, ca)
    for t, x in small.items():
        y = large.get(t)
        if y:
            overlap += (-1) ** (len(t) + 1) * x * y
    disjoint = len(A) * len(B) - overlap
    joint = Fraction(disjoint, math.comb(free, r1) * math.comb(free - r1, r2))
    return p1 * p2 - joint


def check_product_asymptotics(kernel, f1: Flag, f2: Flag, n_list, trials: int, seed: int,
                              C: float = 10.0) -> CheckReport:
    """Mean absolute product gap on sampled structures stays below ``C/n`` and does not grow."""
    n_list = list(n_list)
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise InputError("n_list must be strictly increasing")
    rows = []
    ok = True
    bad = None
    prev = None
    for idx, n in enumerate(n_list):
        gaps = []
        for t in range(trials):
            host = sample_model(kernel, n, SampleSeed(seed, idx * 1_000_003 + t))
            gaps.append(abs(float(product_gap(host, f1, f2))))
        arr = np.array(gaps)
        mean = float(arr.mean())
        se = float(arr.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
        within = mean <= C / n
        if prev is not None:
            pm, pse = prev
            within = within and mean <= pm + 4 * math.hypot(se, pse)
        rows.append({"n": n, "delta": mean, "stderr": se, "bound": C / n, "ok": within})
        if not within and ok:
            ok = False
            bad = {"n": n, "delta": mean, "bound": C / n}
        prev = (mean, se)
    return CheckReport("asymptotic", ok, {"rows": rows}, seed,
                       {"n_list": n_list, "trials": trials, "C": C, "kernel": _describe_kernel(kernel)}, bad)


@dataclass
class Certificate:
    """``target >= sum c_j [[f_j^2]] + sum slack_F F`` coefficientwise proves ``target >= 0``."""

    target: AlgebraElement
    terms: list = field(default_factory=list)  # [(sigma, f, c)]
    slack: list = field(default_factory=list)  # [(flag, coefficient)]

    def validate(self) -> None:
        t = self.target
        if t.sigma.k != 0:
            raise InputError("certificate target must be over the empty type")
        for sigma, f, c in self.terms:
            if f.sigma != sigma:
                raise InputError("certificate term rooted on a type different from its declared sigma")
            if f.theory != t.theory:
                raise InputError("certificate term over a different theory")
            if Fraction(c) < 0:
                raise InputError("certificate term coefficients must be non-negative")
        for flag, c in self.slack:
            if flag.root_size != 0:
                raise InputError("slack flags must be unrooted")
            if Fraction(c) < 0:
                raise InputError("slack coefficients must be non-negative")

    def residual(self) -> AlgebraElement:
        pieces = [(1, self.target)]
        pieces += [(-Fraction(c), downward(f * f, 0)) for _, f, c in self.terms]
        pieces += [(-Fraction(c), from_flag(flag, self.target.theory)) for flag, c in self.slack]
        return linear_combine(pieces)


def check_certificate(cert: Certificate, panel=None, seed: int = 0,
                      panel_size: int = DEFAULT_PANEL) -> CheckReport:
    cert.validate()
    r = cert.residual()
    negative = [(f, c) for f, c in r.terms() if c < 0]
    theory = cert.target.theory
    if panel is None:
        panel = kernel_panel(theory.free(), panel_size, seed) if not theory.forbidden else []
    values = [exact_hom(W, cert.target) for W in panel]
    low = min(values) if values else None
    witness = next((j for j, v in enumerate(values) if v < 0), None)
    ok = not negative and witness is None
    residuals = {"level": r.level, "negative_coefficients": len(negative),
                 "residual_zero": not r.coeffs, "panel_min": low}
    counter = None
    if not ok:
        if witness is not None:
            counter = {"kernel": _describe_kernel(panel[witness]), "panel_index": witness,
                       "value": values[witness]}
        else:
            counter = {"flag": negative[0][0], "coefficient": negative[0][1]}
    return CheckReport("cert", ok, residuals, seed, {"terms": len(cert.terms), "slack": len(cert.slack)},
                       counter)


def rational_rank(rows) -> int:
    """Exact rank of a matrix of rationals by Gaussian elimination."""
    m = [[Fraction(x) for x in row] for row in rows]
    rank = 0
    cols = len(m[0]) if m else 0
    for c in range(cols):
        pivot = next((r for r in range(rank, len(m)) if m[r][c]), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][c]:
                f = m[r][c] / m[rank][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[rank])]
        rank += 1
    return rank
