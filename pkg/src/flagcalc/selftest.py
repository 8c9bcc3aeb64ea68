"""Acceptance criteria as runnable checks.

Each criterion returns a :class:`Criterion` with a pass flag and exact
details.  Oracles here are written independently of the code under test
(brute-force permutation grouping, direct products of edge probabilities,
hand-derived closed forms).
"""

from __future__ import annotations

import itertools
import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import downward, from_flag, lift, linear_combine, unit
from .flags import Flag, TypeSigma, density_p, flag_basis, joint_density_p2
from .kernels import (SampleSeed, condition_ensemble, ensemble_average, exact_hom, kernel_panel, mc_hom,
                      rooted_panel)
from .library import (EDGE, GRAPHS, K3, NON_EDGE, TRIANGLE_FREE, graph, path,
                      single_type_graph_kernel, two_type_graph_kernel, worked_certificate)
from .verify import (Certificate, check_certificate, check_iterated_expectation, check_product_asymptotics,
                     rational_rank)


@dataclass
class Criterion:
    number: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0
    budget: float = 0.0

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"[{verdict}] criterion {self.number}: {self.name} ({self.seconds:.2f}s / budget {self.budget:g}s)"


# -- independent oracles -----------------------------------------------------------

def brute_force_graph_classes(n: int, forbid_triangle: bool = False) -> int:
    """Number of n-vertex graphs up to isomorphism, by grouping all edge sets under all n! relabellings."""
    pairs = list(itertools.combinations(range(n), 2))
    perms = list(itertools.permutations(range(n)))
    seen = set()
    for mask in range(1 << len(pairs)):
        edges = {pairs[b] for b in range(len(pairs)) if mask >> b & 1}
        if forbid_triangle and any({(a, b), (a, c), (b, c)} <= edges
                                   for a, b, c in itertools.combinations(range(n), 3)):
            continue
        seen.add(min(tuple(sorted(tuple(sorted((p[u], p[v]))) for u, v in edges)) for p in perms))
    return len(seen)


def _named(theory, sigma, level, named):
    """Basis positions of explicitly named flags."""
    basis = flag_basis(theory, sigma, level)
    return {name: basis.position(Flag(m, sigma.k)) for name, m in named.items()}


# -- criteria ----------------------------------------------------------------------------

def c1_enumeration():
    e = TypeSigma.empty(GRAPHS)
    got = {f"graphs/{n}": len(flag_basis(GRAPHS, e, n)) for n in (2, 3, 4)}
    got["triangle-free/3"] = len(flag_basis(TRIANGLE_FREE, TypeSigma.empty(TRIANGLE_FREE), 3))
    want = {f"graphs/{n}": brute_force_graph_classes(n) for n in (2, 3, 4)}
    want["triangle-free/3"] = brute_force_graph_classes(3, forbid_triangle=True)
    stated = {"graphs/2": 2, "graphs/3": 4, "graphs/4": 11, "triangle-free/3": 3}
    return got == want == stated, {"counts": got, "oracle": want}


def c2_chain_rule(panel_size=50, seed=0):
    e = TypeSigma.empty(GRAPHS)
    names = {"empty3": graph(3), "one-edge": graph(3, [(2, 3)]), "P3": path(3), "K3": K3}
    pos = _named(GRAPHS, e, 3, names)
    lifted = lift(from_flag(Flag(EDGE)), 3)
    vec = {k: lifted.coeffs.get(j, Fraction(0)) for k, j in pos.items()}
    stated = {"empty3": Fraction(0), "one-edge": Fraction(1, 3), "P3": Fraction(2, 3), "K3": Fraction(1)}
    panel = kernel_panel(GRAPHS, panel_size, seed)
    compared = 0
    bad = []
    for m in (2, 3):
        for f in flag_basis(GRAPHS, e, m):
            a = from_flag(f)
            for level in range(m, 6):
                b = lift(a, level)
                for j, W in enumerate(panel):
                    compared += 1
                    if exact_hom(W, a) != exact_hom(W, b):
                        bad.append((m, level, j))
    return vec == stated and not bad, {"lift_edge_3": vec, "compared": compared, "mismatches": bad[:5]}


def c3_density_identities(max_level=5):
    sigmas = {"empty": TypeSigma.empty(GRAPHS), "vertex": TypeSigma(graph(1)), "edge": TypeSigma(EDGE)}
    checked = 0
    failures = []
    for name, sigma in sigmas.items():
        k = sigma.k
        for level in range(k, max_level + 1):
            for F in flag_basis(GRAPHS, sigma, level):
                for m in range(k, level + 1):
                    total = sum(density_p(g, F) for g in flag_basis(GRAPHS, sigma, m))
                    checked += 1
                    if total != 1:
                        failures.append(("unity", name, level, m))
                for m1 in range(k, level + 1):
                    for m2 in range(k, level - m1 + k + 1):
                        b2 = flag_basis(GRAPHS, sigma, m2)
                        for F1 in flag_basis(GRAPHS, sigma, m1):
                            s = sum(joint_density_p2(F1, F2, F) for F2 in b2)
                            checked += 1
                            if s != density_p(F1, F):
                                failures.append(("marginal", name, level, m1, m2))
    return not failures, {"identities_checked": checked, "failures": failures[:5]}


def c4_multiplicativity(panel_size=50, seed=0):
    panel = kernel_panel(GRAPHS, panel_size, seed)
    checked = 0
    failures = []
    for name, sigma in (("empty", TypeSigma.empty(GRAPHS)), ("vertex", TypeSigma(graph(1)))):
        flags = [f for level in range(sigma.k, 4) for f in flag_basis(GRAPHS, sigma, level)]
        elems = [from_flag(f) for f in flags]
        kernels = rooted_panel(panel, GRAPHS, sigma)
        for i, j in itertools.combinations_with_replacement(range(len(elems)), 2):
            prod = elems[i] * elems[j]
            for W in kernels:
                checked += 1
                if exact_hom(W, prod) != exact_hom(W, elems[i]) * exact_hom(W, elems[j]):
                    failures.append((name, i, j))
    e = from_flag(Flag(EDGE))
    half = single_type_graph_kernel(Fraction(1, 2))
    lhs, rhs = exact_hom(half, e * e), exact_hom(half, e) ** 2
    ok = not failures and lhs == rhs == Fraction(1, 4)
    return ok, {"checked": checked, "failures": failures[:5], "e*e at 1/2": (lhs, rhs)}


def worked_square():
    e1, n1 = from_flag(Flag(EDGE, 1)), from_flag(Flag(NON_EDGE, 1))
    return downward((e1 - n1) * (e1 - n1), 0)


def c5_worked_example():
    sq = worked_square()
    e = TypeSigma.empty(GRAPHS)
    names = {"empty3": graph(3), "one-edge": graph(3, [(2, 3)]), "P3": path(3), "K3": K3}
    pos = _named(GRAPHS, e, 3, names)
    coeffs = {k: sq.coeffs.get(j, Fraction(0)) for k, j in pos.items()}
    stated = {"K3": Fraction(1), "P3": Fraction(-1, 3), "one-edge": Fraction(-1, 3), "empty3": Fraction(1)}
    values = {}
    ok = coeffs == stated and sq.level == 3 and len(sq.coeffs) == 4
    for p in (Fraction(1, 2), Fraction(3, 4), Fraction(1, 3), Fraction(1, 7)):
        v = exact_hom(single_type_graph_kernel(p), sq)
        values[str(p)] = v
        ok = ok and v == (2 * p - 1) ** 2
    ok = ok and values["1/2"] == 0 and values["3/4"] == Fraction(1, 4)
    return ok, {"coefficients": coeffs, "values": values}


def c6_ergodic_decomposition(kernels=20, seed=0):
    panel = kernel_panel(GRAPHS, kernels, seed)
    checked = 0
    failures = []
    for name, sigma in (("vertex", TypeSigma(graph(1))), ("edge", TypeSigma(EDGE))):
        norm_elem = downward(unit(GRAPHS, sigma), 0)
        for level in range(sigma.k, 4):
            for f in flag_basis(GRAPHS, sigma, level):
                a = from_flag(f)
                down = downward(a, 0)
                for j, W in enumerate(panel):
                    ens = condition_ensemble(W, sigma)
                    lhs = exact_hom(W, down)
                    rhs = exact_hom(W, norm_elem) * ensemble_average(ens, a)
                    checked += 1
                    if lhs != rhs or exact_hom(W, norm_elem) != ens.Z:
                        failures.append((name, level, j))
    return not failures, {"checked": checked, "failures": failures[:5]}


def c7_iterated_expectation():
    sigma = TypeSigma(EDGE)
    basis = flag_basis(GRAPHS, sigma, 3)
    elems = [from_flag(f) for f in basis]
    # Also a few fixed mixed combinations.
    elems.append(elems[0] - 2 * elems[-1] + Fraction(1, 3) * elems[1])
    elems.append(linear_combine([(1, x) for x in elems[:len(basis)]]))
    elems.append(unit(GRAPHS, sigma))
    failures = [i for i, a in enumerate(elems) if not check_iterated_expectation(a, 1, 0).passed]
    return not failures, {"elements": len(elems), "failures": failures}


def c8_sampling(batches=100, trials=400, n=200, asym_trials=10, seed=0):
    kernels = {"p=1/2": single_type_graph_kernel(Fraction(1, 2)), "two-type": two_type_graph_kernel()}
    flags = {"edge": Flag(EDGE), "K3": Flag(K3)}
    need = math.ceil(0.99 * batches)
    mc = {}
    ok = True
    for kname, W in kernels.items():
        for fname, F in flags.items():
            exact = exact_hom(W, F)
            hits = 0
            for b in range(batches):
                est = mc_hom(W, F, n, trials, SampleSeed(seed, b))
                hits += est.within(exact, 4.0)
            mc[f"{kname}/{fname}"] = {"exact": exact, "within_4se": hits, "batches": batches}
            ok = ok and hits >= need
    asym = {}
    for kname, W in kernels.items():
        rep = check_product_asymptotics(W, Flag(EDGE), Flag(EDGE), [50, 100, 200, 400], asym_trials, seed, C=10)
        asym[kname] = [(r["n"], r["delta"]) for r in rep.residuals["rows"]]
        ok = ok and rep.passed
    return ok, {"mc": mc, "product_gap": asym}


def c9_certificates(panel_size=50, seed=0):
    good = check_certificate(worked_certificate(), seed=seed, panel_size=panel_size)
    bad = check_certificate(Certificate(-1 * unit(GRAPHS, TypeSigma.empty(GRAPHS))), seed=seed,
                            panel_size=panel_size)
    cx = bad.counterexample or {}
    ok = (good.passed and good.residuals["residual_zero"] and good.residuals["panel_min"] >= 0
          and not bad.passed and cx.get("value") == -1 and "kernel" in cx)
    return ok, {"self_certificate": good.residuals, "negative_unit": {"verdict": bad.verdict, **cx}}


def c10_rank(seed=0):
    kernels = kernel_panel(GRAPHS, 8, seed)
    basis = flag_basis(GRAPHS, TypeSigma.empty(GRAPHS), 3)
    rows = [[exact_hom(W, f) for f in basis] for W in kernels]
    r = rational_rank(rows)
    return r == 4, {"rank": r, "kernels": len(kernels)}


CRITERIA = [
    (1, "flag enumeration counts", 1.0, c1_enumeration, {}),
    (2, "chain rule / lift invariance", 30.0, c2_chain_rule, {}),
    (3, "partition of unity and joint/marginal", 60.0, c3_density_identities, {}),
    (4, "multiplicativity", 60.0, c4_multiplicativity, {}),
    (5, "downward worked example", 1.0, c5_worked_example, {}),
    (6, "ergodic decomposition identity", 60.0, c6_ergodic_decomposition, {}),
    (7, "iterated expectations", 30.0, c7_iterated_expectation, {}),
    (8, "sampling convergence", 600.0, c8_sampling, {}),
    (9, "certificate checker", 5.0, c9_certificates, {}),
    (10, "basis rank", 5.0, c10_rank, {}),
]

SMALL = {8: {"batches": 10, "trials": 200, "asym_trials": 3}}


def run_criterion(number: int, scale: str = "full", seed: int = 0) -> Criterion:
    for num, name, budget, fn, kwargs in CRITERIA:
        if num == number:
            kwargs = dict(kwargs)
            if scale == "small":
                kwargs.update(SMALL.get(num, {}))
            if "seed" in fn.__code__.co_varnames:
                kwargs["seed"] = seed
            t0 = time.perf_counter()
            ok, details = fn(**kwargs)
            dt = time.perf_counter() - t0
            details["within_budget"] = dt <= budget
            return Criterion(num, name, bool(ok) and dt <= budget, details, dt, budget)
    raise KeyError(number)


def selftest(scale: str = "small", seed: int = 0, echo=None) -> list:
    if scale not in ("small", "full"):
        raise ValueError("scale must be 'small' or 'full'")
    out = []
    for num, *_ in CRITERIA:
        c = run_criterion(num, scale, seed)
        if echo is not None:
            print(c.line(), file=echo)
        out.append(c)
    return out


def report(criteria, scale: str, seed: int) -> dict:
    """Deterministic summary; wall-clock timings are left out on purpose."""
    from .serialize import to_jsonable

    return {
        "scale": scale,
        "seed": seed,
        "passed": all(c.passed for c in criteria),
        "criteria": [{"number": c.number, "name": c.name, "passed": c.passed,
                      "details": to_jsonable({k: v for k, v in c.details.items() if k != "within_budget"})}
                     for c in criteria],
    }


if __name__ == "__main__":
    results = selftest(sys.argv[1] if len(sys.argv) > 1 else "small", echo=sys.stdout)
    sys.exit(0 if all(c.passed for c in results) else 1)
