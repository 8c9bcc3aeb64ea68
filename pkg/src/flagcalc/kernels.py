"""Step-kernel exchangeable measures and their rooted conditionings.

A step kernel draws an i.i.d. type for every vertex and then colors every
increasing tuple independently from a distribution indexed by the ordered
tuple of its vertex types.  Evaluating a flag against a kernel is exact: all
masses are rationals and the sum over type assignments is finite.
"""

from __future__ import annotations

import bisect
import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .algebra import AlgebraElement
from .errors import ConditioningError, ConsistencyError, InputError
from .flags import Estimate, Flag, TypeSigma, stream
from .models import (Model, Theory, _encoding_of_code, automorphism_count, reorder_color,
                     satisfies_theory, standard_supports)


def _lcm_den(values) -> int:
    d = 1
    for v in values:
        d = math.lcm(d, Fraction(v).denominator)
    return d


def _posperm_to(t: tuple) -> tuple:
    """(sorted tuple s, posperm p) with ``t[j] == s[p[j]]``."""
    order = sorted(range(len(t)), key=lambda j: t[j])
    s = tuple(t[j] for j in order)
    p = [0] * len(t)
    for x, j in enumerate(order):
        p[j] = x
    return s, tuple(p)


class StepKernel:
    """Finite vertex-type exchangeable measure.

    ``distributions[i][(q1, .., qi)]`` maps colors of arity ``i`` to masses;
    colors left out have mass zero.  Type tuples are tuples of type indices.
    """

    def __init__(self, theory: Theory, types, weights, distributions):
        self.theory = theory
        self.types = tuple(types)
        self.weights = tuple(Fraction(w) for w in weights)
        if not self.types or len(set(self.types)) != len(self.types):
            raise InputError("kernel needs a nonempty list of distinct type names")
        if len(self.weights) != len(self.types):
            raise InputError("one weight per vertex type is required")
        nq = len(self.types)
        dists = {}
        for i in theory.arities:
            given = distributions.get(i)
            if given is None:
                raise InputError(f"missing distributions for arity {i}")
            width = theory.width(i)
            table = {}
            for tt, dist in given.items():
                tt = tuple(tt)
                if len(tt) != i or any(not 0 <= q < nq for q in tt):
                    raise InputError(f"bad type tuple {tt} for arity {i}")
                clean = {}
                for c, mass in dist.items():
                    c = tuple(int(b) for b in c)
                    if len(c) != width or any(b not in (0, 1) for b in c):
                        raise InputError(f"bad color {c} for arity {i}")
                    clean[c] = clean.get(c, 0) + Fraction(mass)
                table[tt] = {c: m for c, m in clean.items() if m}
            missing = [tt for tt in itertools.product(range(nq), repeat=i) if tt not in table]
            if missing:
                raise InputError(f"arity {i}: no distribution for type tuples {missing[:3]}...")
            dists[i] = table
        extra = set(distributions) - set(theory.arities)
        if extra:
            raise InputError(f"distributions given for arities without predicates: {sorted(extra)}")
        self.distributions = dists
        self._hom_cache: dict = {}

    @classmethod
    def from_orbit_representatives(cls, theory: Theory, types, weights, distributions) -> "StepKernel":
        """Build a kernel from distributions on non-decreasing type tuples; the rest follow by equivariance."""
        nq = len(types)
        full = {}
        for i in theory.arities:
            given = {tuple(k): v for k, v in distributions[i].items()}
            table = {}
            for tt in itertools.product(range(nq), repeat=i):
                s, p = _posperm_to(tt)
                table[tt] = {reorder_color(theory, c, p): m for c, m in given[s].items()}
            full[i] = table
        return cls(theory, types, weights, full)

    @property
    def k(self) -> int:
        return 0

    @property
    def sigma(self) -> TypeSigma:
        return TypeSigma.empty(self.theory)

    @property
    def base(self) -> "StepKernel":
        return self

    @property
    def root_types(self) -> tuple:
        return ()

    def __repr__(self):
        return f"StepKernel(types={self.types}, weights={[str(w) for w in self.weights]})"

    @cached_property
    def _tables(self):
        a = _lcm_den(self.weights)
        anum = tuple(int(w * a) for w in self.weights)
        tabs = {}
        for i, table in self.distributions.items():
            den = _lcm_den(m for d in table.values() for m in d.values())
            tabs[i] = (den, {tt: {c: int(m * den) for c, m in d.items()} for tt, d in table.items()})
        return a, anum, tabs

    @cached_property
    def _samplers(self):
        """Cumulative integer tables for exact sampling."""
        a, anum, tabs = self._tables
        out = {}
        for i, (den, table) in tabs.items():
            per = {}
            for tt, d in table.items():
                colors = sorted(c for c, m in d.items() if m > 0)
                cums = list(itertools.accumulate(d[c] for c in colors))
                per[tt] = (cums, colors)
            out[i] = (den, per)
        return a, list(itertools.accumulate(anum)), out

    def equivariance_violations(self) -> list:
        bad = []
        for i, table in self.distributions.items():
            for tt, d in table.items():
                for p in itertools.permutations(range(i)):
                    moved = tuple(tt[x] for x in p)
                    other = table[moved]
                    for c, m in d.items():
                        if other.get(reorder_color(self.theory, c, p), 0) != m:
                            bad.append((tt, moved, c))
        return bad

    @cached_property
    def is_equivariant(self) -> bool:
        return not self.equivariance_violations()

    def root_probability(self, root_types: tuple, sigma: TypeSigma) -> Fraction:
        """Probability that tuples inside the root realize ``sigma`` given the root types."""
        prob = Fraction(1)
        for s, c in sigma.model.colors.items():
            prob *= self.distributions[len(s)][tuple(root_types[v - 1] for v in s)].get(c, 0)
            if not prob:
                break
        return prob

    def _weight(self, model: Model, root_types: tuple) -> Fraction:
        """Probability that the non-root vertices and all non-root tuples match ``model`` exactly."""
        k = len(root_types)
        m = model.n
        a, anum, tabs = self._tables
        den = a ** (m - k)
        # Each tuple is scored when its last vertex receives a type.
        by_last = [[] for _ in range(m + 1)]
        for s, c in model.colors.items():
            if s[-1] > k:
                den_i, tab = tabs[len(s)]
                den *= den_i
                by_last[s[-1]].append((tuple(v - 1 for v in s[:-1]), tab, c))
        types = list(root_types) + [0] * (m - k)
        nq = len(self.types)

        def extend(j):
            if j > m:
                return 1
            total = 0
            for q in range(nq):
                w = anum[q]
                if not w:
                    continue
                types[j - 1] = q
                for head, tab, c in by_last[j]:
                    x = tab[tuple(types[v] for v in head) + (q,)].get(c, 0)
                    if not x:
                        w = 0
                        break
                    w *= x
                if w:
                    total += w * extend(j + 1)
            return total

        return Fraction(extend(k + 1), den)


class RootedKernel:
    """A step kernel conditioned on fixed root types and root colors equal to ``sigma``."""

    def __init__(self, base: StepKernel, root_types, sigma: TypeSigma):
        self.base = base
        self.root_types = tuple(root_types)
        self.sigma = sigma
        if len(self.root_types) != sigma.k:
            raise InputError("one root type per type vertex is required")
        if any(not 0 <= q < len(base.types) for q in self.root_types):
            raise InputError("root type index out of range")
        if sigma.model.theory.signature != base.theory.signature:
            raise InputError("type and kernel over different theories")
        if not base.root_probability(self.root_types, sigma):
            raise ConditioningError("the root types realize the type with probability zero")

    @property
    def theory(self) -> Theory:
        return self.base.theory

    @property
    def k(self) -> int:
        return self.sigma.k

    def __repr__(self):
        names = tuple(self.base.types[q] for q in self.root_types)
        return f"RootedKernel(root_types={names}, k={self.k})"


@dataclass
class Ensemble:
    sigma: TypeSigma
    members: list  # [(weight, RootedKernel)]
    sigma_probability: Fraction

    @property
    def Z(self) -> Fraction:
        return self.sigma_probability


@dataclass(frozen=True)
class SampleSeed:
    seed: int
    stream: int = 0


@dataclass
class KernelReport:
    valid: bool
    violations: list = field(default_factory=list)


def validate_kernel(kernel: StepKernel, max_check: int | None = None) -> KernelReport:
    """Check exact sums, equivariance and (up to ``max_check`` vertices) theory support."""
    theory = kernel.theory
    if max_check is None:
        max_check = 2 * theory.arity_bound + 2
    bad = []
    if any(w <= 0 for w in kernel.weights):
        bad.append("weight-positivity: every type weight must be positive")
    if sum(kernel.weights) != 1:
        bad.append(f"weight-sum: type weights sum to {sum(kernel.weights)}, not 1")
    masses_ok = True
    for i, table in kernel.distributions.items():
        for tt, d in sorted(table.items()):
            if any(m < 0 for m in d.values()):
                bad.append(f"negative-mass: arity {i}, types {tt}")
                masses_ok = False
            total = sum(d.values())
            if total != 1:
                bad.append(f"distribution-sum: arity {i}, types {tt} sums to {total}")
                masses_ok = False
    viol = kernel.equivariance_violations()
    for tt, moved, c in viol[:10]:
        bad.append(f"equivariance: types {tt} vs {moved}, color {c}")
    if masses_ok and not any(w < 0 for w in kernel.weights):
        for f in theory.forbidden:
            if f.n > max_check:
                continue
            copies = {f._relabel(order) for order in itertools.permutations(range(1, f.n + 1))}
            if any(kernel._weight(c, ()) > 0 for c in copies):
                bad.append(f"theory-support: forbidden {f.n}-vertex model {f!r} has positive probability")
    return KernelReport(not bad, bad)


def _as_rooted(kernel) -> tuple:
    if isinstance(kernel, RootedKernel):
        return kernel.base, kernel.root_types, kernel.sigma
    if isinstance(kernel, StepKernel):
        return kernel, (), TypeSigma.empty(kernel.theory)
    raise InputError(f"not a kernel: {kernel!r}")


def exact_hom(kernel, a) -> Fraction:
    """Exact value of the homomorphism realized by ``kernel`` on a flag or algebra element."""
    base, root_types, sigma = _as_rooted(kernel)
    if not base.is_equivariant:
        raise InputError("kernel is not equivariant; run validate_kernel")
    if isinstance(a, AlgebraElement):
        if a.sigma != sigma:
            raise InputError("element and kernel rooted on different types")
        if a.theory.signature != base.theory.signature:
            raise InputError("element and kernel over different theories")
        return sum((c * _flag_value(base, root_types, f) for f, c in a.terms()), Fraction(0))
    if isinstance(a, Flag):
        if a.root_size != sigma.k or a.sigma != sigma:
            raise InputError("flag and kernel rooted on different types")
        if a.theory.signature != base.theory.signature:
            raise InputError("flag and kernel over different theories")
        return _flag_value(base, root_types, a)
    raise InputError(f"cannot evaluate {a!r}")


def _flag_value(base: StepKernel, root_types: tuple, flag: Flag) -> Fraction:
    key = (flag.model, root_types)
    val = base._hom_cache.get(key)
    if val is None:
        k = len(root_types)
        # All labelled copies carry the same weight by equivariance.
        copies = math.factorial(flag.size - k) // automorphism_count(flag.model, k)
        val = copies * base._weight(flag.model, root_types)
        base._hom_cache[key] = val
    return val


def condition_ensemble(kernel: StepKernel, sigma: TypeSigma) -> Ensemble:
    """Decompose the kernel conditioned on the first ``k`` vertices realizing ``sigma``."""
    if sigma.model.theory.signature != kernel.theory.signature:
        raise InputError("type and kernel over different theories")
    raw = []
    for r in itertools.product(range(len(kernel.types)), repeat=sigma.k):
        w = math.prod((kernel.weights[q] for q in r), start=Fraction(1)) * kernel.root_probability(r, sigma)
        if w:
            raw.append((w, r))
    z = sum((w for w, _ in raw), Fraction(0))
    if not z:
        raise ConditioningError("the type has probability zero under this kernel")
    return Ensemble(sigma, [(w / z, RootedKernel(kernel, r, sigma)) for w, r in raw], z)


def ensemble_average(ensemble: Ensemble, a) -> Fraction:
    sig = a.sigma
    if sig != ensemble.sigma:
        raise InputError("element and ensemble over different types")
    return sum((w * exact_hom(member, a) for w, member in ensemble.members), Fraction(0))


def restrict_root(kernel: RootedKernel, k: int):
    """Forget roots ``k+1..``; ``k == 0`` gives back the unrooted base kernel."""
    if not 0 <= k <= kernel.k:
        raise InputError(f"cannot restrict {kernel.k} roots to {k}")
    if k == kernel.k:
        return kernel
    if k == 0:
        return kernel.base
    return RootedKernel(kernel.base, kernel.root_types[:k], kernel.sigma.restrict(k))


def _uniform_ints(rng: np.random.Generator, bound: int, size: int) -> list:
    if bound <= 2 ** 62:
        return rng.integers(0, bound, size=size).tolist()
    py = random.Random(int(rng.integers(0, 2 ** 63)))
    return [py.randrange(bound) for _ in range(size)]


def _draw_types(base: StepKernel, rng, count: int) -> list:
    a, cum, _ = base._samplers
    return [bisect.bisect_right(cum, u) for u in _uniform_ints(rng, a, count)]


def sample_model(kernel, n: int, seed: SampleSeed) -> Model:
    """Draw the structure on vertices ``1..n``; rooted kernels keep their roots fixed."""
    base, root_types, sigma = _as_rooted(kernel)
    k = len(root_types)
    if n < k:
        raise InputError(f"need at least {k} vertices for a {k}-rooted kernel")
    rng = stream(seed.seed, seed.stream)
    types = list(root_types) + _draw_types(base, rng, n - k)
    _, _, samplers = base._samplers
    colors = dict(sigma.model.colors)
    for i in base.theory.arities:
        den, per = samplers[i]
        supports = [s for s in itertools.combinations(range(1, n + 1), i) if s[-1] > k]
        for s, u in zip(supports, _uniform_ints(rng, den, len(supports))):
            cums, cols = per[tuple(types[v - 1] for v in s)]
            colors[s] = cols[bisect.bisect_right(cums, u)]
    model = Model(base.theory, n, colors, _trusted=True)
    if base.theory.forbidden and not satisfies_theory(model, base.theory):
        raise ConsistencyError(f"sampled model violates the theory (seed {seed})")
    return model


class _LazySample:
    """A sampled structure whose tuple colors are drawn on first access."""

    def __init__(self, base: StepKernel, root_types: tuple, sigma: TypeSigma, n: int, rng, chunk: int):
        self.rng = rng
        self.chunk = chunk
        self.types = list(root_types) + _draw_types(base, rng, n - len(root_types))
        self.colors = dict(sigma.model.colors)
        _, _, self.samplers = base._samplers
        self.buffers = {i: [] for i in self.samplers}

    def color(self, s: tuple):
        c = self.colors.get(s)
        if c is None:
            i = len(s)
            den, per = self.samplers[i]
            buf = self.buffers[i]
            if not buf:
                buf.extend(reversed(_uniform_ints(self.rng, den, self.chunk)))
            cums, cols = per[tuple(self.types[v - 1] for v in s)]
            c = self.colors[s] = cols[bisect.bisect_right(cums, buf.pop())]
        return c


def _distinct_rows(rng, lo: int, hi: int, rows: int, width: int) -> np.ndarray:
    """``rows`` uniformly random sorted ``width``-subsets of ``lo..hi-1``."""
    if width == 0:
        return np.empty((rows, 0), dtype=np.int64)
    if hi - lo < 3 * width:
        return np.sort(np.stack([rng.choice(np.arange(lo, hi), size=width, replace=False)
                                 for _ in range(rows)]), axis=1)
    out = np.sort(rng.integers(lo, hi, size=(rows, width)), axis=1)
    while True:
        dup = (np.diff(out, axis=1) == 0).any(axis=1)
        if not dup.any():
            return out
        out[dup] = np.sort(rng.integers(lo, hi, size=(int(dup.sum()), width)), axis=1)


def mc_hom(kernel, flag: Flag, n: int, trials: int, seed: SampleSeed, subsets: int | None = 32) -> Estimate:
    """Monte Carlo estimate of the flag density in structures on ``n`` vertices drawn from ``kernel``.

    Each trial draws one structure (lazily) and measures the flag density in it,
    either exactly over all vertex subsets (``subsets=None``) or over
    ``subsets`` uniform random subsets.  Both are unbiased for the exact value.
    """
    base, root_types, sigma = _as_rooted(kernel)
    k = len(root_types)
    if flag.root_size != k or flag.sigma != sigma:
        raise InputError("flag and kernel rooted on different types")
    if n < flag.size:
        raise InputError("n must be at least the flag size")
    if trials < 1:
        raise InputError("need at least one trial")
    theory = base.theory
    free = theory.free()
    target = flag.encoding
    m = flag.size
    r = m - k
    root = tuple(range(1, k + 1))
    supports = standard_supports(m, theory.arities)
    checked: dict = {}

    def classify(sample: _LazySample, s: tuple) -> bool:
        code = tuple(sample.color(tuple(s[v - 1] for v in t)) for t in supports)
        enc = _encoding_of_code(free, m, k, code)
        if theory.forbidden:
            ok = checked.get(enc)
            if ok is None:
                sub = Model(free, m, dict(zip(supports, code)), _trusted=True)
                ok = checked[enc] = satisfies_theory(sub, theory)
            if not ok:
                raise ConsistencyError(f"sampled structure violates the theory (seed {seed})")
        return enc == target

    vals = []
    for t in range(trials):
        rng = stream(seed.seed, seed.stream, t)
        if subsets is None:
            sample = _LazySample(base, root_types, sigma, n, rng, 4096)
            hits = sum(classify(sample, root + s) for s in itertools.combinations(range(k + 1, n + 1), r))
            vals.append(Fraction(hits, math.comb(n - k, r)))
        else:
            sample = _LazySample(base, root_types, sigma, n, rng, max(16, subsets * len(supports)))
            rows = _distinct_rows(rng, k + 1, n + 1, subsets, r)
            hits = sum(classify(sample, root + tuple(row)) for row in rows.tolist())
            vals.append(Fraction(hits, subsets))
    arr = np.array([float(v) for v in vals])
    mean = sum(vals, Fraction(0)) / trials
    se = float(np.std(arr, ddof=1) / math.sqrt(trials)) if trials > 1 else float("inf")
    return Estimate(mean, se, trials)


def random_kernel(theory: Theory, ntypes: int, rng: random.Random, max_den: int = 12) -> StepKernel:
    """Random equivariant kernel with small-denominator rational masses."""
    if theory.forbidden:
        raise InputError("random kernels are only generated for theories without forbidden models")
    weights = [rng.randint(1, 6) for _ in range(ntypes)]
    total = sum(weights)
    weights = [Fraction(w, total) for w in weights]
    reps = {}
    for i in theory.arities:
        colors = theory.colors(i)
        table = {}
        for s in itertools.combinations_with_replacement(range(ntypes), i):
            raw = [rng.randint(0, max_den) for _ in colors]
            if not any(raw):
                raw[rng.randrange(len(raw))] = 1
            raw = dict(zip(colors, raw))
            stab = [p for p in itertools.permutations(range(i)) if tuple(s[x] for x in p) == s]
            sym = {c: Fraction(sum(raw[reorder_color(theory, c, p)] for p in stab), len(stab)) for c in colors}
            z = sum(sym.values())
            table[s] = {c: v / z for c, v in sym.items()}
        reps[i] = table
    names = tuple("abcdefghijklmnopqrstuvwxyz"[j] for j in range(ntypes))
    return StepKernel.from_orbit_representatives(theory, names, weights, reps)


def uniform_kernel(theory: Theory) -> StepKernel:
    """One vertex type, every color equally likely (edge probability 1/2 for graphs)."""
    reps = {}
    for i in theory.arities:
        colors = theory.colors(i)
        reps[i] = {(0,) * i: {c: Fraction(1, len(colors)) for c in colors}}
    return StepKernel.from_orbit_representatives(theory, ("a",), (Fraction(1),), reps)


def kernel_panel(theory: Theory, size: int = 50, seed: int = 0) -> list:
    """Deterministic panel: 40% one-type (starting with the uniform kernel), 40% two-type, rest three-type."""
    rng = random.Random(seed)
    n1 = max(1, round(size * 0.4))
    n2 = round(size * 0.4)
    panel = [uniform_kernel(theory)]
    for j in range(1, size):
        ntypes = 1 if j < n1 else 2 if j < n1 + n2 else 3
        panel.append(random_kernel(theory, ntypes, rng))
    return panel[:size]


def rooted_panel(panel, theory: Theory, sigma: TypeSigma) -> list:
    """All positive-probability rootings of the panel kernels at ``sigma``."""
    if sigma.k == 0:
        return list(panel)
    out = []
    for kern in panel:
        try:
            out.extend(member for _, member in condition_ensemble(kern, sigma).members)
        except ConditioningError:
            continue
    return out
