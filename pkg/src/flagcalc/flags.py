"""Types, sigma-flags, flag bases and the density coefficients between them."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import models as _models
from .errors import InputError, ResourceError
from .models import (Model, Theory, canonical_form, extend_canonical, satisfies_theory,
                     subset_encoding, _restrict)


@dataclass(frozen=True)
class TypeSigma:
    """A fully labelled model on ``1..k``; equality is labelled equality."""

    model: Model

    @property
    def k(self) -> int:
        return self.model.n

    @classmethod
    def empty(cls, theory: Theory) -> "TypeSigma":
        return cls(Model.empty(theory, 0))

    def restrict(self, k: int) -> "TypeSigma":
        if not 0 <= k <= self.k:
            raise InputError(f"cannot restrict a type of size {self.k} to {k}")
        return TypeSigma(_restrict(self.model, tuple(range(1, k + 1))))


@dataclass(frozen=True)
class Flag:
    """A model whose first ``root_size`` vertices are the labelled type."""

    model: Model
    root_size: int = 0

    def __post_init__(self):
        if not 0 <= self.root_size <= self.model.n:
            raise InputError(f"root size {self.root_size} out of range for {self.model.n} vertices")

    @property
    def size(self) -> int:
        return self.model.n

    @property
    def theory(self) -> Theory:
        return self.model.theory

    @property
    def sigma(self) -> TypeSigma:
        return TypeSigma(_restrict(self.model, tuple(range(1, self.root_size + 1))))

    @property
    def encoding(self) -> bytes:
        return canonical_form(self.model, self.root_size).encoding

    def canonical(self) -> "Flag":
        return Flag(canonical_form(self.model, self.root_size).model, self.root_size)

    def isomorphic(self, other: "Flag") -> bool:
        return self.root_size == other.root_size and self.size == other.size and self.encoding == other.encoding

    def reroot(self, k: int) -> "Flag":
        """The same model viewed as a flag over the first ``k`` root vertices, canonicalized."""
        if not 0 <= k <= self.root_size:
            raise InputError(f"cannot re-root a flag with {self.root_size} roots at {k}")
        return Flag(self.model, k).canonical()


class FlagBasis:
    """Canonical sigma-flags on ``level`` vertices, sorted by encoding."""

    def __init__(self, theory: Theory, sigma: TypeSigma, level: int, flags):
        self.theory = theory
        self.sigma = sigma
        self.level = level
        self.flags = tuple(flags)
        self.index = {f.encoding: i for i, f in enumerate(self.flags)}

    def __len__(self):
        return len(self.flags)

    def __iter__(self):
        return iter(self.flags)

    def __getitem__(self, i):
        return self.flags[i]

    def position(self, flag: Flag) -> int:
        if flag.size != self.level or flag.root_size != self.sigma.k:
            raise InputError("flag does not belong to this basis (size or root mismatch)")
        if flag.sigma != self.sigma:
            raise InputError("flag is rooted on a different type")
        try:
            return self.index[flag.encoding]
        except KeyError:
            raise InputError("flag violates the theory of this basis") from None

    def __repr__(self):
        return f"FlagBasis(theory={self.theory.name!r}, k={self.sigma.k}, level={self.level}, size={len(self)})"


def _check_sigma(theory: Theory, sigma: TypeSigma) -> None:
    if sigma.model.theory.signature != theory.signature:
        raise InputError("type and theory have different signatures")
    if not satisfies_theory(sigma.model, theory):
        raise InputError("type violates the theory")


def enumerate_flags(theory: Theory, sigma: TypeSigma, level: int) -> FlagBasis:
    """The basis of sigma-flags on ``level`` vertices."""
    if level < sigma.k:
        raise InputError(f"no flags on {level} vertices over a type of size {sigma.k}")
    if level > _models.MAX_SIZE:
        raise ResourceError(f"flag enumeration limited to {_models.MAX_SIZE} vertices (requested {level})")
    return _basis(theory, sigma, level)


flag_basis = enumerate_flags


@lru_cache(maxsize=None)
def _basis(theory: Theory, sigma: TypeSigma, level: int) -> FlagBasis:
    k = sigma.k
    if level == k:
        _check_sigma(theory, sigma)
        return FlagBasis(theory, sigma, level, [Flag(sigma.model, k)])
    prev = _basis(theory, sigma, level - 1)
    ext = extend_canonical(theory, (f.model for f in prev.flags), k)
    return FlagBasis(theory, sigma, level, [Flag(c.model, k) for c in ext])


def _same_root(f1: Flag, f2: Flag) -> None:
    if f1.theory.signature != f2.theory.signature:
        raise InputError("flags over different theories")
    if f1.root_size != f2.root_size or f1.sigma != f2.sigma:
        raise InputError("flags over different types")


@lru_cache(maxsize=1 << 14)
def _profile(model: Model, k: int, m: int) -> Counter:
    """Encoding counts of the m-vertex subflags (root included) of a k-rooted model."""
    root = tuple(range(1, k + 1))
    out = Counter()
    for s in itertools.combinations(range(k + 1, model.n + 1), m - k):
        out[subset_encoding(model, root + s, k)] += 1
    return out


def subflag_distribution(flag: Flag, m: int) -> dict:
    """Map encoding -> density of the m-vertex subflags of ``flag``."""
    k = flag.root_size
    if not k <= m <= flag.size:
        raise InputError(f"subflag size {m} outside [{k}, {flag.size}]")
    total = math.comb(flag.size - k, m - k)
    return {e: Fraction(c, total) for e, c in _profile(flag.model, k, m).items()}


def density_p(small: Flag, big: Flag) -> Fraction:
    """Probability that a random root-containing vertex subset of ``big`` induces ``small``."""
    _same_root(small, big)
    if small.size > big.size:
        raise InputError("the small flag has more vertices than the big one")
    k = big.root_size
    count = _profile(big.model, k, small.size).get(small.encoding, 0)
    return Fraction(count, math.comb(big.size - k, small.size - k))


@lru_cache(maxsize=1 << 14)
def _joint_profile(model: Model, k: int, m1: int, m2: int) -> Counter:
    root = tuple(range(1, k + 1))
    free = range(k + 1, model.n + 1)
    out = Counter()
    for s1 in itertools.combinations(free, m1 - k):
        e1 = subset_encoding(model, root + s1, k)
        rest = [v for v in free if v not in s1]
        for s2 in itertools.combinations(rest, m2 - k):
            out[e1, subset_encoding(model, root + s2, k)] += 1
    return out


def joint_density_p2(f1: Flag, f2: Flag, big: Flag) -> Fraction:
    """Probability that disjoint random extensions S1, S2 of the root induce f1 and f2."""
    _same_root(f1, big)
    _same_root(f2, big)
    k = big.root_size
    a, b = f1.size - k, f2.size - k
    if a + b > big.size - k:
        raise InputError(f"need at least {f1.size + f2.size - k} vertices, got {big.size}")
    count = _joint_profile(big.model, k, f1.size, f2.size).get((f1.encoding, f2.encoding), 0)
    return Fraction(count, math.comb(big.size - k, a) * math.comb(big.size - k - a, b))


def joint_distribution(f_size1: int, f_size2: int, big: Flag) -> dict:
    """Map (enc1, enc2) -> joint density for all pairs of subflag classes of ``big``."""
    k = big.root_size
    a, b = f_size1 - k, f_size2 - k
    total = math.comb(big.size - k, a) * math.comb(big.size - k - a, b)
    return {key: Fraction(c, total) for key, c in _joint_profile(big.model, k, f_size1, f_size2).items()}


@dataclass(frozen=True)
class MonteCarlo:
    trials: int
    seed: int = 0


@dataclass(frozen=True)
class Estimate:
    value: Fraction
    stderr: float
    trials: int

    def __float__(self):
        return float(self.value)

    def within(self, exact, sigmas: float = 4.0) -> bool:
        return abs(float(self.value) - float(exact)) <= sigmas * self.stderr


def stream(seed: int, *ids: int) -> np.random.Generator:
    """Independent generator for (seed, ids...); deterministic and schedule-independent."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tuple(ids))))


def empirical_density(flag: Flag, host: Model, mode="exact"):
    """Density of ``flag`` in ``host`` rooted at its first ``root_size`` vertices.

    ``mode`` is ``"exact"`` (full subset enumeration, returns a Fraction) or a
    :class:`MonteCarlo` (one uniform subset per trial, returns an :class:`Estimate`).
    """
    k = flag.root_size
    if flag.theory.signature != host.theory.signature:
        raise InputError("flag and host model over different theories")
    if host.n < flag.size:
        raise InputError("host model smaller than the flag")
    if _restrict(host, tuple(range(1, k + 1))) != flag.sigma.model:
        raise InputError("host model does not extend the flag's type on its first vertices")
    target = flag.encoding
    root = tuple(range(1, k + 1))
    free = host.n - k
    r = flag.size - k
    if mode == "exact":
        hits = sum(1 for s in itertools.combinations(range(k + 1, host.n + 1), r)
                   if subset_encoding(host, root + s, k) == target)
        return Fraction(hits, math.comb(free, r))
    if not isinstance(mode, MonteCarlo) or mode.trials < 1:
        raise InputError(f"unknown density mode {mode!r}")
    vals = np.empty(mode.trials)
    for t in range(mode.trials):
        rng = stream(mode.seed, 0, t)
        s = tuple(sorted(int(x) + k + 1 for x in rng.choice(free, size=r, replace=False)))
        vals[t] = subset_encoding(host, root + s, k) == target
    return _estimate(vals, [Fraction(int(v)) for v in vals])


def _estimate(vals: np.ndarray, exact_vals) -> Estimate:
    n = len(vals)
    mean = sum(exact_vals, Fraction(0)) / n
    se = float(np.std(vals, ddof=1) / math.sqrt(n)) if n > 1 else float("inf")
    return Estimate(mean, se, n)


def q_normalizer(flag: Flag, target_root: int) -> Fraction:
    """Probability that a random injective re-labelling of roots ``k'+1..k`` reproduces ``flag``.

    Roots ``1..k'`` stay fixed; the new roots are drawn from the remaining
    vertices.  This is the coefficient of the re-rooted flag in the averaging
    operator.
    """
    k = flag.root_size
    if not 0 <= target_root <= k:
        raise InputError(f"target root {target_root} outside [0, {k}]")
    return _q(flag.model, k, target_root)


@lru_cache(maxsize=1 << 14)
def _q(model: Model, k: int, kk: int) -> Fraction:
    target = canonical_form(model, k).encoding
    n = model.n
    fixed = tuple(range(1, kk + 1))
    pool = range(kk + 1, n + 1)
    good = total = 0
    for theta in itertools.permutations(pool, k - kk):
        rest = tuple(v for v in pool if v not in theta)
        total += 1
        if canonical_form(model._relabel(fixed + theta + rest), k).encoding == target:
            good += 1
    return Fraction(good, total)
