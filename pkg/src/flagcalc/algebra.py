"""Flag algebra elements in chain-rule normal form.

An element is a coefficient vector over the flag basis at one level.  Two
elements are equal in the algebra iff their lifts to a common level agree, so
the quotient by the chain-rule relations never has to be built explicitly.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

from .errors import InputError
from .flags import (Flag, TypeSigma, flag_basis, joint_distribution, q_normalizer,
                    subflag_distribution)
from .models import Theory


class AlgebraElement:
    __slots__ = ("theory", "sigma", "level", "coeffs")

    def __init__(self, theory: Theory, sigma: TypeSigma, level: int, coeffs=None):
        if level < sigma.k:
            raise InputError(f"level {level} below type size {sigma.k}")
        self.theory = theory
        self.sigma = sigma
        self.level = level
        size = len(flag_basis(theory, sigma, level))
        clean = {}
        for i, c in (coeffs or {}).items():
            if not 0 <= i < size:
                raise InputError(f"basis index {i} out of range (basis has {size} flags)")
            c = Fraction(c)
            if c:
                clean[i] = c
        self.coeffs = clean

    @property
    def basis(self):
        return flag_basis(self.theory, self.sigma, self.level)

    def terms(self):
        """Yield ``(flag, coefficient)`` for the nonzero coefficients, in basis order."""
        basis = self.basis
        for i in sorted(self.coeffs):
            yield basis[i], self.coeffs[i]

    def vector(self) -> list:
        return [self.coeffs.get(i, Fraction(0)) for i in range(len(self.basis))]

    def coefficient(self, flag: Flag) -> Fraction:
        return self.coeffs.get(self.basis.position(flag), Fraction(0))

    def __repr__(self):
        body = ", ".join(f"{c}*{f.model!r}" for f, c in self.terms()) or "0"
        return f"AlgebraElement(k={self.sigma.k}, level={self.level}: {body})"

    def __add__(self, other):
        if isinstance(other, Rational):
            other = other * unit(self.theory, self.sigma)
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return linear_combine([(1, self), (1, other)])

    __radd__ = __add__

    def __neg__(self):
        return AlgebraElement(self.theory, self.sigma, self.level, {i: -c for i, c in self.coeffs.items()})

    def __sub__(self, other):
        if isinstance(other, Rational):
            other = other * unit(self.theory, self.sigma)
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return linear_combine([(1, self), (-1, other)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Rational):
            return AlgebraElement(self.theory, self.sigma, self.level,
                                  {i: c * other for i, c in self.coeffs.items()})
        if isinstance(other, AlgebraElement):
            return multiply(self, other)
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, Rational):
            other = other * unit(self.theory, self.sigma)
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return is_zero(self - other)

    __hash__ = None


def _compatible(a: AlgebraElement, b: AlgebraElement) -> None:
    if a.theory != b.theory:
        raise InputError("elements over different theories")
    if a.sigma != b.sigma:
        raise InputError("elements over different types")


def zero(theory: Theory, sigma: TypeSigma, level: int | None = None) -> AlgebraElement:
    return AlgebraElement(theory, sigma, sigma.k if level is None else level)


def unit(theory: Theory, sigma: TypeSigma) -> AlgebraElement:
    """The type itself: the single flag on ``k`` vertices."""
    return AlgebraElement(theory, sigma, sigma.k, {0: 1})


def from_flag(flag: Flag, theory: Theory | None = None) -> AlgebraElement:
    theory = theory or flag.theory
    basis = flag_basis(theory, flag.sigma, flag.size)
    return AlgebraElement(theory, flag.sigma, flag.size, {basis.position(flag): 1})


def lift(a: AlgebraElement, level: int) -> AlgebraElement:
    """Rewrite ``a`` over the level-``level`` basis using the chain rule."""
    if level < a.level:
        raise InputError(f"cannot lift from level {a.level} down to {level}")
    if level == a.level:
        return a
    small = a.basis
    big = flag_basis(a.theory, a.sigma, level)
    by_enc = {small[i].encoding: c for i, c in a.coeffs.items()}
    out = {}
    for j, f in enumerate(big):
        total = Fraction(0)
        for enc, d in subflag_distribution(f, a.level).items():
            c = by_enc.get(enc)
            if c is not None:
                total += c * d
        if total:
            out[j] = total
    return AlgebraElement(a.theory, a.sigma, level, out)


def linear_combine(terms) -> AlgebraElement:
    """``sum(c * a for c, a in terms)`` computed at the largest level present."""
    terms = list(terms)
    if not terms:
        raise InputError("linear combination of no terms")
    first = terms[0][1]
    for _, a in terms[1:]:
        _compatible(first, a)
    level = max(a.level for _, a in terms)
    out: dict = {}
    for c, a in terms:
        c = Fraction(c)
        if not c:
            continue
        for i, x in lift(a, level).coeffs.items():
            out[i] = out.get(i, 0) + c * x
    return AlgebraElement(first.theory, first.sigma, level, out)


def multiply(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Product at level ``level(a) + level(b) - k``."""
    _compatible(a, b)
    k = a.sigma.k
    level = a.level + b.level - k
    ea = {a.basis[i].encoding: c for i, c in a.coeffs.items()}
    eb = {b.basis[i].encoding: c for i, c in b.coeffs.items()}
    out = {}
    if ea and eb:
        for j, f in enumerate(flag_basis(a.theory, a.sigma, level)):
            total = Fraction(0)
            for (e1, e2), d in joint_distribution(a.level, b.level, f).items():
                c1 = ea.get(e1)
                if c1 is None:
                    continue
                c2 = eb.get(e2)
                if c2 is not None:
                    total += c1 * c2 * d
            if total:
                out[j] = total
    return AlgebraElement(a.theory, a.sigma, level, out)


def is_zero(a: AlgebraElement) -> bool:
    return not a.coeffs


def downward(a: AlgebraElement, target_root: int) -> AlgebraElement:
    """Averaging operator onto the type restricted to its first ``target_root`` vertices."""
    k = a.sigma.k
    if not 0 <= target_root <= k:
        raise InputError(f"target root {target_root} outside [0, {k}]")
    sigma = a.sigma.restrict(target_root)
    basis = flag_basis(a.theory, sigma, a.level)
    out: dict = {}
    for f, c in a.terms():
        q = q_normalizer(f, target_root)
        if q:
            j = basis.position(f.reroot(target_root))
            out[j] = out.get(j, 0) + c * q
    return AlgebraElement(a.theory, sigma, a.level, out)
