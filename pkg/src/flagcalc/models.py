"""Finite models of universal relational theories of bounded arity.

A model on ``n`` vertices (labelled ``1..n``) stores one *color* per
increasing vertex tuple of every arity that carries predicates.  A color is a
tuple of 0/1 bits: for each predicate of that arity (declared order) one bit
if the predicate is symmetric, otherwise ``i!`` bits, one per ordering of the
support in lexicographic permutation order.  Tuples with repeated vertices are
never stored; they take the predicate's constant diagonal value.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .errors import InputError, ResourceError

DIAGONALS = ("constant-false", "constant-true")

# Hard cap on the number of vertices handled by canonical labelling and
# enumeration.  Exhaustive search is only practical at desk scale.
MAX_SIZE = 10


def set_max_size(n: int) -> None:
    global MAX_SIZE
    if n < 1:
        raise InputError("max size must be positive")
    MAX_SIZE = int(n)


@dataclass(frozen=True)
class PredicateSpec:
    name: str
    arity: int
    symmetric: bool = True
    diagonal: str = "constant-false"

    def __post_init__(self):
        if not self.name or not isinstance(self.name, str):
            raise InputError("predicate name must be a non-empty string")
        if not isinstance(self.arity, int) or self.arity < 1:
            raise InputError(f"predicate {self.name}: arity must be >= 1")
        if self.diagonal not in DIAGONALS:
            raise InputError(f"predicate {self.name}: diagonal must be one of {DIAGONALS}")
        if self.arity == 1 and not self.symmetric:
            raise InputError(f"unary predicate {self.name} must be symmetric")

    @property
    def width(self) -> int:
        """Number of color bits this predicate occupies on one support."""
        return 1 if self.symmetric else math.factorial(self.arity)


@dataclass(frozen=True)
class Theory:
    """A universal theory: predicate signature plus forbidden induced submodels."""

    name: str
    arity_bound: int
    predicates: tuple
    forbidden: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "predicates", tuple(self.predicates))
        object.__setattr__(self, "forbidden", tuple(self.forbidden))
        if not isinstance(self.arity_bound, int) or self.arity_bound < 1:
            raise InputError("arity_bound must be an integer >= 1")
        names = [p.name for p in self.predicates]
        if len(set(names)) != len(names):
            raise InputError(f"theory {self.name}: duplicate predicate names")
        for p in self.predicates:
            if p.arity > self.arity_bound:
                raise InputError(f"predicate {p.name} has arity above the bound {self.arity_bound}")
        for f in self.forbidden:
            if not isinstance(f, Model) or f.theory.signature != self.signature:
                raise InputError("forbidden models must be models over the same signature")

    @property
    def signature(self) -> tuple:
        return (self.arity_bound, self.predicates)

    @property
    def arities(self) -> tuple:
        return _arities(self.predicates)

    def width(self, arity: int) -> int:
        return sum(p.width for p in self.predicates if p.arity == arity)

    def colors(self, arity: int) -> list:
        """All colors of the given arity, in lexicographic order of bit tuples."""
        return list(itertools.product((0, 1), repeat=self.width(arity)))

    def free(self) -> "Theory":
        """The same signature with no forbidden submodels."""
        if not self.forbidden:
            return self
        return _free(self)

    def forbid(self, *models: "Model", name: str | None = None) -> "Theory":
        return Theory(name or self.name, self.arity_bound, self.predicates, self.forbidden + tuple(models))

    def __hash__(self):
        return hash((self.name, self.signature, self.forbidden))


@lru_cache(maxsize=None)
def _free(theory: Theory) -> Theory:
    return Theory(theory.name, theory.arity_bound, theory.predicates)


@lru_cache(maxsize=None)
def _arities(predicates: tuple) -> tuple:
    return tuple(sorted({p.arity for p in predicates}))


@lru_cache(maxsize=None)
def standard_supports(n: int, arities: tuple) -> tuple:
    """Fixed enumeration order of supports: arity ascending, then lexicographic."""
    out = []
    for i in arities:
        out.extend(itertools.combinations(range(1, n + 1), i))
    return tuple(out)


@lru_cache(maxsize=None)
def _fully_symmetric(predicates: tuple, arity: int) -> bool:
    return all(p.symmetric for p in predicates if p.arity == arity)


@lru_cache(maxsize=None)
def _color_action(predicates: tuple, arity: int, posperm: tuple) -> tuple | None:
    """Bit source map for re-indexing a color.

    ``posperm[j]`` is the old position now sitting at position ``j``.  Returns
    ``src`` with ``new[b] = old[src[b]]``, or ``None`` when the action is trivial.
    """
    if _fully_symmetric(predicates, arity) or posperm == tuple(range(arity)):
        return None
    orderings = list(itertools.permutations(range(arity)))
    where = {o: idx for idx, o in enumerate(orderings)}
    src = []
    offset = 0
    for p in predicates:
        if p.arity != arity:
            continue
        if p.symmetric:
            src.append(offset)
        else:
            for rho in orderings:
                src.append(offset + where[tuple(posperm[x] for x in rho)])
        offset += p.width
    return tuple(src)


def reorder_color(theory: Theory, color: tuple, posperm: Sequence[int]) -> tuple:
    """Re-index ``color`` for a support whose position ``j`` now holds old position ``posperm[j]``."""
    src = _color_action(theory.predicates, len(posperm), tuple(posperm))
    if src is None:
        return color
    return tuple(color[b] for b in src)


class Model:
    """A finite relational structure with vertex set ``1..n``."""

    __slots__ = ("theory", "n", "colors", "_key", "_hash")

    def __init__(self, theory: Theory, n: int, colors: Mapping, *, _trusted: bool = False):
        self.theory = theory
        self.n = n
        if _trusted:
            self.colors = colors
        else:
            self.colors = self._validated(theory, n, colors)
        self._key = None
        self._hash = None

    @staticmethod
    def _validated(theory: Theory, n: int, colors: Mapping) -> dict:
        if not isinstance(n, int) or n < 0:
            raise InputError("vertex count must be a non-negative integer")
        arities = theory.arities
        out = {}
        for support, color in colors.items():
            support = tuple(support)
            i = len(support)
            if i not in arities:
                raise InputError(f"support {support} has an arity without predicates")
            if any(not 1 <= v <= n for v in support) or list(support) != sorted(set(support)):
                raise InputError(f"support {support} is not an increasing tuple of vertices in 1..{n}")
            if any(b not in (0, 1) for b in color):
                raise InputError(f"support {support}: color bits must be 0 or 1")
            color = tuple(int(b) for b in color)
            if len(color) != theory.width(i):
                raise InputError(f"support {support}: color has {len(color)} bits, expected {theory.width(i)}")
            out[support] = color
        for i in arities:
            expected = math.comb(n, i)
            got = sum(1 for s in out if len(s) == i)
            if got != expected:
                raise InputError(f"arity {i}: {got} colored supports, expected {expected}")
        return out

    @classmethod
    def empty(cls, theory: Theory, n: int = 0) -> "Model":
        """All predicates false everywhere."""
        colors = {s: (0,) * theory.width(len(s)) for s in standard_supports(n, theory.arities)}
        return cls(theory, n, colors, _trusted=True)

    @property
    def key(self) -> tuple:
        if self._key is None:
            self._key = tuple(self.colors[s] for s in standard_supports(self.n, self.theory.arities))
        return self._key

    def __eq__(self, other):
        if not isinstance(other, Model):
            return NotImplemented
        return (self.n == other.n and self.theory.signature == other.theory.signature
                and self.key == other.key)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, self.key))
        return self._hash

    def __repr__(self):
        marked = [s for s in standard_supports(self.n, self.theory.arities) if any(self.colors[s])]
        return f"Model(n={self.n}, nonzero={marked})"

    def color(self, support: Iterable[int]) -> tuple:
        return self.colors[tuple(support)]

    def holds(self, predicate: str, *vertices: int) -> bool:
        """Truth value of ``predicate(vertices)``, including diagonal tuples."""
        spec, offset = _locate(self.theory, predicate)
        if len(vertices) != spec.arity:
            raise InputError(f"{predicate} takes {spec.arity} arguments")
        if len(set(vertices)) < len(vertices):
            return spec.diagonal == "constant-true"
        support = tuple(sorted(vertices))
        bits = self.colors[support]
        if spec.symmetric:
            return bool(bits[offset])
        ordering = tuple(support.index(v) for v in vertices)
        idx = list(itertools.permutations(range(spec.arity))).index(ordering)
        return bool(bits[offset + idx])

    def relabel(self, order: Sequence[int]) -> "Model":
        """New model whose vertex ``j`` is old vertex ``order[j-1]``."""
        n = self.n
        if sorted(order) != list(range(1, n + 1)):
            raise InputError("relabelling must be a permutation of the vertices")
        return self._relabel(tuple(order))

    def _relabel(self, order: tuple) -> "Model":
        theory = self.theory
        colors = {}
        for t in standard_supports(self.n, theory.arities):
            olds = [order[v - 1] for v in t]
            s = tuple(sorted(olds))
            c = self.colors[s]
            if len(s) > 1 and not _fully_symmetric(theory.predicates, len(s)):
                c = reorder_color(theory, c, tuple(s.index(o) for o in olds))
            colors[t] = c
        return Model(theory, self.n, colors, _trusted=True)


def _locate(theory: Theory, name: str):
    target = next((p for p in theory.predicates if p.name == name), None)
    if target is None:
        raise InputError(f"unknown predicate {name!r}")
    offset = 0
    for p in theory.predicates:
        if p is target:
            return p, offset
        if p.arity == target.arity:
            offset += p.width


@dataclass(frozen=True)
class CanonicalModel:
    model: Model
    encoding: bytes
    witness: tuple  # canonical vertex j is input vertex witness[j-1]


def induced_submodel(model: Model, subset: Iterable[int]) -> Model:
    """Restriction to ``subset``, renumbered ``1..|S|`` preserving relative order."""
    s = sorted(set(subset))
    if not s:
        raise InputError("induced submodel needs a nonempty vertex subset")
    if s[0] < 1 or s[-1] > model.n:
        raise InputError(f"vertex subset {s} out of range 1..{model.n}")
    return _restrict(model, tuple(s))


def _restrict(model: Model, s: tuple) -> Model:
    colors = {t: model.colors[tuple(s[v - 1] for v in t)]
              for t in standard_supports(len(s), model.theory.arities)}
    return Model(model.theory, len(s), colors, _trusted=True)


def _code(model: Model, s: tuple) -> tuple:
    """Color sequence of the submodel induced on sorted subset ``s``."""
    colors = model.colors
    return tuple(colors[tuple(s[v - 1] for v in t)] for t in standard_supports(len(s), model.theory.arities))


def _bits_under(model: Model, order: tuple) -> tuple:
    theory = model.theory
    out = []
    for t in standard_supports(model.n, theory.arities):
        olds = [order[v - 1] for v in t]
        s = tuple(sorted(olds))
        c = model.colors[s]
        if len(s) > 1 and not _fully_symmetric(theory.predicates, len(s)):
            c = reorder_color(theory, c, tuple(s.index(o) for o in olds))
        out.extend(c)
    return tuple(out)


def _support_key(model: Model, support: tuple, v: int, cell: dict):
    """Label-free view of ``support`` seen from ``v`` under the current cell ids."""
    rest = [u for u in support if u != v]
    theory = model.theory
    color = model.colors[support]
    best = None
    for perm in itertools.permutations(rest):
        o = (v,) + perm
        c = reorder_color(theory, color, tuple(support.index(u) for u in o))
        cand = (tuple(cell[u] for u in o), c)
        if best is None or cand < best:
            best = cand
    return best


def _refined_cells(model: Model, p: int) -> list:
    """Ordered partition of the non-prefix vertices by an isomorphism-invariant refinement."""
    n = model.n
    free = list(range(p + 1, n + 1))
    if not free:
        return []
    incident = {v: [] for v in range(1, n + 1)}
    for s in model.colors:
        for v in s:
            incident[v].append(s)
    cell = {v: -v for v in range(1, p + 1)}
    for v in free:
        cell[v] = 0
    ncells = 1
    while True:
        sig = {v: (cell[v], tuple(sorted(_support_key(model, s, v, cell) for s in incident[v])))
               for v in free}
        uniq = sorted(set(sig.values()))
        rank = {val: r for r, val in enumerate(uniq)}
        for v in free:
            cell[v] = rank[sig[v]]
        if len(uniq) == ncells:
            break
        ncells = len(uniq)
    groups = [[] for _ in range(ncells)]
    for v in free:
        groups[cell[v]].append(v)
    return groups


def _candidate_orders(p: int, groups: list):
    prefix = tuple(range(1, p + 1))
    for parts in itertools.product(*(itertools.permutations(g) for g in groups)):
        yield prefix + tuple(itertools.chain.from_iterable(parts))


def canonical_form(model: Model, fixed_prefix: int = 0) -> CanonicalModel:
    """Canonical relabelling fixing ``1..fixed_prefix`` pointwise.

    The minimum of the color bit string is taken over relabellings that list
    the free vertices cell by cell in the order produced by an
    isomorphism-invariant refinement; this candidate set is itself invariant,
    so equal encodings coincide with isomorphism.
    """
    if not 0 <= fixed_prefix <= model.n:
        raise InputError(f"fixed prefix {fixed_prefix} out of range for a {model.n}-vertex model")
    if model.n > MAX_SIZE:
        raise ResourceError(f"canonical form limited to {MAX_SIZE} vertices (got {model.n})")
    return _canonical_cached(model, fixed_prefix, model.theory)


@lru_cache(maxsize=1 << 16)
def _canonical_cached(model: Model, p: int, theory: Theory) -> CanonicalModel:
    groups = _refined_cells(model, p)
    best_bits, best_order = None, None
    for order in _candidate_orders(p, groups):
        bits = _bits_under(model, order)
        if best_bits is None or bits < best_bits:
            best_bits, best_order = bits, order
    encoding = bytes([model.n, p]) + bytes(best_bits)
    return CanonicalModel(model._relabel(best_order), encoding, best_order)


def automorphism_count(model: Model, fixed_prefix: int = 0) -> int:
    """Number of relabellings fixing the prefix that leave ``model`` unchanged."""
    return _aut_cached(model, fixed_prefix)


@lru_cache(maxsize=1 << 14)
def _aut_cached(model: Model, p: int) -> int:
    groups = _refined_cells(model, p)
    ident = _bits_under(model, tuple(range(1, model.n + 1)))
    # An automorphism keeps every vertex inside its cell.
    slots = {}
    for g in groups:
        for v in g:
            slots[v] = g
    count = 0
    for parts in itertools.product(*(itertools.permutations(g) for g in groups)):
        image = dict(zip(itertools.chain.from_iterable(groups), itertools.chain.from_iterable(parts)))
        order = tuple(range(1, p + 1)) + tuple(image[v] for v in range(p + 1, model.n + 1))
        if _bits_under(model, order) == ident:
            count += 1
    return max(count, 1)


def isomorphic(m1: Model, m2: Model, fixed_prefix: int = 0) -> bool:
    if m1.theory.signature != m2.theory.signature:
        raise InputError("isomorphism test across different theories")
    if m1.n != m2.n:
        return False
    return canonical_form(m1, fixed_prefix).encoding == canonical_form(m2, fixed_prefix).encoding


@lru_cache(maxsize=1 << 18)
def _encoding_of_code(theory: Theory, n: int, p: int, code: tuple) -> bytes:
    colors = dict(zip(standard_supports(n, theory.arities), code))
    return canonical_form(Model(theory, n, colors, _trusted=True), p).encoding


def subset_encoding(model: Model, subset: tuple, fixed_prefix: int = 0) -> bytes:
    """Canonical encoding of the submodel induced on the sorted tuple ``subset``."""
    return _encoding_of_code(model.theory.free(), len(subset), fixed_prefix, _code(model, subset))


@lru_cache(maxsize=None)
def _forbidden_by_size(theory: Theory) -> dict:
    out: dict = {}
    for f in theory.forbidden:
        out.setdefault(f.n, set()).add(canonical_form(f, 0).encoding)
    return out


def satisfies_theory(model: Model, theory: Theory | None = None, *, containing: int | None = None) -> bool:
    """True iff no vertex subset induces a forbidden model.

    ``containing`` restricts the search to subsets through one vertex, which is
    all that needs checking after a one-vertex extension.
    """
    theory = theory or model.theory
    for size, encodings in _forbidden_by_size(theory).items():
        if size > model.n:
            continue
        if containing is None:
            subsets = itertools.combinations(range(1, model.n + 1), size)
        else:
            others = [v for v in range(1, model.n + 1) if v != containing]
            subsets = (tuple(sorted(c + (containing,))) for c in itertools.combinations(others, size - 1))
        for s in subsets:
            if subset_encoding(model, s) in encodings:
                return False
    return True


def extend_canonical(theory: Theory, models: Iterable[Model], prefix: int) -> list:
    """All canonical one-vertex extensions of ``models`` satisfying ``theory``, sorted by encoding."""
    seen = {}
    for m in models:
        n = m.n + 1
        if n > MAX_SIZE:
            raise ResourceError(f"enumeration limited to {MAX_SIZE} vertices")
        new_supports = [s for s in standard_supports(n, theory.arities) if s[-1] == n]
        palettes = [theory.colors(len(s)) for s in new_supports]
        for choice in itertools.product(*palettes):
            colors = dict(m.colors)
            colors.update(zip(new_supports, choice))
            ext = Model(theory, n, colors, _trusted=True)
            if not satisfies_theory(ext, theory, containing=n):
                continue
            c = canonical_form(ext, prefix)
            if c.encoding not in seen:
                seen[c.encoding] = c
    return [seen[e] for e in sorted(seen)]


def enumerate_models(theory: Theory, n: int) -> list:
    """One canonical representative per isomorphism class of ``n``-vertex models of ``theory``."""
    if not isinstance(n, int) or n < 0:
        raise InputError("n must be a non-negative integer")
    if n > MAX_SIZE:
        raise ResourceError(f"enumeration limited to {MAX_SIZE} vertices (requested {n})")
    return list(_enumerate_cached(theory, n))


@lru_cache(maxsize=None)
def _enumerate_cached(theory: Theory, n: int) -> tuple:
    if n == 0:
        return (canonical_form(Model.empty(theory, 0), 0),)
    prev = _enumerate_cached(theory, n - 1)
    return tuple(extend_canonical(theory, (c.model for c in prev), 0))
