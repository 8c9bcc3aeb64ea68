"""JSON interchange: theories, models, flags, elements, kernels, certificates, reports.

Rationals travel as ``"p/q"`` strings in lowest terms with ``q > 0``.  Readers
reject unknown fields.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction

from .algebra import AlgebraElement
from .errors import InputError
from .flags import Flag, FlagBasis, TypeSigma, flag_basis
from .kernels import RootedKernel, StepKernel
from .library import THEORIES
from .models import Model, PredicateSpec, Theory, standard_supports
from .verify import Certificate, CheckReport


def frac_to_str(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


_RATIONAL = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(\d+)\s*)?$")


def frac_from_str(s) -> Fraction:
    if isinstance(s, bool):
        raise InputError(f"not a rational: {s!r}")
    if isinstance(s, int):
        return Fraction(s)
    if not isinstance(s, str):
        raise InputError(f"rationals must be 'p/q' strings, got {s!r}")
    m = _RATIONAL.match(s)
    if not m or (m.group(2) is not None and int(m.group(2)) == 0):
        raise InputError(f"not a rational: {s!r}")
    return Fraction(int(m.group(1)), int(m.group(2) or 1))


def _fields(d, required, optional=(), what="record"):
    if not isinstance(d, dict):
        raise InputError(f"{what} must be a JSON object")
    unknown = set(d) - set(required) - set(optional)
    if unknown:
        raise InputError(f"{what}: unknown fields {sorted(unknown)}")
    missing = [k for k in required if k not in d]
    if missing:
        raise InputError(f"{what}: missing fields {missing}")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# -- theories and models -------------------------------------------------------

def theory_to_json(theory: Theory) -> dict:
    return {
        "name": theory.name,
        "arity_bound": theory.arity_bound,
        "predicates": [{"name": p.name, "arity": p.arity, "symmetric": p.symmetric, "diagonal": p.diagonal}
                       for p in theory.predicates],
        "forbidden": [model_to_json(f) for f in theory.forbidden],
    }


def theory_from_json(d) -> Theory:
    if isinstance(d, str):
        try:
            return THEORIES[d]
        except KeyError:
            raise InputError(f"unknown built-in theory {d!r}; known: {sorted(THEORIES)}") from None
    _fields(d, ("name", "arity_bound", "predicates"), ("forbidden",), "theory")
    preds = []
    for p in d["predicates"]:
        _fields(p, ("name", "arity"), ("symmetric", "diagonal"), "predicate")
        preds.append(PredicateSpec(p["name"], p["arity"], p.get("symmetric", True),
                                   p.get("diagonal", "constant-false")))
    free = Theory(d["name"], d["arity_bound"], tuple(preds))
    forbidden = tuple(model_from_json(m, free) for m in d.get("forbidden", []))
    return Theory(d["name"], d["arity_bound"], tuple(preds), forbidden)


def _bits_to_json(theory: Theory, arity: int, color: tuple) -> dict:
    out = {}
    pos = 0
    for p in theory.predicates:
        if p.arity != arity:
            continue
        chunk = color[pos:pos + p.width]
        out[p.name] = bool(chunk[0]) if p.symmetric else [bool(b) for b in chunk]
        pos += p.width
    return out


def _bits_from_json(theory: Theory, arity: int, bits) -> tuple:
    preds = [p for p in theory.predicates if p.arity == arity]
    _fields(bits, [p.name for p in preds], (), f"bits of arity {arity}")
    color = []
    for p in preds:
        v = bits[p.name]
        if p.symmetric:
            if not isinstance(v, bool):
                raise InputError(f"predicate {p.name} is symmetric: expected a boolean")
            color.append(int(v))
        else:
            if not isinstance(v, list) or len(v) != p.width or not all(isinstance(b, bool) for b in v):
                raise InputError(f"predicate {p.name}: expected a list of {p.width} booleans")
            color.extend(int(b) for b in v)
    return tuple(color)


def model_to_json(model: Model) -> dict:
    colors = {}
    for s in standard_supports(model.n, model.theory.arities):
        colors.setdefault(str(len(s)), []).append(
            {"support": list(s), "bits": _bits_to_json(model.theory, len(s), model.colors[s])})
    return {"n": model.n, "colors": colors}


def model_from_json(d, theory: Theory, extra=()) -> Model:
    _fields(d, ("n", "colors"), extra, "model")
    colors = {}
    if not isinstance(d["colors"], dict):
        raise InputError("model colors must be an object keyed by arity")
    for arity, entries in d["colors"].items():
        try:
            i = int(arity)
        except ValueError:
            raise InputError(f"bad arity key {arity!r}") from None
        for e in entries:
            _fields(e, ("support", "bits"), (), "color entry")
            s = tuple(e["support"])
            if len(s) != i:
                raise InputError(f"support {s} listed under arity {i}")
            if s in colors:
                raise InputError(f"support {s} colored twice")
            colors[s] = _bits_from_json(theory, i, e["bits"])
    return Model(theory, d["n"], colors)


def flag_to_json(flag: Flag) -> dict:
    d = model_to_json(flag.model)
    d["root_size"] = flag.root_size
    return d


def flag_from_json(d, theory: Theory, root_size: int | None = None) -> Flag:
    model = model_from_json(d, theory, extra=("root_size",))
    k = d.get("root_size", root_size if root_size is not None else 0)
    if root_size is not None and k != root_size:
        raise InputError(f"flag root size {k} does not match expected {root_size}")
    return Flag(model, k)


def basis_to_json(basis: FlagBasis) -> dict:
    return {"theory": theory_to_json(basis.theory), "sigma": model_to_json(basis.sigma.model),
            "level": basis.level, "flags": [model_to_json(f.model) for f in basis]}


# -- algebra elements ------------------------------------------------------------

def element_to_json(a: AlgebraElement) -> dict:
    return {"theory": theory_to_json(a.theory), "sigma": model_to_json(a.sigma.model), "level": a.level,
            "terms": [{"flag": model_to_json(f.model), "coeff": frac_to_str(c)} for f, c in a.terms()]}


def element_from_json(d) -> AlgebraElement:
    _fields(d, ("theory", "sigma", "level", "terms"), (), "element")
    theory = theory_from_json(d["theory"])
    sigma = TypeSigma(model_from_json(d["sigma"], theory))
    level = d["level"]
    if not isinstance(level, int):
        raise InputError("element level must be an integer")
    basis = flag_basis(theory, sigma, level)
    coeffs = {}
    for t in d["terms"]:
        _fields(t, ("flag", "coeff"), (), "element term")
        flag = Flag(model_from_json(t["flag"], theory), sigma.k)
        j = basis.position(flag)
        coeffs[j] = coeffs.get(j, 0) + frac_from_str(t["coeff"])
    return AlgebraElement(theory, sigma, level, coeffs)


# -- kernels ---------------------------------------------------------------------

def _tuple_key(names) -> str:
    return "(" + ",".join(names) + ")"


def _parse_tuple_key(key: str, types: tuple) -> tuple:
    if not (key.startswith("(") and key.endswith(")")):
        raise InputError(f"bad type tuple key {key!r}")
    names = [x.strip() for x in key[1:-1].split(",")]
    try:
        return tuple(types.index(x) for x in names)
    except ValueError:
        raise InputError(f"unknown type in {key!r}") from None


def kernel_to_json(kernel: StepKernel) -> dict:
    dists = {}
    for i, table in kernel.distributions.items():
        dists[str(i)] = {
            _tuple_key(kernel.types[q] for q in tt): [
                {"color": _bits_to_json(kernel.theory, i, c), "prob": frac_to_str(m)}
                for c, m in sorted(d.items()) if m]
            for tt, d in sorted(table.items())}
    return {"theory": theory_to_json(kernel.theory),
            "types": [{"name": n, "weight": frac_to_str(w)} for n, w in zip(kernel.types, kernel.weights)],
            "distributions": dists}


def kernel_from_json(d) -> StepKernel:
    _fields(d, ("theory", "types", "distributions"), (), "kernel")
    theory = theory_from_json(d["theory"])
    types, weights = [], []
    for t in d["types"]:
        _fields(t, ("name", "weight"), (), "kernel type")
        types.append(t["name"])
        weights.append(frac_from_str(t["weight"]))
    types = tuple(types)
    dists = {}
    for arity, table in d["distributions"].items():
        i = int(arity)
        dists[i] = {}
        for key, entries in table.items():
            tt = _parse_tuple_key(key, types)
            dist = {}
            for e in entries:
                _fields(e, ("color", "prob"), (), "distribution entry")
                c = _bits_from_json(theory, i, e["color"])
                dist[c] = dist.get(c, 0) + frac_from_str(e["prob"])
            dists[i][tt] = dist
    return StepKernel(theory, types, weights, dists)


def rooted_kernel_to_json(kernel: RootedKernel) -> dict:
    return {"kernel": kernel_to_json(kernel.base),
            "root_types": [kernel.base.types[q] for q in kernel.root_types],
            "sigma": model_to_json(kernel.sigma.model)}


def rooted_kernel_from_json(d) -> RootedKernel:
    _fields(d, ("kernel", "root_types", "sigma"), (), "rooted kernel")
    base = kernel_from_json(d["kernel"])
    try:
        roots = tuple(base.types.index(n) for n in d["root_types"])
    except ValueError:
        raise InputError("unknown root type name") from None
    return RootedKernel(base, roots, TypeSigma(model_from_json(d["sigma"], base.theory)))


def any_kernel_from_json(d):
    if isinstance(d, dict) and "kernel" in d:
        return rooted_kernel_from_json(d)
    return kernel_from_json(d)


# -- certificates and reports ------------------------------------------------------

def certificate_to_json(cert: Certificate) -> dict:
    return {"target": element_to_json(cert.target),
            "terms": [{"sigma": model_to_json(s.model), "f": element_to_json(f), "c": frac_to_str(c)}
                      for s, f, c in cert.terms],
            "slack": [{"flag": model_to_json(f.model), "coeff": frac_to_str(c)} for f, c in cert.slack]}


def certificate_from_json(d) -> Certificate:
    _fields(d, ("target",), ("terms", "slack"), "certificate")
    target = element_from_json(d["target"])
    terms = []
    for t in d.get("terms", []):
        _fields(t, ("sigma", "f", "c"), (), "certificate term")
        f = element_from_json(t["f"])
        terms.append((TypeSigma(model_from_json(t["sigma"], f.theory)), f, frac_from_str(t["c"])))
    slack = []
    for s in d.get("slack", []):
        _fields(s, ("flag", "coeff"), (), "slack entry")
        slack.append((Flag(model_from_json(s["flag"], target.theory), 0), frac_from_str(s["coeff"])))
    return Certificate(target, terms, slack)


def to_jsonable(x):
    """Recursively convert report payloads (Fractions, flags, elements...) to plain JSON."""
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        return x
    if isinstance(x, Fraction):
        return frac_to_str(x)
    if isinstance(x, Flag):
        return flag_to_json(x)
    if isinstance(x, Model):
        return model_to_json(x)
    if isinstance(x, AlgebraElement):
        return element_to_json(x)
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    return repr(x)


def report_to_json(report: CheckReport) -> dict:
    out = {"check": report.check, "verdict": report.verdict, "residuals": to_jsonable(report.residuals),
           "seed": report.seed, "inputs": to_jsonable(report.inputs)}
    if report.counterexample is not None:
        out["counterexample"] = to_jsonable(report.counterexample)
    return out
