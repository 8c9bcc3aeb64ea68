"""Command-line entry point.

Exit status: 0 success or pass, 1 verification failure, 2 input error,
3 resource or consistency error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import models as models_mod
from .algebra import downward, from_flag, is_zero, lift, multiply
from .errors import FlagCalcError, InputError
from .flags import Flag, TypeSigma, density_p, flag_basis, q_normalizer
from .kernels import (RootedKernel, SampleSeed, condition_ensemble, exact_hom, mc_hom, restrict_root,
                      sample_model, validate_kernel)
from .models import canonical_form, enumerate_models, satisfies_theory
from . import serialize as ser
from .verify import (DEFAULT_PANEL, check_cauchy_schwarz, check_certificate, check_chain_rule,
                     check_iterated_expectation, check_multiplicativity, check_product_asymptotics)


def _existing(path: str) -> Path:
    p = Path(path)
    if not p.exists() or p.is_dir():
        raise argparse.ArgumentTypeError(f"no such file: {path}")
    return p


def _load(path: Path):
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def _theory(arg: str):
    """Built-in theory name or path to a theory file."""
    if os.path.isfile(arg):
        return ser.theory_from_json(_load(Path(arg)))
    return ser.theory_from_json(arg)


def _sigma(args, theory) -> TypeSigma:
    if getattr(args, "sigma", None) is None:
        return TypeSigma.empty(theory)
    return TypeSigma(ser.model_from_json(_load(args.sigma), theory))


def _kernel(args):
    kernel = ser.any_kernel_from_json(_load(args.kernel))
    roots = getattr(args, "root_types", None)
    if roots:
        if isinstance(kernel, RootedKernel):
            raise InputError("--root-types given for an already rooted kernel")
        sigma = _sigma(args, kernel.theory)
        idx = tuple(kernel.types.index(n) if n in kernel.types else -1 for n in roots.split(","))
        if -1 in idx:
            raise InputError(f"unknown root type in {roots!r}")
        kernel = RootedKernel(kernel, idx, sigma)
    return kernel


def _flag(path: Path, theory, sigma: TypeSigma | None = None) -> Flag:
    flag = ser.flag_from_json(_load(path), theory, None if sigma is None else sigma.k)
    if sigma is not None and flag.sigma != sigma:
        raise InputError(f"{path}: flag is not rooted on the given type")
    return flag


class _Out:
    def __init__(self, path):
        self.path = path

    def write(self, obj) -> None:
        text = obj if isinstance(obj, str) else ser.dumps(obj)
        if not text.endswith("\n"):
            text += "\n"
        if self.path:
            Path(self.path).write_text(text)
        else:
            sys.stdout.write(text)


# -- handlers ------------------------------------------------------------------------

def cmd_models(args, out):
    theory = _theory(args.theory)
    if args.action == "enumerate":
        found = enumerate_models(theory, args.n)
        print(f"{len(found)} models", file=sys.stderr)
        out.write([ser.model_to_json(c.model) for c in found])
    elif args.action == "canon":
        model = ser.model_from_json(_load(args.model), theory)
        c = canonical_form(model, args.prefix)
        out.write({"model": ser.model_to_json(c.model), "encoding": c.encoding.hex(), "witness": list(c.witness)})
    elif args.action == "check":
        model = ser.model_from_json(_load(args.model), theory)
        out.write(json.dumps(satisfies_theory(model, theory)))
    return 0


def cmd_flags(args, out):
    theory = _theory(args.theory)
    sigma = _sigma(args, theory)
    if args.action == "enumerate":
        basis = flag_basis(theory, sigma, args.level)
        print(f"{len(basis)} flags", file=sys.stderr)
        out.write(ser.basis_to_json(basis))
    elif args.action == "density":
        out.write(ser.frac_to_str(density_p(_flag(args.small, theory, sigma), _flag(args.big, theory, sigma))))
    elif args.action == "q":
        out.write(ser.frac_to_str(q_normalizer(_flag(args.flag, theory, sigma), args.k)))
    return 0


def cmd_algebra(args, out):
    if args.action == "from-flag":
        theory = _theory(args.theory)
        out.write(ser.element_to_json(from_flag(_flag(args.flag, theory, _sigma(args, theory)), theory)))
        return 0
    a = ser.element_from_json(_load(args.elem))
    if args.action == "lift":
        out.write(ser.element_to_json(lift(a, args.level)))
    elif args.action == "mul":
        out.write(ser.element_to_json(multiply(a, ser.element_from_json(_load(args.other)))))
    elif args.action == "avg":
        out.write(ser.element_to_json(downward(a, args.k)))
    elif args.action == "iszero":
        out.write(json.dumps(is_zero(a)))
    return 0


def cmd_measure(args, out):
    if args.action == "restrict":
        kernel = ser.any_kernel_from_json(_load(args.kernel))
        if not isinstance(kernel, RootedKernel):
            raise InputError("restrict needs a rooted kernel file")
        r = restrict_root(kernel, args.k)
        out.write(ser.rooted_kernel_to_json(r) if isinstance(r, RootedKernel) else ser.kernel_to_json(r))
        return 0
    kernel = _kernel(args)
    theory = kernel.theory
    sigma = kernel.sigma
    if args.action == "eval":
        if (args.flag is None) == (args.elem is None):
            raise InputError("give exactly one of --flag or --elem")
        target = _flag(args.flag, theory, sigma) if args.flag else ser.element_from_json(_load(args.elem))
        out.write(ser.frac_to_str(exact_hom(kernel, target)))
    elif args.action == "sample":
        model = sample_model(kernel, args.n, SampleSeed(args.seed, args.stream))
        out.write(ser.model_to_json(model))
    elif args.action == "mc":
        est = mc_hom(kernel, _flag(args.flag, theory, sigma), args.n, args.trials, SampleSeed(args.seed, args.stream),
                     None if args.subsets == 0 else args.subsets)
        out.write({"estimate": ser.frac_to_str(est.value), "float": float(est.value), "stderr": est.stderr,
                   "trials": est.trials, "seed": args.seed})
    elif args.action == "ensemble":
        if isinstance(kernel, RootedKernel):
            raise InputError("ensemble needs an unrooted kernel")
        ens = condition_ensemble(kernel, _sigma(args, theory))
        out.write({"sigma_probability": ser.frac_to_str(ens.Z),
                   "members": [{"weight": ser.frac_to_str(w), "rooted": ser.rooted_kernel_to_json(m)}
                               for w, m in ens.members]})
    elif args.action == "validate":
        rep = validate_kernel(kernel.base, args.max_check)
        out.write({"valid": rep.valid, "violations": rep.violations})
        return 0 if rep.valid else 1
    return 0


def cmd_verify(args, out):
    if args.action == "chain-rule":
        theory = _theory(args.theory)
        rep = check_chain_rule(theory, _sigma(args, theory), args.m, args.level, seed=args.seed,
                               panel_size=args.panel)
    elif args.action == "mult":
        kernel = _kernel(args)
        rep = check_multiplicativity(kernel, ser.element_from_json(_load(args.a)),
                                     ser.element_from_json(_load(args.b)))
    elif args.action == "cs":
        rep = check_cauchy_schwarz(_kernel(args), ser.element_from_json(_load(args.elem)))
    elif args.action == "iterated":
        rep = check_iterated_expectation(ser.element_from_json(_load(args.elem)), args.k1, args.k2)
    elif args.action == "asymptotic":
        kernel = _kernel(args)
        n_list = [int(x) for x in args.n_list.split(",")]
        rep = check_product_asymptotics(kernel, _flag(args.f1, kernel.theory, kernel.sigma),
                                        _flag(args.f2, kernel.theory, kernel.sigma), n_list, args.trials,
                                        args.seed, args.C)
    elif args.action == "cert":
        rep = check_certificate(ser.certificate_from_json(_load(args.cert)), seed=args.seed, panel_size=args.panel)
    else:
        raise InputError(f"unknown check {args.action}")
    payload = ser.report_to_json(rep)
    out.write(payload)
    if args.report:
        Path(args.report).write_text(ser.dumps(payload))
    if not rep.passed:
        print(f"{rep.check}: FAIL counterexample={json.dumps(payload.get('counterexample'))}", file=sys.stderr)
    return 0 if rep.passed else 1


def cmd_selftest(args, out):
    from .selftest import report, selftest

    results = selftest(args.scale, args.seed, echo=sys.stderr)
    out.write(report(results, args.scale, args.seed))
    return 0 if all(c.passed for c in results) else 1


def cmd_assets(args, out):
    from .library import write_assets

    for path in write_assets(args.dir):
        print(path, file=sys.stderr)
    return 0


# -- parser ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    # Global options are accepted before or after the subcommand.  The copy on
    # each subcommand has suppressed defaults so it never overwrites the first.
    def common(defaults: bool) -> argparse.ArgumentParser:
        c = argparse.ArgumentParser(add_help=False)
        pick = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
        c.add_argument("--seed", type=int, default=pick(0))
        c.add_argument("--max-size", type=int, default=pick(None), help="vertex cap for canonical labelling")
        c.add_argument("--panel", type=int, default=pick(DEFAULT_PANEL), help="kernel panel size")
        c.add_argument("--out", default=pick(None), help="write output here instead of stdout")
        return c

    parser = argparse.ArgumentParser(prog="flagcalc", parents=[common(True)],
                                     description="Exact flag algebra calculus and step-kernel oracle.")
    sub = parser.add_subparsers(dest="command", required=True)
    shared = common(False)

    def add(name, **kw):
        return sub.add_parser(name, parents=[shared], **kw)

    p = add("models")
    p.add_argument("action", choices=["enumerate", "canon", "check"])
    p.add_argument("--theory", required=True)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--model", type=_existing)
    p.add_argument("--prefix", type=int, default=0)
    p.set_defaults(func=cmd_models)

    p = add("flags")
    p.add_argument("action", choices=["enumerate", "density", "q"])
    p.add_argument("--theory", required=True)
    p.add_argument("--sigma", type=_existing)
    p.add_argument("--level", type=int)
    p.add_argument("--small", type=_existing)
    p.add_argument("--big", type=_existing)
    p.add_argument("--flag", type=_existing)
    p.add_argument("--k", type=int, default=0)
    p.set_defaults(func=cmd_flags)

    p = add("algebra")
    p.add_argument("action", choices=["lift", "mul", "avg", "iszero", "from-flag"])
    p.add_argument("--elem", type=_existing)
    p.add_argument("--other", type=_existing, help="second factor for mul")
    p.add_argument("--level", type=int)
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--theory")
    p.add_argument("--sigma", type=_existing)
    p.add_argument("--flag", type=_existing)
    p.set_defaults(func=cmd_algebra)

    p = add("measure")
    p.add_argument("action", choices=["eval", "sample", "mc", "ensemble", "restrict", "validate"])
    p.add_argument("--kernel", type=_existing, required=True)
    p.add_argument("--flag", type=_existing)
    p.add_argument("--elem", type=_existing)
    p.add_argument("--sigma", type=_existing)
    p.add_argument("--root-types")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--subsets", type=int, default=32, help="random subsets per trial; 0 = all")
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--max-check", type=int, default=None)
    p.set_defaults(func=cmd_measure)

    p = add("verify")
    p.add_argument("action", choices=["chain-rule", "mult", "cs", "iterated", "asymptotic", "cert"])
    p.add_argument("--theory")
    p.add_argument("--sigma", type=_existing)
    p.add_argument("--m", type=int)
    p.add_argument("--level", type=int)
    p.add_argument("--kernel", type=_existing)
    p.add_argument("--root-types")
    p.add_argument("--a", type=_existing)
    p.add_argument("--b", type=_existing)
    p.add_argument("--elem", type=_existing)
    p.add_argument("--k1", type=int)
    p.add_argument("--k2", type=int)
    p.add_argument("--f1", type=_existing)
    p.add_argument("--f2", type=_existing)
    p.add_argument("--n-list", default="50,100,200,400")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--C", type=float, default=10.0)
    p.add_argument("--cert", type=_existing)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_verify)

    p = add("selftest")
    p.add_argument("--scale", choices=["small", "full"], default="small")
    p.set_defaults(func=cmd_selftest)

    p = add("assets", help="write the shipped example theories, kernels and certificate")
    p.add_argument("--dir", required=True)
    p.set_defaults(func=cmd_assets)
    return parser


_REQUIRED = {
    ("models", "canon"): ["model"], ("models", "check"): ["model"],
    ("flags", "enumerate"): ["level"], ("flags", "density"): ["small", "big"], ("flags", "q"): ["flag"],
    ("algebra", "lift"): ["elem", "level"], ("algebra", "mul"): ["elem", "other"],
    ("algebra", "avg"): ["elem"], ("algebra", "iszero"): ["elem"], ("algebra", "from-flag"): ["theory", "flag"],
    ("measure", "mc"): ["flag"], ("verify", "chain-rule"): ["theory", "m", "level"],
    ("verify", "mult"): ["kernel", "a", "b"], ("verify", "cs"): ["kernel", "elem"],
    ("verify", "iterated"): ["elem", "k1", "k2"], ("verify", "asymptotic"): ["kernel", "f1", "f2"],
    ("verify", "cert"): ["cert"],
}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    missing = [f"--{name.replace('_', '-')}" for name in _REQUIRED.get((args.command, getattr(args, "action", None)), [])
               if getattr(args, name, None) is None]
    if missing:
        parser.error(f"{args.command} {args.action} requires {', '.join(missing)}")
    if args.max_size is not None:
        models_mod.set_max_size(args.max_size)
    try:
        return args.func(args, _Out(args.out))
    except FlagCalcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
