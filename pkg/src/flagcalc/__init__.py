"""Exact flag algebra calculus with a step-kernel measure oracle."""

from .algebra import AlgebraElement, downward, from_flag, is_zero, lift, linear_combine, multiply, unit, zero
from .errors import ConditioningError, ConsistencyError, FlagCalcError, InputError, ResourceError
from .flags import Flag, FlagBasis, MonteCarlo, TypeSigma, density_p, enumerate_flags, flag_basis, \
    joint_density_p2, q_normalizer
from .kernels import (Ensemble, RootedKernel, SampleSeed, StepKernel, condition_ensemble, exact_hom, kernel_panel,
                      mc_hom, restrict_root, sample_model, validate_kernel)
from .models import (Model, PredicateSpec, Theory, automorphism_count, canonical_form, enumerate_models,
                     induced_submodel, isomorphic, satisfies_theory)
from .verify import (Certificate, CheckReport, check_cauchy_schwarz, check_certificate, check_chain_rule,
                     check_iterated_expectation, check_multiplicativity, check_product_asymptotics)

__version__ = "0.1.0"
