"""hmodlab: exact PWL function algebra and validated sup-norm enclosures for
standard Hilbert modules over C[0,1], driving a machine-checked
orthogonal-complement counterexample."""

__version__ = "0.1.0"

from .counterexample import (
    DenseSeq,
    complement_probe,
    dense_sequence,
    find_witness_window,
    kernel_generator,
    layer_family,
    prehilbert_demo,
    refute_membership,
    root_layer,
    solve_constraints,
    stacked_map,
    standard_scalar,
    verify_kernel,
)
from .dyadic import Interval
from .funcexpr import FuncLin, eval_interval, is_zero_exact, lin_combine, lin_mul, sqrt_atom, sup_norm_enclosure
from .hilbert import (
    ZERO,
    CoeffFamily,
    GeneratorElement,
    ModuleElement,
    Pair,
    apply_map,
    basis_vector,
    cauchy_gap,
    inner_product,
    module_norm,
    right_action,
    verify_map_bound,
)
from .pwl import PwlFunc, layer, ramp
from .suites import RunConfig, emit_curve, run_suites

__all__ = [
    "__version__",
    "CoeffFamily",
    "DenseSeq",
    "FuncLin",
    "GeneratorElement",
    "Interval",
    "ModuleElement",
    "Pair",
    "PwlFunc",
    "RunConfig",
    "ZERO",
    "apply_map",
    "basis_vector",
    "cauchy_gap",
    "complement_probe",
    "dense_sequence",
    "emit_curve",
    "eval_interval",
    "find_witness_window",
    "inner_product",
    "is_zero_exact",
    "kernel_generator",
    "layer",
    "layer_family",
    "lin_combine",
    "lin_mul",
    "module_norm",
    "prehilbert_demo",
    "ramp",
    "refute_membership",
    "right_action",
    "root_layer",
    "run_suites",
    "solve_constraints",
    "sqrt_atom",
    "stacked_map",
    "standard_scalar",
    "sup_norm_enclosure",
    "verify_kernel",
    "verify_map_bound",
]
