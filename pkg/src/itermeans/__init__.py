"""Iterative means: composition operations built from monotone generators,
infinite products of inverse iterates, and mean-type mapping dynamics."""

from .errors import (
    DivergenceError,
    DomainError,
    GeneratorClassError,
    IterMeansError,
    MonotonicityError,
    NoConvergence,
    ParseError,
    RangeError,
)
from .exprlang import evaluate, parse, to_monotone, unparse
from .monofunc import (
    POSITIVE,
    REAL,
    UNIT_RAY,
    Direction,
    GeneratorClass,
    Interval,
    MonotoneFn,
    classify_generator,
    compose,
    from_text,
    identity,
    iterate,
)
from .iterprod import (
    convergence_report,
    infinite_product,
    iterative_mean,
    product_iterative_mean,
    product_partial,
)
from .means import (
    BivarOp,
    MeanPair,
    arithmetic_mean,
    conjugate_G_to_A,
    corollary2_MN,
    geometric_mean,
    make_A,
    make_C,
    make_D,
    make_G,
    quasi_arithmetic,
    quasi_geometric,
    theorem5_MN,
    window,
)
from .verify import (
    check_mean,
    check_reflexive_C,
    eq11_residual,
    equality_A,
    equality_C,
    equality_D,
    equality_G,
    remark5_residual,
    remark5_search,
    symmetry_analysis,
    theorem4_construct,
)
from .dynamics import (
    check_invariant_function,
    invariance_residual,
    invariant_function,
    iterate_mapping,
    limit_mean,
)

__version__ = "0.1.0"
