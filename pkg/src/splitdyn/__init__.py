"""splitdyn: exact and numerical dynamics for split endomorphisms of P1 x P1.

Exact canonical heights and preperiodicity over Q, curve images and
invariance through elimination, a polynomial-decomposition calculus with a
unicritical pairing criterion, and a seeded numerical engine for invariant
measures, curve pullback measures, and germ linearization checks.
"""

from .errors import (
    EliminationCollapseError,
    FieldMismatchError,
    NoSolutionError,
    NonRepellingError,
    NotASolutionError,
    NotNormalFormError,
    ParseError,
    PreconditionViolatedError,
    ResourceBudgetError,
    RootNotInFieldError,
    SplitdynError,
    UnexpectedShapeError,
)
from .field import Field, FieldElement, QQ
from .poly import (
    ExceptionalKind,
    LinearPoly,
    Poly,
    bit_budget,
    chebyshev,
    compose,
    conjugate,
    engstrom_left,
    engstrom_right,
    get_bit_budget,
    is_exceptional_poly,
    iterate,
    normal_conjugacy_witness,
    normal_form,
    set_bit_budget,
)

__version__ = "0.1.0"
