"""Decomposition calculus for unicritical polynomials x^d + c.

Covers the intertwined family f_delta, generation and exact classification
of solutions of the semiconjugacy equation f^n . A == A . B, the pairing
criterion telling when two unicritical maps share a transversal curve with
infinitely many preperiodic pairs, linear symmetry groups, iterate
recognition, and leading-gap data.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .errors import (
    FieldMismatchError,
    NotASolutionError,
    PreconditionViolatedError,
    UnexpectedShapeError,
)
from .field import Field, FieldElement, QQ
from .poly import (
    LinearPoly,
    Poly,
    compose,
    iterate,
    solve_left_factor,
)


@dataclass(frozen=True)
class UnicriticalMap:
    """x^d + c with d >= 2."""

    d: int
    c: FieldElement

    def __post_init__(self):
        if self.d < 2:
            raise PreconditionViolatedError("unicritical degree must be >= 2")
        if not isinstance(self.c, FieldElement):
            object.__setattr__(self, "c", QQ.embed(self.c))

    @classmethod
    def create(cls, d: int, c) -> "UnicriticalMap":
        if not isinstance(c, FieldElement):
            c = QQ.embed(Fraction(c))
        return cls(d, c)

    @property
    def field(self) -> Field:
        return self.c.field

    @property
    def is_exceptional(self) -> bool:
        """Conjugate to the power map (c == 0) or, when d == 2 and c == -2,
        to the degree-2 normalized two-sided-cover polynomial."""
        if self.c.is_zero():
            return True
        return self.d == 2 and self.c == self.field.embed(-2)

    def poly(self) -> Poly:
        coeffs = [self.c] + [self.field.zero()] * (self.d - 1) + [self.field.one()]
        return Poly(self.field, coeffs)

    def __str__(self):
        return f"x^{self.d} + ({self.c})"


def f_delta(u: UnicriticalMap, delta: int) -> Poly:
    """(x^delta + c)^(d/delta); equals the map itself at delta == d."""
    if delta < 1 or u.d % delta:
        raise PreconditionViolatedError(f"{delta} does not divide {u.d}")
    inner = Poly(u.field, [u.c] + [u.field.zero()] * (delta - 1) + [u.field.one()])
    return inner ** (u.d // delta)


def _radical_factor(u: UnicriticalMap, delta: int) -> Poly:
    """x^delta + c, the intertwiner between the map and f_delta."""
    return Poly(u.field, [u.c] + [u.field.zero()] * (delta - 1) + [u.field.one()])


@dataclass(frozen=True)
class SemiconjugacySolution:
    """Canonical data (m, delta, L) reconstructing a solution pair."""

    m: int
    delta: int
    L: LinearPoly

    def __post_init__(self):
        if self.m < 0 or self.delta < 1:
            raise PreconditionViolatedError("need m >= 0 and delta >= 1")


def generate_semiconjugacy(
    u: UnicriticalMap, n: int, m: int, delta: int, L: LinearPoly
) -> tuple[Poly, Poly]:
    """Build A = f^m . (x^delta + c) . L and B = L^-1 . f_delta^n . L."""
    if n < 1:
        raise PreconditionViolatedError("n must be >= 1")
    if m < 0:
        raise PreconditionViolatedError("m must be >= 0")
    if L.field != u.field:
        raise FieldMismatchError("linear map over a different field")
    f = u.poly()
    A = compose(_radical_factor(u, delta), L.as_poly())
    for _ in range(m):
        A = compose(f, A)
    fd_n = iterate(f_delta(u, delta), n)
    B_core = compose(fd_n, L.as_poly())
    B = compose(L.inverse().as_poly(), B_core)
    return A, B


def intertwine_check(u: UnicriticalMap, n: int, sol: SemiconjugacySolution) -> bool:
    """Reconstruct (A, B) from sol and verify f^n . A == A . B exactly."""
    A, B = generate_semiconjugacy(u, n, sol.m, sol.delta, sol.L)
    f_n = iterate(u.poly(), n)
    return compose(f_n, A) == compose(A, B)


def classify_semiconjugacy(
    u: UnicriticalMap, n: int, A: Poly, B: Poly
) -> SemiconjugacySolution:
    """Recover the canonical (m, delta, L) for a solution of f^n . A == A . B.

    Requires a non-exceptional map.  The representation is canonicalized by
    the smallest m admitting an exact reconstruction of both A and B; the
    only contract is exact reconstruction equality.
    """
    if u.is_exceptional:
        raise PreconditionViolatedError(
            "classification applies to non-exceptional unicritical maps only"
        )
    if A.is_constant() or B.is_constant():
        raise PreconditionViolatedError("A and B must be nonconstant")
    if A.field != u.field or B.field != u.field:
        raise FieldMismatchError("inputs over a different field")
    f = u.poly()
    f_n = iterate(f, n)
    if compose(f_n, A) != compose(A, B):
        raise NotASolutionError("the pair does not satisfy f^n . A == A . B")

    deg_a = A.degree
    d = u.d
    # deg(A) factors as d^m * delta with delta | d; search m ascending, with
    # every branch of the root extractions (peeling is only unique up to a
    # root of unity when d is even)
    cores = [A]
    m = 0
    power = 1
    while cores and power <= deg_a:
        if deg_a % power == 0:
            delta = deg_a // power
            if delta <= d and d % delta == 0:
                for core in cores:
                    sol = _try_shape(u, n, A, B, core, m, delta)
                    if sol is not None:
                        return sol
        if deg_a % (power * d) != 0:
            break
        next_cores: list[Poly] = []
        for core in cores:
            for candidate in solve_left_factor(f, core):
                if candidate not in next_cores:
                    next_cores.append(candidate)
        cores = next_cores
        m += 1
        power *= d
    raise UnexpectedShapeError(
        "no normal shape f^m . (x^delta + c) . L reproduces the pair; "
        "either an exceptional map slipped through or the inputs are corrupted"
    )


def _try_shape(
    u: UnicriticalMap,
    n: int,
    A: Poly,
    B: Poly,
    core: Poly,
    m: int,
    delta: int,
) -> Optional[SemiconjugacySolution]:
    """Fit core == (x^delta + c) . L, then verify both reconstructions."""
    shifted = core - u.c
    for L in _linear_roots_of_power(shifted, delta):
        A2, B2 = generate_semiconjugacy(u, n, m, delta, L)
        if A2 == A and B2 == B:
            return SemiconjugacySolution(m=m, delta=delta, L=L)
    return None


def _linear_roots_of_power(p: Poly, delta: int) -> list[LinearPoly]:
    """Every linear L with L(x)^delta == p."""
    if p.degree != delta:
        return []
    field = p.field
    lead = p.leading_coefficient()
    tops = (
        field.nth_roots_of_rational(lead.as_fraction(), delta)
        if lead.is_rational_valued
        else ((lead,) if delta == 1 else ())
    )
    sub = p.coeff(delta - 1)
    out = []
    for a in tops:
        if a.is_zero():
            continue
        # (a x + b)^delta has subleading coefficient delta * a^(delta-1) * b
        b = sub / (a ** (delta - 1) * delta)
        L = LinearPoly(a, b)
        if L.as_poly() ** delta == p:
            out.append(L)
    return out


class Pairing(enum.Enum):
    PAIRED = "Paired"
    NOT_PAIRED = "NotPaired"
    EXCEPTIONAL_INPUT = "ExceptionalInput"


@dataclass(frozen=True)
class PairingVerdict:
    """Outcome of the unicritical pairing criterion, with its witness."""

    verdict: Pairing
    witness: Optional[FieldElement] = None

    @property
    def paired(self) -> bool:
        return self.verdict is Pairing.PAIRED


def classify_unicritical_pair(
    u1: UnicriticalMap, u2: UnicriticalMap
) -> PairingVerdict:
    """Paired(zeta) iff the degrees agree and c2 == zeta * c1 for a root of
    unity zeta of order dividing d - 1 in the ambient field."""
    if u1.field != u2.field:
        raise FieldMismatchError("maps over different fields")
    if u1.is_exceptional or u2.is_exceptional:
        return PairingVerdict(Pairing.EXCEPTIONAL_INPUT)
    if u1.d != u2.d:
        return PairingVerdict(Pairing.NOT_PAIRED)
    zeta = u2.c / u1.c
    if (zeta ** (u1.d - 1)).is_one():
        return PairingVerdict(Pairing.PAIRED, witness=zeta)
    return PairingVerdict(Pairing.NOT_PAIRED)


def conjugacy_from_pairing(
    u1: UnicriticalMap, u2: UnicriticalMap
) -> Optional[LinearPoly]:
    """A linear L with u1.poly() == L . u2.poly() . L^-1 when the pair is
    Paired; the graph {(L(y), y)} is then invariant under (u1, u2)."""
    verdict = classify_unicritical_pair(u1, u2)
    if not verdict.paired:
        return None
    zeta = verdict.witness
    # with g(x) = zeta^-1 f(zeta x): L(x) = zeta^-1 x satisfies f = L g L^-1
    return LinearPoly(zeta.inverse(), u1.field.zero())


def symmetries_of(g: Poly) -> list[LinearPoly]:
    """All linear L with g . L == g over the ambient field."""
    deg = g.degree
    if deg < 2:
        raise PreconditionViolatedError("symmetry search needs degree >= 2")
    field = g.field
    out = []
    lead = g.leading_coefficient()
    sub = g.coeff(deg - 1)
    for a in field.roots_of_unity(deg):
        # matching the two top coefficients of g(a x + b) against g pins b
        a_pow = a ** (deg - 1)
        b = sub * (field.one() - a_pow) / (lead * deg * a_pow)
        L = LinearPoly(a, b)
        if compose(g, L.as_poly()) == g:
            out.append(L)
    return out


def is_iterate_of(G: Poly, g: Poly, bound: int) -> Optional[int]:
    """m <= bound with G == g^m exactly, else None (m == 0 means G == x)."""
    if g.degree < 2:
        raise PreconditionViolatedError("base polynomial must have degree >= 2")
    if G.field != g.field:
        raise FieldMismatchError("inputs over different fields")
    if G == Poly.x(G.field):
        return 0
    deg = G.degree
    if deg < 2:
        return None
    m = 0
    power = 1
    while power < deg and m <= bound:
        power *= g.degree
        m += 1
    if power != deg or m > bound:
        return None
    return m if iterate(g, m) == G else None


@dataclass(frozen=True)
class GapData:
    """Leading-gap and rotation data of a nonconstant polynomial."""

    degree: int
    gap: Optional[int]
    rotation_order: int


def gap_data(P: Poly) -> GapData:
    """degree D; gap D minus the next nonzero exponent (absent for
    monomials); rotation_order the gcd of D minus every supported exponent
    (with the value D itself for monomials)."""
    if P.degree < 1:
        raise PreconditionViolatedError("gap data needs a nonconstant polynomial")
    exps = P.support()
    D = P.degree
    others = [i for i in exps if i != D]
    gap = D - max(others) if others else None
    rot = 0
    for i in others:
        rot = _int_gcd(rot, D - i)
    rotation_order = rot if others else D
    return GapData(degree=D, gap=gap, rotation_order=rotation_order)


def minimal_commuting_polynomial(u: UnicriticalMap) -> Poly:
    """The nonlinear polynomial of minimal degree commuting with an iterate of
    a non-exceptional unicritical map: the map itself (its symmetry group is
    trivial, so nothing smaller can commute)."""
    if u.is_exceptional:
        raise PreconditionViolatedError(
            "minimal commuting polynomials are computed for non-exceptional maps only"
        )
    return u.poly()


def _int_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a
