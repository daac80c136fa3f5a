"""Dense univariate polynomials over an exact field, with the composition
calculus: iteration, conjugation, normal forms, conjugacy witnesses,
exceptional-map detection, and the two directed decomposition solvers.

Polynomials over Q ride the integer kernel in qkernel (fast exact
convolutions); polynomials over an extension field use FieldElement
arithmetic directly.  Values are immutable and hashable.
"""

from __future__ import annotations

import enum
from contextlib import contextmanager
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from . import config, qkernel
from .errors import (
    FieldMismatchError,
    NoSolutionError,
    NotNormalFormError,
    PreconditionViolatedError,
    ResourceBudgetError,
    RootNotInFieldError,
    SplitdynError,
)
from .field import Field, FieldElement, QQ

_bit_budget = config.DEFAULT_BIT_BUDGET


def set_bit_budget(bits: int) -> None:
    """Set the global total-coefficient-bit budget for exact results."""
    global _bit_budget
    if bits <= 0:
        raise SplitdynError("bit budget must be positive")
    _bit_budget = bits


def get_bit_budget() -> int:
    return _bit_budget


@contextmanager
def bit_budget(bits: int):
    """Temporarily override the coefficient-bit budget."""
    global _bit_budget
    old = _bit_budget
    set_bit_budget(bits)
    try:
        yield
    finally:
        _bit_budget = old


def _budget_check(bits: int) -> None:
    if bits > _bit_budget:
        raise ResourceBudgetError(
            f"exact coefficients reached {bits} bits, over the {_bit_budget}-bit budget; "
            "raise it with set_bit_budget / --budget-bits if intended"
        )


class Poly:
    """Immutable dense polynomial; coefficients live in one field."""

    __slots__ = ("field", "_qden", "_qnums", "_elems", "_hash")

    def __init__(self, field: Field, coeffs: Iterable = ()):
        self.field = field
        self._hash = None
        if field.is_rationals:
            fracs = [self._coerce_fraction(field, c) for c in coeffs]
            den = 1
            for f in fracs:
                den = den * f.denominator // _gcd(den, f.denominator)
            nums = [int(f * den) for f in fracs]
            self._qden, self._qnums = qkernel.normalize(den, nums)
            self._qnums = tuple(self._qnums)
            self._elems = None
        else:
            elems = tuple(self._coerce_element(field, c) for c in coeffs)
            while elems and elems[-1].is_zero():
                elems = elems[:-1]
            self._elems = elems
            self._qden = self._qnums = None

    @staticmethod
    def _coerce_fraction(field: Field, c) -> Fraction:
        if isinstance(c, FieldElement):
            if c.field != field:
                raise FieldMismatchError("coefficient from a different field")
            return c.as_fraction()
        if isinstance(c, (int, Fraction)):
            return Fraction(c)
        raise TypeError(f"bad coefficient {c!r}")

    @staticmethod
    def _coerce_element(field: Field, c) -> FieldElement:
        if isinstance(c, FieldElement):
            if c.field != field:
                raise FieldMismatchError("coefficient from a different field")
            return c
        return field.embed(c)

    # -- fast constructors ------------------------------------------------------

    @classmethod
    def _from_q(cls, den: int, nums: Sequence[int]) -> "Poly":
        p = object.__new__(cls)
        p.field = QQ
        d, ns = qkernel.normalize(den, list(nums))
        p._qden, p._qnums = d, tuple(ns)
        p._elems = None
        p._hash = None
        return p

    @classmethod
    def _from_elems(cls, field: Field, elems: Sequence[FieldElement]) -> "Poly":
        p = object.__new__(cls)
        p.field = field
        es = list(elems)
        while es and es[-1].is_zero():
            es.pop()
        p._elems = tuple(es)
        p._qden = p._qnums = None
        p._hash = None
        return p

    @classmethod
    def from_rationals(cls, coeffs: Iterable) -> "Poly":
        return cls(QQ, coeffs)

    @classmethod
    def x(cls, field: Field = QQ) -> "Poly":
        return cls(field, [0, 1])

    @classmethod
    def constant(cls, field: Field, value) -> "Poly":
        return cls(field, [value])

    # -- structure ---------------------------------------------------------------

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        if self.field.is_rationals:
            return len(self._qnums) - 1
        return len(self._elems) - 1

    def is_zero(self) -> bool:
        return self.degree < 0

    def is_constant(self) -> bool:
        return self.degree <= 0

    def coeff(self, i: int) -> FieldElement:
        if i < 0:
            raise IndexError("negative coefficient index")
        if self.field.is_rationals:
            if i >= len(self._qnums):
                return self.field.zero()
            return self.field.embed(Fraction(self._qnums[i], self._qden))
        if i >= len(self._elems):
            return self.field.zero()
        return self._elems[i]

    def coefficients(self) -> tuple[FieldElement, ...]:
        return tuple(self.coeff(i) for i in range(self.degree + 1))

    def fraction_coefficients(self) -> tuple[Fraction, ...]:
        """Dense rational coefficients (rationals field only)."""
        if not self.field.is_rationals:
            raise SplitdynError("polynomial is not over Q")
        return tuple(Fraction(n, self._qden) for n in self._qnums)

    def leading_coefficient(self) -> FieldElement:
        if self.is_zero():
            raise SplitdynError("zero polynomial has no leading coefficient")
        return self.coeff(self.degree)

    def is_monic(self) -> bool:
        return not self.is_zero() and self.leading_coefficient().is_one()

    def support(self) -> tuple[int, ...]:
        """Exponents with nonzero coefficient, ascending."""
        if self.field.is_rationals:
            return tuple(i for i, v in enumerate(self._qnums) if v)
        return tuple(i for i, e in enumerate(self._elems) if not e.is_zero())

    def total_bits(self) -> int:
        if self.field.is_rationals:
            return qkernel.total_bits(self._qden, list(self._qnums))
        bits = 0
        for e in self._elems:
            for f in e.coords():
                bits += f.numerator.bit_length() + f.denominator.bit_length()
        return bits

    # -- arithmetic -----------------------------------------------------------------

    def _check_field(self, other: "Poly") -> None:
        if self.field != other.field:
            raise FieldMismatchError("polynomials over different fields")

    def __add__(self, other):
        if isinstance(other, (int, Fraction, FieldElement)):
            return self + Poly.constant(self.field, other)
        if not isinstance(other, Poly):
            return NotImplemented
        self._check_field(other)
        if self.field.is_rationals:
            den, nums = qkernel.add(
                (self._qden, list(self._qnums)), (other._qden, list(other._qnums))
            )
            return Poly._from_q(den, nums)
        n = max(len(self._elems), len(other._elems))
        out = [
            (self._elems[i] if i < len(self._elems) else self.field.zero())
            + (other._elems[i] if i < len(other._elems) else self.field.zero())
            for i in range(n)
        ]
        return Poly._from_elems(self.field, out)

    __radd__ = __add__

    def __neg__(self):
        if self.field.is_rationals:
            return Poly._from_q(self._qden, [-v for v in self._qnums])
        return Poly._from_elems(self.field, [-e for e in self._elems])

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, FieldElement)):
            other = Poly.constant(self.field, other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, FieldElement)):
            return self.scale(other)
        if not isinstance(other, Poly):
            return NotImplemented
        self._check_field(other)
        if self.field.is_rationals:
            den, nums = qkernel.mul(
                (self._qden, list(self._qnums)), (other._qden, list(other._qnums))
            )
            _budget_check(qkernel.total_bits(den, nums))
            return Poly._from_q(den, nums)
        if self.is_zero() or other.is_zero():
            return Poly._from_elems(self.field, [])
        out = [self.field.zero()] * (len(self._elems) + len(other._elems) - 1)
        for i, a in enumerate(self._elems):
            if not a.is_zero():
                for j, b in enumerate(other._elems):
                    out[i + j] = out[i + j] + a * b
        return Poly._from_elems(self.field, out)

    __rmul__ = __mul__

    def scale(self, s) -> "Poly":
        s = self._coerce_element(self.field, s)
        if self.field.is_rationals:
            f = s.as_fraction()
            den, nums = qkernel.scale(
                (self._qden, list(self._qnums)), f.numerator, f.denominator
            )
            return Poly._from_q(den, nums)
        return Poly._from_elems(self.field, [e * s for e in self._elems])

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        if self.field.is_rationals:
            den, nums = qkernel.pow_(
                (self._qden, list(self._qnums)), k, budget_check=_budget_check
            )
            return Poly._from_q(den, nums)
        result = Poly.constant(self.field, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def derivative(self) -> "Poly":
        if self.field.is_rationals:
            den, nums = qkernel.derivative((self._qden, list(self._qnums)))
            return Poly._from_q(den, nums)
        return Poly._from_elems(
            self.field, [e * i for i, e in enumerate(self._elems)][1:]
        )

    def __call__(self, value):
        return self.evaluate(value)

    def evaluate(self, value) -> FieldElement:
        v = self._coerce_element(self.field, value)
        if self.field.is_rationals:
            f = v.as_fraction()
            num, den = qkernel.evaluate(
                (self._qden, list(self._qnums)), f.numerator, f.denominator
            )
            return self.field.embed(Fraction(num, den))
        acc = self.field.zero()
        for e in reversed(self._elems):
            acc = acc * v + e
        return acc

    def evaluate_float(self, z: complex) -> complex:
        """Double-precision Horner evaluation (measure/render plumbing)."""
        acc = 0j
        if self.field.is_rationals:
            den = float(self._qden)
            for n in reversed(self._qnums):
                acc = acc * z + n / den
            return acc
        for e in reversed(self._elems):
            acc = acc * z + complex(e.as_fraction())
        return acc

    # -- identity --------------------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        if self.field != other.field:
            return False
        if self.field.is_rationals:
            return self._qden == other._qden and self._qnums == other._qnums
        return self._elems == other._elems

    def __hash__(self):
        if self._hash is None:
            if self.field.is_rationals:
                self._hash = hash((self.field, self._qden, self._qnums))
            else:
                self._hash = hash((self.field, self._elems))
        return self._hash

    def __repr__(self):
        return f"Poly({self})"

    def __str__(self):
        if self.is_zero():
            return "0"
        parts = []
        for i in range(self.degree, -1, -1):
            c = self.coeff(i)
            if c.is_zero():
                continue
            if self.field.is_rationals:
                f = c.as_fraction()
                sign = "-" if f < 0 else "+"
                mag = abs(f)
                if i == 0:
                    body = str(mag)
                else:
                    var = "x" if i == 1 else f"x^{i}"
                    body = var if mag == 1 else f"{mag}*{var}"
            else:
                sign = "+"
                if i == 0:
                    body = f"({c})"
                else:
                    var = "x" if i == 1 else f"x^{i}"
                    body = f"({c})*{var}"
            if not parts:
                parts.append(body if sign == "+" else f"-{body}")
            else:
                parts.append(f"{sign} {body}")
        return " ".join(parts)


class LinearPoly:
    """Invertible affine map x -> a*x + b with exact inverse."""

    __slots__ = ("a", "b")

    def __init__(self, a, b, field: Optional[Field] = None):
        if isinstance(a, FieldElement):
            field = a.field
        elif isinstance(b, FieldElement):
            field = b.field
        elif field is None:
            field = QQ
        self.a = field.embed(a) if not isinstance(a, FieldElement) else a
        self.b = field.embed(b) if not isinstance(b, FieldElement) else b
        if self.a.field != self.b.field:
            raise FieldMismatchError("linear map coefficients in different fields")
        if self.a.is_zero():
            raise PreconditionViolatedError("linear map needs a != 0")

    @property
    def field(self) -> Field:
        return self.a.field

    @classmethod
    def identity(cls, field: Field = QQ) -> "LinearPoly":
        return cls(field.one(), field.zero())

    def as_poly(self) -> Poly:
        return Poly(self.field, [self.b, self.a])

    def inverse(self) -> "LinearPoly":
        inv_a = self.a.inverse()
        return LinearPoly(inv_a, -self.b * inv_a)

    def apply(self, x):
        if not isinstance(x, FieldElement):
            x = self.field.embed(x)
        return self.a * x + self.b

    __call__ = apply

    def compose(self, other: "LinearPoly") -> "LinearPoly":
        """self after other: x -> self(other(x))."""
        return LinearPoly(self.a * other.a, self.a * other.b + self.b)

    def is_identity(self) -> bool:
        return self.a.is_one() and self.b.is_zero()

    def __eq__(self, other):
        return (
            isinstance(other, LinearPoly) and self.a == other.a and self.b == other.b
        )

    def __hash__(self):
        return hash((self.a, self.b))

    def __repr__(self):
        return f"LinearPoly({self.a}, {self.b})"

    def __str__(self):
        return str(self.as_poly())


# -- composition calculus ------------------------------------------------------------


def compose(p: Poly, q: Poly) -> Poly:
    """p(q(x)); degrees multiply when both inputs are nonconstant."""
    if not isinstance(p, Poly) or not isinstance(q, Poly):
        raise TypeError("compose expects polynomials")
    if p.field != q.field:
        raise FieldMismatchError("composition across different fields")
    if p.field.is_rationals:
        den, nums = qkernel.compose(
            (p._qden, list(p._qnums)), (q._qden, list(q._qnums)),
            budget_check=_budget_check,
        )
        return Poly._from_q(den, nums)
    if p.is_zero():
        return p
    acc = Poly.constant(p.field, p._elems[-1])
    for i in range(p.degree - 1, -1, -1):
        acc = acc * q + Poly.constant(p.field, p._elems[i])
    return acc


def iterate(p: Poly, n: int) -> Poly:
    """n-fold self-composition; iterate(p, 0) is x."""
    if n < 0:
        raise PreconditionViolatedError("iteration count must be >= 0")
    result = Poly.x(p.field)
    for _ in range(n):
        result = compose(p, result)
    return result


def chebyshev(d: int) -> Poly:
    """Degree-d polynomial normalized by p(z + 1/z) = z^d + 1/z^d."""
    if d < 1:
        raise PreconditionViolatedError("degree must be >= 1")
    if d == 1:
        return Poly.x()
    prev = Poly.x()
    cur = Poly.from_rationals([-2, 0, 1])
    x = Poly.x()
    for _ in range(d - 2):
        prev, cur = cur, x * cur - prev
    return cur


def conjugate(p: Poly, L: LinearPoly) -> Poly:
    """L^-1 . p . L (a right group action)."""
    if p.field != L.field:
        raise FieldMismatchError("conjugation across different fields")
    inner = compose(p, L.as_poly())
    return (inner - L.b).scale(L.a.inverse())


def normal_form(p: Poly) -> tuple[Poly, LinearPoly]:
    """Conjugate p to a monic polynomial with vanishing subleading coefficient.

    Needs a (d-1)-st root of the leading coefficient in the field; the search
    covers exact radicals of the rational value times the field's roots of
    unity, so absence is reported relative to the declared field.
    """
    d = p.degree
    if d < 2:
        raise PreconditionViolatedError("normal form needs degree >= 2")
    lead = p.leading_coefficient()
    sub = p.coeff(d - 1)
    shift = -sub / (lead * d)
    scale_candidates: tuple[FieldElement, ...] = ()
    inv_lead = lead.inverse()
    if inv_lead.is_rational_valued:
        scale_candidates = p.field.nth_roots_of_rational(inv_lead.as_fraction(), d - 1)
    if not scale_candidates:
        raise RootNotInFieldError(
            f"no ({d - 1})-st root of {inv_lead} found in the field"
        )
    u = _canonical_root(scale_candidates)
    L = LinearPoly(u, shift)
    return conjugate(p, L), L


def _canonical_root(candidates: Sequence[FieldElement]) -> FieldElement:
    """Deterministic pick: prefer positive rationals, then order by coords."""

    def key(e: FieldElement):
        if e.is_rational_valued:
            f = e.as_fraction()
            return (0 if f > 0 else 1, f)
        return (2, tuple(e.coords()))

    return sorted(candidates, key=key)[0]


def _is_normal(p: Poly) -> bool:
    d = p.degree
    return d >= 2 and p.is_monic() and p.coeff(d - 1).is_zero()


def normal_conjugacy_witness(p: Poly, q: Poly) -> Optional[FieldElement]:
    """A root of unity z with z**(d-1) == 1 and q(x) == z^-1 * p(z*x), if any.

    Both inputs must already be in normal form and share degree and field.
    """
    if p.field != q.field:
        raise FieldMismatchError("witness search across different fields")
    if not (_is_normal(p) and _is_normal(q)):
        raise NotNormalFormError("witness search requires normal-form inputs")
    d = p.degree
    if d != q.degree:
        return None
    pc = [p.coeff(i) for i in range(d + 1)]
    qc = [q.coeff(i) for i in range(d + 1)]
    for i in range(d + 1):
        if pc[i].is_zero() != qc[i].is_zero():
            return None
    for zeta in p.field.roots_of_unity(d - 1):
        zpow = zeta.field.one() * zeta.inverse()  # zeta^(i-1) built incrementally
        ok = True
        for i in range(d + 1):
            if not pc[i].is_zero() and qc[i] != zpow * pc[i]:
                ok = False
                break
            zpow = zpow * zeta
        if ok:
            return zeta
    return None


class ExceptionalKind(enum.Enum):
    MONOMIAL = "Monomial"
    PLUS_CHEBYSHEV = "PlusChebyshev"
    MINUS_CHEBYSHEV = "MinusChebyshev"
    NO = "No"


def is_exceptional_poly(p: Poly) -> ExceptionalKind:
    """Detect conjugacy (over the declared field) to x^d or to +-chebyshev(d).

    The answer is relative to the declared field: a conjugation that only
    exists after a field extension is reported as NO.
    """
    d = p.degree
    if d < 2:
        raise PreconditionViolatedError("exceptional test needs degree >= 2")
    q, _ = normal_form(p)
    monomial = Poly(p.field, [0] * d + [1])
    if normal_conjugacy_witness(monomial, q) is not None:
        return ExceptionalKind.MONOMIAL
    cheb = _lift_rational_poly(chebyshev(d), p.field)
    if normal_conjugacy_witness(cheb, q) is not None:
        return ExceptionalKind.PLUS_CHEBYSHEV
    # normal forms of -chebyshev(d) require u with u^(d-1) == -1
    minus_units = p.field.nth_roots_of_rational(Fraction(-1), d - 1)
    if minus_units:
        u = _canonical_root(minus_units)
        neg_cheb_normal = conjugate(-cheb, LinearPoly(u, p.field.zero()))
        if normal_conjugacy_witness(neg_cheb_normal, q) is not None:
            return ExceptionalKind.MINUS_CHEBYSHEV
    return ExceptionalKind.NO


def _lift_rational_poly(p: Poly, field: Field) -> Poly:
    if field.is_rationals:
        return p
    return Poly(field, [field.embed(f) for f in p.fraction_coefficients()])


# -- directed decomposition (the left/right factor solvers) ---------------------------


def solve_left_factor(A: Poly, C: Poly) -> list[Poly]:
    """All P over the field with C == A . P, by descending coefficient match.

    The leading coefficient of P is pinned up to a root extraction; each
    candidate then determines P uniquely through a triangular solve, and the
    full composition is verified before a candidate is returned.
    """
    alpha, deg_c = A.degree, C.degree
    if alpha < 1 or deg_c < 1 or deg_c % alpha:
        return []
    pi = deg_c // alpha
    ratio = C.leading_coefficient() / A.leading_coefficient()
    if ratio.is_rational_valued:
        tops = A.field.nth_roots_of_rational(ratio.as_fraction(), alpha)
    elif alpha == 1:
        tops = (ratio,)
    else:
        tops = ()
    solutions = []
    lead_a = A.leading_coefficient()
    for top in tops:
        coeffs = [A.field.zero()] * pi + [top]
        P = Poly(A.field, coeffs)
        denom = lead_a * alpha * top ** (alpha - 1)
        inv_denom = denom.inverse()
        ok = True
        for k in range(1, pi + 1):
            current = compose(A, P)
            idx = alpha * pi - k
            mismatch = C.coeff(idx) - current.coeff(idx)
            if not mismatch.is_zero():
                coeffs[pi - k] = mismatch * inv_denom
                P = Poly(A.field, coeffs)
        if compose(A, P) == C:
            solutions.append(P)
    return solutions


def expand_in_composition_base(D: Poly, B: Poly) -> Optional[Poly]:
    """The unique Q with D == Q . B, if it exists (scalars against powers of B)."""
    deg_b, deg_d = B.degree, D.degree
    if deg_b < 1:
        return None
    if deg_d % deg_b:
        return None
    k = deg_d // deg_b
    lead_b = B.leading_coefficient()
    residual = D
    qs = [D.field.zero()] * (k + 1)
    for j in range(k, -1, -1):
        if residual.degree > j * deg_b:
            return None
        top = residual.coeff(j * deg_b)
        if not top.is_zero():
            qs[j] = top / lead_b ** j
            residual = residual - (B ** j).scale(qs[j])
    if not residual.is_zero():
        return None
    return Poly(D.field, qs)


def _check_shared_equation(A: Poly, B: Poly, C: Poly, D: Poly) -> None:
    for poly in (A, B, C, D):
        if poly.degree < 1:
            raise PreconditionViolatedError("decomposition needs nonconstant inputs")
    if not (A.field == B.field == C.field == D.field):
        raise FieldMismatchError("decomposition inputs in different fields")
    if compose(A, B) != compose(C, D):
        raise PreconditionViolatedError("A.B == C.D fails, inputs are inconsistent")


def engstrom_left(A: Poly, B: Poly, C: Poly, D: Poly) -> Poly:
    """Given A.B == C.D with deg(A) | deg(C): the P with C == A.P and B == P.D."""
    _check_shared_equation(A, B, C, D)
    if C.degree % A.degree:
        raise PreconditionViolatedError("deg(A) must divide deg(C)")
    candidates = solve_left_factor(A, C)
    if not candidates:
        raise NoSolutionError("no P over the field satisfies C == A.P")
    for P in candidates:
        if compose(P, D) == B:
            return P
    raise NoSolutionError("C == A.P solved, but no candidate satisfies B == P.D")


def engstrom_right(A: Poly, B: Poly, C: Poly, D: Poly) -> Poly:
    """Given A.B == C.D with deg(B) | deg(D): the Q with D == Q.B and A == C.Q."""
    _check_shared_equation(A, B, C, D)
    if D.degree % B.degree:
        raise PreconditionViolatedError("deg(B) must divide deg(D)")
    Q = expand_in_composition_base(D, B)
    if Q is None:
        raise NoSolutionError("no Q over the field satisfies D == Q.B")
    if compose(C, Q) != A:
        raise NoSolutionError("D == Q.B solved, but A == C.Q fails")
    return Q


def poly_divmod(a: Poly, b: Poly) -> tuple[Poly, Poly]:
    """Quotient and remainder of a by b (b nonzero), exact."""
    if a.field != b.field:
        raise FieldMismatchError("division across different fields")
    if b.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    field = a.field
    rem = list(a.coefficients())
    db = b.degree
    inv_lead = b.leading_coefficient().inverse()
    quot = [field.zero()] * max(len(rem) - db, 0)
    bc = b.coefficients()
    while len(rem) - 1 >= db:
        if rem[-1].is_zero():
            rem.pop()
            continue
        shift = len(rem) - 1 - db
        factor = rem[-1] * inv_lead
        quot[shift] = factor
        for i in range(db + 1):
            rem[shift + i] = rem[shift + i] - factor * bc[i]
        rem.pop()
    return Poly(field, quot), Poly(field, rem)


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd over the coefficient field (1 for coprime inputs)."""
    if a.field != b.field:
        raise FieldMismatchError("gcd across different fields")
    while not b.is_zero():
        _, r = poly_divmod(a, b)
        a, b = b, r
    if a.is_zero():
        return a
    return a.scale(a.leading_coefficient().inverse())


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a
