"""Canonical heights over Q for rational self-maps of the projective line.

The height of a point splits into one archimedean term plus one term per
prime dividing the resultant of the chosen integral lift.  Every local limit
is computed with an explicit telescoping tail bound, so the reported value
carries a certified error radius.  Preperiodicity is decided exactly: a
height comparison bound turns the orbit scan into a terminating procedure.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence, Union

import sympy

from . import config
from .errors import PreconditionViolatedError, ResourceBudgetError, SplitdynError
from .field import QQ
from .poly import Poly, poly_divmod, poly_gcd

logger = logging.getLogger(__name__)

INFINITY = "inf"


@dataclass(frozen=True)
class Place:
    """An absolute value on Q: the archimedean one or a p-adic one."""

    kind: Union[str, int]

    def __post_init__(self):
        if self.kind != INFINITY:
            if not isinstance(self.kind, int) or self.kind < 2:
                raise PreconditionViolatedError(f"bad place {self.kind!r}")
            if not sympy.isprime(self.kind):
                raise PreconditionViolatedError(f"{self.kind} is not prime")

    @property
    def is_archimedean(self) -> bool:
        return self.kind == INFINITY

    @property
    def p(self) -> int:
        if self.is_archimedean:
            raise SplitdynError("archimedean place has no residue prime")
        return self.kind

    @property
    def multiplier(self) -> int:
        """The weight N_v; always 1 over Q."""
        return 1

    def __str__(self):
        return "inf" if self.is_archimedean else str(self.kind)


ARCHIMEDEAN = Place(INFINITY)


class ProjPointQ:
    """A rational projective point as a coprime integer pair (a : b).

    Normalization: gcd(|a|, |b|) == 1, b >= 0, and a > 0 when b == 0.
    The point at infinity is (1 : 0).
    """

    __slots__ = ("a", "b")

    def __init__(self, a: int, b: int):
        if a == 0 and b == 0:
            raise PreconditionViolatedError("(0, 0) is not a projective point")
        g = gcd(abs(a), abs(b))
        a //= g
        b //= g
        if b < 0 or (b == 0 and a < 0):
            a, b = -a, -b
        self.a = a
        self.b = b

    @classmethod
    def from_rational(cls, x: Union[int, Fraction]) -> "ProjPointQ":
        x = Fraction(x)
        return cls(x.numerator, x.denominator)

    @classmethod
    def infinity(cls) -> "ProjPointQ":
        return cls(1, 0)

    @property
    def is_infinity(self) -> bool:
        return self.b == 0

    def as_fraction(self) -> Fraction:
        if self.is_infinity:
            raise SplitdynError("the point at infinity is not a fraction")
        return Fraction(self.a, self.b)

    def __eq__(self, other):
        return (
            isinstance(other, ProjPointQ) and self.a == other.a and self.b == other.b
        )

    def __hash__(self):
        return hash((self.a, self.b))

    def __repr__(self):
        return f"ProjPointQ({self.a}, {self.b})"

    def __str__(self):
        if self.is_infinity:
            return "inf"
        return str(Fraction(self.a, self.b))


def _form_eval(coeffs: Sequence[int], a: int, b: int) -> int:
    """Evaluate the binary form sum(coeffs[i] a^i b^(d-i)) exactly."""
    d = len(coeffs) - 1
    acc = 0
    apow = 1
    bpows = [1] * (d + 1)
    for i in range(1, d + 1):
        bpows[i] = bpows[i - 1] * b
    for i, c in enumerate(coeffs):
        if c:
            acc += c * apow * bpows[d - i]
        apow *= a
    return acc


def _bareiss_det(matrix: list[list[int]]) -> int:
    """Fraction-free determinant of an integer matrix."""
    m = [row[:] for row in matrix]
    n = len(m)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            pivot = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if pivot is None:
                return 0
            m[k], m[pivot] = m[pivot], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def _solve_linear_fractions(matrix: list[list[int]], rhs: list[int]) -> list[Fraction]:
    """Exact solve of a square integer system (must be nonsingular)."""
    n = len(matrix)
    m = [[Fraction(v) for v in row] + [Fraction(rhs[i])] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            raise SplitdynError("singular system")
        m[col], m[pivot] = m[pivot], m[col]
        inv = 1 / m[col][col]
        m[col] = [v * inv for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [a - factor * b for a, b in zip(m[r], m[col])]
    return [m[r][n] for r in range(n)]


class RationalMap:
    """A degree >= 2 self-map of P1 over Q with an integral homogeneous lift.

    The lift (F0, F1) has coprime integer coefficients overall and nonzero
    resultant; it reduces to numerator/denominator on the affine chart.
    """

    def __init__(self, numerator: Poly, denominator: Optional[Poly] = None):
        if denominator is None:
            denominator = Poly.constant(numerator.field, 1)
        if not (numerator.field.is_rationals and denominator.field.is_rationals):
            raise PreconditionViolatedError("heights work over Q only")
        if denominator.is_zero():
            raise PreconditionViolatedError("zero denominator")
        g = poly_gcd(numerator, denominator)
        if g.degree > 0:
            numerator, _ = poly_divmod(numerator, g)
            denominator, _ = poly_divmod(denominator, g)
        self.numerator = numerator
        self.denominator = denominator
        d = max(numerator.degree, denominator.degree)
        if d < 2:
            raise PreconditionViolatedError("dynamical degree must be >= 2")
        self.degree = d
        self._build_lift()
        self._resultant: Optional[int] = None
        self._bad_primes: Optional[dict[int, int]] = None
        self._arch_constant: Optional[float] = None

    def _build_lift(self) -> None:
        d = self.degree
        num_fracs = list(self.numerator.fraction_coefficients())
        den_fracs = list(self.denominator.fraction_coefficients())
        den_lcm = 1
        for f in num_fracs + den_fracs:
            den_lcm = den_lcm * f.denominator // gcd(den_lcm, f.denominator)
        a0 = [0] * (d + 1)
        a1 = [0] * (d + 1)
        for i, f in enumerate(num_fracs):
            a0[i] = int(f * den_lcm)
        for i, f in enumerate(den_fracs):
            a1[i] = int(f * den_lcm)
        content = 0
        for v in a0 + a1:
            content = gcd(content, abs(v))
        if content > 1:
            a0 = [v // content for v in a0]
            a1 = [v // content for v in a1]
        self.lift = (tuple(a0), tuple(a1))

    @classmethod
    def from_poly(cls, p: Poly) -> "RationalMap":
        return cls(p)

    @property
    def is_polynomial(self) -> bool:
        return self.denominator.degree == 0

    def as_poly(self) -> Poly:
        if not self.is_polynomial:
            raise SplitdynError("map has a nonconstant denominator")
        return self.numerator.scale(self.denominator.coeff(0).inverse())

    @property
    def resultant(self) -> int:
        if self._resultant is None:
            d = self.degree
            a0, a1 = self.lift
            size = 2 * d
            matrix = [[0] * size for _ in range(size)]
            for row in range(d):
                for i, c in enumerate(a0):
                    matrix[row][row + i] = c
            for row in range(d):
                for i, c in enumerate(a1):
                    matrix[d + row][row + i] = c
            self._resultant = _bareiss_det(matrix)
            if self._resultant == 0:
                raise PreconditionViolatedError(
                    "degenerate map: the lift's resultant vanishes"
                )
        return self._resultant

    @property
    def bad_primes(self) -> dict[int, int]:
        """Primes dividing the lift resultant, with multiplicities."""
        if self._bad_primes is None:
            res = abs(self.resultant)
            self._bad_primes = (
                {} if res == 1 else {int(p): int(e) for p, e in sympy.factorint(res).items()}
            )
        return self._bad_primes

    def apply(self, x: ProjPointQ) -> ProjPointQ:
        a0, a1 = self.lift
        return ProjPointQ(_form_eval(a0, x.a, x.b), _form_eval(a1, x.a, x.b))

    def apply_fraction(self, x: Union[int, Fraction]) -> ProjPointQ:
        return self.apply(ProjPointQ.from_rational(x))

    def compose_with(self, other: "RationalMap") -> "RationalMap":
        """self after other, reduced."""
        n_o, d_o = other.numerator, other.denominator
        deg = self.degree
        num = Poly.constant(QQ, 0)
        den = Poly.constant(QQ, 0)
        n_pows = [Poly.constant(QQ, 1)]
        d_pows = [Poly.constant(QQ, 1)]
        for _ in range(deg):
            n_pows.append(n_pows[-1] * n_o)
            d_pows.append(d_pows[-1] * d_o)
        for i in range(deg + 1):
            piece = n_pows[i] * d_pows[deg - i]
            ci = self.numerator.coeff(i)
            if not ci.is_zero():
                num = num + piece.scale(ci)
            ci = self.denominator.coeff(i)
            if not ci.is_zero():
                den = den + piece.scale(ci)
        return RationalMap(num, den)

    def iterate_map(self, n: int) -> "RationalMap":
        if n < 1:
            raise PreconditionViolatedError("rational-map iterate needs n >= 1")
        result = self
        for _ in range(n - 1):
            result = result.compose_with(self)
        return result

    def derivative_pair(self) -> tuple[Poly, Poly]:
        """Numerator and denominator of f' (not reduced)."""
        n, d = self.numerator, self.denominator
        return n.derivative() * d - n * d.derivative(), d * d

    # -- certified local constants ------------------------------------------------

    @property
    def archimedean_constant(self) -> float:
        """C with |log||F(z)|| - d log||z||| <= C for all z != 0 (max norm)."""
        if self._arch_constant is None:
            a0, a1 = self.lift
            up = max(sum(abs(c) for c in a0), sum(abs(c) for c in a1))
            kappa = self._cofactor_bound()
            self._arch_constant = max(math.log(up), math.log(kappa), 0.0)
        return self._arch_constant

    def _cofactor_bound(self) -> float:
        """kappa with ||F(z)|| >= ||z||^d / kappa, from exact cofactor identities."""
        d = self.degree
        a0, a1 = self.lift
        size = 2 * d
        matrix = [[0] * size for _ in range(size)]
        # column j < d: coefficients of X0^i * F0 ; column d + j: X0^i * F1
        for j in range(d):
            for i, c in enumerate(a0):
                matrix[j + i][j] = c
            for i, c in enumerate(a1):
                matrix[j + i][d + j] = c
        kappa = Fraction(1)
        for target in (0, size - 1):
            rhs = [0] * size
            rhs[target] = 1
            sol = _solve_linear_fractions(matrix, rhs)
            weight = sum(abs(v) for v in sol)
            kappa = max(kappa, weight)
        return float(kappa)

    def local_constant(self, v: Place) -> float:
        """Telescoping bound C_v for this place."""
        if v.is_archimedean:
            return self.archimedean_constant
        e = self.bad_primes.get(v.p, 0)
        return e * math.log(v.p)

    def places(self) -> list[Place]:
        """The archimedean place plus every prime of bad reduction."""
        return [ARCHIMEDEAN] + [Place(p) for p in sorted(self.bad_primes)]

    def escape_bound(self) -> float:
        """B such that every rational preperiodic point keeps its whole orbit
        at naive height <= B (with a unit margin)."""
        total = self.archimedean_constant + sum(
            e * math.log(p) for p, e in self.bad_primes.items()
        )
        return total / (self.degree - 1) + 1.0

    def __repr__(self):
        if self.is_polynomial:
            return f"RationalMap({self.as_poly()})"
        return f"RationalMap(({self.numerator})/({self.denominator}))"


@dataclass(frozen=True)
class HeightValue:
    """A certified canonical height: |true - value| <= error_radius."""

    value: float
    error_radius: float
    per_place: tuple[tuple[Place, float], ...]


def naive_height(x: ProjPointQ) -> float:
    """log max(|a|, |b|) of the normalized lift."""
    return math.log(max(abs(x.a), abs(x.b)))


@dataclass(frozen=True)
class ProductFormulaReport:
    """Per-place contributions to sum_v N_v log|alpha|_v and the exact identity."""

    contributions: tuple[tuple[Place, float], ...]
    exponents: tuple[tuple[int, int], ...]
    exact: bool
    float_sum: float


def product_formula_check(alpha: Union[int, Fraction]) -> ProductFormulaReport:
    """Contributions of every place for a nonzero rational, checked exactly.

    The zero-sum claim is verified in exact arithmetic: |alpha| must equal the
    product of p^ord_p(alpha) over the reported primes, so the archimedean
    term cancels the p-adic ones identically.
    """
    alpha = Fraction(alpha)
    if alpha == 0:
        raise PreconditionViolatedError("the product formula needs alpha != 0")
    num, den = abs(alpha.numerator), alpha.denominator
    exps: dict[int, int] = {}
    for p, e in sympy.factorint(num).items():
        exps[int(p)] = exps.get(int(p), 0) + int(e)
    for p, e in sympy.factorint(den).items():
        exps[int(p)] = exps.get(int(p), 0) - int(e)
    rebuilt_num, rebuilt_den = 1, 1
    for p, e in exps.items():
        if e > 0:
            rebuilt_num *= p ** e
        elif e < 0:
            rebuilt_den *= p ** (-e)
    exact = rebuilt_num == num and rebuilt_den == den
    contributions = [(ARCHIMEDEAN, math.log(num) - math.log(den))]
    for p in sorted(exps):
        # |alpha|_p = p^(-ord_p), so the log contribution is -ord_p * log(p)
        contributions.append((Place(p), -exps[p] * math.log(p)))
    total = math.fsum(c for _, c in contributions)
    return ProductFormulaReport(
        contributions=tuple(contributions),
        exponents=tuple(sorted(exps.items())),
        exact=exact,
        float_sum=total,
    )


def local_canonical_height(
    f: RationalMap, x: ProjPointQ, v: Place, tol: float
) -> float:
    """The local limit lim d^-n log||F^n(lift)||_v within tol.

    Archimedean: float orbit with sup-norm renormalization each step, stopped
    once the telescoping tail C_v d^-n/(d-1) drops under tol.  p-adic: the
    orbit is tracked modulo a power of p large enough to read off every
    content valuation (each is at most ord_p of the resultant), never letting
    integers grow.
    """
    if tol <= 0:
        raise PreconditionViolatedError("tolerance must be positive")
    d = f.degree
    if v.is_archimedean:
        c_v = f.archimedean_constant
        z0, z1 = float(x.a), float(x.b)
        norm = max(abs(z0), abs(z1))
        total = math.log(norm)
        z0 /= norm
        z1 /= norm
        a0, a1 = f.lift
        steps = 0
        weight = 1.0
        while c_v * weight / (d - 1) > tol and steps < 10_000:
            w0 = _float_form_eval(a0, z0, z1)
            w1 = _float_form_eval(a1, z0, z1)
            norm = max(abs(w0), abs(w1))
            if norm == 0.0 or not math.isfinite(norm):
                raise SplitdynError("archimedean orbit lost precision")
            weight /= d
            total += weight * math.log(norm)
            z0, z1 = w0 / norm, w1 / norm
            steps += 1
        return total
    p = v.p
    e_p = f.bad_primes.get(p, 0)
    if e_p == 0:
        return 0.0
    c_v = e_p * math.log(p)
    steps = 1
    while c_v / (d ** steps * (d - 1)) > tol:
        steps += 1
    precision = e_p * (steps + 1) + 4
    modulus = p ** precision
    a, b = x.a % modulus, x.b % modulus
    a0, a1 = f.lift
    total = Fraction(0)
    scale = Fraction(1)
    for _ in range(steps):
        w0 = _form_eval_mod(a0, a, b, modulus)
        w1 = _form_eval_mod(a1, a, b, modulus)
        val = min(_padic_ord(w0, p, precision), _padic_ord(w1, p, precision))
        scale /= d
        if val:
            total += scale * val
            q = p ** val
            w0 //= q
            w1 //= q
        a, b = w0, w1
    return float(-total) * math.log(p)


def _float_form_eval(coeffs: Sequence[int], z0: float, z1: float) -> float:
    d = len(coeffs) - 1
    acc = 0.0
    apow = 1.0
    bpows = [1.0] * (d + 1)
    for i in range(1, d + 1):
        bpows[i] = bpows[i - 1] * z1
    for i, c in enumerate(coeffs):
        if c:
            acc += c * apow * bpows[d - i]
        apow *= z0
    return acc


def _form_eval_mod(coeffs: Sequence[int], a: int, b: int, modulus: int) -> int:
    d = len(coeffs) - 1
    acc = 0
    apow = 1
    bpows = [1] * (d + 1)
    for i in range(1, d + 1):
        bpows[i] = (bpows[i - 1] * b) % modulus
    for i, c in enumerate(coeffs):
        if c:
            acc = (acc + c * apow * bpows[d - i]) % modulus
        apow = (apow * a) % modulus
    return acc


def _padic_ord(value: int, p: int, cap: int) -> int:
    if value == 0:
        return cap
    ord_ = 0
    while value % p == 0:
        value //= p
        ord_ += 1
        if ord_ >= cap:
            break
    return ord_


def canonical_height(f: RationalMap, x: ProjPointQ, tol: float = 1e-9) -> HeightValue:
    """Sum of local heights over the archimedean place and bad primes."""
    if tol <= 0:
        raise PreconditionViolatedError("tolerance must be positive")
    places = f.places()
    share = tol / len(places)
    per_place = []
    for v in places:
        per_place.append((v, local_canonical_height(f, x, v, share)))
    value = math.fsum(lam for _, lam in per_place)
    return HeightValue(value=value, error_radius=tol, per_place=tuple(per_place))


@dataclass(frozen=True)
class PreperiodicityResult:
    """Terminating decision with an orbit certificate."""

    preperiodic: bool
    tail: Optional[int]
    period: Optional[int]
    orbit: tuple[ProjPointQ, ...]
    escape_step: Optional[int]
    bound: float

    def __bool__(self):
        return self.preperiodic


def is_preperiodic(f: RationalMap, x: ProjPointQ) -> PreperiodicityResult:
    """Decide preperiodicity exactly.

    Any preperiodic rational point keeps every orbit point below the escape
    bound B; the exact orbit therefore either repeats (preperiodic, with tail
    and period) or exceeds B (wandering).  Both outcomes certify themselves.
    """
    bound = f.escape_bound()
    seen: dict[ProjPointQ, int] = {}
    orbit: list[ProjPointQ] = []
    current = x
    step = 0
    limit = config.ENUMERATION_BUDGET
    while step <= limit:
        if current in seen:
            first = seen[current]
            return PreperiodicityResult(
                preperiodic=True,
                tail=first,
                period=step - first,
                orbit=tuple(orbit),
                escape_step=None,
                bound=bound,
            )
        if naive_height(current) > bound:
            orbit.append(current)
            return PreperiodicityResult(
                preperiodic=False,
                tail=None,
                period=None,
                orbit=tuple(orbit),
                escape_step=step,
                bound=bound,
            )
        seen[current] = step
        orbit.append(current)
        current = f.apply(current)
        step += 1
    raise ResourceBudgetError("orbit scan exceeded the enumeration budget")


def preperiodic_points(
    f: RationalMap, height_bound: Optional[float] = None
) -> list[ProjPointQ]:
    """All rational preperiodic points, by exhausting heights up to the
    escape bound and filtering with is_preperiodic."""
    bound = f.escape_bound()
    if height_bound is not None and height_bound < bound:
        logger.warning(
            "requested height bound %.3f is below the escape bound %.3f; "
            "the returned list is still complete (heights above the escape "
            "bound cannot be preperiodic)",
            height_bound,
            bound,
        )
    limit = int(math.floor(math.exp(bound)))
    if (2 * limit + 1) ** 2 > config.ENUMERATION_BUDGET:
        raise ResourceBudgetError(
            f"enumeration up to coordinate size {limit} exceeds the budget"
        )
    found = []
    for b in range(0, limit + 1):
        a_range = range(1, limit + 1) if b == 0 else range(-limit, limit + 1)
        for a in a_range:
            if b == 0 and a != 1:
                continue
            if gcd(abs(a), b) != 1:
                continue
            point = ProjPointQ(a, b)
            if is_preperiodic(f, point).preperiodic:
                found.append(point)
    return found
