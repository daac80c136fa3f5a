"""Curves in P1 x P1 as exact bivariate defining polynomials.

Forward images under split endomorphisms go through two univariate
resultants with pruning of extraneous factors by pushed sample points;
invariance and orbit cycling compare normalized defining polynomials
exactly.  Bivariate polynomial arithmetic, resultants, squarefree parts and
factorization over Q are delegated to sympy; every public contract (types,
normalization, serialization) is owned here.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import sympy

from .errors import (
    EliminationCollapseError,
    PreconditionViolatedError,
    SplitdynError,
)
from .field import QQ
from .heights import ProjPointQ, RationalMap, is_preperiodic, preperiodic_points
from .poly import LinearPoly, Poly, compose, iterate

X, Y = sympy.symbols("x y")
_U, _V = sympy.symbols("_u _v")


def _poly_to_sympy(p: Poly, sym) -> sympy.Expr:
    if not p.field.is_rationals:
        raise PreconditionViolatedError("curve machinery works over Q only")
    acc = sympy.Integer(0)
    for i, f in enumerate(p.fraction_coefficients()):
        if f:
            acc += sympy.Rational(f.numerator, f.denominator) * sym ** i
    return acc


class BiCurve:
    """A curve defined by a squarefree primitive integer polynomial C(x, y).

    Construction normalizes: squarefree part, primitive integer coefficients,
    positive leading coefficient under graded lexicographic order.  The
    normalized monomial tuple is the exact identity used for hashing and
    cycle detection.
    """

    __slots__ = ("expr", "_terms", "_bidegree", "_key")

    def __init__(self, expr):
        if isinstance(expr, str):
            from .parse import parse_curve_monomials

            acc = sympy.Integer(0)
            for i, j, coeff in parse_curve_monomials(expr):
                q = Fraction(coeff)
                acc += sympy.Rational(q.numerator, q.denominator) * X ** i * Y ** j
            expr = acc
        expr = sympy.expand(expr)
        if expr == 0:
            raise PreconditionViolatedError("zero polynomial does not define a curve")
        poly = sympy.Poly(expr, X, Y, domain="QQ")
        if poly.total_degree() == 0:
            raise PreconditionViolatedError("constant polynomial does not define a curve")
        poly = sympy.Poly(sympy.sqf_part(poly), X, Y, domain="QQ")
        terms = poly.terms()
        den_lcm = 1
        for _, coeff in terms:
            q = sympy.Rational(coeff)
            den_lcm = sympy.ilcm(den_lcm, q.q)
        ints = [((i, j), int(coeff * den_lcm)) for (i, j), coeff in terms]
        g = 0
        for _, c in ints:
            g = sympy.igcd(g, c)
        ints = [(ij, c // g) for ij, c in ints]
        lead = max(ints, key=lambda t: (t[0][0] + t[0][1], t[0][0]))
        if lead[1] < 0:
            ints = [(ij, -c) for ij, c in ints]
        ints.sort(key=lambda t: (t[0][0] + t[0][1], t[0][0]), reverse=True)
        self._terms = tuple(ints)
        self.expr = sympy.Add(*[c * X ** i * Y ** j for (i, j), c in ints])
        dx = max((i for (i, j), _ in ints), default=0)
        dy = max((j for (i, j), _ in ints), default=0)
        self._bidegree = (dx, dy)
        self._key = self._terms

    @classmethod
    def from_monomials(cls, monomials: Sequence) -> "BiCurve":
        """From [[i, j, "p/q"], ...] exact serialized form."""
        acc = sympy.Integer(0)
        for i, j, coeff in monomials:
            q = Fraction(coeff)
            acc += sympy.Rational(q.numerator, q.denominator) * X ** int(i) * Y ** int(j)
        return cls(acc)

    def to_monomials(self) -> list[list]:
        return [[i, j, str(c)] for (i, j), c in self._terms]

    @property
    def bidegree(self) -> tuple[int, int]:
        return self._bidegree

    @property
    def key(self) -> tuple:
        return self._key

    def factors(self) -> list["BiCurve"]:
        """Irreducible-over-Q components (each normalized)."""
        _, factor_list = sympy.factor_list(self.expr, X, Y)
        return [BiCurve(f) for f, _ in factor_list]

    def is_transversal(self) -> bool:
        """Every irreducible factor involves both x and y (dominant projections)."""
        _, factor_list = sympy.factor_list(self.expr, X, Y)
        for f, _ in factor_list:
            fp = sympy.Poly(f, X, Y)
            if fp.degree(X) == 0 or fp.degree(Y) == 0:
                return False
        return True

    def evaluate_exact(self, x0: Fraction, y0: Fraction) -> Fraction:
        val = self.expr.subs({X: sympy.Rational(x0), Y: sympy.Rational(y0)})
        return Fraction(int(val.p), int(val.q))

    def evaluate_complex(self, x0: complex, y0: complex) -> complex:
        acc = 0j
        for (i, j), c in self._terms:
            acc += c * (x0 ** i) * (y0 ** j)
        return acc

    def fiber_coefficients(self, coordinate: int, value: complex) -> list[complex]:
        """Coefficients (ascending) of the fiber polynomial over one coordinate:
        coordinate 1 fixes x = value (polynomial in y), coordinate 2 fixes y."""
        if coordinate not in (1, 2):
            raise PreconditionViolatedError("coordinate must be 1 or 2")
        dx, dy = self._bidegree
        size = dy + 1 if coordinate == 1 else dx + 1
        out = [0j] * size
        for (i, j), c in self._terms:
            if coordinate == 1:
                out[j] += c * value ** i
            else:
                out[i] += c * value ** j
        return out

    def fiber_rational_points(self, x0: Optional[Fraction]) -> list[Optional[Fraction]]:
        """Rational points of the fiber over x = x0 (None means infinity), as
        y-values with None for the point at infinity of the fiber."""
        dx, dy = self._bidegree
        if x0 is None:
            fiber = sympy.Poly(self.expr, X).coeff_monomial(X ** dx)
            fiber = sympy.expand(fiber)
        else:
            fiber = sympy.expand(self.expr.subs(X, sympy.Rational(x0)))
        out: list[Optional[Fraction]] = []
        if fiber == 0:
            raise PreconditionViolatedError(
                "fiber is the whole line; curve has a vertical component there"
            )
        fiber_poly = sympy.Poly(fiber, Y)
        if fiber_poly.degree() < dy:
            out.append(None)  # the fiber meets y = infinity
        for root, _mult in sympy.roots(fiber_poly, Y, filter="Q").items():
            q = sympy.Rational(root)
            out.append(Fraction(int(q.p), int(q.q)))
        return out

    def __eq__(self, other):
        return isinstance(other, BiCurve) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"BiCurve({self.expr})"


def _as_rational_map(f: Union[RationalMap, Poly]) -> RationalMap:
    if isinstance(f, RationalMap):
        return f
    if isinstance(f, Poly):
        return RationalMap(f)
    raise TypeError(f"expected a map, got {f!r}")


@dataclass(frozen=True)
class SplitEndo:
    """(x, y) -> (f^n(x), g^m(y)) acting coordinatewise on P1 x P1."""

    f: RationalMap
    g: RationalMap
    n: int = 1
    m: int = 1

    def __post_init__(self):
        object.__setattr__(self, "f", _as_rational_map(self.f))
        object.__setattr__(self, "g", _as_rational_map(self.g))
        if self.n < 1 or self.m < 1:
            raise PreconditionViolatedError("exponents must be positive")

    def component_maps(self) -> tuple[RationalMap, RationalMap]:
        fn = self.f.iterate_map(self.n) if self.n > 1 else self.f
        gm = self.g.iterate_map(self.m) if self.m > 1 else self.g
        return fn, gm

    def power(self, k: int) -> "SplitEndo":
        return SplitEndo(self.f, self.g, self.n * k, self.m * k)

    def apply_exact(self, x: ProjPointQ, y: ProjPointQ) -> tuple[ProjPointQ, ProjPointQ]:
        fn, gm = self.component_maps()
        return fn.apply(x), gm.apply(y)


@dataclass(frozen=True)
class CurveOrbitReport:
    """Orbit of normalized defining polynomials under a split endomorphism."""

    status: str  # "periodic" or "undecided"
    preperiod: Optional[int]
    period: Optional[int]
    bidegrees: tuple[tuple[int, int], ...]
    keys: tuple[tuple, ...]

    @property
    def decided(self) -> bool:
        return self.status == "periodic"


_SAMPLE_ABSCISSAS = [
    Fraction(2),
    Fraction(-3),
    Fraction(5, 2),
    Fraction(7, 3),
    Fraction(-5, 4),
    Fraction(11, 5),
    Fraction(13, 7),
]


def image_curve(C: BiCurve, phi: SplitEndo) -> BiCurve:
    """Defining polynomial of phi(C) by double resultant elimination.

    Eliminates (u, v) from C(u, v) = 0, f^n(u) = X, g^m(v) = Y, takes the
    squarefree primitive part, and drops resultant artifacts: any
    irreducible-over-Q factor not vanishing on pushforwards of sampled
    points of C (exact confirmation whenever the sample is rational).
    """
    if not C.is_transversal():
        raise PreconditionViolatedError(
            "image computation requires a transversal curve"
        )
    fn, gm = phi.component_maps()
    c_uv = C.expr.subs({X: _U, Y: _V}, simultaneous=True)
    e1 = _poly_to_sympy(fn.numerator, _U) - X * _poly_to_sympy(fn.denominator, _U)
    e2 = _poly_to_sympy(gm.numerator, _V) - Y * _poly_to_sympy(gm.denominator, _V)
    r1 = sympy.resultant(c_uv, e1, _U)
    if r1 == 0:
        raise EliminationCollapseError("first resultant vanished identically")
    r2 = sympy.resultant(r1, e2, _V)
    if r2 == 0:
        raise EliminationCollapseError("second resultant vanished identically")
    squarefree = sympy.sqf_part(sympy.Poly(r2, X, Y, domain="QQ"))
    _, factor_list = sympy.factor_list(squarefree.as_expr(), X, Y)
    factors = [f for f, _ in factor_list if sympy.Poly(f, X, Y).total_degree() > 0]
    if len(factors) > 1:
        factors = _prune_extraneous(C, fn, gm, factors)
    if not factors:
        raise SplitdynError("pruning removed every factor; elimination failed")
    product = sympy.Integer(1)
    for f in factors:
        product *= f
    return BiCurve(product)


def _prune_extraneous(C, fn, gm, factors):
    """Keep factors vanishing at pushforwards of sampled points of C."""
    samples = _sample_points(C)
    kept = []
    for f in factors:
        fp = sympy.Poly(f, X, Y)
        hit = False
        for (x0, y0) in samples:
            if isinstance(y0, Fraction):
                px = _apply_exact(fn, x0)
                py = _apply_exact(gm, y0)
                if px is None or py is None:
                    continue
                val = f.subs({X: sympy.Rational(px), Y: sympy.Rational(py)})
                if val == 0:
                    hit = True
                    break
            else:
                px = _apply_complex(fn, complex(x0))
                py = _apply_complex(gm, y0)
                if px is None or py is None:
                    continue
                val, scale = _eval_with_scale(fp, px, py)
                if abs(val) <= 1e-6 * max(scale, 1.0):
                    hit = True
                    break
        if hit:
            kept.append(f)
    return kept


def _sample_points(C: BiCurve, count: int = 3):
    """Points of C over a few rational abscissas: exact rational fiber points
    when available, high-precision complex ones otherwise."""
    samples = []
    used = 0
    for x0 in _SAMPLE_ABSCISSAS:
        coeffs = C.fiber_coefficients(1, complex(x0))
        if all(abs(c) < 1e-12 for c in coeffs):
            continue
        fiber = sympy.expand(C.expr.subs(X, sympy.Rational(x0)))
        fiber_poly = sympy.Poly(fiber, Y)
        if fiber_poly.degree() < 1:
            continue
        rational_roots = sympy.roots(fiber_poly, Y, filter="Q")
        got_here = False
        for root in rational_roots:
            q = sympy.Rational(root)
            samples.append((x0, Fraction(int(q.p), int(q.q))))
            got_here = True
        if not got_here:
            for root in fiber_poly.nroots(n=30):
                samples.append((x0, complex(root)))
            got_here = True
        used += 1
        if used >= count:
            break
    if not samples:
        raise SplitdynError("could not sample points on the curve")
    return samples


def _apply_exact(f: RationalMap, x0: Fraction) -> Optional[Fraction]:
    point = f.apply(ProjPointQ.from_rational(x0))
    if point.is_infinity:
        return None
    return point.as_fraction()


def _apply_complex(f: RationalMap, z: complex) -> Optional[complex]:
    num = f.numerator.evaluate_float(z)
    den = f.denominator.evaluate_float(z)
    if abs(den) < 1e-30:
        return None
    return num / den


def _eval_with_scale(fp: sympy.Poly, x0: complex, y0: complex) -> tuple[complex, float]:
    val = 0j
    scale = 0.0
    for (i, j), c in fp.terms():
        term = complex(c) * x0 ** i * y0 ** j
        val += term
        scale += abs(term)
    return val, scale


def is_invariant(C: BiCurve, phi: SplitEndo) -> bool:
    """image_curve(C, phi) equals C after normalization."""
    return image_curve(C, phi) == C


def curve_preperiodicity(
    C: BiCurve,
    phi: SplitEndo,
    max_steps: int = 8,
    degree_budget: int = 64,
) -> CurveOrbitReport:
    """Iterate the image and report (preperiod, period) on an exact repeat of
    normalized defining polynomials; budgets exhausted mean Undecided (the
    procedure certifies preperiodicity positively, never its absence)."""
    seen: dict[tuple, int] = {}
    keys: list[tuple] = []
    bidegrees: list[tuple[int, int]] = []
    current = C
    step = 0
    while step <= max_steps:
        if current.key in seen:
            first = seen[current.key]
            return CurveOrbitReport(
                status="periodic",
                preperiod=first,
                period=step - first,
                bidegrees=tuple(bidegrees),
                keys=tuple(keys),
            )
        seen[current.key] = step
        keys.append(current.key)
        bidegrees.append(current.bidegree)
        if step == max_steps or max(current.bidegree) > degree_budget:
            break
        current = image_curve(current, phi)
        step += 1
    return CurveOrbitReport(
        status="undecided",
        preperiod=None,
        period=None,
        bidegrees=tuple(bidegrees),
        keys=tuple(keys),
    )


def ms_curve(ftilde: Poly, n: int, m: int, L: LinearPoly) -> BiCurve:
    """The curve cut out by ftilde^n(x) = L(ftilde^m(y)), squarefree part."""
    if ftilde.degree < 2:
        raise PreconditionViolatedError("base polynomial must have degree >= 2")
    if n < 0 or m < 0:
        raise PreconditionViolatedError("exponents must be >= 0")
    left = iterate(ftilde, n)
    right = compose(L.as_poly(), iterate(ftilde, m))
    return BiCurve(_poly_to_sympy(left, X) - _poly_to_sympy(right, Y))


@dataclass(frozen=True)
class TransferReport:
    """Pairs harvested on a curve: preperiodic matches and transfer failures."""

    pairs: tuple[tuple[ProjPointQ, ProjPointQ], ...]
    failures: tuple[tuple[ProjPointQ, ProjPointQ], ...]
    scanned: int
    truncated: bool


def preperiodic_pairs_on_curve(
    C: BiCurve,
    f: Union[RationalMap, Poly],
    g: Union[RationalMap, Poly],
    budget: int = 10_000,
) -> TransferReport:
    """Enumerate rational preperiodic x for f, solve C(x, y) = 0 for rational
    y exactly, and split the pairs by preperiodicity of y under g.

    On a curve invariant under the split action the failure list must come
    back empty; failures witness a broken transfer.
    """
    f = _as_rational_map(f)
    g = _as_rational_map(g)
    xs = preperiodic_points(f)
    pairs = []
    failures = []
    scanned = 0
    truncated = False
    for x_point in xs:
        if scanned >= budget:
            truncated = True
            break
        x_val: Optional[Fraction] = (
            None if x_point.is_infinity else x_point.as_fraction()
        )
        for y_val in C.fiber_rational_points(x_val):
            scanned += 1
            y_point = (
                ProjPointQ.infinity()
                if y_val is None
                else ProjPointQ.from_rational(y_val)
            )
            if is_preperiodic(g, y_point).preperiodic:
                pairs.append((x_point, y_point))
            else:
                failures.append((x_point, y_point))
            if scanned >= budget:
                truncated = True
                break
    return TransferReport(
        pairs=tuple(pairs),
        failures=tuple(failures),
        scanned=scanned,
        truncated=truncated,
    )
