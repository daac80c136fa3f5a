"""Exact coefficient fields: the rationals and one simple extension Q[t]/(m(t)).

Elements are immutable.  Arithmetic between elements of different fields is a
FieldMismatchError, never a silent coercion; rationals are lifted explicitly
with Field.embed.  Extension moduli are monic with rational coefficients and
are checked for irreducibility only up to degree 3 (rational-root search);
above that the caller's declaration is trusted, as documented.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import gmpy2

from .errors import FieldMismatchError, RootNotInFieldError, SplitdynError

RationalLike = Union[int, Fraction]

# how far the multiplicative-order scan of the generator looks for roots of
# unity; covers every cyclotomic field a small-degree modulus can contain
_ORDER_SCAN_LIMIT = 72


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def _poly_trim(cs: list[Fraction]) -> tuple[Fraction, ...]:
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


def _poly_mod(cs: Sequence[Fraction], modulus: Sequence[Fraction]) -> tuple[Fraction, ...]:
    """Remainder of cs by the monic modulus, both dense lowest-first."""
    r = list(cs)
    n = len(modulus) - 1
    while len(r) > n:
        lead = r[-1]
        if lead:
            shift = len(r) - 1 - n
            for i in range(n):
                r[shift + i] -= lead * modulus[i]
        r.pop()
    while len(r) < n:
        r.append(Fraction(0))
    return tuple(r)


def _poly_mul(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return out


def _poly_divmod(a: Sequence[Fraction], b: Sequence[Fraction]):
    """Division with remainder in Q[t]; b nonzero, dense lowest-first."""
    a = list(a)
    db = len(b) - 1
    inv_lead = 1 / b[-1]
    q = [Fraction(0)] * max(len(a) - db, 0)
    while len(a) - 1 >= db and any(a):
        if a[-1] == 0:
            a.pop()
            continue
        shift = len(a) - 1 - db
        factor = a[-1] * inv_lead
        q[shift] = factor
        for i in range(db + 1):
            a[shift + i] -= factor * b[i]
        a.pop()
    return q, a


class Field:
    """The rationals, or a simple extension declared by a monic modulus."""

    _rationals_singleton: Optional["Field"] = None

    def __init__(self, modulus: Optional[tuple[Fraction, ...]], name: str, _token=None):
        if _token is not Field._construction_token:
            raise TypeError("use Field.rationals() or Field.extension(...)")
        self.modulus = modulus
        self.name = name
        self.degree = 1 if modulus is None else len(modulus) - 1
        self._roots_of_unity_cache: dict[int, tuple["FieldElement", ...]] = {}
        self._all_roots_of_unity: Optional[tuple["FieldElement", ...]] = None

    _construction_token = object()

    @classmethod
    def rationals(cls) -> "Field":
        if cls._rationals_singleton is None:
            cls._rationals_singleton = cls(None, "Q", _token=cls._construction_token)
        return cls._rationals_singleton

    @classmethod
    def extension(cls, modulus_coeffs: Iterable, name: str = "t") -> "Field":
        """Q[t]/(m(t)) for the monic modulus given dense, lowest degree first."""
        coeffs = [_as_fraction(c) for c in modulus_coeffs]
        m = _poly_trim(list(coeffs))
        if len(m) < 2:
            raise SplitdynError("extension modulus must be nonconstant")
        if m[-1] != 1:
            raise SplitdynError("extension modulus must be monic")
        deg = len(m) - 1
        if deg <= 3 and deg >= 2 and _has_rational_root(m):
            raise SplitdynError(
                "modulus of degree <= 3 is reducible over Q (rational root found)"
            )
        return cls(m, name, _token=cls._construction_token)

    @property
    def is_rationals(self) -> bool:
        return self.modulus is None

    def __eq__(self, other):
        return (
            isinstance(other, Field)
            and self.modulus == other.modulus
            and self.name == other.name
        )

    def __hash__(self):
        return hash((self.modulus, self.name))

    def __repr__(self):
        if self.is_rationals:
            return "Field(Q)"
        return f"Field(Q[{self.name}]/({self.name}^{self.degree}+...))"

    # -- element constructors ------------------------------------------------

    def embed(self, x) -> "FieldElement":
        """Lift an int/Fraction (or an element of Q) into this field."""
        if isinstance(x, FieldElement):
            if x.field == self:
                return x
            if x.field.is_rationals:
                x = x._payload
            else:
                raise FieldMismatchError("cannot embed an extension element elsewhere")
        q = _as_fraction(x)
        if self.is_rationals:
            return FieldElement(self, q)
        vec = [Fraction(0)] * self.degree
        vec[0] = q
        return FieldElement(self, tuple(vec))

    def element(self, coords) -> "FieldElement":
        """Element from a rational (Q) or a coordinate vector (extension)."""
        if self.is_rationals:
            return self.embed(coords)
        vec = [_as_fraction(c) for c in coords]
        if len(vec) > self.degree:
            vec = list(_poly_mod(vec, self.modulus))
        while len(vec) < self.degree:
            vec.append(Fraction(0))
        return FieldElement(self, tuple(vec))

    def zero(self) -> "FieldElement":
        return self.embed(0)

    def one(self) -> "FieldElement":
        return self.embed(1)

    def generator(self) -> "FieldElement":
        if self.is_rationals:
            raise SplitdynError("Q has no extension generator")
        vec = [Fraction(0)] * self.degree
        vec[1] = Fraction(1)
        return FieldElement(self, tuple(vec))

    # -- roots ----------------------------------------------------------------

    def roots_of_unity(self, k: int) -> tuple["FieldElement", ...]:
        """All field elements r with r**k == 1, deterministic order."""
        if k <= 0:
            raise SplitdynError("order must be positive")
        cached = self._roots_of_unity_cache.get(k)
        if cached is None:
            pool = self._root_of_unity_pool()
            cached = tuple(r for r in pool if (r ** k).is_one())
            self._roots_of_unity_cache[k] = cached
        return cached

    def _root_of_unity_pool(self) -> tuple["FieldElement", ...]:
        if self._all_roots_of_unity is not None:
            return self._all_roots_of_unity
        pool = [self.one(), -self.one()]
        if not self.is_rationals:
            # order scan of the generator: catches Q[t]/(cyclotomic) setups
            t = self.generator()
            acc = t
            for order in range(1, _ORDER_SCAN_LIMIT + 1):
                if acc.is_one():
                    power = self.one()
                    for _ in range(order):
                        power = power * t
                        for cand in (power, -power):
                            if cand not in pool:
                                pool.append(cand)
                    break
                acc = acc * t
            # quadratic extensions: solve the degree-2 cyclotomics directly
            if self.degree == 2:
                for b, c in ((1, 1), (0, 1), (-1, 1)):  # t^2+t+1, t^2+1, t^2-t+1
                    disc = Fraction(b * b - 4 * c)
                    root = self.sqrt_of_rational(disc)
                    if root is not None:
                        half = self.embed(Fraction(1, 2))
                        for sgn in (1, -1):
                            cand = (self.embed(-b) + root * self.embed(sgn)) * half
                            if cand not in pool:
                                pool.append(cand)
        self._all_roots_of_unity = tuple(pool)
        return self._all_roots_of_unity

    def sqrt_of_rational(self, q) -> Optional["FieldElement"]:
        """An element whose square is the rational q, if one exists here."""
        q = _as_fraction(q)
        r = _rational_nth_root(q, 2)
        if r is not None:
            return self.embed(r)
        if self.is_rationals or self.degree != 2:
            return None
        # (u + v t)^2 = (u^2 - v^2 m0) + (2uv - v^2 m1) t  with  t^2 = -m1 t - m0,
        # so v != 0 forces u = v m1 / 2 and then v^2 (m1^2/4 - m0) = q.
        m0, m1 = self.modulus[0], self.modulus[1]
        denom = Fraction(m1 * m1, 4) - m0
        if denom == 0:
            return None
        v = _rational_nth_root(q / denom, 2)
        if v is None:
            return None
        return self.element([v * Fraction(m1, 2), v])

    def nth_roots_of_rational(self, q, n: int) -> tuple["FieldElement", ...]:
        """Field elements r with r**n equal to the rational q.

        The search is restricted to exact radical candidates of q (rational
        n-th roots, square roots in quadratic extensions) multiplied by the
        field's roots of unity; absence is therefore field-relative.
        """
        q = _as_fraction(q)
        if n <= 0:
            raise SplitdynError("root order must be positive")
        if q == 0:
            return (self.zero(),)
        found: list[FieldElement] = []
        base_candidates: list[FieldElement] = []
        r = _rational_nth_root(abs(q), n)
        if r is not None:
            base_candidates.append(self.embed(r))
        if n % 2 == 0 and not self.is_rationals:
            s = self.sqrt_of_rational(q) if n == 2 else None
            if s is not None:
                base_candidates.append(s)
        target = self.embed(q)
        for base in base_candidates:
            for zeta in self._root_of_unity_pool():
                cand = base * zeta
                if (cand ** n) == target and cand not in found:
                    found.append(cand)
        return tuple(found)


def _has_rational_root(m: Sequence[Fraction]) -> bool:
    """Rational-root search for a monic rational polynomial (degree <= 3 use)."""
    # scale to integer coefficients
    den = 1
    for c in m:
        den = den * c.denominator // gmpy2.gcd(den, c.denominator)
    ints = [int(c * den) for c in m]
    lead, const = ints[-1], ints[0]
    if const == 0:
        return True
    for p in _divisors(abs(const)):
        for q in _divisors(abs(lead)):
            for sgn in (1, -1):
                cand = Fraction(sgn * p, q)
                if sum(c * cand ** i for i, c in enumerate(m)) == 0:
                    return True
    return False


def _divisors(n: int) -> list[int]:
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            if d != n // d:
                out.append(n // d)
        d += 1
    return sorted(out)


def _rational_nth_root(q: Fraction, n: int) -> Optional[Fraction]:
    """Exact rational r with r**n == q, or None."""
    if q == 0:
        return Fraction(0)
    if q < 0 and n % 2 == 0:
        return None
    sign = -1 if q < 0 else 1
    num, den = abs(q).numerator, abs(q).denominator
    rn, exact_n = gmpy2.iroot(gmpy2.mpz(num), n)
    rd, exact_d = gmpy2.iroot(gmpy2.mpz(den), n)
    if not (exact_n and exact_d):
        return None
    return Fraction(sign * int(rn), int(rd))


class FieldElement:
    """Immutable exact scalar; payload is a Fraction (Q) or a reduced
    coordinate vector over Q (extension)."""

    __slots__ = ("field", "_payload", "_hash")

    def __init__(self, field: Field, payload):
        self.field = field
        self._payload = payload
        self._hash = None

    # -- views -----------------------------------------------------------------

    @property
    def is_rational_valued(self) -> bool:
        if self.field.is_rationals:
            return True
        return all(c == 0 for c in self._payload[1:])

    def as_fraction(self) -> Fraction:
        if self.field.is_rationals:
            return self._payload
        if self.is_rational_valued:
            return self._payload[0]
        raise SplitdynError(f"{self} is not rational-valued")

    def coords(self) -> tuple[Fraction, ...]:
        if self.field.is_rationals:
            return (self._payload,)
        return self._payload

    def is_zero(self) -> bool:
        if self.field.is_rationals:
            return self._payload == 0
        return all(c == 0 for c in self._payload)

    def is_one(self) -> bool:
        if self.field.is_rationals:
            return self._payload == 1
        return self._payload[0] == 1 and all(c == 0 for c in self._payload[1:])

    # -- arithmetic --------------------------------------------------------------

    def _coerce(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.field != self.field:
                if other.field.is_rationals or self.field.is_rationals:
                    raise FieldMismatchError(
                        "elements of Q and an extension cannot mix implicitly; "
                        "lift with Field.embed first"
                    )
                raise FieldMismatchError("elements belong to different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.embed(other)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if self.field.is_rationals:
            return FieldElement(self.field, self._payload + o._payload)
        return FieldElement(
            self.field, tuple(a + b for a, b in zip(self._payload, o._payload))
        )

    __radd__ = __add__

    def __neg__(self):
        if self.field.is_rationals:
            return FieldElement(self.field, -self._payload)
        return FieldElement(self.field, tuple(-a for a in self._payload))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if self.field.is_rationals:
            return FieldElement(self.field, self._payload * o._payload)
        prod = _poly_mul(self._payload, o._payload)
        return FieldElement(self.field, _poly_mod(prod, self.field.modulus))

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero field element")
        if self.field.is_rationals:
            return FieldElement(self.field, 1 / self._payload)
        # extended Euclid in Q[t] against the modulus
        r0: tuple[Fraction, ...] = tuple(self.field.modulus)
        r1 = _poly_trim(list(self._payload))
        s0: tuple[Fraction, ...] = (Fraction(0),)
        s1: tuple[Fraction, ...] = (Fraction(1),)
        while len(r1) > 1:
            q, rem = _poly_divmod(list(r0), list(r1))
            prod = _poly_mul(q, s1) if q else [Fraction(0)]
            new_s = [Fraction(0)] * max(len(s0), len(prod), 1)
            for i, c in enumerate(s0):
                new_s[i] += c
            for i, c in enumerate(prod):
                new_s[i] -= c
            r0, r1 = r1, _poly_trim(rem)
            s0, s1 = s1, _poly_trim(new_s) or (Fraction(0),)
        if not r1 or r1[0] == 0:
            raise SplitdynError("element not invertible: modulus is reducible")
        scale = 1 / r1[0]
        inv = [c * scale for c in s1]
        return FieldElement(self.field, _poly_mod(inv, self.field.modulus))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = self.field.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- comparisons & hashing ------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.field.embed(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.field == other.field and self._payload == other._payload

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.field, self._payload))
        return self._hash

    def __repr__(self):
        return f"FieldElement({self})"

    def __str__(self):
        if self.field.is_rationals:
            return str(self._payload)
        name = self.field.name
        parts = []
        for i, c in enumerate(self._payload):
            if c == 0:
                continue
            if i == 0:
                parts.append(str(c))
            else:
                mono = name if i == 1 else f"{name}^{i}"
                parts.append(mono if c == 1 else f"{c}*{mono}")
        return " + ".join(parts) if parts else "0"


QQ = Field.rationals()
