"""Expression frontend and exact JSON serialization for maps.

Accepted grammar: integer and rational literals (via '/'), the variable x,
t for the extension generator, y for bivariate curve expressions, operators
+ - * / ^ and parentheses, with implicit multiplication ("2x", "3(x+1)").
Rationals are never rounded; errors carry 1-based line/column positions.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Union

from .errors import ParseError, SplitdynError
from .field import Field, QQ
from .poly import Poly, poly_divmod, poly_gcd

_OPERATORS = set("+-*/^()")


class _Token:
    __slots__ = ("kind", "value", "line", "col")

    def __init__(self, kind, value, line, col):
        self.kind = kind
        self.value = value
        self.line = line
        self.col = col


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            if j < len(text) and text[j] == ".":
                raise ParseError(
                    "decimal literals are not exact; write a fraction like 1/2",
                    line,
                    col,
                )
            tokens.append(_Token("num", int(text[i:j]), line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha():
            if ch in ("x", "y", "t"):
                tokens.append(_Token("name", ch, line, col))
                i += 1
                col += 1
                continue
            raise ParseError(f"unsupported symbol {ch!r}", line, col)
        if ch in _OPERATORS:
            tokens.append(_Token("op", ch, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("end", None, line, col))
    return tokens


class _RatFunc:
    """Exact rational function used as the parser's value type."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly):
        self.num = num
        self.den = den

    @classmethod
    def of(cls, p: Poly) -> "_RatFunc":
        return cls(p, Poly.constant(p.field, 1))

    def add(self, other: "_RatFunc") -> "_RatFunc":
        return _RatFunc(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    def sub(self, other: "_RatFunc") -> "_RatFunc":
        return _RatFunc(
            self.num * other.den - other.num * self.den, self.den * other.den
        )

    def mul(self, other: "_RatFunc") -> "_RatFunc":
        return _RatFunc(self.num * other.num, self.den * other.den)

    def div(self, other: "_RatFunc", tok: _Token) -> "_RatFunc":
        if other.num.is_zero():
            raise ParseError("DivisionByZero", tok.line, tok.col)
        return _RatFunc(self.num * other.den, self.den * other.num)

    def pow(self, k: int, tok: _Token) -> "_RatFunc":
        if k >= 0:
            return _RatFunc(self.num ** k, self.den ** k)
        if self.num.is_zero():
            raise ParseError("DivisionByZero", tok.line, tok.col)
        return _RatFunc(self.den ** (-k), self.num ** (-k))

    def reduced(self) -> tuple[Poly, Poly]:
        g = poly_gcd(self.num, self.den)
        num, den = self.num, self.den
        if g.degree > 0:
            num, _ = poly_divmod(num, g)
            den, _ = poly_divmod(den, g)
        if den.is_zero():
            raise SplitdynError("zero denominator")
        # normalize so the denominator has leading coefficient one
        inv = den.leading_coefficient().inverse()
        return num.scale(inv), den.scale(inv)


class _Parser:
    def __init__(self, tokens: list[_Token], field: Field, variables: tuple[str, ...]):
        self.tokens = tokens
        self.pos = 0
        self.field = field
        self.variables = variables
        self.seen: dict[str, Poly] = {}

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse(self) -> _RatFunc:
        value = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected trailing {tok.value!r}", tok.line, tok.col)
        return value

    def expr(self) -> _RatFunc:
        tok = self.peek()
        negate = False
        while tok.kind == "op" and tok.value in "+-":
            self.next()
            if tok.value == "-":
                negate = not negate
            tok = self.peek()
        value = self.term()
        if negate:
            value = _RatFunc(-value.num, value.den)
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.value in "+-":
                self.next()
                rhs = self.term()
                value = value.add(rhs) if tok.value == "+" else value.sub(rhs)
            else:
                return value

    def term(self) -> _RatFunc:
        value = self.factor()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.value in "*/":
                self.next()
                rhs = self.factor()
                value = value.mul(rhs) if tok.value == "*" else value.div(rhs, tok)
            elif tok.kind in ("num", "name") or (
                tok.kind == "op" and tok.value == "("
            ):
                # implicit multiplication: 2x, 3(x+1), x y
                rhs = self.factor()
                value = value.mul(rhs)
            else:
                return value

    def factor(self) -> _RatFunc:
        base = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.value == "^":
            self.next()
            sign = 1
            tok2 = self.peek()
            while tok2.kind == "op" and tok2.value in "+-":
                self.next()
                if tok2.value == "-":
                    sign = -sign
                tok2 = self.peek()
            if tok2.kind != "num":
                raise ParseError("exponent must be an integer", tok2.line, tok2.col)
            self.next()
            return base.pow(sign * tok2.value, tok)
        return base

    def atom(self) -> _RatFunc:
        tok = self.next()
        if tok.kind == "num":
            return _RatFunc.of(Poly.constant(self.field, tok.value))
        if tok.kind == "name":
            if tok.value == "t":
                if self.field.is_rationals:
                    raise ParseError(
                        "symbol 't' needs a declared extension field", tok.line, tok.col
                    )
                return _RatFunc.of(Poly.constant(self.field, self.field.generator()))
            if tok.value not in self.variables:
                raise ParseError(
                    f"variable {tok.value!r} not allowed here", tok.line, tok.col
                )
            poly = self.seen.get(tok.value)
            if poly is None:
                raise ParseError(
                    f"variable {tok.value!r} not bound", tok.line, tok.col
                )
            return _RatFunc.of(poly)
        if tok.kind == "op" and tok.value == "(":
            inner = self.expr()
            closer = self.next()
            if not (closer.kind == "op" and closer.value == ")"):
                raise ParseError("missing ')'", closer.line, closer.col)
            return inner
        if tok.kind == "op" and tok.value in "+-":
            inner = self.factor()
            if tok.value == "-":
                return _RatFunc(-inner.num, inner.den)
            return inner
        raise ParseError(
            f"expected a value, found {tok.value!r}"
            if tok.kind != "end"
            else "unexpected end of input",
            tok.line,
            tok.col,
        )


def parse_univariate(text: str, field: Field = QQ) -> tuple[Poly, Poly]:
    """Parse a one-variable expression into a reduced (numerator, denominator)."""
    tokens = _tokenize(text)
    parser = _Parser(tokens, field, variables=("x",))
    parser.seen["x"] = Poly.x(field)
    return parser.parse().reduced()


def parse_poly(text: str, field: Field = QQ) -> Poly:
    """Parse an expression that must reduce to a polynomial."""
    num, den = parse_univariate(text, field)
    if den.degree > 0:
        raise SplitdynError(f"{text!r} is a rational map, not a polynomial")
    return num.scale(den.coeff(0).inverse())


def parse_map(text: str, field: Field = QQ):
    """Parse to a Poly, or to a RationalMap when a true denominator remains."""
    num, den = parse_univariate(text, field)
    if den.degree <= 0:
        return num.scale(den.coeff(0).inverse())
    from .heights import RationalMap

    if not field.is_rationals:
        raise SplitdynError("rational maps are supported over Q only")
    return RationalMap(num, den)


# -- exact JSON forms ---------------------------------------------------------------


def field_to_json(field: Field) -> dict:
    if field.is_rationals:
        return {"kind": "rationals"}
    return {
        "kind": "extension",
        "name": field.name,
        "modulus": [str(c) for c in field.modulus],
    }


def field_from_json(obj: dict) -> Field:
    if obj.get("kind") == "rationals":
        return QQ
    if obj.get("kind") == "extension":
        return Field.extension(
            [Fraction(s) for s in obj["modulus"]], name=obj.get("name", "t")
        )
    raise SplitdynError(f"unknown field description {obj!r}")


def poly_to_json(p: Poly) -> dict:
    if p.field.is_rationals:
        coeffs = [str(f) for f in p.fraction_coefficients()]
    else:
        coeffs = [[str(c) for c in e.coords()] for e in p.coefficients()]
    return {"field": field_to_json(p.field), "coeffs": coeffs}


def poly_from_json(obj: dict) -> Poly:
    field = field_from_json(obj["field"])
    coeffs = []
    for c in obj["coeffs"]:
        if isinstance(c, list):
            coeffs.append(field.element([Fraction(s) for s in c]))
        else:
            coeffs.append(field.embed(Fraction(c)))
    return Poly(field, coeffs)


def poly_to_text(p: Poly) -> str:
    return str(p)


def parse_curve_monomials(text: str) -> list[list]:
    """Parse a bivariate expression in x and y over Q into exact monomials
    [[i, j, "p/q"], ...] (the curve serialization format).

    Same grammar as the univariate frontend; division is allowed only by
    constants, exponents must be nonnegative.
    """
    tokens = _tokenize(text)
    parser = _BivariateParser(tokens)
    monomials = parser.parse()
    return [[i, j, str(c)] for (i, j), c in sorted(monomials.items()) if c != 0]


class _BivariateParser(_Parser):
    """Value type: dict mapping (x_exp, y_exp) to Fraction coefficients."""

    def __init__(self, tokens):
        super().__init__(tokens, QQ, variables=("x", "y"))

    def parse(self):
        value = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected trailing {tok.value!r}", tok.line, tok.col)
        return value

    def expr(self):
        tok = self.peek()
        negate = False
        while tok.kind == "op" and tok.value in "+-":
            self.next()
            if tok.value == "-":
                negate = not negate
            tok = self.peek()
        value = self.term()
        if negate:
            value = {k: -v for k, v in value.items()}
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.value in "+-":
                self.next()
                rhs = self.term()
                sign = 1 if tok.value == "+" else -1
                for k, v in rhs.items():
                    value[k] = value.get(k, Fraction(0)) + sign * v
            else:
                return value

    def term(self):
        value = self.factor()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.value in "*/":
                self.next()
                rhs = self.factor()
                if tok.value == "*":
                    value = _mono_mul(value, rhs)
                else:
                    if set(rhs) - {(0, 0)}:
                        raise ParseError(
                            "division by a nonconstant is not a curve", tok.line, tok.col
                        )
                    const = rhs.get((0, 0), Fraction(0))
                    if const == 0:
                        raise ParseError("DivisionByZero", tok.line, tok.col)
                    value = {k: v / const for k, v in value.items()}
            elif tok.kind in ("num", "name") or (tok.kind == "op" and tok.value == "("):
                value = _mono_mul(value, self.factor())
            else:
                return value

    def factor(self):
        base = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.value == "^":
            self.next()
            tok2 = self.peek()
            if tok2.kind != "num":
                raise ParseError("exponent must be a nonnegative integer", tok2.line, tok2.col)
            self.next()
            out = {(0, 0): Fraction(1)}
            for _ in range(tok2.value):
                out = _mono_mul(out, base)
            return out
        return base

    def atom(self):
        tok = self.next()
        if tok.kind == "num":
            return {(0, 0): Fraction(tok.value)}
        if tok.kind == "name":
            if tok.value == "x":
                return {(1, 0): Fraction(1)}
            if tok.value == "y":
                return {(0, 1): Fraction(1)}
            raise ParseError("curves use the variables x and y", tok.line, tok.col)
        if tok.kind == "op" and tok.value == "(":
            inner = self.expr()
            closer = self.next()
            if not (closer.kind == "op" and closer.value == ")"):
                raise ParseError("missing ')'", closer.line, closer.col)
            return inner
        if tok.kind == "op" and tok.value in "+-":
            inner = self.factor()
            if tok.value == "-":
                return {k: -v for k, v in inner.items()}
            return inner
        raise ParseError(
            f"expected a value, found {tok.value!r}"
            if tok.kind != "end"
            else "unexpected end of input",
            tok.line,
            tok.col,
        )


def _mono_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for (i1, j1), c1 in a.items():
        for (i2, j2), c2 in b.items():
            key = (i1 + i2, j1 + j2)
            out[key] = out.get(key, Fraction(0)) + c1 * c2
    return out
