"""Parser and canonical printer for the phase-space expression language.

Grammar (EBNF, whitespace insignificant):

    expr     = term , { ("+" | "-") , term } ;
    term     = factor , { ("*" | "/") , factor } ;
    factor   = { "-" } , atom , [ "^" , exponent ] ;
    atom     = integer | symbol | "(" , expr , ")" ;
    exponent = [ "-" ] , integer
             | "(" , [ "-" ] , integer , [ "/" , integer ] , ")" ;
    symbol   = "x1" | "x2" | "p1" | "p2" | "r2"
             | "mu" | "lam" | "rho" | "K" | "hbar" | "m" | "c" | "eps0" | "pi" ;

``r2`` denotes x1^2 + x2^2; used as a plain factor it expands, while in a
denominator (or with a negative exponent) it contributes the closed r^(-2k)
factor of the term class.  Division is accepted only by products of integers,
parameter powers and r2 powers — anything else (sums, x/p factors) is a
structural error, because general quotients would leave the exact term class.
Fractional exponents are accepted for parameter symbols only (the printer
uses them for symbolic square roots) with denominator 1 or 2.

``format_expr`` prints the unique canonical form (terms in a fixed total
order), and ``parse_expr(format_expr(e)) == e`` for every expression.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

from .phase_space import PARAMS, VARS, PhaseSpaceExpr, Term, _norm_params

__all__ = ["parse_expr", "format_expr", "ParseError"]

_SYMBOLS = set(PARAMS) | set(VARS) | {"r2"}


class ParseError(ValueError):
    """Syntax or structural error, carrying the offending position."""

    def __init__(self, message: str, pos: int, src: str = ""):
        self.pos = pos
        self.src = src
        caret = ""
        if src:
            caret = f"\n  {src}\n  {' ' * pos}^"
        super().__init__(f"{message} (at position {pos}){caret}")


class _Token(NamedTuple):
    kind: str  # 'int' | 'name' | 'op'
    text: str
    pos: int


def _tokenize(src: str) -> list[_Token]:
    tokens = []
    i = 0
    n = len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and src[j].isdigit():
                j += 1
            tokens.append(_Token("int", src[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            tokens.append(_Token("name", src[i:j], i))
            i = j
            continue
        if ch in "+-*/^()":
            tokens.append(_Token("op", ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i, src)
    tokens.append(_Token("op", "", n))  # end marker
    return tokens


# AST nodes: ('num', Fraction) ('sym', name) ('neg', a) ('add', a, b)
# ('sub', a, b) ('mul', a, b) ('div', a, b, pos) ('pow', a, Fraction, pos)


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, text: str) -> _Token:
        tok = self.next()
        if tok.kind != "op" or tok.text != text:
            raise ParseError(f"expected {text!r}", tok.pos, self.src)
        return tok

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok.text != "":
            raise ParseError(f"unexpected {tok.text!r}", tok.pos, self.src)
        return node

    def expr(self):
        node = self.term()
        while self.peek().text in ("+", "-"):
            op = self.next().text
            rhs = self.term()
            node = ("add" if op == "+" else "sub", node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.peek().text in ("*", "/"):
            op_tok = self.next()
            rhs = self.factor()
            if op_tok.text == "*":
                node = ("mul", node, rhs)
            else:
                node = ("div", node, rhs, op_tok.pos)
        return node

    def factor(self):
        negs = 0
        while self.peek().text == "-":
            self.next()
            negs += 1
        node = self.atom()
        if self.peek().text == "^":
            pos = self.next().pos
            node = ("pow", node, self.exponent(), pos)
        if negs % 2:
            node = ("neg", node)
        return node

    def atom(self):
        tok = self.next()
        if tok.kind == "int":
            return ("num", Fraction(int(tok.text)))
        if tok.kind == "name":
            if tok.text not in _SYMBOLS:
                raise ParseError(f"unknown symbol {tok.text!r}", tok.pos, self.src)
            return ("sym", tok.text)
        if tok.text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ParseError("expected a number, symbol or parenthesized expression", tok.pos, self.src)

    def exponent(self) -> Fraction:
        tok = self.peek()
        if tok.text == "(":
            self.next()
            sign = 1
            if self.peek().text == "-":
                self.next()
                sign = -1
            num = self.next()
            if num.kind != "int":
                raise ParseError("expected an integer exponent", num.pos, self.src)
            value = Fraction(sign * int(num.text))
            if self.peek().text == "/":
                self.next()
                den = self.next()
                if den.kind != "int" or int(den.text) == 0:
                    raise ParseError("expected a nonzero integer denominator", den.pos, self.src)
                value = value / int(den.text)
            self.expect_op(")")
            return value
        sign = 1
        if tok.text == "-":
            self.next()
            sign = -1
        num = self.next()
        if num.kind != "int":
            raise ParseError("expected an integer exponent", num.pos, self.src)
        return Fraction(sign * int(num.text))


# ---------------------------------------------------------------------------
# Lowering the AST to a canonical PhaseSpaceExpr
# ---------------------------------------------------------------------------


def _lower(node, src: str) -> PhaseSpaceExpr:
    kind = node[0]
    if kind == "num":
        return PhaseSpaceExpr.number(node[1])
    if kind == "sym":
        name = node[1]
        if name == "r2":
            return PhaseSpaceExpr.r2(1)
        if name in VARS:
            return PhaseSpaceExpr.var(name)
        return PhaseSpaceExpr.symbol(name)
    if kind == "neg":
        return -_lower(node[1], src)
    if kind == "add":
        return _lower(node[1], src) + _lower(node[2], src)
    if kind == "sub":
        return _lower(node[1], src) - _lower(node[2], src)
    if kind == "mul":
        return _lower(node[1], src) * _lower(node[2], src)
    if kind == "div":
        numer = _lower(node[1], src)
        denom = _monomial(node[2], src, node[3])
        return numer / denom
    if kind == "pow":
        base, exp, pos = node[1], node[2], node[3]
        if base[0] == "sym":
            name = base[1]
            if name == "r2":
                if exp.denominator != 1:
                    raise ParseError("r2 requires an integer exponent", pos, src)
                return PhaseSpaceExpr.r2(int(exp))
            if name in VARS:
                if exp.denominator != 1 or exp < 0:
                    raise ParseError(
                        f"{name} requires a non-negative integer exponent", pos, src
                    )
                return PhaseSpaceExpr.var(name) ** int(exp)
            if exp.denominator not in (1, 2):
                raise ParseError("parameter exponents may be halves at most", pos, src)
            return PhaseSpaceExpr.symbol(name, exp)
        inner = _lower(base, src)
        if exp.denominator != 1 or exp < 0:
            raise ParseError("general expressions require non-negative integer powers", pos, src)
        return inner ** int(exp)
    raise AssertionError(f"unhandled node {kind}")


def _monomial(node, src: str, pos: int):
    """Validate a divisor subtree: products of numbers, parameter powers and
    r2 powers only.  Returns the corresponding single-term expression."""
    kind = node[0]
    if kind == "num":
        if node[1] == 0:
            raise ParseError("division by zero", pos, src)
        return PhaseSpaceExpr.number(node[1])
    if kind == "sym":
        name = node[1]
        if name in VARS:
            raise ParseError(f"division by {name} is not supported", pos, src)
        if name == "r2":
            return PhaseSpaceExpr({((), (0, 0), (0, 0), -1): Fraction(1)}, _reduce=False)
        return PhaseSpaceExpr.symbol(name)
    if kind == "neg":
        return PhaseSpaceExpr.number(-1) * _monomial(node[1], src, pos)
    if kind == "mul":
        return _mono_product(_monomial(node[1], src, pos), _monomial(node[2], src, pos))
    if kind == "div":
        raise ParseError("nested division in a denominator is not supported", node[3], src)
    if kind == "pow":
        base, exp = node[1], node[2]
        if base[0] == "sym":
            name = base[1]
            if name in VARS:
                raise ParseError(f"division by {name} is not supported", node[3], src)
            if name == "r2":
                if exp.denominator != 1:
                    raise ParseError("r2 requires an integer exponent", node[3], src)
                return PhaseSpaceExpr({((), (0, 0), (0, 0), -int(exp)): Fraction(1)}, _reduce=False)
            if exp.denominator not in (1, 2):
                raise ParseError("parameter exponents may be halves at most", node[3], src)
            return PhaseSpaceExpr.symbol(name, exp)
        if base[0] == "num":
            if exp.denominator != 1:
                raise ParseError("numbers require integer exponents", node[3], src)
            q = Fraction(base[1])
            if q == 0 and exp < 0:
                raise ParseError("division by zero", node[3], src)
            return PhaseSpaceExpr.number(q ** int(exp))
    raise ParseError(
        "division is only allowed by rational literals, parameter monomials or r2 powers",
        pos,
        src,
    )


def _mono_product(a: PhaseSpaceExpr, b: PhaseSpaceExpr) -> PhaseSpaceExpr:
    """Product of two denominator monomials, tolerating negative rpow keys."""
    (pa, _, _, ka), ca = next(iter(a._terms.items()))
    (pb, _, _, kb), cb = next(iter(b._terms.items()))
    return PhaseSpaceExpr(
        {(_norm_params(list(pa) + list(pb)), (0, 0), (0, 0), ka + kb): ca * cb}, _reduce=False
    )


def parse_expr(src: str) -> PhaseSpaceExpr:
    """Parse the expression language into canonical form.

    parse_expr(format_expr(e)) == e for every e; syntax errors carry the
    source position.
    """
    if not isinstance(src, str):
        raise TypeError("parse_expr expects a string")
    parser = _Parser(src)
    ast = parser.parse()
    return _lower(ast, src)


# ---------------------------------------------------------------------------
# Canonical printer
# ---------------------------------------------------------------------------


def _format_exponent(exp: Fraction) -> str:
    if exp.denominator == 1:
        return str(int(exp))
    return f"({exp.numerator}/{exp.denominator})"


def _format_power(name: str, exp: Fraction) -> str:
    if exp == 1:
        return name
    return f"{name}^{_format_exponent(exp)}"


def _format_term(term: Term) -> tuple[int, str]:
    """Returns (sign, body) with body suitable for joining by + / -."""
    coeff = term.coeff
    sign = -1 if coeff < 0 else 1
    coeff = abs(coeff)

    numer: list[str] = []
    denom: list[str] = []
    if coeff.numerator != 1:
        numer.append(str(coeff.numerator))
    if coeff.denominator != 1:
        denom.append(str(coeff.denominator))
    for name, exp in term.params:
        if exp > 0:
            numer.append(_format_power(name, exp))
        else:
            denom.append(_format_power(name, -exp))
    for name, exp in zip(("x1", "x2", "p1", "p2"), (*term.xexp, *term.pexp)):
        if exp:
            numer.append(_format_power(name, Fraction(exp)))
    if term.rpow:
        denom.append(_format_power("r2", Fraction(term.rpow)))

    if not numer:
        numer.append("1")
    body = "*".join(numer)
    if denom:
        if len(denom) == 1:
            body += f"/{denom[0]}"
        else:
            body += f"/({'*'.join(denom)})"
    return sign, body


def format_expr(expr: PhaseSpaceExpr) -> str:
    """Deterministic canonical rendering; output re-parses to the same value."""
    terms = expr.terms()
    if not terms:
        return "0"
    pieces = []
    for idx, term in enumerate(terms):
        sign, body = _format_term(term)
        if idx == 0:
            pieces.append(("-" if sign < 0 else "") + body)
        else:
            pieces.append(("- " if sign < 0 else "+ ") + body)
    return " ".join(pieces)
