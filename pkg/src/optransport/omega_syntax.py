"""Parser and printer for constraints written as ``x*y - (phi(x) + y*psi(x))``.

Accepted forms (whitespace is ignored, ``*`` between a number and a letter
may be left out)::

    x*y
    x*y - 1
    x*y - y*x
    x*y - (3 + x^2 + y*x - 1/2*y*x^3)
    x*y + 2               # same as x*y - (-2)

Terms of the subtracted polynomial are ``c*x^k`` (contributing to φ) or
``c*y*x^k`` (contributing to ψ).  ``y`` must be the leftmost letter; anything
else lies outside the family and is rejected.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Dict, List, Tuple

from .algebra import OmegaConstraint, scalar


class OmegaParseError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        self.text = text
        self.pos = pos
        self.message = message
        super().__init__(f"{message} at position {pos}: {text!r}")

    def pointer(self) -> str:
        return f"{self.text}\n{' ' * self.pos}^ {self.message}"


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<sym>[xy()^*+\-]))")


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            while text[pos].isspace():
                pos += 1
            raise OmegaParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = "num" if m.group("num") else m.group("sym")
        start = m.start("num") if m.group("num") else m.start("sym")
        tokens.append((kind, m.group("num") or m.group("sym"), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> Tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self, kind: str) -> Tuple[str, str, int]:
        tok = self.peek()
        if tok[0] != kind:
            want = "end of input" if kind == "end" else repr(kind)
            got = "end of input" if tok[0] == "end" else repr(tok[1])
            raise OmegaParseError(f"expected {want}, found {got}", self.text, tok[2])
        self.i += 1
        return tok

    def error(self, message: str, pos: int = None):
        raise OmegaParseError(message, self.text, self.peek()[2] if pos is None else pos)

    def parse(self) -> OmegaConstraint:
        self.take("x")
        if self.peek()[0] == "*":
            self.take("*")
        self.take("y")
        phi: Dict[int, Fraction] = {}
        psi: Dict[int, Fraction] = {}
        while self.peek()[0] in ("+", "-"):
            sign = -1 if self.take(self.peek()[0])[0] == "-" else 1
            if self.peek()[0] == "(":
                self.take("(")
                first = True
                while True:
                    s = 1
                    if self.peek()[0] in ("+", "-"):
                        s = -1 if self.take(self.peek()[0])[0] == "-" else 1
                    elif not first:
                        break
                    self.term(-sign * s, phi, psi)
                    first = False
                    if self.peek()[0] not in ("+", "-"):
                        break
                self.take(")")
            else:
                self.term(-sign, phi, psi)
        self.take("end")
        return OmegaConstraint(_dense(phi), _dense(psi))

    def term(self, sign: int, phi: dict, psi: dict) -> None:
        """One monomial ``c * y^e * x^k``; adds ``sign*c`` to the right table."""
        start = self.peek()[2]
        coeff = Fraction(1)
        have_number = False
        if self.peek()[0] == "num":
            coeff = Fraction(self.take("num")[1])
            have_number = True
            if self.peek()[0] == "*":
                self.take("*")
                if self.peek()[0] not in ("x", "y"):
                    self.error("expected x or y after '*'")
        y_power = 0
        x_power = 0
        letters = 0
        while self.peek()[0] in ("x", "y"):
            kind, _, pos = self.take(self.peek()[0])
            power = 1
            if self.peek()[0] == "^":
                self.take("^")
                if "/" in self.peek()[1]:
                    self.error("exponents must be integers")
                power = int(self.take("num")[1])
            if kind == "y":
                if x_power:
                    self.error("y must come before x (terms have the shape y*psi(x))", pos)
                y_power += power
            else:
                x_power += power
            letters += 1
            if self.peek()[0] == "*":
                self.take("*")
                if self.peek()[0] not in ("x", "y"):
                    self.error("expected x or y after '*'")
        if not have_number and not letters:
            self.error("expected a term")
        if y_power > 1:
            self.error("terms with y^2 or higher lie outside the family xy - (phi(x) + y psi(x))", start)
        target = psi if y_power else phi
        target[x_power] = target.get(x_power, Fraction(0)) + sign * coeff


def _dense(table: Dict[int, Fraction]) -> tuple:
    if not table:
        return ()
    return tuple(scalar(table.get(i, 0)) for i in range(max(table) + 1))


def parse_omega(text: str) -> OmegaConstraint:
    """Parse a constraint; raises :class:`OmegaParseError` with a position."""
    return _Parser(text).parse()


def _monomial(c, letters: str) -> str:
    if c == 1:
        return letters or "1"
    if c == -1:
        return "-" + (letters or "1")
    return f"{c}*{letters}" if letters else str(c)


def _terms(omega: OmegaConstraint) -> List[str]:
    out = []
    for k, a in enumerate(omega.phi):
        if a:
            out.append(_monomial(a, "" if k == 0 else ("x" if k == 1 else f"x^{k}")))
    for k, b in enumerate(omega.psi):
        if b:
            out.append(_monomial(b, "y" if k == 0 else ("y*x" if k == 1 else f"y*x^{k}")))
    return out


def format_omega(omega: OmegaConstraint) -> str:
    """Canonical text; ``parse_omega(format_omega(w)) == w``."""
    terms = _terms(omega)
    if not terms:
        return "x*y"
    if len(terms) == 1 and not terms[0].startswith("-"):
        return f"x*y - {terms[0]}"
    body = terms[0]
    for t in terms[1:]:
        body += f" - {t[1:]}" if t.startswith("-") else f" + {t}"
    return f"x*y - ({body})"
