"""Small recursive-descent parsers for the text syntaxes used by the library.

* Witt / field elements: polynomials in ``t`` with integer coefficients, e.g.
  ``"2+t^1"``, ``"1 + 2*t"``, ``"-3t^2+1"``.
* Stabilizer elements: semicolon-separated Witt coefficients, e.g. ``"1+2*t; 1"``.

Parsers return plain integer data; turning that into ring elements is the job
of the respective context objects.  Errors carry the position and the set of
tokens that would have been accepted there.
"""

from __future__ import annotations

from .errors import ParseError

_TERM_START = ("integer", "'t'", "'-'", "'+'")


class _Cursor:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self) -> str:
        ch = self.peek()
        self.pos += 1
        return ch

    def integer(self) -> int | None:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            return None
        return int(self.text[start : self.pos])

    def fail(self, expected) -> ParseError:
        self.skip_ws()
        return ParseError(self.text, self.pos, expected)


def _parse_term(cur: _Cursor, sign: int) -> tuple[int, int]:
    coeff = cur.integer()
    has_coeff = coeff is not None
    if coeff is None:
        coeff = 1
    if cur.peek() == "*":
        if not has_coeff:
            raise cur.fail(["integer", "'t'"])
        cur.take()
        if cur.peek() != "t":
            raise cur.fail(["'t'"])
    if cur.peek() == "t":
        cur.take()
        exp = 1
        if cur.peek() == "^":
            cur.take()
            e = cur.integer()
            if e is None:
                raise cur.fail(["integer"])
            exp = e
        return sign * coeff, exp
    if not has_coeff:
        raise cur.fail(["integer", "'t'"])
    return sign * coeff, 0


def _parse_poly(cur: _Cursor, stop: str = "") -> dict[int, int]:
    """Parse ``term (('+'|'-') term)*`` and return {exponent: coefficient}."""
    terms: dict[int, int] = {}
    sign = 1
    if cur.peek() in "+-" and cur.peek():
        sign = -1 if cur.take() == "-" else 1
    if cur.peek() in ("", ";") or (cur.peek() and not (cur.peek().isdigit() or cur.peek() == "t")):
        raise cur.fail(["integer", "'t'", "'-'"])
    while True:
        c, e = _parse_term(cur, sign)
        terms[e] = terms.get(e, 0) + c
        nxt = cur.peek()
        if nxt in ("+", "-"):
            sign = -1 if cur.take() == "-" else 1
            if not (cur.peek().isdigit() or cur.peek() == "t"):
                raise cur.fail(["integer", "'t'"])
            continue
        if nxt == "" or nxt in stop:
            return terms
        raise cur.fail(["'+'", "'-'", "'*'"] + ([repr(s) for s in stop] if stop else []) + ["end of input"])


def parse_poly_text(text: str) -> dict[int, int]:
    """Parse a polynomial in ``t`` with integer coefficients.

    >>> sorted(parse_poly_text("2+t^1").items())
    [(0, 2), (1, 1)]
    """
    cur = _Cursor(text)
    terms = _parse_poly(cur)
    if cur.peek() != "":
        raise cur.fail(["end of input"])
    return terms


def parse_stab_text(text: str) -> list[dict[int, int]]:
    """Parse ``coeff (';' coeff)*`` into a list of polynomials.

    ``"1;; 1"`` fails at the second ``;`` (position 2) because a coefficient is
    required between separators.
    """
    cur = _Cursor(text)
    coeffs = [_parse_poly(cur, stop=";")]
    while cur.peek() == ";":
        cur.take()
        coeffs.append(_parse_poly(cur, stop=";"))
    if cur.peek() != "":
        raise cur.fail(["';'", "end of input"])
    return coeffs
