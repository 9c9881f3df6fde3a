"""Exact arithmetic in Q(q), q-integers and rational specialization.

A :class:`RatFunc` stores ``q**shift * num(q) / den(q)`` with integer
polynomials ``num`` and ``den`` (dense tuples, constant term first).  The
normalization makes value equality coincide with representation equality:

* neither ``num`` nor ``den`` is divisible by ``q`` (powers of q live in ``shift``),
* ``gcd(num, den) = 1`` over Q and the joint integer content is 1,
* the leading coefficient of ``den`` is positive,
* zero is ``(0,), (1,), 0``.

Engine code never talks to :class:`RatFunc` directly; it asks a
:class:`ScalarMode` for ``q``, ``one`` and ``zero`` and uses ordinary
arithmetic operators, so the same code runs over Q(q) or over Q with q
specialized to a rational number.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from math import gcd

Poly = tuple  # tuple[int, ...], constant term first, no trailing zeros


class PoleError(ZeroDivisionError):
    """Raised when a rational function is evaluated at one of its poles."""


# ---------------------------------------------------------------------------
# integer polynomial helpers
# ---------------------------------------------------------------------------

def _trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


def _add(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return _trim(out)


def _neg(a):
    return tuple(-c for c in a)


def _mul(a, b):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return tuple(out)


def _scale(a, c):
    return tuple(x * c for x in a) if c else ()


def _content(a):
    g = 0
    for c in a:
        g = gcd(g, c)
    return g


def _primitive(a):
    c = _content(a)
    if c == 0:
        return ()
    if a[-1] < 0:
        c = -c
    return tuple(x // c for x in a)


def _strip_q(a):
    """Split off the largest power of q dividing ``a``."""
    k = 0
    while k < len(a) and a[k] == 0:
        k += 1
    return a[k:], k


def _prem(a, b):
    """Pseudo-remainder of ``a`` by ``b`` over Z."""
    a = list(a)
    lb = b[-1]
    db = len(b) - 1
    while len(a) - 1 >= db and a:
        la = a[-1]
        shift = len(a) - 1 - db
        a = [x * lb for x in a]
        for i, y in enumerate(b):
            a[i + shift] -= la * y
        while a and a[-1] == 0:
            a.pop()
    return tuple(a)


def _pgcd(a, b):
    """Primitive gcd of integer polynomials (positive leading coefficient)."""
    if not a:
        return _primitive(b)
    if not b:
        return _primitive(a)
    a, b = _primitive(a), _primitive(b)
    if len(a) < len(b):
        a, b = b, a
    while b:
        r = _prem(a, b)
        a, b = b, _primitive(r)
    return a


def _exact_div(a, b):
    """Exact quotient a / b of integer polynomials (b divides a over Z)."""
    a = list(a)
    db = len(b) - 1
    lb = b[-1]
    out = [0] * (len(a) - db) if len(a) > db else []
    while a and len(a) - 1 >= db:
        shift = len(a) - 1 - db
        c, r = divmod(a[-1], lb)
        if r:
            raise ArithmeticError("inexact polynomial division")
        out[shift] = c
        for i, y in enumerate(b):
            a[i + shift] -= c * y
        while a and a[-1] == 0:
            a.pop()
    if a:
        raise ArithmeticError("inexact polynomial division")
    return _trim(out)


def _from_fraction(num: Poly, den: Poly, shift: int):
    """Normalize ``q**shift * num / den`` with num, den integer polynomials."""
    num = _trim(num)
    if not num:
        return (), (1,), 0
    den = _trim(den)
    if not den:
        raise ZeroDivisionError("zero denominator")
    num, kn = _strip_q(num)
    den, kd = _strip_q(den)
    shift += kn - kd
    if len(den) > 1 and len(num) > 1:
        g = _pgcd(num, den)
        if len(g) > 1:
            num = _exact_div(num, g)
            den = _exact_div(den, g)
    c = gcd(_content(num), _content(den))
    if den[-1] < 0:
        c = -c
    if c != 1:
        num = tuple(x // c for x in num)
        den = tuple(x // c for x in den)
    return num, den, shift


# ---------------------------------------------------------------------------
# RatFunc
# ---------------------------------------------------------------------------

class RatFunc:
    """An element of Q(q) in canonical form."""

    __slots__ = ("num", "den", "shift", "_hash")

    def __init__(self, num=(), den=(1,), shift=0, _normalized=False):
        if not _normalized:
            num, den, shift = _from_fraction(tuple(num), tuple(den), shift)
        self.num = num
        self.den = den
        self.shift = shift
        self._hash = None

    # -- construction -----------------------------------------------------
    @classmethod
    def const(cls, c) -> "RatFunc":
        c = Fraction(c)
        if c == 0:
            return ZERO
        return cls((c.numerator,), (c.denominator,), 0)

    @classmethod
    def monomial(cls, k: int, c=1) -> "RatFunc":
        c = Fraction(c)
        if c == 0:
            return ZERO
        return cls((c.numerator,), (c.denominator,), k)

    @staticmethod
    def _coerce(x):
        if isinstance(x, RatFunc):
            return x
        if isinstance(x, (int, Fraction)):
            return RatFunc.const(x)
        return NotImplemented

    # -- predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.num

    def __bool__(self):
        return bool(self.num)

    def is_laurent(self) -> bool:
        return self.den == (1,)

    def __eq__(self, other):
        o = RatFunc._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.num == o.num and self.den == o.den and self.shift == o.shift

    def __hash__(self):
        if self._hash is None:
            if self.den == (1,) and self.shift == 0 and len(self.num) <= 1:
                self._hash = hash(self.num[0] if self.num else 0)
            else:
                self._hash = hash((self.num, self.den, self.shift))
        return self._hash

    # -- arithmetic -------------------------------------------------------
    def __neg__(self):
        if not self.num:
            return self
        return RatFunc(_neg(self.num), self.den, self.shift, _normalized=True)

    def __add__(self, other):
        o = RatFunc._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if not o.num:
            return self
        if not self.num:
            return o
        k = min(self.shift, o.shift)
        a = (0,) * (self.shift - k) + self.num
        b = (0,) * (o.shift - k) + o.num
        if self.den == o.den:
            return RatFunc(_add(a, b), self.den, k)
        return RatFunc(_add(_mul(a, o.den), _mul(b, self.den)),
                       _mul(self.den, o.den), k)

    __radd__ = __add__

    def __sub__(self, other):
        o = RatFunc._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = RatFunc._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if not self.num or not o.num:
            return ZERO
        if self.den == (1,) and o.den == (1,):
            n = _mul(self.num, o.num)
            return RatFunc(n, (1,), self.shift + o.shift, _normalized=True)
        return RatFunc(_mul(self.num, o.num), _mul(self.den, o.den),
                       self.shift + o.shift)

    __rmul__ = __mul__

    def inv(self) -> "RatFunc":
        if not self.num:
            raise ZeroDivisionError("inverse of zero in Q(q)")
        num, den = self.den, self.num
        if den[-1] < 0:
            num, den = _neg(num), _neg(den)
        return RatFunc(num, den, -self.shift, _normalized=True)

    def __truediv__(self, other):
        o = RatFunc._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.inv()

    def __rtruediv__(self, other):
        return self.inv() * other

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inv() ** (-n)
        out = ONE
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- evaluation -------------------------------------------------------
    def specialize(self, r) -> Fraction:
        r = Fraction(r)
        dv = _horner(self.den, r)
        if dv == 0:
            raise PoleError(f"{self} has a pole at q = {r}")
        if not self.num:
            return Fraction(0)
        if r == 0 and self.shift < 0:
            raise PoleError(f"{self} has a pole at q = 0")
        return _horner(self.num, r) * r ** self.shift / dv

    # -- text -------------------------------------------------------------
    def __str__(self):
        n = _render_laurent(self.num, self.shift)
        if self.den == (1,):
            return n
        d = _render_laurent(self.den, 0)
        if len([c for c in self.num if c]) > 1:
            n = f"({n})"
        if len([c for c in self.den if c]) > 1:
            d = f"({d})"
        return f"{n}/{d}"

    def __repr__(self):
        return f"RatFunc({self})"


def _horner(p, r):
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * r + c
    return acc


def _render_laurent(p, shift):
    terms = []
    for i in range(len(p) - 1, -1, -1):
        c = p[i]
        if not c:
            continue
        k = i + shift
        mag = abs(c)
        if k == 0:
            body = str(mag)
        else:
            mono = "q" if k == 1 else f"q^{k}"
            body = mono if mag == 1 else f"{mag}*{mono}"
        terms.append(("-" if c < 0 else "+", body))
    if not terms:
        return "0"
    first_sign, first = terms[0]
    out = ("-" if first_sign == "-" else "") + first
    for s, b in terms[1:]:
        out += f" {s} {b}"
    return out


ZERO = RatFunc((), (1,), 0, _normalized=True)
ONE = RatFunc((1,), (1,), 0, _normalized=True)
Q = RatFunc((1,), (1,), 1, _normalized=True)


def parse_ratfunc(text: str) -> RatFunc:
    """Parse the rendering grammar, e.g. ``(q^2 - 1)/(q + 1)`` or ``-q^-1``."""
    return parse_scalar(text, Q)


_TOKEN = re.compile(r"\s*(?:(\d+)|(q)|(\^)|([-+*/()]))")


def parse_scalar(text: str, q):
    """Evaluate a rational expression in ``q`` with ``q`` bound to the given value."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"cannot parse scalar near {text[pos:]!r}")
        pos = m.end()
        tokens.append(next(g for g in m.groups() if g is not None))
    one = q ** 0

    def expr(i):
        v, i = term(i)
        while i < len(tokens) and tokens[i] in "+-":
            op = tokens[i]
            w, i = term(i + 1)
            v = v + w if op == "+" else v - w
        return v, i

    def term(i):
        v, i = unary(i)
        while i < len(tokens) and tokens[i] in "*/":
            op = tokens[i]
            w, i = unary(i + 1)
            v = v * w if op == "*" else v / w
        return v, i

    def unary(i):
        if i < len(tokens) and tokens[i] == "-":
            v, i = unary(i + 1)
            return -v, i
        if i < len(tokens) and tokens[i] == "+":
            return unary(i + 1)
        return power(i)

    def power(i):
        v, i = atom(i)
        if i < len(tokens) and tokens[i] == "^":
            i += 1
            sign = 1
            if tokens[i] == "-":
                sign, i = -1, i + 1
            v = v ** (sign * int(tokens[i]))
            i += 1
        return v, i

    def atom(i):
        t = tokens[i]
        if t == "(":
            v, i = expr(i + 1)
            if tokens[i] != ")":
                raise ValueError("unbalanced parentheses")
            return v, i + 1
        if t == "q":
            return q, i + 1
        if t.isdigit():
            return one * int(t), i + 1
        raise ValueError(f"unexpected token {t!r}")

    v, i = expr(0)
    if i != len(tokens):
        raise ValueError(f"trailing input in {text!r}")
    return v


# ---------------------------------------------------------------------------
# q-integers and scalar modes
# ---------------------------------------------------------------------------

def q_integer(n: int, base: str = "q^-2", q=Q):
    """[n; b] = (b^n - 1)/(b - 1) for b = q^2 or q^-2, valid for negative n."""
    b = q ** 2 if base in ("q^2", "q2") else q ** -2
    return (b ** n - 1) / (b - 1)


def specialize(a: RatFunc, r) -> Fraction:
    return a.specialize(r)


class ScalarMode:
    """Where scalars live: Q(q) (``symbolic``) or Q with q = r (``specialized``)."""

    def __init__(self, value=None):
        if value is None:
            self.r = None
            self.q = Q
            self.one = ONE
            self.zero = ZERO
        else:
            r = Fraction(value)
            if r in (0, 1, -1):
                raise ValueError("specialization must avoid q in {0, 1, -1}")
            self.r = r
            self.q = r
            self.one = Fraction(1)
            self.zero = Fraction(0)

    @property
    def symbolic(self) -> bool:
        return self.r is None

    @property
    def name(self) -> str:
        return "symbolic" if self.r is None else f"q={self.r}"

    def __eq__(self, other):
        return isinstance(other, ScalarMode) and self.r == other.r

    def __hash__(self):
        return hash(("ScalarMode", self.r))

    def __repr__(self):
        return f"ScalarMode({self.name})"

    def __call__(self, x):
        """Coerce an int, Fraction, RatFunc or scalar string into this mode."""
        if isinstance(x, str):
            return parse_scalar(x, self.q)
        if isinstance(x, RatFunc):
            return x if self.r is None else x.specialize(self.r)
        return self.one * x

    def q_integer(self, n: int, base: str = "q^-2"):
        return q_integer(n, base, self.q)

    def render(self, x) -> str:
        return str(x)


SYMBOLIC = ScalarMode()


@lru_cache(maxsize=None)
def specialized(r) -> ScalarMode:
    return ScalarMode(Fraction(r))


def scalar_mode(text) -> ScalarMode:
    """``"symbolic"`` or a rational literal such as ``"3/2"``."""
    if text is None or text == "symbolic":
        return SYMBOLIC
    if isinstance(text, ScalarMode):
        return text
    return specialized(Fraction(text))
