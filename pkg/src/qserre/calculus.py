"""Differential graded algebras over presented algebras.

Forms are stored in left-coefficient canonical form: a dict from
``(normal algebra word, form-basis word)`` to a scalar.  A form word is a
tuple of invariant 1-form symbol indices; the wedge rules pick one basis word
per class in each degree.

The same element class serves tensor products of calculi
(:class:`TensorCalculus`), whose keys are tuples of such pairs, so that maps
of differential graded algebras can target either kind.
"""

from __future__ import annotations

import itertools
import json

from .ncpoly import (A, B, C, D, Algebra, Report, _acc, build_laurent, build_sl2,
                     parse_expression)
from .qfield import ScalarMode


class DegreeOverflow(ValueError):
    """An operation needs form degrees the calculus does not implement."""


class CalculusMismatch(ValueError):
    pass


# ---------------------------------------------------------------------------
# elements
# ---------------------------------------------------------------------------

class FormElement:
    """A homogeneous-or-not differential form over a calculus (or tensor calculus)."""

    __slots__ = ("calc", "terms")

    def __init__(self, calc, terms=None):
        self.calc = calc
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    @property
    def degree(self):
        degs = {self.calc.key_degree(k) for k in self.terms}
        if len(degs) > 1:
            return "mixed"
        return degs.pop() if degs else 0

    def _same(self, other):
        if other.calc is not self.calc:
            raise CalculusMismatch(f"{self.calc.name} vs {other.calc.name}")

    def __add__(self, other):
        if not isinstance(other, FormElement):
            if other == 0:
                return self
            other = self.calc.scalar(other)
        self._same(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            _acc(out, k, c)
        return FormElement(self.calc, out)

    __radd__ = __add__

    def __neg__(self):
        return FormElement(self.calc, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, FormElement):
            return self.calc.mul(self, other)
        if hasattr(other, "terms"):
            return self.calc.mul(self, self.calc.lift(other))
        return FormElement(self.calc, {k: c * other for k, c in self.terms.items()})

    def __rmul__(self, other):
        if hasattr(other, "terms"):
            return self.calc.mul(self.calc.lift(other), self)
        return FormElement(self.calc, {k: other * c for k, c in self.terms.items()})

    def __pow__(self, n):
        if n < 0:
            return self.calc.lift(self.calc.algebra.inverse_monomial(_as_algebra(self))) ** -n
        out = self.calc.one()
        for _ in range(n):
            out = out * self
        return out

    def wedge(self, other):
        return self.calc.mul(self, other)

    def d(self):
        return self.calc.d(self)

    def __eq__(self, other):
        if not isinstance(other, FormElement):
            if other == 0:
                return not self.terms
            other = self.calc.scalar(other)
        return self.calc is other.calc and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self):
        return not self.terms

    def __str__(self):
        return self.calc.render(self.terms)

    __repr__ = __str__


# ---------------------------------------------------------------------------
# wedge algebra on invariant symbols
# ---------------------------------------------------------------------------

def _as_algebra(f: FormElement):
    if any(k[1] for k in f.terms):
        raise ValueError("only degree-0 forms can be inverted")
    return f.calc.algebra.element({w: c for (w, _), c in f.terms.items()})


class WedgeRules:
    """Quadratic relations among invariant 1-forms, used as a rewriting system.

    ``rules[(i, j)]`` lists ``(coefficient, (k, l))`` replacing ``s_i s_j``;
    an empty list kills the pair.  Pairs not in ``rules`` are basis words.
    ``max_degree`` bounds the implemented degrees.
    """

    def __init__(self, nsym, rules, max_degree):
        self.nsym = nsym
        self.rules = {k: list(v) for k, v in rules.items()}
        self.max_degree = max_degree
        self._cache: dict = {}
        self._basis: dict = {}

    def reduce(self, word, rightmost=False) -> dict:
        if len(word) > self.max_degree:
            raise DegreeOverflow(f"form degree {len(word)} exceeds implemented {self.max_degree}")
        if not rightmost:
            hit = self._cache.get(word)
            if hit is not None:
                return hit
        rng = range(len(word) - 2, -1, -1) if rightmost else range(len(word) - 1)
        pos = next((i for i in rng if (word[i], word[i + 1]) in self.rules), None)
        if pos is None:
            out = {word: 1}
        else:
            out = {}
            for c, pair in self.rules[(word[pos], word[pos + 1])]:
                for w2, c2 in self.reduce(word[:pos] + pair + word[pos + 2:], rightmost).items():
                    _acc(out, w2, c * c2)
        if not rightmost:
            self._cache[word] = out
        return out

    def basis(self, n) -> list:
        if n > self.max_degree:
            raise DegreeOverflow(f"form degree {n} exceeds implemented {self.max_degree}")
        if n not in self._basis:
            words = [()]
            for _ in range(n):
                words = [w + (s,) for w in words for s in range(self.nsym)
                         if not w or (w[-1], s) not in self.rules]
            self._basis[n] = words
        return self._basis[n]


# ---------------------------------------------------------------------------
# calculus
# ---------------------------------------------------------------------------

class Calculus:
    """A left-covariant style calculus presented by invariant 1-form symbols.

    * ``d_gen[g]``: list of ``(c, free word, symbol)`` with dg = sum c w s.
    * ``comm[(s, g)]``: list of ``(c, free word, symbol)`` with s g = sum c w s'.
    * ``mc[s]``: list of ``(c, free word, (s1, s2))`` with ds = sum c w s1 s2,
      or ``None`` when the exterior derivative of symbols is unknown.
    * ``wedge``: :class:`WedgeRules`.
    """

    def __init__(self, name, algebra: Algebra, symbols, aliases, zdeg, d_gen, comm, mc, wedge,
                 latex=None):
        self.name = name
        self.algebra = algebra
        self.field = algebra.field
        self.symbols = tuple(symbols)
        self.aliases = tuple(aliases)
        self.symbol_zdeg = tuple(zdeg)
        F = self.field
        self.d_gen = {g: [(F(c), tuple(w), s) for c, w, s in v] for g, v in d_gen.items()}
        self.comm = {k: [(F(c), tuple(w), s) for c, w, s in v] for k, v in comm.items()}
        self.mc = None if mc is None else {s: [(F(c), tuple(w), tuple(p)) for c, w, p in v]
                                           for s, v in mc.items()}
        self.wedge = wedge
        self.wedge.rules = {k: [(F(c), p) for c, p in v] for k, v in wedge.rules.items()}
        self.wedge._cache.clear()
        self.raw = {"d_gen": d_gen, "comm": comm, "mc": mc, "wedge": wedge.rules}
        self._csym: dict = {}
        self._cword: dict = {}
        self._dbasis: dict = {}
        self._dword: dict = {}
        self._dform: dict = {}
        self._trunc: dict = {}

    # -- bookkeeping ---------------------------------------------------------
    @property
    def max_degree(self):
        return self.wedge.max_degree

    def key_degree(self, key):
        return len(key[1])

    def key_zdeg(self, key):
        return self.algebra.word_zdeg(key[0]) + sum(self.symbol_zdeg[s] for s in key[1])

    def key_length(self, key):
        return self.algebra.word_length(key[0])

    def one(self):
        return FormElement(self, {(self.algebra.one_word, ()): self.field.one})

    def zero(self):
        return FormElement(self, {})

    def scalar(self, c):
        return FormElement(self, {(self.algebra.one_word, ()): self.field.one * c})

    def lift(self, x):
        """Algebra element as a degree-0 form."""
        return FormElement(self, {(w, ()): c for w, c in x.terms.items()})

    def gen(self, name):
        return self.lift(self.algebra.gen(name))

    def sym(self, s):
        if not isinstance(s, int):
            s = self.symbols.index(s) if s in self.symbols else self.aliases.index(s)
        return FormElement(self, {(self.algebra.one_word, (s,)): self.field.one})

    def basis_element(self, key):
        return FormElement(self, {key: self.field.one})

    def from_raw(self, terms):
        """Build a form from ``(c, free word, form word)`` triples (form word unreduced)."""
        out: dict = {}
        for c, w, f in terms:
            for wn, cw in self.algebra.free_product(w).items():
                for fn, cf in self.wedge.reduce(tuple(f)).items():
                    _acc(out, (wn, fn), c * cw * cf)
        return FormElement(self, out)

    def parse(self, text):
        atoms = {a: self.gen(a) for a in self.algebra.aliases}
        atoms.update({a: self.sym(i) for i, a in enumerate(self.aliases)})
        return parse_expression(text, self.field, atoms, self.one())

    # -- commutation -----------------------------------------------------------
    def _sym_past_letter(self, s, g):
        try:
            return self.comm[(s, g)]
        except KeyError:
            raise KeyError(f"no commutation rule for {self.aliases[s]} past {self.algebra.aliases[g]}")

    def commute_symbol(self, s, letters) -> dict:
        """s * (free word) as a dict {(normal word, symbol): c}."""
        key = (s, letters)
        hit = self._csym.get(key)
        if hit is not None:
            return hit
        alg = self.algebra
        if not letters:
            out = {(alg.one_word, s): self.field.one}
        else:
            prev = self.commute_symbol(s, letters[:-1])
            g = letters[-1]
            out = {}
            for (w, s1), c in prev.items():
                for c2, w2, s2 in self._sym_past_letter(s1, g):
                    for w3, c3 in alg.mul_words(w, _word_of(alg, w2)).items():
                        _acc(out, (w3, s2), c * c2 * c3)
        self._csym[key] = out
        return out

    def commute(self, f, y) -> dict:
        """Form word f past normal word y: {(normal word, unreduced form word): c}."""
        key = (f, y)
        hit = self._cword.get(key)
        if hit is not None:
            return hit
        alg = self.algebra
        if not f:
            out = {(y, ()): self.field.one}
        else:
            out = {}
            tail = self.commute(f[1:], y)
            for (y1, f1), c in tail.items():
                for (y2, s2), c2 in self.commute_symbol(f[0], alg.letters(y1)).items():
                    _acc(out, (y2, (s2,) + f1), c * c2)
        self._cword[key] = out
        return out

    # -- products ------------------------------------------------------------------
    def mul_keys(self, k1, k2) -> dict:
        x, f = k1
        y, g = k2
        if len(f) + len(g) > self.max_degree:
            raise DegreeOverflow(f"form degree {len(f) + len(g)} exceeds implemented {self.max_degree}")
        alg = self.algebra
        out: dict = {}
        for (y1, f1), c in self.commute(f, y).items():
            red = self.wedge.reduce(f1 + g)
            if not red:
                continue
            for w, cw in alg.mul_words(x, y1).items():
                for fw, cf in red.items():
                    _acc(out, (w, fw), c * cw * cf)
        return out

    def mul(self, a: FormElement, b: FormElement) -> FormElement:
        if a.calc is not self or b.calc is not self:
            raise CalculusMismatch("wedge across calculi")
        out: dict = {}
        for k1, c1 in a.terms.items():
            for k2, c2 in b.terms.items():
                for k, c in self.mul_keys(k1, k2).items():
                    _acc(out, k, c1 * c2 * c)
        return FormElement(self, out)

    # -- exterior derivative ---------------------------------------------------------
    def d_letter(self, g) -> FormElement:
        return self.from_raw([(c, w, (s,)) for c, w, s in self.d_gen[g]])

    def d_word(self, y) -> FormElement:
        """d of a normal algebra word, letter by letter."""
        hit = self._dword.get(y)
        if hit is not None:
            return hit
        alg = self.algebra
        letters = alg.letters(y)
        out = self.zero()
        for i, g in enumerate(letters):
            pre = self.lift(alg.normal_form(letters[:i]))
            post = self.lift(alg.normal_form(letters[i + 1:]))
            out = out + pre * self.d_letter(g) * post
        self._dword[y] = out
        return out

    def d_symbol(self, s) -> FormElement:
        if self.mc is None or self.max_degree < 2:
            raise DegreeOverflow(f"{self.name}: exterior derivative of 1-forms not implemented")
        return self.from_raw([(c, w, p) for c, w, p in self.mc[s]])

    def d_formword(self, f) -> FormElement:
        hit = self._dform.get(f)
        if hit is not None:
            return hit
        out = self.zero()
        for i, s in enumerate(f):
            pre = FormElement(self, {(self.algebra.one_word, f[:i]): self.field.one})
            post = FormElement(self, {(self.algebra.one_word, f[i + 1:]): self.field.one})
            term = pre * self.d_symbol(s) * post
            out = out + (term if i % 2 == 0 else -term)
        self._dform[f] = out
        return out

    def d_key(self, key) -> dict:
        hit = self._dbasis.get(key)
        if hit is not None:
            return hit.terms
        y, f = key
        if f:
            fw = FormElement(self, {(self.algebra.one_word, f): self.field.one})
            res = self.d_word(y) * fw + self.lift(self.algebra.word_element(y)) * self.d_formword(f)
        else:
            res = self.d_word(y)
        self._dbasis[key] = res
        return res.terms

    def d(self, a: FormElement) -> FormElement:
        out: dict = {}
        for k, c in a.terms.items():
            for k2, c2 in self.d_key(k).items():
                _acc(out, k2, c * c2)
        return FormElement(self, out)

    # -- truncated components ------------------------------------------------------
    def form_basis(self, n):
        return self.wedge.basis(n)

    def truncate_component(self, n, N, zdeg=None) -> list:
        key = (n, N, zdeg)
        hit = self._trunc.get(key)
        if hit is None:
            fb = self.form_basis(n)
            words = self.algebra.enumerate_basis(N)
            hit = [(w, f) for f in fb for w in words
                   if zdeg is None or self.key_zdeg((w, f)) == zdeg]
            self._trunc[key] = hit
        return hit

    def zdegrees(self, n, N):
        return sorted({self.key_zdeg(k) for k in self.truncate_component(n, N)})

    # -- rendering --------------------------------------------------------------------
    def render_key(self, key):
        w, f = key
        ws = self.algebra.render_word(w)
        fs = "^".join(self.aliases[s] for s in f)
        if not f:
            return ws
        if ws == "1":
            return fs
        return f"{ws}*{fs}"

    def sort_key(self, key):
        return (key[1], self.algebra.word_key(key[0]))

    def render(self, terms):
        if not terms:
            return "0"
        parts = []
        for k in sorted(terms, key=self.sort_key):
            c = str(terms[k])
            body = self.render_key(k)
            if body == "1":
                parts.append(f"({c})")
            elif c == "1":
                parts.append(body)
            elif c == "-1":
                parts.append(f"-{body}")
            else:
                parts.append(f"({c})*{body}")
        return " + ".join(parts)

    def __repr__(self):
        return f"Calculus({self.name}, {self.field.name})"


def _word_of(alg, free):
    """Normal word of a free word that is itself a single normal word (rule RHS)."""
    nf = alg.free_product(free)
    if len(nf) != 1:
        raise ValueError("rule right-hand side must be a monomial word")
    (w, c), = nf.items()
    if c != 1:
        raise ValueError("rule right-hand side must be a normal monomial")
    return w


# ---------------------------------------------------------------------------
# tensor products of calculi
# ---------------------------------------------------------------------------

class TensorCalculus:
    """Omega(A_1 (x) ... (x) A_k) = (x)_i Omega(A_i) with Koszul signs.

    Keys are tuples of per-factor keys ``(word, form word)``; multiplication is
    (a (x) h)(a' (x) h') = (-1)^{|h||a'|} aa' (x) hh'.
    """

    def __init__(self, *calcs):
        self.factors = tuple(calcs)
        self.field = calcs[0].field
        self.name = " (x) ".join(c.name for c in calcs)
        self._mul: dict = {}

    def key_degree(self, key):
        return sum(len(k[1]) for k in key)

    def bidegree(self, key):
        return tuple(len(k[1]) for k in key)

    def one(self):
        return FormElement(self, {tuple((c.algebra.one_word, ()) for c in self.factors): self.field.one})

    def zero(self):
        return FormElement(self, {})

    def scalar(self, c):
        return self.one() * c

    def lift(self, x):
        raise TypeError("lift an element into a tensor calculus with pure_tensor")

    def pure_tensor(self, *forms) -> FormElement:
        out: dict = {}
        for combo in itertools.product(*(f.terms.items() for f in forms)):
            c = self.field.one
            for _, cc in combo:
                c = c * cc
            _acc(out, tuple(k for k, _ in combo), c)
        return FormElement(self, out)

    def mul_keys(self, k1, k2) -> dict:
        hit = self._mul.get((k1, k2))
        if hit is not None:
            return hit
        sign = 0
        for i in range(len(k1)):
            for j in range(i):
                sign += len(k1[i][1]) * len(k2[j][1])
        parts = [calc.mul_keys(a, b) for calc, a, b in zip(self.factors, k1, k2)]
        out: dict = {}
        for combo in itertools.product(*(p.items() for p in parts)):
            c = self.field.one if sign % 2 == 0 else -self.field.one
            for _, cc in combo:
                c = c * cc
            _acc(out, tuple(k for k, _ in combo), c)
        self._mul[(k1, k2)] = out
        return out

    def mul(self, a, b):
        out: dict = {}
        for k1, c1 in a.terms.items():
            for k2, c2 in b.terms.items():
                for k, c in self.mul_keys(k1, k2).items():
                    _acc(out, k, c1 * c2 * c)
        return FormElement(self, out)

    def d_key(self, key) -> dict:
        out: dict = {}
        deg = 0
        for i, (calc, k) in enumerate(zip(self.factors, key)):
            sgn = -1 if deg % 2 else 1
            for k2, c in calc.d_key(k).items():
                _acc(out, key[:i] + (k2,) + key[i + 1:], c * sgn)
            deg += len(k[1])
        return out

    def d(self, a):
        out: dict = {}
        for k, c in a.terms.items():
            for k2, c2 in self.d_key(k).items():
                _acc(out, k2, c * c2)
        return FormElement(self, out)

    def project(self, a: FormElement, bidegree) -> FormElement:
        """The component of the given multidegree (the projections Pi_{m, n-m})."""
        return FormElement(self, {k: c for k, c in a.terms.items() if self.bidegree(k) == tuple(bidegree)})

    def render(self, terms):
        if not terms:
            return "0"
        parts = []
        for k in sorted(terms, key=lambda k: [c.sort_key(x) for c, x in zip(self.factors, k)]):
            legs = " (x) ".join(c.render_key(x) for c, x in zip(self.factors, k))
            parts.append(f"({terms[k]})*[{legs}]")
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

def _free_form(calc, letters):
    out = calc.one()
    for g in letters:
        out = out * calc.gen(g)
    return out


def _d_free(calc, letters):
    """d of a free product of generators by the Leibniz rule."""
    out = calc.zero()
    for i, g in enumerate(letters):
        out = out + _free_form(calc, letters[:i]) * calc.d_letter(g) * _free_form(calc, letters[i + 1:])
    return out


def _sym_free(calc, s, letters):
    out = calc.sym(s)
    for g in letters:
        out = out * calc.gen(g)
    return out


def verify_calculus(calc: Calculus, maxdeg: int = 2) -> Report:
    """Consistency of the presentation: relations, commutation, wedge and d^2 = 0."""
    rep = Report(f"calculus:{calc.name}", truncation=maxdeg, scalar_mode=calc.field.name)
    alg = calc.algebra
    F = calc.field
    relations = alg.relations()
    nsym = len(calc.symbols)
    # commutation rules respect algebra relations
    for lhs, rhs in relations:
        name = "".join(alg.aliases[g] for g in lhs)
        for s in range(nsym):
            left = _sym_free(calc, s, lhs)
            right = calc.zero()
            for c, w in rhs:
                right = right + _sym_free(calc, s, w) * F(c)
            rep.expect(left == right, f"{calc.aliases[s]} * ({name}) consistent", left - right)
        dl = _d_free(calc, lhs)
        dr = calc.zero()
        for c, w in rhs:
            dr = dr + _d_free(calc, w) * F(c)
        rep.expect(dl == dr, f"d respects relation {name}", dl - dr)
    # wedge rules: confluence and compatibility with commutation
    for w in itertools.product(range(nsym), repeat=3):
        if len(w) > calc.max_degree:
            break
        a, b = calc.wedge.reduce(w), calc.wedge.reduce(w, rightmost=True)
        rep.expect(a == b, "wedge rewriting confluent", w)
    if calc.max_degree >= 2:
        for (i, j), rhs in calc.wedge.rules.items():
            for g in range(len(alg.generators)):
                lhs_el = _commute_raw(calc, (i, j), g)
                rhs_el = calc.zero()
                for c, p in rhs:
                    rhs_el = rhs_el + _commute_raw(calc, p, g) * c
                rep.expect(lhs_el == rhs_el, f"wedge relation {calc.aliases[i]}{calc.aliases[j]} moves past {alg.aliases[g]}",
                           lhs_el - rhs_el)
    # d compatible with commutation: d(s g) computed both ways
    if calc.mc is not None and calc.max_degree >= 2:
        for (s, g), rhs in calc.comm.items():
            left = calc.d_symbol(s) * calc.gen(g) - calc.sym(s) * calc.d_letter(g)
            right = calc.d(calc.from_raw([(c, w, (s2,)) for c, w, s2 in rhs]))
            rep.expect(left == right, f"d respects {calc.aliases[s]}{alg.aliases[g]} commutation", left - right)
    # wedge relations are closed under d
    if calc.mc is not None and calc.max_degree >= 3:
        for (i, j), rhs in calc.wedge.rules.items():
            left = calc.d_symbol(i) * calc.sym(j) - calc.sym(i) * calc.d_symbol(j)
            right = calc.zero()
            for c, (k, l) in rhs:
                right = right + (calc.d_symbol(k) * calc.sym(l) - calc.sym(k) * calc.d_symbol(l)) * c
            rep.expect(left == right, f"d respects wedge relation {calc.aliases[i]}{calc.aliases[j]}", left - right)
    rep.failures.extend(d_squared_check(calc, maxdeg).failures)
    return rep


def _commute_raw(calc, pair, g):
    out: dict = {}
    for (y, f), c in calc.commute(pair, alg_gen_word(calc, g)).items():
        for fw, cf in calc.wedge.reduce(f).items():
            _acc(out, (y, fw), c * cf)
    return FormElement(calc, out)


def alg_gen_word(calc, g):
    return calc.algebra.gen_word(g)


def d_squared_check(calc: Calculus, maxdeg: int = 3) -> Report:
    """d(d(x)) = 0 on basis words of length <= maxdeg, on generators and on symbols."""
    rep = Report(f"d_squared:{calc.name}", truncation=maxdeg, scalar_mode=calc.field.name)
    alg = calc.algebra
    can_d1 = calc.mc is not None
    if not can_d1:
        rep.details["skipped"] = "exterior derivative of 1-forms not implemented"
        return rep
    for w in alg.enumerate_basis(maxdeg):
        x = calc.basis_element((w, ()))
        dd = calc.d(calc.d(x))
        rep.expect(dd.is_zero(), f"d^2 = 0 on {alg.render_word(w)}", dd)
    for s in range(len(calc.symbols)):
        if calc.max_degree >= 3:
            dd = calc.d(calc.d_symbol(s))
            rep.expect(dd.is_zero(), f"d^2 = 0 on {calc.aliases[s]}", dd)
    return rep


def leibniz_check(calc, a: FormElement, b: FormElement) -> bool:
    deg = a.degree
    sign = -1 if deg % 2 else 1
    return calc.d(a * b) == calc.d(a) * b + (a * calc.d(b)) * sign


# ---------------------------------------------------------------------------
# built-in calculi
# ---------------------------------------------------------------------------

_CACHE: dict = {}


def _swap_ab(terms, gmap):
    return [(c, tuple(gmap[x] for x in w), s) for c, w, s in terms]


def build_3d(field: ScalarMode, mc_override=None) -> Calculus:
    """The 3D left-covariant calculus on A(SL_q(2)) with forms w0, w1, w2."""
    key = ("3d", field)
    if mc_override is None and key in _CACHE:
        return _CACHE[key]
    q = field.q
    qi = q ** -1
    X = build_sl2(field)
    W0, W1, W2 = 0, 1, 2
    d_gen = {
        A: [(1, (A,), W1), (-q, (B,), W2)],
        B: [(1, (A,), W0), (-q ** 2, (B,), W1)],
        C: [(1, (C,), W1), (-q, (D,), W2)],
        D: [(1, (C,), W0), (-q ** 2, (D,), W1)],
    }
    scal = {A: (qi, q ** -2, qi), B: (q, q ** 2, q)}
    comm = {}
    for g, src in ((A, A), (B, B), (C, A), (D, B)):
        for s in range(3):
            comm[(s, g)] = [(scal[src][s], (g,), s)]
    mc = {
        W0: [(q ** 2 * (q ** 2 + 1), (), (W0, W1))],
        W1: [(q, (), (W0, W2))],
        W2: [(q ** 2 * (q ** 2 + 1), (), (W1, W2))],
    }
    if mc_override:
        mc.update(mc_override)
    wedge = WedgeRules(3, {
        (W0, W0): [], (W1, W1): [], (W2, W2): [],
        (W1, W0): [(-q ** 4, (W0, W1))],
        (W2, W0): [(-q ** 2, (W0, W2))],
        (W2, W1): [(-q ** 4, (W1, W2))],
    }, max_degree=4)
    calc = Calculus("3D", X, ("omega0", "omega1", "omega2"), ("w0", "w1", "w2"), (-2, 0, 2),
                    d_gen, comm, mc, wedge)
    if mc_override is None:
        _CACHE[key] = calc
    return calc


def build_4d(field: ScalarMode, wedge_rules=None, mc=None) -> Calculus:
    """The 4D bicovariant calculus with forms w1, w2, wp, wm (degree <= 1 unless wedge data given)."""
    key = ("4d", field)
    if wedge_rules is None and key in _CACHE:
        return _CACHE[key]
    q = field.q
    qi = q ** -1
    X = build_sl2(field)
    W1, W2, WP, WM = 0, 1, 2, 3
    k1 = (q - qi - q ** -2) / (q + 1)
    d_gen = {
        A: [(k1, (A,), W1), (-q ** -2, (B,), WP), (qi / (q + 1), (A,), W2)],
        B: [(q / (q + 1), (B,), W1), (-q ** -2, (A,), WM), (-q ** -2 / (q + 1), (B,), W2)],
        C: [(k1, (C,), W1), (-q ** -2, (D,), WP), (qi / (q + 1), (C,), W2)],
        D: [(q / (q + 1), (D,), W1), (-q ** -2, (C,), WM), (-q ** -2 / (q + 1), (D,), W2)],
    }
    t = q - qi
    comm = {}
    for a, b in ((A, B), (C, D)):
        comm[(W2, a)] = [(q, (a,), W2), (-t, (b,), WP), (q * t ** 2, (a,), W1)]
        comm[(W2, b)] = [(qi, (b,), W2), (-t, (a,), WM)]
        comm[(WM, a)] = [(1, (a,), WM), (-(q ** 2 - 1), (b,), W1)]
        comm[(WM, b)] = [(1, (b,), WM)]
        comm[(WP, a)] = [(1, (a,), WP)]
        comm[(WP, b)] = [(1, (b,), WP), (-(q ** 2 - 1), (a,), W1)]
        comm[(W1, a)] = [(qi, (a,), W1)]
        comm[(W1, b)] = [(q, (b,), W1)]
    if wedge_rules is None:
        wedge = WedgeRules(4, {}, max_degree=1)
    else:
        wedge = WedgeRules(4, wedge_rules, max_degree=2)
    calc = Calculus("4D", X, ("omega1", "omega2", "omegap", "omegam"), ("w1", "w2", "wp", "wm"),
                    (0, 0, 2, -2), d_gen, comm, mc, wedge)
    if wedge_rules is None:
        _CACHE[key] = calc
    return calc


def build_H3(field: ScalarMode) -> Calculus:
    """Calculus on k[z, z^-1] with zeta = z^-1 dz and z dz = q^2 dz z."""
    return _build_H(field, "H3", field.q ** -2)


def build_H4(field: ScalarMode) -> Calculus:
    """Calculus on k[z, z^-1] with zeta = z^-1 dz and dz z^-1 = q^-1 z^-1 dz."""
    return _build_H(field, "H4", field.q)


def _build_H(field, name, lam):
    """zeta z = lam z zeta; then d(z^-1) = -lam^-1 z^-1 zeta."""
    key = (name, field)
    if key in _CACHE:
        return _CACHE[key]
    H = build_laurent(field)
    Z, ZI = 0, 1
    calc = Calculus(name, H, ("zeta",), ("zeta",), (0,),
                    d_gen={Z: [(1, (Z,), 0)], ZI: [(-lam ** -1, (ZI,), 0)]},
                    comm={(0, Z): [(lam, (Z,), 0)], (0, ZI): [(lam ** -1, (ZI,), 0)]},
                    mc={0: []},
                    wedge=WedgeRules(1, {(0, 0): []}, max_degree=2))
    _CACHE[key] = calc
    return calc


# ---------------------------------------------------------------------------
# declarative serialization
# ---------------------------------------------------------------------------

def dump_calculus(calc: Calculus) -> str:
    """Canonical JSON text of the presentation with element strings."""
    alg = calc.algebra

    def el(terms):
        return str(calc.from_raw([(c, w, f) for c, w, f in terms]))

    out = {
        "schema": "qserre.calculus/1",
        "name": calc.name,
        "algebra": alg.name,
        "generators": list(alg.aliases),
        "symbols": list(calc.aliases),
        "symbol_zdeg": list(calc.symbol_zdeg),
        "d": {alg.aliases[g]: el([(c, w, (s,)) for c, w, s in v]) for g, v in sorted(calc.d_gen.items())},
        "commutation": {f"{calc.aliases[s]}*{alg.aliases[g]}": el([(c, w, (s2,)) for c, w, s2 in v])
                        for (s, g), v in sorted(calc.comm.items())},
        "maurer_cartan": None if calc.mc is None else
        {calc.aliases[s]: el([(c, w, p) for c, w, p in v]) for s, v in sorted(calc.mc.items())},
        "wedge": {f"{calc.aliases[i]}^{calc.aliases[j]}":
                  " + ".join(f"({c})*{calc.aliases[p[0]]}^{calc.aliases[p[1]]}" for c, p in v) or "0"
                  for (i, j), v in sorted(calc.wedge.rules.items())},
        "max_degree": calc.max_degree,
    }
    return json.dumps(out, indent=2, sort_keys=True)


def load_calculus(text: str, field: ScalarMode) -> dict:
    """Parse a dumped presentation back into element tables over ``field``.

    Returns a dict with the parsed d, commutation and Maurer-Cartan forms so
    that they can be compared against a built calculus.
    """
    data = json.loads(text)
    builders = {"3D": build_3d, "4D": build_4d, "H3": build_H3, "H4": build_H4}
    calc = builders[data["name"]](field)
    parsed = {
        "d": {g: calc.parse(s) for g, s in data["d"].items()},
        "commutation": {k: calc.parse(s) for k, s in data["commutation"].items()},
    }
    if data["maurer_cartan"] is not None:
        parsed["maurer_cartan"] = {k: _parse_2form(calc, s) for k, s in data["maurer_cartan"].items()}
    return {"calculus": calc, "data": data, "parsed": parsed}


def _parse_2form(calc, text):
    atoms = {a: calc.gen(a) for a in calc.algebra.aliases}
    atoms.update({a: calc.sym(i) for i, a in enumerate(calc.aliases)})
    return parse_expression(text.replace("^w", "*w").replace("^zeta", "*zeta"), calc.field, atoms, calc.one())


def calculus_matches(calc: Calculus, loaded: dict) -> Report:
    """Round-trip comparison of a loaded presentation with the built one."""
    rep = Report(f"golden:{calc.name}", scalar_mode=calc.field.name)
    alg = calc.algebra
    P = loaded["parsed"]
    for g, v in calc.d_gen.items():
        rep.expect(P["d"][alg.aliases[g]] == calc.d_letter(g), f"d{alg.aliases[g]} round-trips")
    for (s, g), v in calc.comm.items():
        got = P["commutation"][f"{calc.aliases[s]}*{alg.aliases[g]}"]
        rep.expect(got == calc.sym(s) * calc.gen(g), f"{calc.aliases[s]}{alg.aliases[g]} round-trips")
    if calc.mc is not None:
        for s in calc.mc:
            rep.expect(P["maurer_cartan"][calc.aliases[s]] == calc.d_symbol(s),
                       f"d{calc.aliases[s]} round-trips")
    return rep
