"""Presented noncommutative algebras, PBW normal forms and Hopf structure maps.

Two algebra kinds share one interface:

* :class:`RewritingAlgebra` -- generators plus two-letter rewrite rules
  (inversions and straightening words).  Used for A(SL_q(2)).
* :class:`LaurentAlgebra` -- k[z, z^-1] with normal words ``(n,)`` standing
  for z^n.

A *word* is a hashable tuple.  ``letters(word)`` returns generator indices
whose product is the word; the differential calculus walks these letters.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from .qfield import ScalarMode


class AlgebraMismatch(ValueError):
    pass


class MissingHopfData(ValueError):
    pass


# ---------------------------------------------------------------------------
# elements
# ---------------------------------------------------------------------------

def _acc(out: dict, key, c):
    v = out.get(key)
    v = c if v is None else v + c
    if v:
        out[key] = v
    else:
        out.pop(key, None)


class NcElement:
    """Linear combination of normal words with scalar coefficients."""

    __slots__ = ("algebra", "terms")

    def __init__(self, algebra, terms=None):
        self.algebra = algebra
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    def _check(self, other):
        if not isinstance(other, NcElement):
            return False
        if other.algebra is not self.algebra:
            raise AlgebraMismatch(f"{self.algebra.name} vs {other.algebra.name}")
        return True

    def __add__(self, other):
        if not isinstance(other, NcElement):
            other = self.algebra.scalar(other)
        self._check(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            _acc(out, w, c)
        return NcElement(self.algebra, out)

    __radd__ = __add__

    def __neg__(self):
        return NcElement(self.algebra, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, NcElement):
            return NcElement(self.algebra, {w: c * other for w, c in self.terms.items()})
        self._check(other)
        A = self.algebra
        out: dict = {}
        for u, a in self.terms.items():
            for v, b in other.terms.items():
                for w, c in A.mul_words(u, v).items():
                    _acc(out, w, a * b * c)
        return NcElement(A, out)

    def __rmul__(self, other):
        return NcElement(self.algebra, {w: other * c for w, c in self.terms.items()})

    def __pow__(self, n: int):
        if n < 0:
            return self.algebra.inverse_monomial(self) ** -n
        out = self.algebra.one()
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, NcElement):
            other = self.algebra.scalar(other)
        return self.algebra is other.algebra and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def __str__(self):
        return self.algebra.render(self.terms)

    __repr__ = __str__


class TensorElement:
    """Element of a tensor product of algebras; keys are tuples of normal words."""

    __slots__ = ("algebras", "terms")

    def __init__(self, algebras, terms=None):
        self.algebras = tuple(algebras)
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    def __add__(self, other):
        out = dict(self.terms)
        for k, c in other.terms.items():
            _acc(out, k, c)
        return TensorElement(self.algebras, out)

    def __neg__(self):
        return TensorElement(self.algebras, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, TensorElement):
            return TensorElement(self.algebras, {k: c * other for k, c in self.terms.items()})
        out: dict = {}
        for u, a in self.terms.items():
            for v, b in other.terms.items():
                parts = [alg.mul_words(x, y) for alg, x, y in zip(self.algebras, u, v)]
                for combo in itertools.product(*(p.items() for p in parts)):
                    c = a * b
                    for _, cc in combo:
                        c = c * cc
                    _acc(out, tuple(w for w, _ in combo), c)
        return TensorElement(self.algebras, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return self.algebras == other.algebras and self.terms == other.terms

    def is_zero(self) -> bool:
        return not self.terms

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for k, c in sorted(self.terms.items(), key=lambda kv: [a.word_key(w) for a, w in zip(self.algebras, kv[0])]):
            legs = " (x) ".join(a.render_word(w) for a, w in zip(self.algebras, k))
            parts.append(f"({c})*[{legs}]")
        return " + ".join(parts)

    __repr__ = __str__


def tensor(*elements) -> TensorElement:
    """Tensor product of algebra elements."""
    out: dict = {}
    for combo in itertools.product(*(e.terms.items() for e in elements)):
        c = combo[0][1]
        for _, cc in combo[1:]:
            c = c * cc
        _acc(out, tuple(w for w, _ in combo), c)
    return TensorElement([e.algebra for e in elements], out)


# ---------------------------------------------------------------------------
# algebras
# ---------------------------------------------------------------------------

@dataclass
class HopfData:
    """Hopf structure on generators: coproduct terms, counit, antipode and its inverse.

    ``coproduct[g]`` is a list of ``(coefficient, left free word, right free word)``;
    ``antipode[g]`` and ``antipode_inv[g]`` are lists of ``(coefficient, free word)``.
    """

    coproduct: dict
    counit: dict
    antipode: dict
    antipode_inv: dict


class Algebra:
    """Shared interface for presented algebras over a :class:`ScalarMode`."""

    name: str
    field: ScalarMode
    generators: tuple
    aliases: tuple
    zgrading: tuple
    hopf: HopfData | None

    def __init__(self):
        self._cop_cache: dict = {}
        self._s_cache: dict = {}
        self._sinv_cache: dict = {}
        self._eps_cache: dict = {}

    # -- elements ----------------------------------------------------------
    def element(self, terms) -> NcElement:
        return NcElement(self, terms)

    def one(self) -> NcElement:
        return NcElement(self, {self.one_word: self.field.one})

    def scalar(self, c) -> NcElement:
        return NcElement(self, {self.one_word: self.field.one * c})

    def gen(self, name) -> NcElement:
        return NcElement(self, {self.gen_word(self.index(name)): self.field.one})

    def index(self, name) -> int:
        if isinstance(name, int):
            return name
        if name in self.generators:
            return self.generators.index(name)
        return self.aliases.index(name)

    def word(self, free_word) -> NcElement:
        """Normal form of a free word given as generator indices or names."""
        return self.normal_form(tuple(self.index(g) for g in free_word))

    def free_product(self, letters) -> dict:
        out = {self.one_word: self.field.one}
        for g in letters:
            nxt: dict = {}
            gw = self.gen_word(g)
            for w, c in out.items():
                for w2, c2 in self.mul_words(w, gw).items():
                    _acc(nxt, w2, c * c2)
            out = nxt
        return out

    def normal_form(self, free_word) -> NcElement:
        return NcElement(self, self.free_product(free_word))

    # -- gradings ----------------------------------------------------------
    def word_zdeg(self, word) -> int:
        return sum(self.zgrading[g] for g in self.letters(word))

    def word_length(self, word) -> int:
        return len(self.letters(word))

    def word_key(self, word):
        return (self.word_length(word), word)

    def zdegree(self, x: NcElement):
        degs = {self.word_zdeg(w) for w in x.terms}
        if not degs:
            return 0
        return degs.pop() if len(degs) == 1 else "mixed"

    # -- rendering ---------------------------------------------------------
    def render_word(self, word) -> str:
        ls = self.letters(word)
        if not ls:
            return "1"
        return "*".join(self.aliases[g] for g in ls)

    def render(self, terms) -> str:
        if not terms:
            return "0"
        parts = []
        for w in sorted(terms, key=self.word_key):
            c = terms[w]
            cs = str(c)
            ws = self.render_word(w)
            if ws == "1":
                parts.append(f"({cs})")
            elif cs == "1":
                parts.append(ws)
            elif cs == "-1":
                parts.append(f"-{ws}")
            else:
                parts.append(f"({cs})*{ws}")
        return " + ".join(parts)

    def parse(self, text: str) -> NcElement:
        """Parse ``a*d - q*b*c`` style expressions (generator aliases, q-scalars)."""
        return parse_expression(text, self.field, {a: self.gen(a) for a in self.aliases}, self.one())

    # -- Hopf structure ----------------------------------------------------
    def _need_hopf(self):
        if self.hopf is None:
            raise MissingHopfData(f"{self.name} has no Hopf data")

    def _gen_coproduct(self, g) -> TensorElement:
        out: dict = {}
        for c, u, v in self.hopf.coproduct[g]:
            for w1, c1 in self.free_product(u).items():
                for w2, c2 in self.free_product(v).items():
                    _acc(out, (w1, w2), self.field(c) * c1 * c2)
        return TensorElement((self, self), out)

    def coproduct_word(self, word) -> TensorElement:
        self._need_hopf()
        hit = self._cop_cache.get(word)
        if hit is None:
            ls = self.letters(word)
            if not ls:
                hit = TensorElement((self, self), {(self.one_word, self.one_word): self.field.one})
            elif len(ls) == 1:
                hit = self._gen_coproduct(ls[0])
            else:
                hit = self.coproduct_free(ls)
            self._cop_cache[word] = hit
        return hit

    def coproduct_free(self, letters) -> TensorElement:
        out = TensorElement((self, self), {(self.one_word, self.one_word): self.field.one})
        for g in letters:
            out = out * self._gen_coproduct(g)
        return out

    def coproduct(self, x: NcElement) -> TensorElement:
        out = TensorElement((self, self), {})
        for w, c in x.terms.items():
            out = out + self.coproduct_word(w) * c
        return out

    def counit_word(self, word):
        self._need_hopf()
        hit = self._eps_cache.get(word)
        if hit is None:
            hit = self.field.one
            for g in self.letters(word):
                hit = hit * self.field(self.hopf.counit[g])
            self._eps_cache[word] = hit
        return hit

    def counit_free(self, letters):
        out = self.field.one
        for g in letters:
            out = out * self.field(self.hopf.counit[g])
        return out

    def counit(self, x: NcElement):
        out = self.field.zero
        for w, c in x.terms.items():
            out = out + c * self.counit_word(w)
        return out

    def _gen_image(self, table, g) -> NcElement:
        out: dict = {}
        for c, u in table[g]:
            for w, cc in self.free_product(u).items():
                _acc(out, w, self.field(c) * cc)
        return NcElement(self, out)

    def antipode_free(self, letters, inverse: bool = False) -> NcElement:
        table = self.hopf.antipode_inv if inverse else self.hopf.antipode
        out = self.one()
        for g in reversed(letters):
            out = out * self._gen_image(table, g)
        return out

    def antipode(self, x: NcElement, inverse: bool = False) -> NcElement:
        self._need_hopf()
        cache = self._sinv_cache if inverse else self._s_cache
        out = NcElement(self, {})
        for w, c in x.terms.items():
            hit = cache.get(w)
            if hit is None:
                hit = self.antipode_free(self.letters(w), inverse)
                cache[w] = hit
            out = out + hit * c
        return out

    def inverse_monomial(self, x: NcElement) -> NcElement:
        raise ValueError(f"{x} is not invertible in {self.name}")

    def word_element(self, word) -> NcElement:
        return NcElement(self, {word: self.field.one})


class RewritingAlgebra(Algebra):
    """Algebra given by generators and two-letter rewrite rules.

    ``rules`` maps an ordered pair of generator indices to a list of
    ``(coefficient, free word)`` giving its replacement.  A pair is either an
    inversion ``(j, i)`` with ``j > i`` or a designated straightening word.
    """

    def __init__(self, name, field, generators, aliases, rules, zgrading, hopf=None,
                 straightening=(), sandwich=None):
        super().__init__()
        self.name = name
        self.field = field
        self.generators = tuple(generators)
        self.aliases = tuple(aliases)
        self.zgrading = tuple(zgrading)
        self.hopf = hopf
        self.straightening = tuple(straightening)
        self.rules = {k: [(field(c), tuple(w)) for c, w in v] for k, v in rules.items()}
        # (left, right, {middle letter: scalar picked up moving left past it}):
        # left u right -> (prod of scalars) u (left right), for u over the middle letters
        self.sandwich = None
        if sandwich is not None:
            left, right, middle = sandwich
            self.sandwich = (left, right, {g: field(c) for g, c in middle.items()})
        self.one_word = ()
        self._nf_cache: dict = {}
        self._mul_cache: dict = {}

    def gen_word(self, i):
        return (i,)

    def letters(self, word):
        return word

    def word_length(self, word):
        return len(word)

    def relations(self):
        """Relations ``lhs - rhs`` as (free word, list of (coefficient, free word))."""
        return [(lhs, rhs) for lhs, rhs in self.rules.items()]

    def is_normal(self, word) -> bool:
        return self._redex(word) is None

    def _sandwich_end(self, word, i):
        if self.sandwich is None:
            return None
        left, right, middle = self.sandwich
        if word[i] != left:
            return None
        for j in range(i + 1, len(word)):
            if word[j] == right:
                return j
            if word[j] not in middle:
                return None
        return None

    def _is_redex(self, word, i):
        if i + 1 < len(word) and (word[i], word[i + 1]) in self.rules:
            return True
        return self._sandwich_end(word, i) is not None

    def _redex(self, word, rightmost=False):
        rng = range(len(word) - 1, -1, -1) if rightmost else range(len(word))
        for i in rng:
            if self._is_redex(word, i):
                return i
        return None

    def rewrite_at(self, word, i) -> dict:
        """One rewriting step at position ``i``, as a dict of free words."""
        out: dict = {}
        if i + 1 < len(word) and (word[i], word[i + 1]) in self.rules:
            for c, rhs in self.rules[(word[i], word[i + 1])]:
                _acc(out, word[:i] + rhs + word[i + 2:], c)
            return out
        j = self._sandwich_end(word, i)
        left, right, middle = self.sandwich
        u = word[i + 1:j]
        k = self.field.one
        for g in u:
            k = k * middle[g]
        for c, rhs in self.rules[(left, right)]:
            _acc(out, word[:i] + u + rhs + word[j + 1:], k * c)
        return out

    def reduce(self, word, rightmost=False, _cache=None) -> dict:
        """Normal form of a free word using a fixed redex strategy."""
        cache = self._nf_cache if not rightmost else _cache
        if cache is not None:
            hit = cache.get(word)
            if hit is not None:
                return hit
        i = self._redex(word, rightmost)
        if i is None:
            out = {word: self.field.one}
        else:
            out = {}
            for w, c in self.rewrite_at(word, i).items():
                for w2, c2 in self.reduce(w, rightmost, _cache).items():
                    _acc(out, w2, c * c2)
        if cache is not None:
            cache[word] = out
        return out

    def normal_form(self, free_word, rightmost=False) -> NcElement:
        free_word = tuple(self.index(g) for g in free_word)
        return NcElement(self, self.reduce(free_word, rightmost, {} if rightmost else None))

    def free_product(self, letters) -> dict:
        return self.reduce(tuple(letters))

    def mul_words(self, u, v) -> dict:
        key = (u, v)
        hit = self._mul_cache.get(key)
        if hit is None:
            hit = self.reduce(u + v)
            self._mul_cache[key] = hit
        return hit

    def normal_words(self, length):
        words = [()]
        for _ in range(length):
            words = [w + (g,) for w in words for g in range(len(self.generators))
                     if self.is_normal(w + (g,))]
        return words

    def enumerate_basis(self, maxdeg: int, zdeg=None) -> list:
        out = []
        for k in range(maxdeg + 1):
            out.extend(w for w in self.normal_words(k) if zdeg is None or self.word_zdeg(w) == zdeg)
        return out

    def redex_spans(self, word):
        out = []
        for i in range(len(word)):
            if i + 1 < len(word) and (word[i], word[i + 1]) in self.rules:
                out.append((i, i + 1))
            j = self._sandwich_end(word, i)
            if j is not None and j > i + 1:
                out.append((i, j))
        return out

    def overlaps(self, maxlen: int = 4):
        """Words of length <= maxlen carrying two redexes that share a letter."""
        out = []
        n = len(self.generators)
        for k in range(3, maxlen + 1):
            for w in itertools.product(range(n), repeat=k):
                spans = self.redex_spans(w)
                if any(a[0] < b[0] <= a[1] for a in spans for b in spans):
                    out.append(w)
        return out


class LaurentAlgebra(Algebra):
    """k[z, z^-1]; the normal word ``(n,)`` is z^n."""

    def __init__(self, name, field, hopf=None):
        super().__init__()
        self.name = name
        self.field = field
        self.generators = ("z", "zi")
        self.aliases = ("z", "zi")
        self.zgrading = (1, -1)
        self.hopf = hopf
        self.one_word = (0,)
        self.straightening = ()

    def gen_word(self, i):
        return (1,) if i == 0 else (-1,)

    def letters(self, word):
        n = word[0]
        return (0,) * n if n >= 0 else (1,) * (-n)

    def word_length(self, word):
        return abs(word[0])

    def word_zdeg(self, word):
        return word[0]

    def word_key(self, word):
        return word[0]

    def render_word(self, word):
        n = word[0]
        if n == 0:
            return "1"
        if n == 1:
            return "z"
        return f"z^{n}"

    def mul_words(self, u, v):
        return {(u[0] + v[0],): self.field.one}

    def free_product(self, letters) -> dict:
        n = sum(1 if g == 0 else -1 for g in (self.index(x) for x in letters))
        return {(n,): self.field.one}

    def inverse_monomial(self, x: NcElement) -> NcElement:
        if len(x.terms) != 1:
            raise ValueError(f"{x} is not a unit of {self.name}")
        (w, c), = x.terms.items()
        return self.element({(-w[0],): 1 / self.field(c)})

    def power(self, n) -> NcElement:
        return NcElement(self, {(n,): self.field.one})

    def relations(self):
        return [((0, 1), [(1, ())]), ((1, 0), [(1, ())])]

    def reduce(self, word, rightmost=False, _cache=None):
        return self.free_product(word)

    def normal_form(self, free_word, rightmost=False):
        return NcElement(self, self.free_product(free_word))

    def overlaps(self, maxlen: int = 3):
        return [(0, 1, 0), (1, 0, 1)]

    def redex_spans(self, word):
        return [(i, i + 1) for i in range(len(word) - 1) if {word[i], word[i + 1]} == {0, 1}]

    def rewrite_at(self, word, i):
        pair = (word[i], word[i + 1])
        if pair in ((0, 1), (1, 0)):
            return {word[:i] + word[i + 2:]: self.field.one}
        return {word: self.field.one}

    def enumerate_basis(self, maxdeg: int, zdeg=None) -> list:
        return [(n,) for n in range(-maxdeg, maxdeg + 1) if zdeg is None or n == zdeg]


# ---------------------------------------------------------------------------
# the built-in presentations
# ---------------------------------------------------------------------------

A, B, C, D = 0, 1, 2, 3

_SL2_CACHE: dict = {}
_H_CACHE: dict = {}


def build_sl2(field: ScalarMode, coproduct_override=None) -> RewritingAlgebra:
    """A(SL_q(2)) with generators alpha < beta < gamma < delta (aliases a, b, c, d)."""
    key = (field, coproduct_override is None)
    if coproduct_override is None and key in _SL2_CACHE:
        return _SL2_CACHE[key]
    q = field.q
    qi = q ** -1
    rules = {
        (B, A): [(qi, (A, B))],
        (C, A): [(qi, (A, C))],
        (C, B): [(1, (B, C))],
        (D, B): [(qi, (B, D))],
        (D, C): [(qi, (C, D))],
        (D, A): [(1, ()), (qi, (B, C))],
        (A, D): [(1, ()), (q, (B, C))],
    }
    cop = {
        A: [(1, (A,), (A,)), (1, (B,), (C,))],
        B: [(1, (A,), (B,)), (1, (B,), (D,))],
        C: [(1, (C,), (A,)), (1, (D,), (C,))],
        D: [(1, (D,), (D,)), (1, (C,), (B,))],
    }
    if coproduct_override:
        cop.update(coproduct_override)
    hopf = HopfData(
        coproduct=cop,
        counit={A: 1, B: 0, C: 0, D: 1},
        antipode={A: [(1, (D,))], B: [(-qi, (B,))], C: [(-q, (C,))], D: [(1, (A,))]},
        antipode_inv={A: [(1, (D,))], B: [(-q, (B,))], C: [(-qi, (C,))], D: [(1, (A,))]},
    )
    alg = RewritingAlgebra(
        "SLq2", field,
        generators=("alpha", "beta", "gamma", "delta"),
        aliases=("a", "b", "c", "d"),
        rules=rules,
        zgrading=(1, -1, 1, -1),
        hopf=hopf,
        straightening=((A, D),),
        sandwich=(A, D, {B: q, C: q}),
    )
    if coproduct_override is None:
        _SL2_CACHE[key] = alg
    return alg


def build_laurent(field: ScalarMode) -> LaurentAlgebra:
    """H = k[z, z^-1] with z grouplike."""
    if field in _H_CACHE:
        return _H_CACHE[field]
    hopf = HopfData(
        coproduct={0: [(1, (0,), (0,))], 1: [(1, (1,), (1,))]},
        counit={0: 1, 1: 1},
        antipode={0: [(1, (1,))], 1: [(1, (0,))]},
        antipode_inv={0: [(1, (1,))], 1: [(1, (0,))]},
    )
    alg = LaurentAlgebra("H", field, hopf)
    _H_CACHE[field] = alg
    return alg


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

@dataclass
class Report:
    """Verification report serializable to the JSON report schema."""

    check: str
    truncation: int | None = None
    scalar_mode: str = "symbolic"
    failures: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    checked: int = 0

    @property
    def status(self) -> str:
        return "PASS" if not self.failures else "FAIL"

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, what, witness=""):
        self.failures.append({"identity": what, "witness": str(witness)})

    def expect(self, cond, what, witness=""):
        self.checked += 1
        if not cond:
            self.fail(what, witness)
        return cond

    def to_json(self) -> dict:
        out = {"check": self.check, "status": self.status,
               "truncation": self.truncation, "scalar_mode": self.scalar_mode}
        if self.failures:
            out["witness"] = self.failures[0]
            out["failures"] = len(self.failures)
        if self.details:
            out["details"] = self.details
        out["checked"] = self.checked
        return out


def _rule_sides(alg, lhs, rhs):
    """Both sides of a relation as lists of (coefficient, free word)."""
    return [(alg.field.one, tuple(lhs))], [(c, tuple(w)) for c, w in rhs]


def _cop_of_free(alg, terms) -> TensorElement:
    out = TensorElement((alg, alg), {})
    for c, w in terms:
        out = out + alg.coproduct_free(w) * alg.field(c)
    return out


def _coassoc_sides(alg, x: TensorElement):
    """(Delta (x) id) and (id (x) Delta) applied to a tensor, as triple tensors."""
    left: dict = {}
    right: dict = {}
    for (u, v), c in x.terms.items():
        for (u1, u2), c1 in alg.coproduct_word(u).terms.items():
            _acc(left, (u1, u2, v), c * c1)
        for (v1, v2), c2 in alg.coproduct_word(v).terms.items():
            _acc(right, (u, v1, v2), c * c2)
    trip = (alg, alg, alg)
    return TensorElement(trip, left), TensorElement(trip, right)


def counit_sides(alg, x: TensorElement):
    """(eps (x) id) and (id (x) eps) applied to a tensor."""
    left: dict = {}
    right: dict = {}
    for (u, v), c in x.terms.items():
        _acc(left, v, c * alg.counit_word(u))
        _acc(right, u, c * alg.counit_word(v))
    return NcElement(alg, left), NcElement(alg, right)


def antipode_sides(alg, x: TensorElement):
    """m(S (x) id) and m(id (x) S) applied to a tensor."""
    left = NcElement(alg, {})
    right = NcElement(alg, {})
    for (u, v), c in x.terms.items():
        wu, wv = alg.word_element(u), alg.word_element(v)
        left = left + alg.antipode(wu) * wv * c
        right = right + wu * alg.antipode(wv) * c
    return left, right


def hopf_identities(alg, word, report: Report, label=None):
    """Coassociativity, counit and antipode laws on a normal word."""
    label = label or alg.render_word(word)
    x = alg.word_element(word)
    cop = alg.coproduct_word(word)
    l, r = _coassoc_sides(alg, cop)
    report.expect(l == r, f"coassociativity on {label}", l - r)
    el, er = counit_sides(alg, cop)
    report.expect(el == x and er == x, f"counit law on {label}", f"{el} | {er}")
    sl, sr = antipode_sides(alg, cop)
    e = alg.scalar(alg.counit_word(word))
    report.expect(sl == e and sr == e, f"antipode law on {label}", f"{sl} | {sr}")


def verify_presentation(alg: Algebra, confluence_length: int = 6) -> Report:
    """Hopf axioms on generators, relation preservation and confluence."""
    rep = Report(f"presentation:{alg.name}", scalar_mode=alg.field.name)
    if alg.hopf is not None:
        for g in range(len(alg.generators)):
            hopf_identities(alg, alg.gen_word(g), rep, alg.aliases[g])
            x = alg.gen(g)
            s = alg.antipode(x)
            rep.expect(alg.antipode(s, inverse=True) == x, f"S^-1 S = id on {alg.aliases[g]}", alg.antipode(s, True))
            si = alg.antipode(x, inverse=True)
            rep.expect(alg.antipode(si) == x, f"S S^-1 = id on {alg.aliases[g]}", alg.antipode(si))
        for lhs, rhs in alg.relations():
            lt, rt = _rule_sides(alg, lhs, rhs)
            name = "".join(alg.aliases[g] for g in lhs)
            d = _cop_of_free(alg, lt) - _cop_of_free(alg, rt)
            rep.expect(d.is_zero(), f"coproduct respects relation {name}", d)
            e = sum((alg.field(c) * alg.counit_free(w) for c, w in lt), alg.field.zero) - \
                sum((alg.field(c) * alg.counit_free(w) for c, w in rt), alg.field.zero)
            rep.expect(e == 0, f"counit respects relation {name}", e)
            for inv in (False, True):
                s = NcElement(alg, {})
                for c, w in lt:
                    s = s + alg.antipode_free(w, inv) * alg.field(c)
                for c, w in rt:
                    s = s - alg.antipode_free(w, inv) * alg.field(c)
                rep.expect(s.is_zero(), f"{'S^-1' if inv else 'S'} respects relation {name}", s)
    # local confluence on overlap ambiguities
    for w in alg.overlaps():
        results = []
        for i in sorted({sp[0] for sp in alg.redex_spans(w)}):
            a = NcElement(alg, {})
            for w2, c in alg.rewrite_at(w, i).items():
                a = a + alg.normal_form(w2) * c
            results.append(a)
        rep.expect(all(r == results[0] for r in results),
                   f"overlap {''.join(alg.aliases[g] for g in w)} resolves",
                   " | ".join(map(str, results)))
    # strategy independence on all short free words
    if isinstance(alg, RewritingAlgebra):
        n = len(alg.generators)
        cache: dict = {}
        for k in range(2, confluence_length + 1):
            for w in itertools.product(range(n), repeat=k):
                left = alg.reduce(w)
                right = alg.reduce(w, rightmost=True, _cache=cache)
                if not rep.expect(left == right, "confluence (leftmost vs rightmost)",
                                  "".join(alg.aliases[g] for g in w)):
                    break
    rep.details["overlaps"] = len(alg.overlaps())
    return rep


# ---------------------------------------------------------------------------
# expression parsing shared with the calculus layer
# ---------------------------------------------------------------------------

import re as _re

_EXPR_TOKEN = _re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\^)|([-+*/()]))")


def parse_expression(text: str, field: ScalarMode, atoms: dict, one):
    """Evaluate ``+ - *`` expressions over named atoms with q-scalar factors.

    Scalars may use ``/`` and ``^``; atoms multiply in the order written.
    """
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _EXPR_TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"cannot parse near {text[pos:]!r}")
        pos = m.end()
        tokens.append(next(g for g in m.groups() if g is not None))
    q = field.q

    def is_scalar(v):
        return not hasattr(v, "terms")

    def expr(i):
        v, i = term(i)
        while i < len(tokens) and tokens[i] in "+-":
            op = tokens[i]
            w, i = term(i + 1)
            v = _add(v, w if op == "+" else _neg(w))
        return v, i

    def _add(v, w):
        if is_scalar(v) and not is_scalar(w):
            return one * v + w
        if is_scalar(w) and not is_scalar(v):
            return v + one * w
        return v + w

    def _neg(w):
        return -w

    def term(i):
        v, i = unary(i)
        while i < len(tokens) and tokens[i] in "*/":
            op = tokens[i]
            w, i = unary(i + 1)
            if op == "*":
                v = v * w if not is_scalar(v) or is_scalar(w) else w.__rmul__(v)
            else:
                v = v * (w ** -1) if is_scalar(w) else None
                if v is None:
                    raise ValueError("division by a non-scalar")
        return v, i

    def unary(i):
        if tokens[i] == "-":
            v, i = unary(i + 1)
            return -v, i
        if tokens[i] == "+":
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
            return field.one * int(t), i + 1
        if t in atoms:
            return atoms[t], i + 1
        raise ValueError(f"unknown symbol {t!r}")

    v, i = expr(0)
    if i != len(tokens):
        raise ValueError(f"trailing input in {text!r}")
    if is_scalar(v):
        v = one * v
    return v
