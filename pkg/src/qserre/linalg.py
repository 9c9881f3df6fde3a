"""Exact sparse linear algebra over any field of Python scalars.

Vectors are dicts ``{key: coefficient}`` with comparable keys.  An
:class:`Echelon` keeps rows in fully reduced echelon form (each pivot column is
zero in every other row), optionally tracking each row as a combination of
tagged input vectors so that kernels, solutions and quotient coordinates come
for free.
"""

from __future__ import annotations

from fractions import Fraction

from .ncpoly import _acc


def _inv(x):
    if isinstance(x, int):
        return x if x in (1, -1) else Fraction(1, x)
    return 1 / x


def axpy(out: dict, a, v: dict):
    """out += a * v (in place)."""
    for k, c in v.items():
        _acc(out, k, a * c)


def scale(v: dict, a) -> dict:
    return {k: a * c for k, c in v.items() if a * c}


def sub(u: dict, v: dict) -> dict:
    out = dict(u)
    axpy(out, -1, v)
    return out


class Echelon:
    """Incrementally built row space in reduced echelon form."""

    def __init__(self, order=None):
        self.order = order or (lambda k: k)
        self.rows: dict = {}      # pivot -> (row, combo)
        self._col: dict = {}      # column -> set of pivots whose row is nonzero there

    def __len__(self):
        return len(self.rows)

    @property
    def dim(self):
        return len(self.rows)

    def reduce(self, v: dict, combo: dict | None = None):
        """Remainder of v modulo the row space; combo tracks -(coefficients)."""
        r = dict(v)
        comb = dict(combo) if combo is not None else None
        for p in [k for k in v if k in self.rows]:
            f = r.get(p)
            if not f:
                continue
            row, rc = self.rows[p]
            axpy(r, -f, row)
            if comb is not None:
                axpy(comb, -f, rc)
        return r, comb

    def contains(self, v: dict) -> bool:
        return not self.reduce(v)[0]

    def add(self, v: dict, combo: dict | None = None):
        """Insert v; returns (pivot, None) or (None, dependency combo)."""
        r, comb = self.reduce(v, combo if combo is not None else {})
        if not r:
            return None, comb
        p = min(r, key=self.order)
        inv = _inv(r[p])
        r = {k: c * inv for k, c in r.items()}
        comb = {k: c * inv for k, c in comb.items()}
        for q in list(self._col.get(p, ())):
            row, rc = self.rows[q]
            f = row.get(p)
            if not f:
                continue
            for k in row:
                self._col.get(k, set()).discard(q)
            axpy(row, -f, r)
            axpy(rc, -f, comb)
            for k in row:
                self._col.setdefault(k, set()).add(q)
        self.rows[p] = (r, comb)
        for k in r:
            self._col.setdefault(k, set()).add(p)
        return p, None

    def basis(self) -> list:
        return [self.rows[p][0] for p in sorted(self.rows, key=self.order)]

    def combos(self) -> list:
        return [self.rows[p][1] for p in sorted(self.rows, key=self.order)]


def span(vectors, order=None) -> Echelon:
    e = Echelon(order)
    for v in vectors:
        e.add(v)
    return e


def rank(vectors, order=None) -> int:
    return span(vectors, order).dim


def kernel(images: list, order=None) -> list:
    """Kernel of the map e_j -> images[j], as dicts {j: c}."""
    e = Echelon(order)
    out = []
    for j, img in enumerate(images):
        p, dep = e.add(img, {j: 1})
        if p is None:
            out.append(dep)
    return out


def image_and_kernel(images: list, order=None):
    e = Echelon(order)
    ker = []
    for j, img in enumerate(images):
        p, dep = e.add(img, {j: 1})
        if p is None:
            ker.append(dep)
    return e, ker


def solve(vectors: list, target: dict, order=None):
    """Coefficients x with sum x_j vectors[j] = target, or None."""
    e = Echelon(order)
    for j, v in enumerate(vectors):
        e.add(v, {j: 1})
    r, comb = e.reduce(target, {})
    if r:
        return None
    return {j: -c for j, c in comb.items() if c}


def combine(vectors: list, coeffs: dict) -> dict:
    out: dict = {}
    for j, c in coeffs.items():
        axpy(out, c, vectors[j])
    return out


def intersection(U: list, W: list, order=None) -> list:
    """Basis of span(U) ∩ span(W)."""
    imgs = list(U) + [scale(w, -1) for w in W]
    out = Echelon(order)
    for kv in kernel(imgs, order):
        v = combine(U, {j: c for j, c in kv.items() if j < len(U)})
        if v:
            out.add(v)
    return out.basis()


def restrict_to(vectors: list, keep, order=None) -> list:
    """Basis of span(vectors) ∩ {v : every key k of v satisfies keep(k)}."""
    big = lambda k: (0 if not keep(k) else 1, order(k) if order else k)
    e = Echelon(big)
    for v in vectors:
        e.add(v)
    return [row for p, (row, _) in e.rows.items() if keep(p) and all(keep(k) for k in row)]


class Quotient:
    """span(numerator) / span(denominator) with lifts and coordinates.

    The denominator is assumed to lie in the numerator's span when
    ``check=True`` (verified).
    """

    def __init__(self, numerator: list, denominator: list, order=None, check=True):
        self.ech = Echelon(order)
        for i, v in enumerate(denominator):
            self.ech.add(v, {("den", i): 1})
        self.den_dim = self.ech.dim
        self.lifts = []
        for v in numerator:
            p, _ = self.ech.add(v, {("num", len(self.lifts)): 1})
            if p is not None:
                self.lifts.append(v)
        if check:
            num = span(numerator, order)
            for v in denominator:
                if not num.contains(v):
                    raise ValueError("denominator not contained in numerator")

    @property
    def dim(self):
        return len(self.lifts)

    def coords(self, v: dict):
        """Coordinates of the class of v in the lift basis, or None if v is outside."""
        r, comb = self.ech.reduce(v, {})
        if r:
            return None
        return {k[1]: -c for k, c in comb.items() if k[0] == "num" and c}

    def is_zero(self, v: dict) -> bool:
        c = self.coords(v)
        return c is not None and not c
