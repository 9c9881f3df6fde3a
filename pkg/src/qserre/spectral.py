"""Fibration machinery for iota: B -> X.

Covers the complexes Xi_m^n, the comparison maps Theta_m, the filtration
spectral sequence, the induced connection on fibre cohomology and the product
data sigma-hat.

All linear algebra runs per Z-degree block at coefficient length <= N.  The
filtration F^m = iota_* Omega^m B ^ Omega X is aligned with the symbol basis
whenever the horizontal 1-forms are spanned by symbols (checked on
construction), so the "horizontal degree" of a basis key, meaning the number
of horizontal symbols in its form word, decides filtration membership.  That
identification is itself verified by :meth:`Fibration.filtration_check`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg
from .calculus import Calculus, FormElement, build_3d, build_H3
from .connection import (ConnectionData, GradedLinearMap, ProductStructure, complex_cohomology,
                         product_structure_check, twisted_cohomology)
from .homomorph import omega_B, pi_star, rho_star
from .ncpoly import Report, _acc
from .qfield import SYMBOLIC, ScalarMode, scalar_mode, specialized

DEFAULT_Q = Fraction(3, 2)


class FibrationError(ValueError):
    """Raised when fibration data fails a structural requirement."""


def _cmp(v: dict) -> dict:
    return {k: c for k, c in v.items() if c}


# ---------------------------------------------------------------------------
# Theta_m as a block-diagonal linear map
# ---------------------------------------------------------------------------

class ThetaMap:
    """Theta_m : Omega^m B (x)_B Xi_0^n -> Xi_m^n, one echelon per Z-degree block.

    Source coordinates are ``((y, kappa), f)``: the element ``y kappa`` of
    Omega^m B . X = K^m X (kappa a word in horizontal symbols) tensored with
    the free generator ``f`` of Xi_0^n.
    """

    def __init__(self, fib: "Fibration", m: int, n: int, N: int):
        self.fib, self.m, self.n, self.N = fib, m, n, N
        self._blocks: dict = {}

    def image(self, src_key) -> dict:
        (y, kappa), f = src_key
        X = self.fib.X
        return self.fib.proj(self.m, X.mul_keys((y, kappa), (X.algebra.one_word, f)))

    def apply(self, vec: dict) -> dict:
        out: dict = {}
        for k, c in vec.items():
            linalg.axpy(out, c, self.image(k))
        return out

    def block(self, z):
        hit = self._blocks.get(z)
        if hit is None:
            src = self.fib.source_keys(self.m, self.n, z, self.N)
            tgt = self.fib.xi_keys(self.m, self.n, z, self.N)
            ech = linalg.Echelon()
            for j, k in enumerate(src):
                ech.add(self.image(k), {j: 1})
            hit = (src, tgt, ech)
            self._blocks[z] = hit
        return hit

    def zdegrees(self):
        zs = set(self.fib.X.zdegrees(self.m + self.n, self.N)) if self.fib.X.form_basis(self.m + self.n) else set()
        return sorted(zs)

    def invertible(self, z) -> bool:
        src, tgt, ech = self.block(z)
        return len(src) == len(tgt) == ech.dim

    def solve(self, target: dict) -> dict:
        """Theta^{-1}(target); target must be a single Z-degree block."""
        target = _cmp(target)
        if not target:
            return {}
        X = self.fib.X
        zs = {X.key_zdeg(k) for k in target}
        lengths = max(X.key_length(k) for k in target)
        if len(zs) != 1:
            out: dict = {}
            for z in zs:
                part = {k: c for k, c in target.items() if X.key_zdeg(k) == z}
                linalg.axpy(out, 1, self.solve(part))
            return out
        if lengths > self.N:
            return self.fib.theta(self.m, self.n, lengths).solve(target)
        src, _, ech = self.block(zs.pop())
        r, comb = ech.reduce(target, {})
        if r:
            raise FibrationError(f"Theta_{self.m} not surjective at {X.render(r)}")
        return {src[j]: -c for j, c in comb.items() if c}

    def as_linear_map(self, z) -> GradedLinearMap:
        src, _, _ = self.block(z)
        return GradedLinearMap(src, [self.image(k) for k in src], f"Theta_{self.m}^{self.n}[z={z}]")


# ---------------------------------------------------------------------------
# result containers
# ---------------------------------------------------------------------------

@dataclass
class XiComponent:
    m: int
    n: int
    N: int
    blocks: dict                   # zdeg -> list of lift keys
    generators: list               # form words generating Xi_m^n freely over X
    quotients: dict = field(default_factory=dict)

    @property
    def dim(self):
        return sum(len(v) for v in self.blocks.values())

    def block_dims(self):
        return {z: len(v) for z, v in sorted(self.blocks.items())}


@dataclass
class FibreCohomology:
    n: int
    N: int
    dims: dict                     # zdeg -> dim H^n(Xi_0^*)
    generators: list               # generator keys over B
    connection: dict               # generator form word -> {generator form word: 1-form terms}
    report: Report


@dataclass
class SpectralPage:
    r: int
    dims: dict                     # (zdeg, p, q) -> dim
    bases: dict                    # (zdeg, p, q) -> lifts
    maps: dict                     # (zdeg, p, q) -> list of coordinate dicts of d_r(lift)

    def table(self, z=None):
        out: dict = {}
        for (zz, p, q), d in self.dims.items():
            if z is None or zz == z:
                out[(p, q)] = out.get((p, q), 0) + d
        return out

    def d_is_zero(self) -> bool:
        return all(not c for imgs in self.maps.values() for c in imgs)


# ---------------------------------------------------------------------------
# the fibration
# ---------------------------------------------------------------------------

class Fibration:
    """iota: B = X^coH -> X for the coaction induced by pi: X -> H."""

    def __init__(self, X: Calculus, Hc: Calculus, N: int = 3, frame_len: int = 2, pi_images=None):
        self.X, self.Hc, self.N = X, Hc, N
        self.field = X.field
        self.frame_len = frame_len
        self.pi = pi_star(X, Hc, pi_images)
        self.horizontal = self._horizontal_symbols()
        self.top = max(n for n in range(X.max_degree + 1) if X.form_basis(n))
        self.P = len(self.horizontal)
        self.one = X.algebra.one_word
        self._frames: dict = {}
        self._theta: dict = {}
        self._rho = None

    @property
    def rho(self):
        if self._rho is None:
            self._rho = rho_star(self.X, self.Hc)
        return self._rho

    # -- horizontal degree -----------------------------------------------------------
    def _horizontal_symbols(self):
        X = self.X
        hs, imgs = [], []
        for s in range(len(X.symbols)):
            img = self.pi(X.sym(s))
            if img.is_zero():
                hs.append(s)
            else:
                imgs.append(img.terms)
        if linalg.rank(imgs) != len(imgs):
            raise FibrationError(f"{X.name}: horizontal 1-forms are not spanned by symbols")
        return frozenset(hs)

    def hdeg_word(self, f) -> int:
        return sum(1 for s in f if s in self.horizontal)

    def hdeg(self, key) -> int:
        return self.hdeg_word(key[1])

    def kappas(self, m):
        return [f for f in self.X.form_basis(m) if self.hdeg_word(f) == m] if m <= self.top else []

    def verticals(self, n):
        return [f for f in self.X.form_basis(n) if self.hdeg_word(f) == 0] if n <= self.top else []

    def proj(self, m, vec: dict) -> dict:
        """[vec]_m for vec in F^m: the horizontal-degree-m part."""
        out = {}
        for k, c in vec.items():
            if not c:
                continue
            h = self.hdeg(k)
            if h < m:
                raise FibrationError(f"{self.X.render_key(k)} is not in F^{m}")
            if h == m:
                out[k] = c
        return out

    def d_vec(self, vec: dict) -> dict:
        out: dict = {}
        for k, c in vec.items():
            linalg.axpy(out, c, self.X.d_key(k))
        return _cmp(out)

    def d_xi(self, m, vec: dict) -> dict:
        return self.proj(m, self.d_vec(vec))

    # -- key sets ----------------------------------------------------------------------
    def filt_keys(self, k, p, z, N=None):
        if k < 0 or k > self.top:
            return []
        return [key for key in self.X.truncate_component(k, N or self.N, z) if self.hdeg(key) >= p]

    def xi_keys(self, m, n, z, N=None):
        if m + n > self.top or n < 0:
            return []
        return [key for key in self.X.truncate_component(m + n, N or self.N, z) if self.hdeg(key) == m]

    def source_keys(self, m, n, z, N=None):
        X = self.X
        out = []
        words = X.algebra.enumerate_basis(N or self.N)
        for kappa in self.kappas(m):
            for f in self.verticals(n):
                zf = X.key_zdeg((self.one, f))
                for y in words:
                    if X.key_zdeg((y, kappa)) + zf == z:
                        out.append(((y, kappa), f))
        return out

    def zdegrees(self, n, N=None):
        return self.X.zdegrees(n, N or self.N) if 0 <= n <= self.top else []

    # -- frames: kappa = sum omega_i x_i with omega_i in Omega^m B ---------------------
    def frame(self, kappa) -> list:
        hit = self._frames.get(kappa)
        if hit is not None:
            return hit
        X = self.X
        F = self.field
        m = len(kappa)
        if m == 0:
            hit = [({(self.one, ()): F.one}, self.one)]
        else:
            zk = X.key_zdeg((self.one, kappa))
            cands = omega_B(X, m, self.frame_len)
            words = [w for w in X.algebra.enumerate_basis(self.frame_len) if X.algebra.word_zdeg(w) == zk]
            prods, labels = [], []
            for om in cands:
                fo = FormElement(X, om)
                for w in words:
                    prods.append((fo * X.basis_element((w, ()))).terms)
                    labels.append((om, w))
            sol = linalg.solve(prods, {(self.one, kappa): F.one})
            if sol is None:
                raise FibrationError(f"{X.render_key((self.one, kappa))} not in Omega^{m}B . X at length {self.frame_len}")
            hit = [(linalg.scale(labels[j][0], c), labels[j][1]) for j, c in sorted(sol.items())]
        self._frames[kappa] = hit
        return hit

    def to_source(self, omega: dict, xi0: dict) -> dict:
        """Coordinates of omega (x)_B [xi]_0 via Omega^m B (x)_B X = K^m X."""
        X = self.X
        fo = FormElement(X, omega)
        out: dict = {}
        for (y, f), c in xi0.items():
            for k, cp in (fo * X.basis_element((y, ()))).terms.items():
                _acc(out, (k, f), c * cp)
        return out

    def _as_frame_sum(self, y, kappa):
        """y kappa = sum_i c_i omega_i x_i y  (returns [(c, omega_i, x_i y word element)])."""
        X = self.X
        kc = X.mul_keys((self.one, kappa), (y, ()))
        if set(kc) != {(y, kappa)}:
            raise FibrationError("symbols do not commute diagonally with coefficient words")
        inv = linalg._inv(kc[(y, kappa)])
        alg = X.algebra
        return [(inv, om, alg.mul_words(x, y)) for om, x in self.frame(kappa)]

    def source_d(self, m, vec: dict) -> dict:
        """(-1)^m id (x) d on Omega^m B (x)_B Xi_0^*, in source coordinates."""
        X = self.X
        sign = -1 if m % 2 else 1
        out: dict = {}
        for ((y, kappa), f), c in vec.items():
            for inv, om, xy in self._as_frame_sum(y, kappa):
                xi = {}
                for w, cw in xy.items():
                    for k, ck in X.mul_keys((w, ()), (self.one, f)).items():
                        _acc(xi, k, cw * ck)
                dxi = self.proj(0, self.d_vec(xi))
                linalg.axpy(out, sign * c * inv, self.to_source(om, dxi))
        return _cmp(out)

    def source_roundtrip(self, src_key) -> dict:
        """Rebuild a source coordinate from its frame decomposition (should be the identity)."""
        X = self.X
        (y, kappa), f = src_key
        out: dict = {}
        for inv, om, xy in self._as_frame_sum(y, kappa):
            xi = {}
            for w, cw in xy.items():
                for k, ck in X.mul_keys((w, ()), (self.one, f)).items():
                    _acc(xi, k, cw * ck)
            linalg.axpy(out, inv, self.to_source(om, self.proj(0, xi)))
        return _cmp(out)

    # -- Theta ---------------------------------------------------------------------------
    def theta(self, m, n, N=None) -> ThetaMap:
        key = (m, n, N or self.N)
        hit = self._theta.get(key)
        if hit is None:
            hit = ThetaMap(self, m, n, N or self.N)
            self._theta[key] = hit
        return hit

    def to_H(self, src: dict) -> dict:
        """(id (x) [ ]) on Z-degree-0 source coordinates: {generator form word: Omega^p B terms}."""
        X = self.X
        out: dict = {}
        for ((y, kappa), f), c in src.items():
            if not c:
                continue
            if X.key_zdeg((y, kappa)) != 0:
                raise FibrationError("source coordinate outside Omega^p B (x) generators")
            _acc(out.setdefault(f, {}), (y, kappa), c)
        return {f: _cmp(v) for f, v in out.items() if _cmp(v)}

    # =====================================================================================
    # checks
    # =====================================================================================
    def structural_check(self) -> Report:
        """Commutation, wedge and Maurer-Cartan data respect horizontal degree."""
        X = self.X
        rep = Report("fibration:structure", scalar_mode=self.field.name)
        h = lambda s: 1 if s in self.horizontal else 0
        for (s, g), terms in X.comm.items():
            for c, w, s2 in terms:
                rep.expect(h(s2) == h(s), f"commutation {X.aliases[s]} past letter {g} keeps horizontal degree",
                           X.aliases[s2])
        for pair, terms in X.wedge.rules.items():
            for c, p in terms:
                rep.expect(self.hdeg_word(p) == self.hdeg_word(pair), f"wedge rule {pair} keeps horizontal degree", p)
        if X.mc is not None:
            for s, terms in X.mc.items():
                for c, w, p in terms:
                    rep.expect(self.hdeg_word(p) >= h(s), f"d{X.aliases[s]} does not lower horizontal degree", p)
        rep.details["horizontal"] = [X.aliases[s] for s in sorted(self.horizontal)]
        return rep

    def density_check(self, maxlen: int = 1) -> Report:
        """Every symbol lies in X.dX (x words of length <= maxlen, d of generators)."""
        X = self.X
        alg = X.algebra
        rep = Report("fibration:density", scalar_mode=self.field.name)
        words = alg.enumerate_basis(maxlen)
        vecs = []
        for g in range(len(alg.aliases)):
            dg = X.d_letter(g)
            for w in words:
                vecs.append((X.basis_element((w, ())) * dg).terms)
        for s in range(len(X.symbols)):
            rep.expect(linalg.solve(vecs, X.sym(s).terms) is not None, f"{X.aliases[s]} in X.dX")
        return rep

    def filtration_check(self, N=None) -> Report:
        """Conditions (1)-(3) on the truncated complex and F^m = coordinate span.

        The coordinate description is confirmed by exhibiting every horizontal
        symbol word kappa inside Omega^m B . X (a frame); together with the
        structural check this gives F^m Omega^k = span{keys of horizontal
        degree >= m}.
        """
        N = N or self.N
        X = self.X
        rep = Report("fibration:filtration", truncation=N, scalar_mode=self.field.name)
        for sub in (self.structural_check(), self.density_check()):
            rep.failures.extend(sub.failures)
            rep.checked += sub.checked
        frames = {}
        for m in range(1, self.P + 1):
            for kappa in self.kappas(m):
                try:
                    fr = self.frame(kappa)
                    total: dict = {}
                    for om, x in fr:
                        linalg.axpy(total, 1, (FormElement(X, om) * X.basis_element((x, ()))).terms)
                    ok = _cmp(total) == {(self.one, kappa): self.field.one}
                    rep.expect(ok, f"frame reproduces {X.render_key((self.one, kappa))}", X.render(total))
                    frames[X.render_key((self.one, kappa))] = len(fr)
                except FibrationError as exc:
                    rep.fail(f"frame for {kappa}", exc)
        rep.details["frame_sizes"] = frames
        for k in range(self.top + 1):
            for key in X.truncate_component(k, N):
                rep.expect(self.hdeg(key) <= k, "F^m C^k = 0 for m > k")
                img = X.d_key(key)
                bad = [k2 for k2, c in img.items() if c and self.hdeg(k2) < self.hdeg(key)]
                rep.expect(not bad, f"d preserves the filtration at {X.render_key(key)}",
                           [X.render_key(b) for b in bad])
                rep.expect(all(X.key_length(k2) <= N for k2 in img), "d preserves the truncation")
        return rep

    # -- Xi ------------------------------------------------------------------------------
    def xi_component(self, m, n, N=None) -> XiComponent:
        N = N or self.N
        X = self.X
        blocks, quots = {}, {}
        for z in self.zdegrees(m + n, N):
            num = [{k: 1} for k in self.filt_keys(m + n, m, z, N)]
            den = [{k: 1} for k in self.filt_keys(m + n, m + 1, z, N)]
            order = lambda k: (-self.hdeg(k), X.sort_key(k))
            q = linalg.Quotient(num, den, order=order)
            lifts = [next(iter(v)) for v in q.lifts]
            if lifts:
                blocks[z] = lifts
                quots[z] = q
        gens = sorted({k[1] for ks in blocks.values() for k in ks})
        return XiComponent(m, n, N, blocks, gens, quots)

    def xi_table(self, N=None, mmax=None, nmax=None) -> dict:
        """(m, n) -> (generator words, block dims, free-over-X flag)."""
        N = N or self.N
        X = self.X
        words = X.algebra.enumerate_basis(N)
        out = {}
        for m in range((mmax if mmax is not None else self.P + 1) + 1):
            for n in range((nmax if nmax is not None else 2) + 1):
                xi = self.xi_component(m, n, N)
                counts: dict = {}
                for f in xi.generators:
                    zf = X.key_zdeg((self.one, f))
                    for y in words:
                        _acc(counts, X.algebra.word_zdeg(y) + zf, 1)
                free = {z: d for z, d in counts.items() if d} == xi.block_dims()
                out[(m, n)] = {"generators": [self.render_form_word(f) for f in xi.generators],
                               "dims": xi.block_dims(), "free": free}
        return out

    def render_form_word(self, f):
        return "^".join(self.X.aliases[s] for s in f) if f else "1"

    # -- Theta checks ----------------------------------------------------------------
    def fibration_test(self, N=None, cochain=True) -> Report:
        N = N or self.N
        X = self.X
        rep = Report("fibration:theta", truncation=N, scalar_mode=self.field.name)
        sizes = {}
        for m in range(self.P + 1):
            for n in range(self.top - m + 1):
                th = self.theta(m, n, N)
                for z in self.zdegrees(m + n, N):
                    src, tgt, ech = th.block(z)
                    if not src and not tgt:
                        continue
                    sizes[f"{m},{n},{z}"] = len(src)
                    rep.expect(len(src) == len(tgt), f"dim(Omega^{m}B (x)_B Xi_0^{n}) = dim Xi_{m}^{n} [z={z}]",
                               (len(src), len(tgt)))
                    rep.expect(th.invertible(z), f"Theta_{m}^{n} invertible [z={z}]", (len(src), ech.dim))
                    if m == 0:
                        ident = all(th.image(k) == {(k[0][0], k[1]): self.field.one} for k in src)
                        rep.expect(ident, f"Theta_0^{n} is the identity [z={z}]")
                    if cochain and n + 1 <= self.top - m:
                        for k in src:
                            lhs = th.apply(self.source_d(m, {k: self.field.one}))
                            rhs = self.d_xi(m, th.image(k))
                            if not rep.expect(_cmp(lhs) == _cmp(rhs), f"Theta_{m} is a cochain map [z={z}]",
                                              f"{X.render(lhs)} vs {X.render(rhs)}"):
                                break
                    if m > 0:
                        for k in src[:8]:
                            rep.expect(self.source_roundtrip(k) == {k: self.field.one},
                                       f"K^{m}X correspondence round trip [z={z}]", k)
        for m in range(self.P + 1, self.P + 2):
            rep.expect(not self.kappas(m) and not self.xi_component(m, 0, N).blocks,
                       f"Xi_{m}^* = 0 beyond the horizontal rank")
        rep.details["block_sizes"] = sizes
        return rep

    # -- Lemma --------------------------------------------------------------------------
    def lemma_check(self, N: int = 4, base: str = "q^-2") -> Report:
        """d x = [deg x; q^-2] x w1 in Xi_0^1 for every PBW word (single vertical symbol)."""
        X = self.X
        F = self.field
        rep = Report("fibration:lemma", truncation=N, scalar_mode=F.name)
        (v,) = self.verticals(1)
        for y in X.algebra.enumerate_basis(N):
            deg = X.algebra.word_zdeg(y)
            lhs = self.proj(0, X.d_word(y).terms)
            coef = F.q_integer(deg, base)
            rhs = {(y, v): coef} if coef else {}
            rep.expect(_cmp(lhs) == rhs, f"d {X.algebra.render_word(y)} = [{deg};{base}] x w", X.render(lhs))
        return rep

    # -- fibre cohomology -----------------------------------------------------------------
    def _xi_spaces(self, m, z, N, degs):
        return {k: [{key: self.field.one} for key in self.xi_keys(m, k, z, N)] for k in degs}

    def xi_cohomology(self, m, z, N=None, degrees=None) -> dict:
        N = N or self.N
        degs = list(degrees) if degrees is not None else list(range(self.top - m + 1))
        alld = sorted(set(degs) | {n - 1 for n in degs if n > 0})
        spaces = self._xi_spaces(m, z, N, alld)
        res = complex_cohomology(spaces, lambda v, n: self.d_xi(m, v), alld)
        return {n: res[n] for n in degs}

    def nabla_class(self, vec: dict, n: int) -> dict:
        """(id (x) [ ]) Theta_1^{-1} [d omega]_1 for a cocycle omega of Xi_0^n."""
        dv = self.d_vec(vec)
        if self.proj(0, dv):
            raise FibrationError("not a cocycle of Xi_0")
        return self.to_H(self.theta(1, n).solve(self.proj(1, dv)))

    def curvature_class(self, nab: dict, n: int) -> dict:
        """nabla^[1] applied to sum eta (x) g, computed as Theta_2^{-1}[d(eta ^ g)]_2."""
        X = self.X
        lift: dict = {}
        for f, eta in nab.items():
            for k, c in eta.items():
                for k2, c2 in X.mul_keys(k, (self.one, f)).items():
                    _acc(lift, k2, c * c2)
        dl = self.d_vec(lift)
        if self.P < 2:
            return {}
        return self.to_H(self.theta(2, n).solve(self.proj(2, dl)))

    def fibre_connection(self, n: int, N=None) -> FibreCohomology:
        N = N or self.N
        X = self.X
        F = self.field
        rep = Report(f"fibration:fibre-connection:{n}", truncation=N, scalar_mode=F.name)
        dims = {}
        for z in self.zdegrees(n, N):
            H = self.xi_cohomology(0, z, N, degrees=[n])[n]
            dims[z] = H.dim
        bwords = X.algebra.enumerate_basis(N, 0)
        gens = self.verticals(n)
        rep.expect(all(d == 0 for z, d in dims.items() if z != 0), f"H^{n}(Xi_0) vanishes off Z-degree 0", dims)
        rep.expect(dims.get(0, 0) == len(bwords) * len(gens), f"H^{n}(Xi_0) = B-span of generators",
                   (dims.get(0, 0), len(bwords) * len(gens)))
        if gens:
            H0 = self.xi_cohomology(0, 0, N, degrees=[n])[n]
            cls = [H0.coords({(b, f): F.one}) for f in gens for b in bwords]
            rep.expect(all(c is not None for c in cls), f"b.g are cocycles in Xi_0^{n}")
            if all(c is not None for c in cls):
                rep.expect(linalg.rank(cls) == H0.dim, f"b.g span H^{n}(Xi_0)")
        conn = {}
        for f in gens:
            nab = self.nabla_class({(self.one, f): F.one}, n)
            conn[f] = nab
        for f in gens:
            for b in bwords:
                nab = self.nabla_class({(b, f): F.one}, n)
                # Leibniz: nabla(b g) = db (x) g + b nabla g
                expect: dict = {}
                linalg.axpy(expect.setdefault(f, {}), 1, X.d_word(b).terms)
                for f2, eta in conn[f].items():
                    linalg.axpy(expect.setdefault(f2, {}), 1, (X.basis_element((b, ())) * FormElement(X, eta)).terms)
                expect = {k: _cmp(v) for k, v in expect.items() if _cmp(v)}
                rep.expect(nab == expect, f"nabla(b g) = db g + b nabla g for b={X.algebra.render_word(b)}",
                           nab)
                if self.P >= 2:
                    curv = self.curvature_class(nab, n)
                    rep.expect(not curv, f"curvature via Theta_2 vanishes on b={X.algebra.render_word(b)}", curv)
        if gens:
            A = [[FormElement(X, conn[fj].get(fi, {})) for fj in gens] for fi in gens]
            cd = ConnectionData(X, A, name=f"fibre{n}")
            if X.max_degree >= 2:
                rep.expect(cd.is_flat(), "connection matrix has zero curvature")
        return FibreCohomology(n, N, dims, [(self.one, f) for f in gens], conn, rep)

    def fibre_check(self, N=None) -> Report:
        N = N or self.N
        rep = Report("fibration:fibre-cohomology", truncation=N, scalar_mode=self.field.name)
        conns = {}
        for n in range(self.top + 1):
            fc = self.fibre_connection(n, N)
            rep.failures.extend(fc.report.failures)
            rep.checked += fc.report.checked
            rep.details[f"H{n}"] = fc.dims
            conns[n] = {self.render_form_word(f): {self.render_form_word(g): self.X.render(t) for g, t in v.items()}
                        for f, v in fc.connection.items()}
        rep.details["connection"] = conns
        return rep

    # -- spectral sequence ------------------------------------------------------------------
    def spectral(self, N=None) -> "SpectralSequence":
        return SpectralSequence(self, N or self.N)

    # -- braiding condition, sigma-hat, product structure -----------------------------------
    def braiding_condition_check(self, N=None, base_len: int = 2) -> Report:
        """Omega^n X ^ iota_* Omega^m B inside iota_* Omega^m B ^ Omega^n X (= F^m)."""
        N = N or self.N
        X = self.X
        rep = Report("fibration:braiding-condition", truncation=N, scalar_mode=self.field.name)
        for m in range(1, self.P + 1):
            base = omega_B(X, m, base_len)
            for n in range(0, self.top - m + 1):
                for key in X.truncate_component(n, N):
                    xi = X.basis_element(key)
                    for om in base:
                        prod = (xi * FormElement(X, om)).terms
                        bad = [k for k, c in prod.items() if c and self.hdeg(k) < m]
                        if not rep.expect(not bad, f"Omega^{n}X ^ Omega^{m}B in F^{m}",
                                          f"{X.render_key(key)} ^ {X.render(om)}"):
                            break
        return rep

    def sigma_hat(self, f, eta: FormElement) -> FormElement:
        """sigma-hat([g]_0 (x) eta) = eta' (x) [g]_0 for a generator g = 1.f; returns eta'."""
        X = self.X
        out: dict = {}
        n = len(f)
        by_deg: dict = {}
        for k, c in eta.terms.items():
            by_deg.setdefault(X.key_degree(k), {})[k] = c
        for m, part in by_deg.items():
            prod: dict = {}
            for k, c in part.items():
                for k2, c2 in X.mul_keys((self.one, f), k).items():
                    _acc(prod, k2, c * c2)
            prod = _cmp(prod)
            if not prod:
                continue
            sign = -1 if (n * m) % 2 else 1
            tgt = linalg.scale(self.proj(m, prod), sign)
            res = self.to_H(self.theta(m, n).solve(tgt))
            extra = set(res) - {f}
            if extra:
                raise FibrationError("sigma-hat leaves the generator line")
            linalg.axpy(out, 1, res.get(f, {}))
        return FormElement(X, _cmp(out))

    def product_data(self) -> dict:
        """Generators, B-action, connection forms and products on H*(Xi_0^*)."""
        X = self.X
        F = self.field
        gens = {n: self.verticals(n) for n in range(self.top + 1)}
        degs = [n for n, g in gens.items() if g]
        for n in degs:
            if len(gens[n]) != 1:
                raise FibrationError("product structure implemented for rank-one fibre cohomology")
        g = {n: gens[n][0] for n in degs}
        conn = {}
        for n in degs:
            nab = self.nabla_class({(self.one, g[n]): F.one}, n)
            conn[n] = FormElement(X, nab.get(g[n], {}))
        prod = {}
        for a in degs:
            for b in degs:
                p = self.proj(0, X.mul_keys((self.one, g[a]), (self.one, g[b])))
                if a + b in g:
                    c = p.get((self.one, g[a + b]), 0)
                    rest = {k: v for k, v in p.items() if k != (self.one, g[a + b])}
                    if rest:
                        raise FibrationError("product of generators leaves the generator line")
                    if c:
                        prod[(a, b)] = c
                elif p:
                    H = self.xi_cohomology(0, 0, degrees=[a + b])[a + b]
                    if not H.quotient.is_zero(p):
                        raise FibrationError("product of generators is not exact")
        return {"generators": g, "degrees": degs, "conn": conn, "prod": prod}

    def act(self, f, y):
        """g y = act . g for g = 1.f and an algebra element y of Z-degree 0."""
        X = self.X
        out: dict = {}
        for w, c in y.terms.items():
            for (w2, f2), c2 in X.mul_keys((self.one, f), (w, ())).items():
                if f2 != f:
                    raise FibrationError("generator does not commute diagonally")
                _acc(out, w2, c * c2)
        return X.algebra.element(_cmp(out))

    def sample_base_forms(self, base_len: int = 2) -> list:
        X = self.X
        out = [X.basis_element((w, ())) for w in X.algebra.enumerate_basis(base_len, 0)]
        for m in range(1, self.P + 1):
            out += [FormElement(X, v) for v in omega_B(X, m, base_len)]
        return out

    def hopf_product_structure(self, base_len: int = 2, sigma=None) -> ProductStructure:
        data = self.product_data()
        g = data["generators"]
        X = self.X
        sig = sigma or (lambda m, eta: self.sigma_hat(g[m], eta) if not eta.is_zero() else X.zero())
        coeffs = [X.algebra.word_element(w) for w in X.algebra.enumerate_basis(base_len, 0)]
        return ProductStructure(
            calc=X, degrees=data["degrees"],
            act=lambda m, y: self.act(g[m], y),
            conn=data["conn"], sigma=sig, prod=data["prod"],
            forms=self.sample_base_forms(base_len), coeffs=coeffs, name="hopf")

    def product_check(self, samples: int = 50, seed: int = 0, N=None) -> Report:
        N = N or self.N
        rep = Report("fibration:product", truncation=N, scalar_mode=self.field.name)
        for sub in (self.braiding_condition_check(N), product_structure_check(self.hopf_product_structure(),
                                                                              samples=samples, seed=seed)):
            rep.failures.extend(sub.failures)
            rep.checked += sub.checked
        X = self.X
        for eta in self.sample_base_forms():
            unit = self.sigma_hat((), eta)
            rep.expect(unit == eta, "sigma-hat([1] (x) w) = w (x) [1]", X.render((unit - eta).terms))
        rep.details["samples"] = samples
        rep.details["seed"] = seed
        return rep


# ---------------------------------------------------------------------------
# the spectral sequence of the filtration
# ---------------------------------------------------------------------------

class SpectralSequence:
    """Pages E_r of the filtration of the truncated total complex, per Z-degree block.

    Z_r^{p,q} = F^p C^{p+q} ∩ d^{-1} F^{p+r} C^{p+q+1},
    B_r^{p,q} = F^p C^{p+q} ∩ d F^{p-r} C^{p+q-1},
    E_r^{p,q} = Z_r^{p,q} / (Z_{r-1}^{p+1,q-1} + B_{r-1}^{p,q}).
    """

    def __init__(self, fib: Fibration, N: int):
        self.fib, self.N = fib, N
        self.X = fib.X
        self.one = fib.field.one
        self._Z: dict = {}
        self._B: dict = {}
        self._E: dict = {}
        self._pages: dict = {}

    def blocks(self):
        zs = set()
        for k in range(self.fib.top + 1):
            zs |= set(self.fib.zdegrees(k, self.N))
        return sorted(zs)

    def Z(self, r, p, q, z) -> list:
        key = (r, p, q, z)
        hit = self._Z.get(key)
        if hit is None:
            k = p + q
            src = self.fib.filt_keys(k, max(p, 0), z, self.N)
            cut = p + r
            imgs = [{k2: c for k2, c in self.X.d_key(s).items() if c and self.fib.hdeg(k2) < cut} for s in src]
            basis = [{s: self.one} for s in src]
            hit = [linalg.combine(basis, kv) for kv in linalg.kernel(imgs)]
            self._Z[key] = hit
        return hit

    def B(self, r, p, q, z) -> list:
        key = (r, p, q, z)
        hit = self._B.get(key)
        if hit is None:
            k = p + q
            src = self.fib.filt_keys(k - 1, max(p - r, 0), z, self.N)
            imgs = [_cmp(dict(self.X.d_key(s))) for s in src]
            imgs = [v for v in imgs if v]
            hit = linalg.restrict_to(imgs, lambda kk: self.fib.hdeg(kk) >= p) if imgs else []
            self._B[key] = hit
        return hit

    def E(self, r, p, q, z) -> linalg.Quotient:
        key = (r, p, q, z)
        hit = self._E.get(key)
        if hit is None:
            num = self.Z(r, p, q, z)
            den = self.Z(r - 1, p + 1, q - 1, z) + self.B(r - 1, p, q, z)
            try:
                hit = linalg.Quotient(num, den)
            except ValueError as exc:
                raise FibrationError(f"E_{r}^({p},{q}) [z={z}]: boundaries are not cycles (d^2 != 0?)") from exc
            self._E[key] = hit
        return hit

    def positions(self):
        for p in range(self.fib.P + 1):
            for q in range(self.fib.top - p + 1):
                yield p, q

    def page(self, r) -> SpectralPage:
        hit = self._pages.get(r)
        if hit is not None:
            return hit
        dims, bases, maps = {}, {}, {}
        for z in self.blocks():
            for p, q in self.positions():
                E = self.E(r, p, q, z)
                dims[(z, p, q)] = E.dim
                bases[(z, p, q)] = E.lifts
                tp, tq = p + r, q - r + 1
                imgs = []
                if E.dim:
                    Et = self.E(r, tp, tq, z)
                    for v in E.lifts:
                        dv = self.fib.d_vec(v)
                        c = Et.coords(dv)
                        if c is None:
                            raise FibrationError(f"d_{r} leaves Z_{r} at {(z, p, q)}")
                        imgs.append(c)
                maps[(z, p, q)] = imgs
        hit = SpectralPage(r, dims, bases, maps)
        self._pages[r] = hit
        return hit

    def pages(self, r_max: int) -> list:
        return [self.page(r) for r in range(1, r_max + 1)]

    def page_check(self, r) -> Report:
        """d_r d_r = 0 and E_{r+1} = H(E_r, d_r) per block."""
        rep = Report(f"spectral:page{r}", truncation=self.N, scalar_mode=self.fib.field.name)
        pg, nxt = self.page(r), self.page(r + 1)
        for (z, p, q), imgs in pg.maps.items():
            tp, tq = p + r, q - r + 1
            timgs = pg.maps.get((z, tp, tq), [])
            for j, c in enumerate(imgs):
                comp: dict = {}
                for i, a in c.items():
                    if timgs:
                        linalg.axpy(comp, a, timgs[i])
                rep.expect(not _cmp(comp), f"d_{r} d_{r} = 0 at {(z, p, q)}")
            out_rank = linalg.rank(imgs) if imgs else 0
            sp, sq = p - r, q + r - 1
            inc = pg.maps.get((z, sp, sq), [])
            in_rank = linalg.rank(inc) if inc else 0
            expect = pg.dims[(z, p, q)] - out_rank - in_rank
            rep.expect(nxt.dims[(z, p, q)] == expect, f"E_{r + 1} = H(E_{r}) at {(z, p, q)}",
                       (nxt.dims[(z, p, q)], expect))
        return rep

    def total_cohomology(self, z) -> dict:
        spaces = {k: [{key: self.one} for key in self.X.truncate_component(k, self.N, z)]
                  for k in range(self.fib.top + 1)} if self.fib.top >= 0 else {}
        res = complex_cohomology(spaces, lambda v, n: self.fib.d_vec(v), list(range(self.fib.top + 1)))
        return {k: h.dim for k, h in res.items()}

    def convergence_check(self, kmax: int = 4) -> Report:
        rep = Report("spectral:convergence", truncation=self.N, scalar_mode=self.fib.field.name)
        r_inf = self.fib.P + 2
        pg = self.page(r_inf)
        totals = {}
        for z in self.blocks():
            H = self.total_cohomology(z)
            for k in range(kmax + 1):
                e = sum(pg.dims.get((z, p, k - p), 0) for p in range(self.fib.P + 1))
                h = H.get(k, 0)
                rep.expect(e == h, f"sum_p E_inf^(p,{k}-p) = H^{k} [z={z}]", (e, h))
                if h:
                    totals[f"{k}@{z}"] = h
        rep.details["total_cohomology"] = totals
        return rep

    def e1_check(self) -> Report:
        rep = Report("spectral:E1", truncation=self.N, scalar_mode=self.fib.field.name)
        pg = self.page(1)
        for z in self.blocks():
            for p in range(self.fib.P + 1):
                H = self.fib.xi_cohomology(p, z, self.N)
                for q in range(self.fib.top - p + 1):
                    rep.expect(pg.dims[(z, p, q)] == H[q].dim, f"E_1^({p},{q}) = H^{q}(Xi_{p}) [z={z}]",
                               (pg.dims[(z, p, q)], H[q].dim))
        return rep

    def base_spaces(self, p, z=0):
        """Omega^p B at truncation: Z-degree-0 keys in horizontal symbols only."""
        X = self.X
        return [k for k in X.truncate_component(p, self.N, z) if self.fib.hdeg(k) == p]

    def e2_check(self, fibre: dict | None = None) -> Report:
        """Two-row shape, equal rows, identification with (Omega B (x) H^q, nabla) cohomology."""
        fib = self.fib
        X = self.X
        rep = Report("spectral:E2", truncation=self.N, scalar_mode=fib.field.name)
        pg = self.page(2)
        for (z, p, q), d in pg.dims.items():
            if q not in (0, 1):
                rep.expect(d == 0, f"E_2^({p},{q}) = 0 [z={z}]", d)
            if q == 0:
                rep.expect(d == pg.dims.get((z, p, 1), 0), f"E_2^({p},0) and E_2^({p},1) agree [z={z}]",
                           (d, pg.dims.get((z, p, 1), 0)))
        base = {}
        for q in range(fib.top + 1):
            gens = fib.verticals(q)
            if not gens:
                continue
            (f,) = gens
            A = fib.nabla_class({(fib.one, f): fib.field.one}, q).get(f, {})
            conn = ConnectionData(X, [[FormElement(X, A)]], name=f"H{q}")
            for z in self.blocks():
                spaces = {p: [{(k, 0): fib.field.one} for k in self.base_spaces(p, 0) if z == 0]
                          for p in range(-1, fib.P + 1)}
                res = twisted_cohomology(conn, self.N, degrees=list(range(fib.P + 1)), spaces=spaces,
                                         require_flat=False)
                for p in range(fib.P + 1):
                    rep.expect(pg.dims.get((z, p, q), 0) == res[p].dim,
                               f"E_2^({p},{q}) = H^{p}(B; H^{q}, nabla) [z={z}]",
                               (pg.dims.get((z, p, q), 0), res[p].dim))
                    if z == 0:
                        base[f"{p},{q}"] = res[p].dim
            # d_1 conjugated by Theta equals nabla on Omega^p B (x) g
            for p in range(fib.P):
                th = fib.theta(p, q)
                for k in self.base_spaces(p)[:12]:
                    src = {(k, f): fib.field.one}
                    lift = th.apply(src)
                    d1 = fib.to_H(fib.theta(p + 1, q).solve(fib.proj(p + 1, fib.d_vec(lift))))
                    expect = _cmp(conn.nabla_vec({(k, 0): fib.field.one}, p))
                    got = {(kk, 0): c for kk, c in d1.get(f, {}).items()}
                    rep.expect(_cmp(got) == expect, f"Theta^-1 d_1 Theta = nabla on {X.render_key(k)} (x) g{q}",
                               (got, expect))
        rep.details["truncated_base_cohomology"] = base
        return rep

    def higher_check(self, r_from: int = 3, r_to=None) -> Report:
        rep = Report("spectral:higher", truncation=self.N, scalar_mode=self.fib.field.name)
        r_to = r_to or self.fib.P + 2
        for r in range(r_from, r_to + 1):
            rep.expect(self.page(r).d_is_zero(), f"d_{r} = 0")
        return rep


# ---------------------------------------------------------------------------
# module-level entry points
# ---------------------------------------------------------------------------

_FIB: dict = {}


def hopf_fibration(field: ScalarMode | None = None, N: int = 3) -> Fibration:
    """A(S^2_q) -> A(SL_q(2)) with the 3D calculus and the matching calculus on k[z, z^-1]."""
    field = field if field is not None else specialized(DEFAULT_Q)
    key = (field, N)
    hit = _FIB.get(key)
    if hit is None:
        hit = Fibration(build_3d(field), build_H3(field), N=N)
        _FIB[key] = hit
    return hit


def xi_component(m, n, N=3, fib=None) -> XiComponent:
    return (fib or hopf_fibration(N=N)).xi_component(m, n, N)


def theta_map(m, n, N=3, fib=None) -> ThetaMap:
    return (fib or hopf_fibration(N=N)).theta(m, n, N)


def fibration_test(N=3, fib=None) -> Report:
    return (fib or hopf_fibration(N=N)).fibration_test(N)


def fibre_connection(n, N=3, fib=None) -> FibreCohomology:
    return (fib or hopf_fibration(N=N)).fibre_connection(n, N)


def spectral_pages(N=3, r_max=4, fib=None) -> list:
    return (fib or hopf_fibration(N=N)).spectral(N).pages(r_max)


def convergence_check(N=3, fib=None) -> Report:
    return (fib or hopf_fibration(N=N)).spectral(N).convergence_check()


def braiding_condition_check(N=3, fib=None) -> Report:
    return (fib or hopf_fibration(N=N)).braiding_condition_check(N)


def sigma_hat(f, eta, fib=None) -> FormElement:
    return (fib or hopf_fibration()).sigma_hat(f, eta)


def spectral_dims(fib: Fibration, N: int, r_max: int = 4) -> dict:
    """Dimension tables used to compare scalar modes."""
    ss = fib.spectral(N)
    out = {"theta": {}, "pages": {}}
    for m in range(fib.P + 1):
        for n in range(fib.top - m + 1):
            th = fib.theta(m, n, N)
            for z in fib.zdegrees(m + n, N):
                src, tgt, ech = th.block(z)
                if src or tgt:
                    out["theta"][(m, n, z)] = (len(src), len(tgt), ech.dim)
    for r in range(1, r_max + 1):
        out["pages"][r] = {k: v for k, v in ss.page(r).dims.items() if v}
    return out


def symbolic_recheck(N: int = 3, field: ScalarMode | None = None, r_max: int = 4) -> Report:
    """Recompute every rank and page dimension over Q(q) and compare with the specialization."""
    field = field if field is not None else specialized(DEFAULT_Q)
    rep = Report("spectral:symbolic-recheck", truncation=N, scalar_mode=field.name)
    sp = spectral_dims(hopf_fibration(field, N), N, r_max)
    sym = spectral_dims(hopf_fibration(SYMBOLIC, N), N, r_max)
    rep.expect(sp["theta"] == sym["theta"], "Theta ranks agree with Q(q)")
    for r in sp["pages"]:
        rep.expect(sp["pages"][r] == sym["pages"][r], f"E_{r} dims agree with Q(q)",
                   (sp["pages"][r], sym["pages"][r]))
    return rep


def spectral_suite(N=3, field=None, lemma_N=4) -> list:
    """All fibration and spectral reports for the 3D Hopf fibration."""
    fib = hopf_fibration(scalar_mode(field) if field is not None else None, N)
    ss = fib.spectral(N)
    reps = [fib.filtration_check(), fib.fibration_test(), fib.lemma_check(lemma_N), fib.fibre_check(),
            ss.e1_check(), ss.e2_check(), ss.higher_check(), ss.convergence_check()]
    reps += [ss.page_check(r) for r in range(1, fib.P + 2)]
    return reps
