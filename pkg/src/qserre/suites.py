"""Verification suites and their negative controls.

Every suite is a function ``(cfg) -> list[Report]``.  A negative control
rebuilds one ingredient with a single corrupted constant and returns the
report(s) of the same checks; the control succeeds when those reports fail
(or when construction itself is refused).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .calculus import (Calculus, FormElement, WedgeRules, build_3d, build_4d, build_H3, build_H4,
                       calculus_matches, d_squared_check, dump_calculus, load_calculus, verify_calculus)
from .connection import (ConnectionData, ProductStructure, composite_check, connecting_map,
                         hdr_action_check, product_structure_check, pushforward_map, split_ses,
                         unipotent_gauge)
from .homomorph import (InconsistentMap, KSpace, build_4d_full, coaction_check, condition_K_check,
                        coordinate_span, horizontal_forms, omega_B, pi_star, rho_star, same_span,
                        verify_map)
from .ncpoly import Report, build_laurent, build_sl2, verify_presentation
from .qfield import ScalarMode, specialized
from .spectral import DEFAULT_Q, Fibration, FibrationError, hopf_fibration, symbolic_recheck

SUITES = ("presentation", "calculus", "fibration", "condition-k", "spectral", "connection", "product")
IDENTITY_N = 4


@dataclass
class RunConfig:
    calculus: str = "3d"
    N: int = 3
    scalar: ScalarMode | None = None
    seed: int = 0
    identity_N: int = IDENTITY_N

    def __post_init__(self):
        if self.calculus not in ("3d", "4d"):
            raise ValueError(f"unknown calculus {self.calculus!r}")
        if self.N < 0:
            raise ValueError("truncation must be >= 0")
        if self.scalar is None:
            self.scalar = specialized(DEFAULT_Q)

    @property
    def field(self) -> ScalarMode:
        return self.scalar


class ConfigError(ValueError):
    pass


def validate(cfg: RunConfig, suites) -> None:
    """Reject unsupported combinations before any work starts."""
    if cfg.calculus == "4d" and "spectral" in suites:
        raise ConfigError("spectral suite needs forms through degree 4; the 4D calculus is built "
                          "through degree 2 only")
    unknown = [s for s in suites if s not in SUITES]
    if unknown:
        raise ConfigError(f"unknown suite(s): {', '.join(unknown)}")


def _fail_report(name, exc) -> Report:
    rep = Report(name)
    rep.fail("construction refused", exc)
    return rep


# ---------------------------------------------------------------------------
# presentation
# ---------------------------------------------------------------------------

def suite_presentation(cfg: RunConfig) -> list:
    F = cfg.field
    return [verify_presentation(build_sl2(F), 6), verify_presentation(build_laurent(F), 6)]


def control_presentation(cfg: RunConfig) -> list:
    # Delta(beta) with the second leg swapped: beta (x) alpha instead of alpha (x) beta
    bad = build_sl2(cfg.field, coproduct_override={1: [(1, (1,), (0,)), (1, (1,), (3,))]})
    return [verify_presentation(bad, 3)]


# ---------------------------------------------------------------------------
# calculus
# ---------------------------------------------------------------------------

def _calculi(cfg):
    F = cfg.field
    if cfg.calculus == "3d":
        return [build_3d(F), build_H3(F)]
    full, _, _ = build_4d_full(F)
    return [build_4d(F), full, build_H4(F)]


def suite_calculus(cfg: RunConfig) -> list:
    reps = []
    for calc in _calculi(cfg):
        deg = 3 if calc.max_degree >= 3 else calc.max_degree
        reps.append(verify_calculus(calc, deg))
        if calc.mc is not None:
            reps.append(d_squared_check(calc, 3))
        # the loader rebuilds by name, so the derived degree-2 4D calculus has no golden
        if not (calc.name == "4D" and calc.max_degree >= 2):
            reps.append(calculus_matches(calc, load_calculus(dump_calculus(calc), cfg.field)))
    return reps


def rebuild(calc: Calculus, d_gen=None, comm=None, mc=None, name=None) -> Calculus:
    """Copy of a calculus with replaced presentation tables."""
    raw = calc.raw
    wedge = WedgeRules(len(calc.symbols), dict(raw["wedge"]), calc.max_degree)
    return Calculus(name or calc.name, calc.algebra, calc.symbols, calc.aliases, calc.symbol_zdeg,
                    d_gen if d_gen is not None else raw["d_gen"],
                    comm if comm is not None else raw["comm"],
                    mc if mc is not None else raw["mc"], wedge)


def control_calculus(cfg: RunConfig) -> list:
    F = cfg.field
    q = F.q
    # d w1 = q w0 w2 mistyped as (q + 1) w0 w2
    bad = build_3d(F, mc_override={1: [(q + 1, (), (0, 2))]})
    return [d_squared_check(bad, 2)]


# ---------------------------------------------------------------------------
# fibration (maps, horizontal and base forms, Xi, Theta, Lemma, fibre cohomology)
# ---------------------------------------------------------------------------

def _image_report(name, pairs, F) -> Report:
    rep = Report(name, scalar_mode=F.name)
    for label, got, want in pairs:
        rep.expect(got == want, label, f"{got} != {want}")
    return rep


def map_reports(cfg: RunConfig) -> list:
    F = cfg.field
    q = F.q
    reps = []
    if cfg.calculus == "3d":
        X, Hc = build_3d(F), build_H3(F)
        pi, rho = pi_star(X, Hc), rho_star(X, Hc)
        zeta = Hc.sym(0)
        T = rho.tgt
        one_H, one_X = Hc.one(), X.one()
        z2 = Hc.parse("z*z")
        zi2 = Hc.parse("zi*zi")
        pairs = [
            ("pi(w0) = 0", pi(X.sym(0)), Hc.zero()),
            ("pi(w1) = z^-1 dz", pi(X.sym(1)), zeta),
            ("pi(w2) = 0", pi(X.sym(2)), Hc.zero()),
            ("rho(w0) = w0 (x) z^-2", rho(X.sym(0)), T.pure_tensor(X.sym(0), zi2)),
            ("rho(w1) = w1 (x) 1 + 1 (x) z^-1 dz", rho(X.sym(1)),
             T.pure_tensor(X.sym(1), one_H) + T.pure_tensor(one_X, zeta)),
            ("rho(w2) = w2 (x) z^2", rho(X.sym(2)), T.pure_tensor(X.sym(2), z2)),
        ]
        reps += [verify_map(pi), verify_map(rho), _image_report("maps:3D-images", pairs, F),
                 coaction_check(rho, Hc, N=min(cfg.N, 2))]
    else:
        X, Hc = build_4d(F), build_H4(F)
        pi, rho = pi_star(X, Hc), rho_star(X, Hc)
        zeta = Hc.sym(0)
        pairs = [
            ("pi(w1) = 0", pi(X.sym(0)), Hc.zero()),
            ("pi(w2) = q(q+1) z^-1 dz", pi(X.sym(1)), zeta * (q * (q + 1))),
            ("pi(wp) = 0", pi(X.sym(2)), Hc.zero()),
            ("pi(wm) = 0", pi(X.sym(3)), Hc.zero()),
        ]
        reps += [verify_map(pi), verify_map(rho), _image_report("maps:4D-images", pairs, F),
                 coaction_check(rho, Hc, N=min(cfg.N, 2))]
    return reps


def base_reports(cfg: RunConfig) -> list:
    """Horizontal forms and Omega^n B at truncation N (3D)."""
    F = cfg.field
    q = F.q
    N = cfg.N
    X, Hc = build_3d(F), build_H3(F)
    rho = rho_star(X, Hc)
    rep = Report("fibration:base-forms", truncation=N, scalar_mode=F.name)
    keys = lambda n, pred: [k for k in X.truncate_component(n, N) if pred(k)]
    h1 = horizontal_forms(rho, 1, N)
    rep.expect(same_span(h1, coordinate_span(keys(1, lambda k: k[1] != (1,)))), "H^1 X = span{a w0 + b w2}")
    h2 = horizontal_forms(rho, 2, N)
    rep.expect(same_span(h2, coordinate_span(keys(2, lambda k: k[1] == (0, 2)))), "H^2 X = X.w0^w2")
    rep.expect(not horizontal_forms(rho, 3, N), "H^3 X = 0")
    inv1 = coordinate_span(keys(1, lambda k: k[1] != (1,) and X.key_zdeg(k) == 0))
    rep.expect(same_span(omega_B(X, 1, N), inv1), "Omega^1 B = (H^1 X)^coH")
    inv2 = coordinate_span(keys(2, lambda k: k[1] == (0, 2) and X.key_zdeg(k) == 0))
    rep.expect(same_span(omega_B(X, 2, N), inv2), "Omega^2 B = B.w0^w2")
    rep.expect(not omega_B(X, 3, N), "Omega^3 B = 0")
    alg = X.algebra
    ident = alg.normal_form((0, 0, 3, 3)) - alg.normal_form((0, 2, 1, 3)) * (q + q ** -1) \
        + alg.normal_form((2, 2, 1, 1)) * q ** 2
    rep.expect(ident == alg.one(), "a^2 d^2 - (q + q^-1) a c b d + q^2 c^2 b^2 = 1", ident)
    return [rep]


def xi_table_report(fib: Fibration, N) -> Report:
    expected = {(0, 0): ["1"], (0, 1): ["w1"], (1, 0): ["w0", "w2"], (1, 1): ["w0^w1", "w1^w2"],
                (2, 0): ["w0^w2"], (2, 1): ["w0^w1^w2"]}
    rep = Report("fibration:xi-table", truncation=N, scalar_mode=fib.field.name)
    table = fib.xi_table(N, mmax=3, nmax=2)
    for (m, n), row in table.items():
        want = expected.get((m, n), [])
        rep.expect(row["generators"] == want, f"Xi_{m}^{n} generated by {want or '0'}", row["generators"])
        rep.expect(row["free"], f"Xi_{m}^{n} free over X on its generators", row["dims"])
    rep.details["table"] = {f"{m},{n}": row["generators"] for (m, n), row in table.items()}
    return rep


def suite_fibration(cfg: RunConfig) -> list:
    reps = map_reports(cfg)
    if cfg.calculus == "4d":
        X4, H4 = build_4d(cfg.field), build_H4(cfg.field)
        K = KSpace(pi_star(X4, H4))
        rep = Report("fibration:4D-K", scalar_mode=cfg.field.name)
        rep.expect(K.dim == 3, "dim K = 3", K.dim)
        want = coordinate_span([(X4.algebra.one_word, (s,)) for s in (0, 2, 3)])
        rep.expect(same_span([k.terms for k in K.forms()], want), "K = span{w1, wp, wm}", K.basis)
        return reps + [rep]
    fib = hopf_fibration(cfg.field, cfg.N)
    reps += base_reports(cfg)
    reps += [fib.filtration_check(), xi_table_report(fib, cfg.N), fib.fibration_test(),
             fib.lemma_check(cfg.identity_N), fib.fibre_check()]
    return reps


def control_fibration(cfg: RunConfig) -> list:
    F = cfg.field
    q = F.q
    # d w0 = q^2(q^2+1) w0^w1 mistyped as 2q w0^w1
    X = build_3d(F, mc_override={0: [(2 * q, (), (0, 1))]})
    fib = Fibration(X, build_H3(F), N=min(cfg.N, 2) or 1)
    reps = [fib.fibration_test()]
    # pi(beta) = z instead of 0
    try:
        H = build_H3(F)
        pi_star(build_3d(F), H, images={0: H.gen("z"), 1: H.gen("z"), 2: H.zero(), 3: H.gen("zi")})
        reps.append(Report("maps:wrong-pi"))
    except InconsistentMap as exc:
        reps.append(_fail_report("maps:wrong-pi", exc))
    return reps


def control_lemma(cfg: RunConfig) -> list:
    fib = hopf_fibration(cfg.field, cfg.N)
    return [fib.lemma_check(min(cfg.identity_N, 3), base="q^2")]


# ---------------------------------------------------------------------------
# spectral
# ---------------------------------------------------------------------------

def suite_spectral(cfg: RunConfig) -> list:
    fib = hopf_fibration(cfg.field, cfg.N)
    ss = fib.spectral(cfg.N)
    reps = [ss.e1_check(), ss.e2_check(), ss.higher_check(), ss.convergence_check()]
    reps += [ss.page_check(r) for r in range(1, fib.P + 2)]
    if not cfg.field.symbolic:
        reps.append(symbolic_recheck(cfg.N, cfg.field))
    return reps


def control_spectral(cfg: RunConfig) -> list:
    F = cfg.field
    q = F.q
    # d w2 = q^2(q^2+1) w1^w2 mistyped as q w1^w2
    X = build_3d(F, mc_override={2: [(q, (), (1, 2))]})
    fib = Fibration(X, build_H3(F), N=max(cfg.N, 1))
    try:
        return [fib.spectral(fib.N).convergence_check()]
    except FibrationError as exc:
        return [_fail_report("spectral:corrupted", exc)]


# ---------------------------------------------------------------------------
# connection
# ---------------------------------------------------------------------------

def random_connection(calc, rng: random.Random, rank=None, maxlen=2, terms=3, name="random"):
    rank = rank or rng.randint(1, 2)
    words = calc.algebra.enumerate_basis(maxlen)
    F = calc.field
    A = []
    for _ in range(rank):
        row = []
        for _ in range(rank):
            t = {}
            for _ in range(rng.randint(0, terms)):
                k = (rng.choice(words), (rng.randrange(len(calc.symbols)),))
                t[k] = t.get(k, F.zero) + F(rng.randint(-3, 3))
            row.append(FormElement(calc, {k: c for k, c in t.items() if c}))
        A.append(row)
    return ConnectionData(calc, A, name=name)


def suite_connection(cfg: RunConfig, count: int = 20) -> list:
    F = cfg.field
    X = build_3d(F) if cfg.calculus == "3d" else build_4d_full(F)[0]
    Hc = build_H3(F) if cfg.calculus == "3d" else build_H4(F)
    rng = random.Random(cfg.seed)
    Nc = min(cfg.N, 1)
    rep = Report("connection:composite", truncation=Nc, scalar_mode=F.name)
    for i in range(count):
        c = random_connection(X, rng, name=f"random{i}")
        for n in range(0, X.max_degree - 1):
            sub = composite_check(c, n, Nc)
            rep.failures.extend(sub.failures)
            rep.checked += sub.checked
    reps = [rep]
    g = unipotent_gauge(X, X.algebra.parse("a*b"))
    flat = Report("connection:gauge", scalar_mode=F.name)
    flat.expect(g.is_flat(), "unipotent gauge connection is flat")
    pushed = pushforward_map(pi_star(X, Hc), g)
    flat.expect(pushed.is_flat(), "pushforward along pi stays flat")
    g2 = unipotent_gauge(X, X.algebra.parse("a"))
    flat.expect(pushforward_map(pi_star(X, Hc), g2).is_flat(), "pushforward of d + g^-1 dg (g = [[1, a], [0, 1]]) flat")
    reps.append(flat)
    reps.append(hdr_action_check(g, min(cfg.N, 1), seed=cfg.seed))
    E = ConnectionData.trivial(Hc, 1)
    G = ConnectionData.trivial(Hc, 1)
    NH = max(cfg.N, 1)
    for label, tau in (("split", None), ("coupled", [[Hc.sym(0)]])):
        res = connecting_map(split_ses(E, G, tau, name=label), NH)
        res["report"].check = f"connection:les-{label}"
        res["report"].details["delta_rank"] = res["report"].details["ranks"]["delta"]
        reps.append(res["report"])
    return reps


def control_connection(cfg: RunConfig) -> list:
    F = cfg.field
    q = F.q
    # d w0 = q^2(q^2+1) w0^w1 mistyped as q^2 w0^w1 breaks nabla^2 = R
    X = build_3d(F, mc_override={0: [(q ** 2, (), (0, 1))]})
    c = ConnectionData(X, [[X.parse("a*b*w0 + w1")]], name="corrupted")
    return [composite_check(c, 0, 1)]


# ---------------------------------------------------------------------------
# product
# ---------------------------------------------------------------------------

def trivial_product(calc) -> ProductStructure:
    alg = calc.algebra
    words = alg.enumerate_basis(2)
    forms = [calc.basis_element((w, ())) for w in words] + \
            [calc.basis_element((w, (s,))) for w in words for s in range(len(calc.symbols))]
    return ProductStructure(calc=calc, degrees=[0], act=lambda m, y: y, conn={0: calc.zero()},
                            sigma=lambda m, eta: eta, prod={(0, 0): 1}, forms=forms,
                            coeffs=[alg.word_element(w) for w in words], name="trivial")


def suite_product(cfg: RunConfig, samples: int = 50) -> list:
    F = cfg.field
    fib = hopf_fibration(F, cfg.N)
    return [product_structure_check(trivial_product(build_H3(F)), samples=samples, seed=cfg.seed),
            fib.product_check(samples=samples, seed=cfg.seed)]


def control_product(cfg: RunConfig, samples: int = 50) -> list:
    fib = hopf_fibration(cfg.field, cfg.N)
    g = fib.product_data()["generators"]
    flip = lambda m, eta: fib.sigma_hat(g[m], eta) * (-1 if m == 1 else 1)
    return [product_structure_check(fib.hopf_product_structure(sigma=flip), samples=samples, seed=cfg.seed)]


# ---------------------------------------------------------------------------
# condition K
# ---------------------------------------------------------------------------

def suite_condition_k(cfg: RunConfig) -> list:
    F = cfg.field
    X4, H4 = build_4d(F), build_H4(F)
    return [condition_K_check(X4, pi_star(X4, H4), cfg.identity_N)]


def control_condition_k(cfg: RunConfig) -> list:
    F = cfg.field
    q = F.q
    X4 = build_4d(F)
    comm = dict(X4.raw["comm"])
    # wm a = a wm - (q^2 - 1) b w1 mistyped with coefficient -(q^2 + 1)
    comm[(3, 0)] = [(1, (0,), 3), (-(q ** 2 + 1), (1,), 0)]
    bad = rebuild(X4, comm=comm)
    try:
        return [condition_K_check(bad, pi_star(bad, build_H4(F)), cfg.identity_N)]
    except InconsistentMap as exc:
        return [_fail_report("condition-K:corrupted", exc)]


SUITE_FUNCS = {
    "presentation": suite_presentation,
    "calculus": suite_calculus,
    "fibration": suite_fibration,
    "condition-k": suite_condition_k,
    "spectral": suite_spectral,
    "connection": suite_connection,
    "product": suite_product,
}

CONTROLS = {
    "presentation": control_presentation,
    "calculus": control_calculus,
    "fibration": control_fibration,
    "lemma": control_lemma,
    "condition-k": control_condition_k,
    "spectral": control_spectral,
    "connection": control_connection,
    "product": control_product,
}


def run_suite(name: str, cfg: RunConfig) -> list:
    return SUITE_FUNCS[name](cfg)


def run_control(name: str, cfg: RunConfig) -> bool:
    """True when the corrupted input is flagged."""
    return any(not r.ok for r in CONTROLS[name](cfg))
