import pytest

from qserre.calculus import build_3d, build_4d, build_H3, build_H4
from qserre.homomorph import (InconsistentMap, KSpace, ProjectionP, build_4d_full, coaction_check,
                              condition_K_check, coordinate_span, delta_B_check, horizontal_forms,
                              invariant_part, is_coinvariant, omega_B, pi_star, rho_star, same_span,
                              verify_map)
from qserre.qfield import SYMBOLIC
from qserre.suites import base_reports, map_reports, RunConfig

from conftest import Q32


@pytest.fixture(scope="module", params=[Q32, SYMBOLIC], ids=["q=3/2", "symbolic"])
def maps3(request):
    F = request.param
    X, H = build_3d(F), build_H3(F)
    return X, H, pi_star(X, H), rho_star(X, H)


def test_pi_images_3d(maps3):
    X, H, pi, _ = maps3
    zeta = H.gen("zi") * H.d(H.gen("z"))
    assert pi(X.sym("w0")).is_zero()
    assert pi(X.sym("w1")) == zeta
    assert pi(X.sym("w2")).is_zero()
    assert pi(X.gen("a")) == H.gen("z")
    assert pi(X.gen("b")).is_zero()


def test_rho_images_3d(maps3):
    X, H, _, rho = maps3
    T = rho.tgt
    zeta = H.gen("zi") * H.d(H.gen("z"))
    assert rho(X.sym("w0")) == T.pure_tensor(X.sym("w0"), H.gen("zi") ** 2)
    assert rho(X.sym("w1")) == T.pure_tensor(X.one(), zeta) + T.pure_tensor(X.sym("w1"), H.one())
    assert rho(X.sym("w2")) == T.pure_tensor(X.sym("w2"), H.gen("z") ** 2)


def test_maps_are_well_defined(maps3):
    _, _, pi, rho = maps3
    assert verify_map(pi).ok
    assert verify_map(rho).ok


def test_rho_is_multiplicative_on_forms(maps3):
    X, H, _, rho = maps3
    a = X.parse("a*b*w0")
    b = X.parse("c*w2 + d*w1")
    assert rho(a * b) == rho(a) * rho(b)
    assert rho(X.d(a)) == rho.tgt.d(rho(a))


@pytest.mark.parametrize("field", [Q32, SYMBOLIC], ids=["q=3/2", "symbolic"])
def test_pi_images_4d(field):
    X, H = build_4d(field), build_H4(field)
    pi = pi_star(X, H)
    q = field.q
    zeta = H.gen("zi") * H.d(H.gen("z"))
    assert pi(X.sym("w2")) == zeta * (q * (q + 1))
    for s in ("w1", "wp", "wm"):
        assert pi(X.sym(s)).is_zero()


def test_coaction_law():
    X, H = build_3d(Q32), build_H3(Q32)
    assert coaction_check(rho_star(X, H), H, N=2).ok


def test_wrong_generator_images_are_refused():
    X, H = build_3d(Q32), build_H3(Q32)
    with pytest.raises(InconsistentMap):
        pi_star(X, H, images={0: H.gen("z"), 1: H.gen("z"), 2: H.zero(), 3: H.gen("zi")})


def test_horizontal_and_base_forms_at_3():
    (rep,) = base_reports(RunConfig(N=3))
    assert rep.ok, rep.failures
    assert rep.checked == 7


def test_horizontal_forms_small_truncation():
    X, H = build_3d(Q32), build_H3(Q32)
    rho = rho_star(X, H)
    h1 = horizontal_forms(rho, 1, 0)
    assert same_span(h1, coordinate_span([((), (0,)), ((), (2,))]))
    assert omega_B(X, 1, 0) == []


def test_coinvariants():
    X, H = build_3d(Q32), build_H3(Q32)
    rho = rho_star(X, H)
    assert is_coinvariant(rho, X.parse("a*b"))
    assert not is_coinvariant(rho, X.parse("a*b*w0"))
    assert not is_coinvariant(rho, X.parse("a*d*w1"))  # w1 coacts with the vertical part
    assert delta_B_check(X, 3).ok


def test_map_suite_reports():
    for calc in ("3d", "4d"):
        reps = map_reports(RunConfig(calculus=calc, N=2))
        assert all(r.ok for r in reps), [r.failures[:1] for r in reps if not r.ok]


def test_k_space_4d():
    X, H = build_4d(Q32), build_H4(Q32)
    K = KSpace(pi_star(X, H))
    assert K.dim == 3
    assert K.image_rank == 1
    for s in ("w1", "wp", "wm"):
        assert K.contains(X.sym(s))
    assert not K.contains(X.sym("w2"))


@pytest.mark.parametrize("field", [Q32, SYMBOLIC], ids=["q=3/2", "symbolic"])
def test_condition_k_closed_forms(field):
    X = build_4d(field)
    q = field.q
    assert invariant_part(X, None, (0, 1)) == X.sym("wm") * (-q ** -1)
    assert invariant_part(X, None, (2, 1)) == X.sym("w1") * (q ** -2 - 1)
    assert invariant_part(X, None, (3, 2)) == X.sym("wp") * (-q ** -3)


def test_condition_k_report():
    X, H = build_4d(Q32), build_H4(Q32)
    rep = condition_K_check(X, pi_star(X, H), 4)
    assert rep.ok
    assert rep.details["dim_K"] == 3


def test_projection_onto_k():
    X, H = build_4d(Q32), build_H4(Q32)
    assert ProjectionP(rho_star(X, H), KSpace(pi_star(X, H))).check().ok


def test_braiding_4d():
    full, sigma, wedge = build_4d_full(Q32)
    assert sigma.check().ok
    # symmetric tensors: 16 - 6 independent 2-forms
    assert len(sigma.fixed_space()) == 10
    assert len(full.form_basis(2)) == 6
    assert full.max_degree == 2
