"""Every suite must flag its corrupted input while passing on the real one."""

import pytest

from qserre import suites as S

CFG = S.RunConfig()


@pytest.mark.parametrize("name", sorted(S.CONTROLS))
def test_control_is_flagged(name):
    reps = S.CONTROLS[name](CFG)
    assert reps
    assert any(not r.ok for r in reps)


@pytest.mark.parametrize("name", S.SUITES)
def test_suite_passes_and_is_not_vacuous(name):
    reps = S.run_suite(name, CFG)
    assert all(r.ok for r in reps), [(r.check, r.failures[:1]) for r in reps if not r.ok]
    assert all(r.checked > 0 for r in reps), [r.check for r in reps if not r.checked]


def test_validate_rejects_4d_spectral():
    with pytest.raises(S.ConfigError):
        S.validate(S.RunConfig(calculus="4d"), ["spectral"])
    with pytest.raises(S.ConfigError):
        S.validate(CFG, ["bogus"])
    with pytest.raises(ValueError):
        S.RunConfig(N=-1)
