import json
from fractions import Fraction as F
from pathlib import Path

import pytest
from hypothesis import assume, given

from strategies import fractions
from wildblender.bridges import Code, ifs_apply, ifs_image
from wildblender.chain import (Schedule, adjustment_code, build_chain, check_record, choose_v,
                               growth_onset, landing_interval, lemma_bounds,
                               max_adjustment_length, pullback_gamma)
from wildblender.errors import DependencyError, DomainError, PreconditionError, ScheduleError
from wildblender.numerics import RatInterval

GOLDEN = Path(__file__).parent / "golden" / "chain_k1_physical.json"


def test_schedule_parse():
    assert Schedule.parse("physical") == Schedule("physical")
    assert Schedule.parse("periodic:3") == Schedule("periodic", n=3)
    assert Schedule.parse("historic:7") == Schedule("historic", k1=7)
    for bad in ("periodic:0", "periodic:1", "periodic:x", "weird", "historic"):
        with pytest.raises(DomainError):
            Schedule.parse(bad)


def test_choose_v_examples():
    hist = Schedule("historic", k1=3)  # eras 3 | 4 5 | 6..9
    v4 = choose_v(hist, 4)
    assert (v4.zeros, v4.ones) == (12, 4)
    v3 = choose_v(hist, 3)
    assert (v3.zeros, v3.ones) == (7, 2)
    assert str(choose_v(Schedule("periodic", n=3), 3)) == "001001001"
    assert str(choose_v(Schedule("physical"), 2)) == "0000"
    assert str(choose_v(hist, 2)) == "0000"


def test_pullback_examples(ref):
    gamma, final = pullback_gamma(ref, RatInterval(F(1, 5), F(21, 100)))
    assert str(gamma)[-1] == "1"  # first pullback step uses branch 1
    assert final.contains(landing_interval(ref))
    gamma, _ = pullback_gamma(ref, landing_interval(ref))
    assert str(gamma)[-1] == "0"  # both branches qualify: tie goes to 0
    with pytest.raises(PreconditionError):
        pullback_gamma(ref, RatInterval(0, 1))
    with pytest.raises(PreconditionError):
        pullback_gamma(ref, RatInterval(F(1, 5), F(1, 5)))


@given(fractions(0, 1, 10 ** 6), fractions(0, 1, 10 ** 6))
def test_pullback_inverts_ifs(ref, a, b):
    assume(a != b)
    J = RatInterval(min(a, b), max(a, b))
    try:
        gamma, final = pullback_gamma(ref, J)
    except PreconditionError:
        # oracle: neither branch image holds J properly
        img0, img1 = RatInterval(0, ref.lambda_cs0), RatInterval(ref.beta, 1)
        assert not img0.proper_superset_of(J) and not img1.proper_superset_of(J)
        return
    assert ifs_image(ref, gamma, final) == J
    assert final.contains(landing_interval(ref))


@given(fractions(0, 1, 10 ** 6))
def test_adjustment_lands(ref, z):
    alpha = adjustment_code(ref, z)
    assert ifs_apply(ref, alpha, z) in landing_interval(ref)
    assert len(alpha) <= max_adjustment_length(ref)


def test_lemma_bounds(ref):
    assert lemma_bounds(ref) == (5, 3)
    assert lemma_bounds(ref, contraction="lambda_cs1") == (84, 63)


def test_golden_first_record(ref, chain10):
    golden = json.loads(GOLDEN.read_text())
    rec = chain10[1].to_json()
    rec["w_hat"] = str(chain10[1].w_hat)
    assert rec == golden


def test_records_are_sound(ref, chain10):
    for rec in chain10:
        ch = check_record(ref, rec)
        for key in ("t_bound", "hit", "covers_landing", "w_bar_length", "quadratic",
                    "alpha_bounded"):
            assert ch[key], (rec.k, key)
        assert str(rec.w_hat) == str(rec.w_bar) + str(rec.v) + str(rec.gamma)
        assert ifs_apply(ref, rec.w_hat, F(1, 2)) == rec.z_hit
        # t is the shift that moves the landing point to the next strip centre
        assert rec.t_next == ref.a2 * (rec.z_hat_next - rec.z_hit)


def test_m_within_corrected_bound(ref, chain30):
    n0, n1 = lemma_bounds(ref, contraction="lambda_cs1")
    assert all(0 < rec.m <= n0 + n1 * rec.k for rec in chain30)


def test_majority_is_eventually_reached(chain30):
    assert all(chain30[k].majority_holds() for k in range(16, 31))


def test_majority_enforcement_raises(ref):
    with pytest.raises(ScheduleError):
        build_chain(ref, Schedule("physical"), 3, majority_from=1)


def test_chain_indexing(chain10):
    assert chain10[11].k == 11 and chain10[11].t_next is None
    with pytest.raises(DependencyError):
        chain10[12]
    with pytest.raises(DependencyError):
        chain10[0]


@pytest.mark.parametrize("eta", [F(1, 2), F(1, 4), F(1, 8)])
def test_growth_onset(chain30, eta):
    k0 = growth_onset(chain30, eta)
    assert k0 is not None and k0 <= 25
    assert all(chain30[k + 1].n_hat < (1 + eta) * chain30[k].n_hat for k in range(k0, 31))


def test_periodic_chain_codes(ref):
    ch = build_chain(ref, Schedule("periodic", n=2), 4, majority_from=None)
    assert str(ch[3].u) == "010101010"


def test_code_concatenation():
    assert str(Code("01") + Code("1")) == "011"
