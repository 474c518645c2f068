from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from strategies import unit
from wildblender.errors import DomainError, EscapeError, RegionError
from wildblender.model import (ModelParams, Point3, Region, apply_f, apply_f2_strip, classify,
                               fixed_point_P, fixed_point_Q, project_phi_n, tangency_map,
                               validate_params)


def test_reference_passes_everything(ref):
    rep = validate_params(ref)
    assert rep.passed, [c.name for c in rep.failures()]
    assert rep["partial dissipativity"].lhs == F(891, 1000)


def test_partial_dissipativity_failure(ref):
    rep = validate_params(ref.with_(lambda_cs0=F(1, 5)))
    assert not rep["partial dissipativity"].passed
    assert rep["partial dissipativity"].lhs == F(81, 50)


def test_strict_ordering_failure(ref):
    rep = validate_params(ref.with_(lambda_ss=F(11, 100)))
    assert [c.name for c in rep.failures()] == ["lambda_ss < lambda_cs0"]


def test_nonsquare_a1_reported(ref):
    assert not validate_params(ref.with_(a1=F(5)))["a1 is a rational square"].passed


def test_negative_a2_reported(ref):
    assert not validate_params(ref.with_(a2=F(-1))).passed


def test_params_json_roundtrip(ref):
    assert ModelParams.from_json(ref.to_json()) == ref


def test_params_reject_unknown_fields(ref):
    data = ref.to_json()
    data["params"]["colour"] = "blue"
    with pytest.raises(DomainError):
        ModelParams.from_json(data)


@pytest.mark.parametrize("pt,region", [
    ((0, 0, 0), Region.V0),
    ((F(1, 2), 0, 0), Region.TANGENCY_STRIP),
    ((2, 0, 0), Region.OUTSIDE),
    ((F(7, 20), 0, 0), Region.GAP_OTHER),
    ((1, 1, 1), Region.V1),
])
def test_classify_examples(ref, pt, region):
    assert classify(ref, pt) is region


def test_fixed_points(ref):
    P, Q = fixed_point_P(ref), fixed_point_Q(ref)
    assert Q == Point3(F(3, 4), F(20, 21), 1)
    assert apply_f(ref, P) == P
    assert apply_f(ref, Q) == Q


def test_apply_f_v0_example(ref):
    assert apply_f(ref, (F(1, 3), 1, 1)) == Point3(1, F(1, 20), F(11, 100))


def test_apply_f_refuses_gap(ref):
    with pytest.raises(RegionError):
        apply_f(ref, (F(1, 2), 0, 0))


def test_tangency_examples(ref):
    assert apply_f2_strip(ref, (F(1, 2), 0, 0)) == Point3(0, F(1, 4), F(1, 2))
    assert apply_f2_strip(ref, (F(3, 5), F(1, 2), 0)) == Point3(F(-4, 100), F(1, 2), F(3, 5))


@given(unit, unit)
def test_tangency_x_image_is_a2_z(ref, y, z):
    assert tangency_map(ref, F(1, 2), y, z)[0] == ref.a2 * z


def test_project_examples(ref):
    assert project_phi_n(ref, F(1, 2), F(1, 3), 2) == (F(1, 3), F(1, 2))
    assert project_phi_n(ref, 0, 0, 7) == (0, 0)
    assert project_phi_n(ref, F(1, 9), 1, 2) == (1, F(121, 10000))


def test_project_escapes_with_one_step_left(ref):
    with pytest.raises(EscapeError):
        project_phi_n(ref, F(1, 2), F(1, 3), 1)


@given(unit, unit, unit)
def test_f_preserves_cube_on_branches(ref, x, y, z):
    region = classify(ref, (x, y, z))
    if region in (Region.V0, Region.V1):
        img = apply_f(ref, (x, y, z))
        assert all(0 <= c <= 1 for c in img)


@given(st.text(alphabet="01", min_size=1, max_size=6))
def test_seed_code_must_be_binary(ref, w):
    ModelParams(**{**ref.__dict__, "w_tilde0": w, "n0": len(w)})
    with pytest.raises(DomainError):
        ModelParams(**{**ref.__dict__, "w_tilde0": w + "2"})
