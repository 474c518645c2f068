from fractions import Fraction as F

import pytest
from hypothesis import given

from strategies import fractions
from wildblender.errors import DomainError
from wildblender.folding import (Surd, curve_consistency, disc_curve_intersections, image_curves,
                                 verify_folding)
from wildblender.model import Point3, apply_f2_strip, validate_params


def test_curve_examples(ref):
    l0, l1 = image_curves(ref)
    assert l0.vertex == Point3(0, F(1, 4), F(1, 2))
    assert l1.vertex == Point3(ref.a2, F(3, 4), F(1, 2))
    assert l0.curvature == l1.curvature == -4


def test_strip_image_lies_on_l0(ref):
    l0, _ = image_curves(ref)
    for i in range(11):
        x = F(2, 5) + F(i, 50)
        img = apply_f2_strip(ref, (x, 0, 0))
        assert img.x == l0.x_at(img.z) and img.y == l0.y
    assert curve_consistency(ref)


def test_intersections_at_three_quarters(ref):
    hits = disc_curve_intersections(ref, F(3, 4))
    assert sorted(h.z.exact for h in hits) == [F(1, 4), F(3, 4)]
    assert all(h.transverse for h in hits)


def test_tangential_at_a2(ref):
    hits = disc_curve_intersections(ref, ref.a2)
    assert len(hits) == 1 and hits[0].z.exact == F(1, 2) and not hits[0].transverse
    rep = verify_folding(ref, ref.a2)
    assert not rep.passed and "not a folding family" in rep.notes


def test_domain(ref):
    for bad in (0, ref.a2 + 1, -1):
        with pytest.raises(DomainError):
            disc_curve_intersections(ref, bad)


def test_verify_reference(ref):
    rep = verify_folding(ref, F(3, 4))
    assert rep.passed
    assert any("beyond the arc" in n for n in rep.notes)


def test_a2_negative_rejected_upstream(ref):
    assert not validate_params(ref.with_(a2=F(-1))).passed


@given(fractions(0, 1, 10 ** 4).filter(lambda x: 0 < x < 1))
def test_two_symmetric_roots(ref, x0):
    hits = disc_curve_intersections(ref, x0)
    assert len(hits) == 2
    a, b = (h.z for h in hits)
    assert a.center == b.center == F(1, 2) and a.radicand == b.radicand > 0
    # oracle: the root solves the curve equation, checked on squares
    l1 = image_curves(ref)[1]
    assert l1.x_vertex + l1.curvature * a.radicand == x0
    assert verify_folding(ref, x0).passed


@given(fractions(0, 1, 10 ** 3), fractions(-2, 2, 10 ** 3))
def test_surd_compare_oracle(r, q):
    s = Surd(F(1, 2), r, 1)
    t = Surd(F(1, 2), r, -1)
    import math
    for surd in (s, t):
        approx = float(surd)
        if abs(approx - float(q)) > 1e-9:
            assert surd.cmp(q) == (1 if approx > q else -1)


def test_alternate_root_flagged(ref):
    rep = verify_folding(ref.with_(a4=F(1, 2)), F(3, 4))
    assert any("differs" in n for n in rep.notes)
