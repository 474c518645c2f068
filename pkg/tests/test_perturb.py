from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from strategies import fractions
from wildblender.errors import DivergenceError, DomainError, ExactnessError, RegionError
from wildblender.model import Point3, apply_f, tangency_map
from wildblender.numerics import BigFloat, RatInterval
from wildblender.perturb import (BumpSpec, bump_interval_eval, choose_L, g2_apply_exact,
                                 g_apply_exact, g_step, h_eval, iterate_exact, norm_bound,
                                 perturbation_schedule, series_value)


@pytest.fixture(scope="module")
def sched(chain10):
    return perturbation_schedule(chain10)


I = RatInterval(F(1, 4), F(1, 2))


def test_bump_examples():
    b = BumpSpec(1)
    assert bump_interval_eval(b, F(1, 4), I, I.mid) == 1
    assert bump_interval_eval(b, F(1, 4), I, F(9, 10)) == 0
    assert bump_interval_eval(b, F(1, 4), I, I.lo - I.width / 4) == 0


@pytest.mark.parametrize("r", [1, 2, 3])
def test_step_has_r_flat_ends(r):
    b = BumpSpec(r)
    cs = b.coeffs
    assert sum(cs) == 1 and cs[0] == 0
    d = cs
    for _ in range(r):
        d = [i * c for i, c in enumerate(d)][1:]
        assert d[0] == 0 and sum(d) == 0  # derivative vanishes at s = 0 and s = 1


@given(fractions(-2, 2, 10 ** 4), st.integers(1, 3))
def test_step_range_and_monotone(x, r):
    b = BumpSpec(r)
    v = b.step(x)
    assert 0 <= v <= 1
    assert b.step(x + F(1, 100)) >= v


def test_derivative_bounds_r1():
    assert BumpSpec(1).derivative_bounds() == [1, F(27, 17)]


@pytest.mark.parametrize("r", [1, 2, 3])
def test_derivative_bounds_dominate_samples(r):
    b = BumpSpec(r)
    bounds = b.derivative_bounds()
    d = b.coeffs
    for j in range(1, r + 1):
        d = [i * c for i, c in enumerate(d)][1:]
        peak = max(abs(sum(c * F(s, 200) ** i for i, c in enumerate(d))) for s in range(201))
        assert peak <= bounds[j]


@given(fractions(0, 1, 10 ** 4))
def test_bump_bigfloat_agrees(x):
    bf = BigFloat(100)
    exact = bump_interval_eval(BumpSpec(2), F(1, 4), I, x)
    approx = bump_interval_eval(BumpSpec(2), F(1, 4), I, bf(x), convert=bf)
    assert bf.close(bf(exact), approx, rel_bits=8)


def test_h_examples(ref, sched):
    far = (F(1, 10), F(1, 2), F(1, 3))
    assert h_eval(sched, far) == far
    j = min(sched.strips)
    J = sched.strips[j]
    x, y, z = h_eval(sched, (F(1, 2), F(1, 2), J.mid))
    assert (x, y) == (F(1, 2), F(1, 2)) and z - J.mid == sched.t[j] / ref.a2
    assert h_eval(sched, (F(1, 2), F(1, 2), F(99, 100))) == (F(1, 2), F(1, 2), F(99, 100))


def test_g_examples(ref, sched):
    pt = (F(1, 5), F(1, 3), F(2, 7))
    assert g_apply_exact(sched, pt) == apply_f(ref, pt)
    assert g_apply_exact(sched, (0, 0, 0)) == Point3(0, 0, 0)
    j = min(sched.strips)
    z = sched.strips[j].mid
    assert g2_apply_exact(sched, (F(1, 2), 0, z)) == Point3(sched.t[j] + ref.a2 * z, F(1, 4), F(1, 2))
    with pytest.raises(RegionError):
        g_apply_exact(sched, (F(1, 2), 0, z))


def test_collar_is_not_exact(sched):
    j = min(sched.strips)
    J = sched.strips[j]
    z = J.hi + sched.rho_cs * J.width / 2
    with pytest.raises(ExactnessError):
        g2_apply_exact(sched, (F(1, 2), F(1, 2), z))


@given(st.data())
def test_g2_is_f2_after_h_on_saturated_strip(ref, sched, data):
    # oracle: on the saturated part g o g = f^2 o h, with h read off the bumps
    j = data.draw(st.sampled_from(sorted(sched.strips)))
    J = sched.strips[j]
    z = J.lo + J.width * data.draw(fractions(0, 1))
    x = F(1, 2) + ref.delta * data.draw(fractions(-1, 1))
    y = data.draw(fractions(0, 1))
    hx, hy, hz = h_eval(sched, (x, y, z))
    assert (hx, hy, hz - z) == (x, y, sched.t[j] / ref.a2)
    assert tuple(g2_apply_exact(sched, (x, y, z))) == tangency_map(ref, hx, hy, hz)


def test_supports_disjoint(sched):
    assert sched.supports_disjoint()


def test_iterate_matches_stepwise(chain10, sched):
    rec = chain10[3]
    pt = (rec.x_hat, F(1, 3), F(1, 2))
    end, regions = iterate_exact(sched, pt, rec.n_hat + 2, record=True)
    cur, done = Point3(*pt), 0
    while done < rec.n_hat + 2:
        cur, used = g_step(sched, cur)
        done += used
    assert end == cur
    assert len(regions) == rec.n_hat + 2


def test_series_value(ref):
    assert series_value(ref, 5, 1) == F(1, 58806)
    with pytest.raises(DivergenceError):
        series_value(ref, 0, 1)


def test_norm_bound_decreases(ref):
    b = BumpSpec(1)
    vals = [norm_bound(ref, b, L) for L in range(1, 12)]
    assert all(y < x for x, y in zip(vals, vals[1:]))


def test_choose_L(ref):
    b = BumpSpec(1)
    assert [choose_L(ref, b, e) for e in (1, F(1, 100), F(1, 10 ** 6))] == [3, 5, 9]
    L = 6
    assert choose_L(ref, b, norm_bound(ref, b, L)) == L + 1
    with pytest.raises(DomainError):
        choose_L(ref, b, 0)


@given(fractions(0, 1, 10 ** 9).filter(lambda e: e > 0), fractions(0, 1, 10 ** 9).filter(lambda e: e > 0))
def test_choose_L_monotone(ref, e1, e2):
    b = BumpSpec(1)
    lo, hi = sorted((e1, e2))
    assert choose_L(ref, b, lo) >= choose_L(ref, b, hi)
