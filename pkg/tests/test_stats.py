from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from wildblender.chain import Schedule, build_chain
from wildblender.errors import DomainError, InsufficientDataError
from wildblender.eras import era_sequence
from wildblender.model import apply_f, fixed_point_P, fixed_point_Q
from wildblender.numerics import BigFloat
from wildblender.perturb import iterate_exact, perturbation_schedule
from wildblender.stats import (CoordX, CoordY, CoordZ, Observable, birkhoff_run,
                               historic_targets, near_targets, periodic_orbit, residence_window,
                               to_fraction, verify_historic, verify_physical)


def test_targets(ref):
    assert historic_targets(ref, CoordX) == (F(3, 16), F(3, 32))
    assert historic_targets(ref, CoordZ) == (F(1, 4), F(1, 8))
    c = Observable("c", c0=F(2, 7))
    assert historic_targets(ref, c) == (F(2, 7), F(2, 7))


def test_fixed_point_averages(ref):
    for pt, val in ((fixed_point_P(ref), 0), (fixed_point_Q(ref), F(3, 4))):
        cur, total = pt, F(0)
        for _ in range(20):
            total += CoordX(*cur)
            cur = apply_f(ref, cur)
        assert total / 20 == val


@given(st.text(alphabet="01", min_size=1, max_size=6).filter(lambda w: "1" in w or len(w) == 1))
def test_periodic_orbit_is_periodic(ref, word):
    pts = periodic_orbit(ref, word)
    cur = pts[0]
    for i, s in enumerate(word):
        assert cur == pts[i]
        assert (cur.x <= F(1, 3)) if s == "0" else (cur.x >= F(2, 3))
        cur = apply_f(ref, cur)
    assert cur == pts[0]


def test_residence_window(ref):
    assert residence_window(ref, "0", F(1, 10)) == (3, 2)


def test_to_fraction_exact_for_mpf():
    bf = BigFloat(64)
    x = bf(F(1, 3))
    assert bf(to_fraction(x)) == x


@pytest.fixture(scope="module")
def small_hist(ref):
    k1 = 3
    es = era_sequence(k1, 4)
    chain = build_chain(ref, Schedule("historic", k1=k1), es.ks[-1] + 1, majority_from=None)
    return es, chain


def test_exact_and_bigfloat_runs_agree(small_hist):
    es, chain = small_hist
    exact = birkhoff_run(chain, 3, 8, (CoordX, CoordY, CoordZ))
    big = birkhoff_run(chain, 3, 8, (CoordX, CoordY, CoordZ), mode=BigFloat(200))
    assert exact.regions_ok and exact.mode == "exact" and big.mode == "bigfloat:200"
    assert exact.ends == big.ends
    for name in ("x", "y", "z"):
        for a, b in zip(exact.sums[name], big.sums[name]):
            assert abs(to_fraction(b) - a) < F(1, 10 ** 40)


def test_exact_run_matches_orbit(ref, small_hist):
    # oracle: iterate g exactly and sum x, repeating the strip value for the skipped step
    es, chain = small_hist
    run = birkhoff_run(chain, 3, 5, (CoordX,))
    sched = perturbation_schedule(chain)
    pt, total, steps = (chain[3].x_hat, F(1, 2), F(1, 2)), F(0), 0
    for k in (3, 4):
        n = chain[k].n_hat + 2
        for _ in range(n - 2):
            total += pt[0]
            pt = tuple(iterate_exact(sched, pt, 1)[0])
        total += 2 * pt[0]
        pt = tuple(iterate_exact(sched, pt, 2)[0])
        steps += n
    assert run.ends[-1] == steps and run.sums["x"][-1] == total


def test_run_rejects_bad_start(small_hist):
    _, chain = small_hist
    with pytest.raises(DomainError):
        birkhoff_run(chain, 3, 5, offset=(F(1), None, F(0)))
    with pytest.raises(DomainError):
        birkhoff_run(chain, 5, 5)


def test_historic_needs_four_eras(ref, small_hist):
    es, chain = small_hist
    run = birkhoff_run(chain, 3, es.ks[-1], (CoordX,), mode=BigFloat(64))
    with pytest.raises(InsufficientDataError):
        verify_historic(ref, run, era_sequence(3, 1))
    rep = verify_historic(ref, run, es, CoordX)
    assert len(rep.values) == 4 and rep.targets == (F(3, 16), F(3, 32))


def test_constant_observable_is_degenerate(ref, small_hist):
    es, chain = small_hist
    c = Observable("c", c0=F(1))
    run = birkhoff_run(chain, 3, es.ks[-1], (c,), mode=BigFloat(64))
    with pytest.raises(DomainError):
        verify_historic(ref, run, es, c)


def test_physical_small(ref):
    sched = Schedule("physical")
    chain = build_chain(ref, sched, 8, majority_from=None)
    run = birkhoff_run(chain, 1, 6, (CoordX,), near=(near_targets(ref, sched), F(1, 10)))
    rep = verify_physical(chain, run)
    assert rep.window == (3, 2)
    assert rep.above_bound and rep.increasing
    assert all(0 <= r["fraction"] <= 1 for r in rep.rows)
