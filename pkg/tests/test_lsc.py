import math

import numpy as np
import pytest

from config import PreconditionError, RegionMismatch
from lsc import (INF, LscFn, add, constant, indicator, level_set, leq, levels, restrict, scale, supremum,
                 way_below, zero)
from region import Region, SampleSet, ball, empty_set


@pytest.fixture(scope='module')
def fine():
    return Region.disk(0.7, 0.04)


def random_fn(region, rng, top=3):
    return LscFn(region, rng.integers(0, top + 1, len(region)).astype(float))


def test_indicator_of_empty_and_everything(disk):
    assert indicator(empty_set(disk)) == zero(disk)
    assert indicator(disk.everything()) == constant(disk, 1)


def test_indicator_sum_counts_overlap(disk):
    O, P = ball(disk, 0, 0.5), ball(disk, 0.4, 0.5)
    total = indicator(O) + indicator(P)
    assert np.array_equal(total.values == 2, O.mask & P.mask)


def test_add_identity_and_positivity(disk, rng):
    f, g = random_fn(disk, rng), random_fn(disk, rng)
    assert add(f, zero(disk)) == f
    assert leq(f, add(f, g))
    assert f <= f + g


def test_add_commutes_and_associates(disk, rng):
    f, g, h = (random_fn(disk, rng) for _ in range(3))
    assert f + g == g + f
    assert (f + g) + h == f + (g + h)


def test_add_preserves_order(disk, rng):
    f, extra, h = (random_fn(disk, rng) for _ in range(3))
    g = f + extra
    assert f <= g
    assert f + h <= g + h
    assert add(h, f) <= add(h, g)


def test_infinity_absorbs(disk, rng):
    f = random_fn(disk, rng)
    assert (add(constant(disk, INF), f).values == math.inf).all()


def test_region_mismatch(disk, segment):
    with pytest.raises(RegionMismatch):
        add(zero(disk), zero(segment))


@pytest.mark.parametrize("values", [[-1.0], [0.5], [float('nan')]])
def test_values_must_be_extended_naturals(values):
    region = Region.from_points([0], 0.1)
    with pytest.raises(PreconditionError):
        LscFn(region, np.array(values))


def test_way_below_nested_indicators(fine):
    assert fine.h < 0.05
    assert way_below(indicator(ball(fine, 0, 0.4)), indicator(ball(fine, 0, 0.5)))


def test_way_below_fails_on_itself(fine):
    f = indicator(ball(fine, 0, 0.4))
    assert not way_below(f, f)


def test_zero_is_way_below_everything(fine):
    assert way_below(zero(fine), zero(fine))
    assert way_below(zero(fine), indicator(ball(fine, 0, 0.1)))


def test_infinite_function_is_not_compact(fine):
    assert not way_below(constant(fine, INF), constant(fine, INF))


def test_way_below_then_below(fine):
    f = indicator(ball(fine, 0, 0.3))
    g = indicator(ball(fine, 0, 0.45))
    h = g + indicator(ball(fine, 0.3, 0.2))
    assert way_below(f, g) and leq(g, h)
    assert way_below(f, h)


def test_indicator_respects_inclusion(disk):
    assert leq(indicator(ball(disk, 0, 0.3)), indicator(ball(disk, 0, 0.6)))


def test_restrict(disk, rng):
    f = random_fn(disk, rng)
    assert restrict(f, disk.everything()) == f
    assert restrict(f, empty_set(disk)) == zero(disk)
    left = SampleSet(disk, disk.points.real < 0)
    right = left.complement()
    assert restrict(f, left) + restrict(f, right) == f


def test_supremum_of_increasing_chain(disk):
    chain = [indicator(ball(disk, 0, r)) for r in (0.2, 0.4, 0.6)]
    assert supremum(chain) == chain[-1]
    with pytest.raises(PreconditionError):
        supremum(chain[::-1])


def test_supremum_commutes_with_addition(disk, rng):
    chain = [indicator(ball(disk, 0.1j, r)) for r in (0.1, 0.3, 0.5, 0.9)]
    g = random_fn(disk, rng)
    assert supremum([f + g for f in chain]) == supremum(chain) + g
    g = constant(disk, INF)
    assert supremum([f + g for f in chain]) == supremum(chain) + g


def test_level_sets_and_scaling(disk, rng):
    f = random_fn(disk, rng)
    assert np.array_equal(level_set(f, 2).mask, f.values >= 2)
    assert scale(f, 3) == f + f + f
    assert scale(f, 0) == zero(disk)
    assert len(list(levels(f))) == int(f.top())
