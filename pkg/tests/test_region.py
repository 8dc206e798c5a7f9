import numpy as np
import pytest

from config import DomainError, PreconditionError
from region import (Ball, OpenSet, Region, SampleSet, annulus, ball, empty_set, farthest_point_net,
                    peak_function, sphere, tent_function, thicken)


def test_thicken_by_zero_is_identity(disk):
    O = ball(disk, 0, 0.5)
    assert thicken(O, 0) is O


def test_thicken_membership(disk):
    assert thicken(ball(disk, 0, 0.5), 0.5).contains(0.9)[0]
    assert not ball(disk, 0, 0.5).contains(0.9)[0]


def test_ball_membership_is_strict(segment):
    assert not ball(segment, 0, 0.5).contains(0.5)[0]
    assert ball(segment, 0, 0.5).contains(0.4999)[0]


@pytest.mark.parametrize("r, s", [(0.05, 0.1), (0.1, 0.3), (0.2, 0.2)])
def test_thicken_monotone(disk, r, s):
    O = OpenSet(disk, (Ball(0.2, 0.3), Ball(-0.5j, 0.1)))
    Or, Os = thicken(O, r), thicken(O, s)
    assert not (O.mask & ~Or.mask).any()
    assert not (Or.mask & ~Os.mask).any()


def test_iterated_thickening_of_ball_unions(disk):
    O = OpenSet(disk, (Ball(0.1, 0.25), Ball(0.6j, 0.125)))
    assert np.array_equal(thicken(thicken(O, 0.125), 0.25).mask, thicken(O, 0.375).mask)


def test_iterated_thickening_of_sample_sets_stays_inside(segment):
    A = SampleSet(segment, np.arange(len(segment)) < 3)
    twice = A.thicken(0.07).thicken(0.08)
    assert twice.issubset(A.thicken(0.15))


def test_annulus_membership(disk):
    R = annulus(disk, 0, 1, 0.1)
    assert R.contains(0.95)[0]
    assert not R.contains(0)[0]
    assert not R.contains(0.9)[0]


@pytest.mark.parametrize("eps", [0, 1, 1.5])
def test_annulus_rejects_bad_width(disk, eps):
    with pytest.raises(PreconditionError):
        annulus(disk, 0, 1, eps)


def test_peak_function_at_center(disk):
    value = peak_function(ball(disk, 0, 0.5), 0)
    assert 0.5 <= value <= 0.5 + disk.h


def test_peak_function_vanishes_off_the_set(disk):
    assert peak_function(ball(disk, 0, 0.5), 0.8) == 0.0


def test_peak_function_support_is_the_set(segment):
    O = ball(segment, 0.3, 0.2)
    support = np.array([peak_function(O, z) > 0 for z in segment.points])
    assert np.array_equal(support, O.mask)


def test_peak_function_is_lipschitz(disk):
    O = ball(disk, 0.2 - 0.1j, 0.6)
    pts = disk.points[::3]
    values = np.array([peak_function(O, z) for z in pts])
    gaps = np.abs(values[:, None] - values[None, :])
    assert (gaps <= np.abs(pts[:, None] - pts[None, :]) + disk.h + 1e-12).all()


def test_empty_set(disk):
    assert empty_set(disk).is_empty()
    assert not empty_set(disk).contains(0)[0]


def test_region_rejects_duplicates_and_bad_resolution():
    with pytest.raises(PreconditionError):
        Region.from_points([0, 1, 0], 0.1)
    with pytest.raises(PreconditionError):
        Region.from_points([0, 1], 0)


def test_region_diameter(segment):
    assert segment.diameter == pytest.approx(1.0)


def test_refine_adds_only_new_points(segment):
    refined = segment.refine([0.125, 0.125, 0.5])
    assert len(refined) == len(segment) + 1
    assert refined.index_of(0.125)[0] >= 0


def test_refine_rejects_uncovered_points(segment):
    with pytest.raises(DomainError):
        segment.refine([2.0])


def test_disk_covers_its_continuum(rng):
    region = Region.disk(1.0, 0.1)
    r = np.sqrt(rng.uniform(0, 1, 500))
    zs = r * np.exp(2j * np.pi * rng.uniform(0, 1, 500))
    assert region.covers(zs).all()


@pytest.mark.parametrize("radius", [0.1, 0.25, 0.6])
def test_farthest_point_net_covers(disk, radius):
    centers = farthest_point_net(disk, radius)
    assert centers[0] == disk.leftmost()
    assert (disk.distances[:, centers].min(axis=1) < radius).all()


def test_sample_set_geometry(segment):
    idx = np.arange(len(segment))
    left = SampleSet(segment, idx <= 4)
    right = SampleSet(segment, idx >= 10)
    assert left.diameter() == pytest.approx(0.2)
    assert left.distance_to(right) == pytest.approx(0.3)
    assert (left & right).is_empty()
    assert len(left | right) == len(left) + len(right)
    assert (left - left).is_empty()


def test_sphere_points_near_radius(disk):
    S = sphere(disk, 0, 0.5)
    assert not S.is_empty()
    assert (np.abs(np.abs(S.points) - 0.5) < disk.h).all()


def test_tent_function(segment):
    Y = SampleSet(segment, np.abs(segment.points - 0.5) < 0.01)
    g = tent_function(Y, 0.2)
    assert g(0.5)[0] == pytest.approx(1.0)
    assert g(0.6)[0] == pytest.approx(0.5)
    assert g(0.9)[0] == 0.0
    zs = segment.points
    values = g(zs)
    assert (np.abs(np.subtract.outer(values, values)) <= np.abs(np.subtract.outer(zs, zs)) / 0.2 + 1e-12).all()
