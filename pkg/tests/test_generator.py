import numpy as np
import pytest

from config import PreconditionError
from generator import InstanceGenerator, composition, trial_rng


def test_composition(rng):
    for total, parts in [(1, 1), (5, 5), (10, 3), (64, 32)]:
        split = composition(total, parts, rng)
        assert len(split) == parts
        assert split.sum() == total
        assert (split >= 1).all()


@pytest.mark.parametrize("total, parts", [(3, 4), (3, 0)])
def test_composition_rejects_impossible_splits(rng, total, parts):
    with pytest.raises(PreconditionError):
        composition(total, parts, rng)


def test_trial_streams(disk):
    assert trial_rng(1, 2).random() == trial_rng(1, 2).random()
    assert trial_rng(1, 2).random() != trial_rng(1, 3).random()
    assert trial_rng(1, 2).random() != trial_rng(2, 2).random()


def test_points_are_covered(disk):
    gen = InstanceGenerator(disk)
    points = gen.points(50, gen.rng(0))
    assert disk.covers(points).all()
    with pytest.raises(PreconditionError):
        gen.points(len(disk) + 1, gen.rng(0))


def test_rank_measures(segment):
    gen = InstanceGenerator(segment, (2, 9), (1, 4), seed=3)
    for trial in range(20):
        alpha = gen.rank_measure(gen.rng(trial))
        assert 2 <= alpha.target_dim <= 9
        assert alpha.mass == alpha.target_dim
        assert 1 <= len(alpha.atoms) <= 4
    partial = gen.rank_measure(gen.rng(0), n=6, mass=2)
    assert partial.mass == 2 and partial.target_dim == 6
    assert gen.rank_measure(gen.rng(0), n=4, mass=0).atoms == ()


def test_normal_matrices(disk):
    gen = InstanceGenerator(disk, seed=8)
    x = gen.normal_matrix(gen.rng(0), n=5)
    assert x.n == 5
    assert disk.covers(x.eigenvalues).all()
    y = gen.normal_matrix(gen.rng(0), spectrum=[0.1, 0.2j])
    assert np.allclose(np.sort_complex(y.eigenvalues), np.sort_complex(np.array([0.1, 0.2j])))


def test_instances_are_reproducible(disk):
    first = InstanceGenerator(disk, seed=4).instance(7)
    second = InstanceGenerator(disk, seed=4).instance(7)
    assert first == second
    assert set(first) == {"id", "morphism", "homomorphism", "matrix"}


def test_rejects_bad_ranges(disk):
    with pytest.raises(PreconditionError):
        InstanceGenerator(disk, (0, 3))
    with pytest.raises(PreconditionError):
        InstanceGenerator(disk, (1, 3), (4, 2))


@pytest.mark.parametrize("shape", ["segment", "disk"])
def test_multiscale_atoms_stay_apart(shape, request):
    region = request.getfixturevalue(shape)
    gen = InstanceGenerator(region, (4, 16), (4, 12), seed=5)
    for trial in range(10):
        alpha = gen.multiscale_measure(gen.rng(trial))
        assert alpha.mass == alpha.target_dim
        assert 1 <= len(alpha.atoms) <= min(12, alpha.target_dim)
        assert region.covers(alpha.locations).all()
        gaps = np.abs(alpha.locations[:, None] - alpha.locations[None, :])
        np.fill_diagonal(gaps, np.inf)
        assert gaps.min() >= 2 * region.h - 1e-12


def test_multiscale_measure_has_no_room(segment):
    gen = InstanceGenerator(segment, seed=5)
    alpha = gen.multiscale_measure(gen.rng(0), n=6, atoms=6, min_gap=2.0)
    assert len(alpha.atoms) == 1 and alpha.mass == 6
