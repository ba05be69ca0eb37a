import numpy as np
import pytest
from hypothesis import given, strategies as st

from orey.errors import AlignmentError, DomainError, ParameterError, SizeError
from orey.partition import (Partition, from_csv, is_subpartition, make_alternating,
                            make_perturbed, make_regular, mesh_stats, ratio_profile, subsample,
                            to_csv)


def test_regular_points():
    assert np.array_equal(make_regular(4, 1.0).times, [0, 0.25, 0.5, 0.75, 1.0])
    assert np.allclose(make_regular(3, 2.0).times, [0, 2 / 3, 4 / 3, 2])


@given(st.integers(3, 5000), st.floats(0.1, 100))
def test_regular_mesh(N, T):
    p = make_regular(N, T)
    stats = mesh_stats(p)
    assert stats.m_n == stats.p_n == T / N
    assert p.times[-1] == T and p.N == N


def test_alternating():
    assert np.array_equal(make_alternating(2, 2, 6.0).times, [0, 1, 3, 4, 6])
    assert np.allclose(make_alternating(1, 5, 1.0).times, make_regular(10, 1.0).times)
    assert mesh_stats(make_alternating(3, 10)).c_ratio == pytest.approx(3)
    assert np.allclose(ratio_profile(make_alternating(2, 4)).values, [0.5, 2] * 3 + [0.5])


def test_perturbed():
    assert make_perturbed(10, 1.0, 1.0, seed=3).is_regular
    assert make_perturbed(50, 1.0, 2.0, seed=7) == make_perturbed(50, 1.0, 2.0, seed=7)
    for s in range(100):
        assert mesh_stats(make_perturbed(100, 1.0, 2.0, seed=s)).c_ratio <= 2.0 + 1e-12


def test_subsample():
    q = subsample(make_regular(8), 2)
    assert q.is_regular and q == make_regular(4)
    assert is_subpartition(q, make_regular(8))
    fine = make_regular(64)
    assert mesh_stats(fine).p_n / mesh_stats(subsample(fine, 2)).m_n == 0.5
    with pytest.raises(AlignmentError):
        subsample(make_regular(9), 2)
    with pytest.raises(SizeError):
        subsample(make_regular(8), 4)
    with pytest.raises(ParameterError):
        subsample(make_regular(8), 1)


def test_ratio_profile():
    assert np.all(ratio_profile(make_regular(16)).values == 1)
    r = ratio_profile(Partition([0, 1, 3, 4]))
    assert np.allclose(r.values, [0.5, 2])
    assert r.lengths.sum() == pytest.approx(4)


@pytest.mark.parametrize("times", [[0, 1, 2], [0.1, 1, 2, 3], [0, 1, 1, 2], [0, 2, 1, 3]])
def test_invalid(times):
    with pytest.raises((DomainError, SizeError)):
        Partition(times)


def test_times_are_read_only():
    p = make_regular(5)
    with pytest.raises(ValueError):
        p.times[1] = 0.3


def test_csv_round_trip(tmp_path):
    for p in (make_regular(12, 3.0), make_perturbed(20, 1.0, 3.0, seed=1)):
        f = tmp_path / "p.csv"
        to_csv(p, f, comment="a partition")
        q = from_csv(f)
        assert q == p and q.is_regular == p.is_regular
