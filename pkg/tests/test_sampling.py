import numpy as np
import pytest

from rkhsfactor.sampling import SplitMix64, radial_grid, uniform_ball_points, uniform_disc, \
    uniform_disc_points


def test_splitmix64_reference_stream():
    # published reference outputs of splitmix64 seeded with 1234567
    g = SplitMix64(1234567)
    assert [g.next_u64() for _ in range(5)] == [
        6457827717110365317, 3203168211198807973, 9817491932198370423,
        4593380528125082431, 16408922859458223821]


def test_float_uses_top_53_bits():
    a, b = SplitMix64(99), SplitMix64(99)
    x = a.next_float()
    assert x == (b.next_u64() >> 11) * 2.0 ** -53
    assert 0.0 <= x < 1.0


def test_disc_points_deterministic_and_inside():
    p = uniform_disc_points(200, seed=5, radius=0.9)
    np.testing.assert_array_equal(p, uniform_disc_points(200, seed=5, radius=0.9))
    assert np.all(np.abs(p) < 0.9)
    assert not np.array_equal(p, uniform_disc_points(200, seed=6, radius=0.9))


def test_disc_points_roughly_uniform():
    p = uniform_disc_points(4000, seed=1)
    # fraction inside radius 1/2 should be about 1/4
    assert abs(np.mean(np.abs(p) < 0.5) - 0.25) < 0.03


def test_ball_points_inside():
    p = uniform_ball_points(300, 3, seed=2, radius=0.7)
    assert p.shape == (300, 3)
    assert np.all(np.linalg.norm(p, axis=1) < 0.7)


def test_uniform_disc_appends_extra_points_last():
    s = uniform_disc(4, seed=1, extra=[0.5, -0.25])
    assert s.n == 6
    assert s.z[4] == 0.5 and s.z[5] == -0.25


def test_radial_grid_radius_major():
    g = radial_grid([0.1, 0.2], [0.0, np.pi])
    np.testing.assert_allclose(g, [0.1, -0.1, 0.2, -0.2], atol=1e-15)
