"""Seeded point generators.

Random points come from SplitMix64 so that any implementation can reproduce
them bit for bit:

    state += 0x9E3779B97F4A7C15 (mod 2**64)
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 (mod 2**64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB (mod 2**64)
    return z ^ (z >> 31)

A uniform double in [0, 1) is ``(next() >> 11) * 2**-53``.  Disc points are
drawn by rejection from the square ``[-1, 1]^2`` (real part first, then
imaginary part) and then scaled by ``radius``; ball points in ``C^d`` use the
cube ``[-1, 1]^(2d)`` with coordinates ordered ``re z1, im z1, re z2, ...``.
"""

from __future__ import annotations

import numpy as np

from .kernels import SampleSet

_MASK = (1 << 64) - 1


class SplitMix64:
    """Minimal 64-bit SplitMix generator."""

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def next_float(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def symmetric(self) -> float:
        return 2.0 * self.next_float() - 1.0


def uniform_ball_points(n: int, d: int, seed: int, radius: float = 1.0) -> np.ndarray:
    """``n`` points uniform in the ball of ``C^d`` with the given radius, shape (n, d)."""
    if n < 0 or d < 1:
        raise ValueError("need n >= 0 and d >= 1")
    if not 0.0 < radius <= 1.0:
        raise ValueError("radius must lie in (0, 1]")
    rng = SplitMix64(seed)
    out = np.empty((n, d), dtype=complex)
    i = 0
    while i < n:
        xs = [rng.symmetric() for _ in range(2 * d)]
        if sum(x * x for x in xs) < 1.0:
            out[i] = [complex(xs[2 * k], xs[2 * k + 1]) for k in range(d)]
            i += 1
    return radius * out


def uniform_disc_points(n: int, seed: int, radius: float = 1.0) -> np.ndarray:
    """``n`` points uniform in the disc of the given radius, shape (n,)."""
    return uniform_ball_points(n, 1, seed, radius)[:, 0]


def radial_grid(radii, thetas) -> np.ndarray:
    """Points ``r e^{i theta}`` ordered radius-major."""
    return np.array([r * np.exp(1j * t) for r in radii for t in thetas], dtype=complex)


def uniform_disc(n: int, seed: int, radius: float = 1.0, extra=()) -> SampleSet:
    """Sample set of ``n`` seeded disc points followed by the ``extra`` points."""
    pts = list(uniform_disc_points(n, seed, radius)) + [complex(z) for z in extra]
    return SampleSet.from_points(pts)


def uniform_ball(n: int, d: int, seed: int, radius: float = 1.0) -> SampleSet:
    return SampleSet(uniform_ball_points(n, d, seed, radius))
