"""Seeded random-number utilities for the simulator.

All randomness flows through RngStream, a thin wrapper around numpy's
PCG64 generator. The generator algorithm is fixed project-wide so that a
seed pins the entire simulation trajectory: two streams built from the
same seed (and the same child-key path) emit identical sequences.

Child streams are derived from (seed, *keys) via numpy's SeedSequence,
which lets callers key independent draws by structural position (e.g.
round and agent id) instead of by call order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class RngStream:
    """A deterministic random stream owned by exactly one consumer.

    Parameters
    ----------
    seed : int
        64-bit unsigned seed. Identical seeds give identical streams.
    key : tuple of ints
        Derivation path relative to the seed; used by child().
    """

    def __init__(self, seed: int, key: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        self._gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence([self.seed, *self.key]))
        )

    def child(self, *keys: int) -> "RngStream":
        """Derive an independent stream keyed by (seed, *self.key, *keys)."""
        return RngStream(self.seed, self.key + tuple(keys))

    def uniform(self, lo: float, hi: float, size=None):
        return self._gen.uniform(lo, hi, size)

    def integers(self, lo: int, hi: int, size=None):
        return self._gen.integers(lo, hi, size)

    def shuffle(self, array) -> None:
        self._gen.shuffle(array)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, key={self.key})"


@dataclass(frozen=True)
class PowerLawSpec:
    """Bounded power-law (Pareto) distribution parameters.

    Density ~ x^(-alpha) on [x_min, x_max]. Requires alpha > 1 and
    x_max > x_min > 0.
    """

    alpha: float = 3.0
    x_min: float = 1e-6
    x_max: float = 1.0

    def __post_init__(self):
        if not (self.x_max > self.x_min > 0):
            raise ValueError(
                f"power-law bounds must satisfy x_max > x_min > 0, "
                f"got x_min={self.x_min}, x_max={self.x_max}"
            )
        if not self.alpha > 1:
            raise ValueError(f"power-law exponent must exceed 1, got {self.alpha}")


def uniform(rng: RngStream, lo: float, hi: float) -> float:
    """Draw one uniform value in [lo, hi)."""
    if not lo < hi:
        raise ValueError(f"uniform bounds must satisfy lo < hi, got [{lo}, {hi})")
    return float(rng.uniform(lo, hi))


def power_law_inverse_cdf(u, spec: PowerLawSpec):
    """Map uniform u in [0, 1] to the bounded power-law quantile.

    x = [x_min^(1-a) + u * (x_max^(1-a) - x_min^(1-a))]^(1/(1-a))

    Monotone increasing in u; u=0 gives x_min, u=1 gives x_max. Output is
    clipped to [x_min, x_max] to guard against float round-off at the ends.
    """
    e = 1.0 - spec.alpha
    lo = spec.x_min**e
    hi = spec.x_max**e
    x = (lo + np.asarray(u) * (hi - lo)) ** (1.0 / e)
    return np.clip(x, spec.x_min, spec.x_max)


def power_law_weight(rng: RngStream, spec: PowerLawSpec, size=None):
    """Sample bounded power-law values via inverse-transform sampling."""
    u = rng.uniform(0.0, 1.0, size)
    x = power_law_inverse_cdf(u, spec)
    return float(x) if size is None else x


def fluctuation(rng: RngStream, k: int, magnitude: float) -> np.ndarray:
    """k-vector of independent uniform noise on [-magnitude, +magnitude]."""
    if magnitude < 0:
        raise ValueError(f"fluctuation magnitude must be >= 0, got {magnitude}")
    if magnitude == 0.0:
        return np.zeros(k)
    return rng.uniform(-magnitude, magnitude, k)
