"""PAM constellations, the linear Gaussian channel, and reproducible noise."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .linalg import as_matrix


@dataclass(frozen=True)
class Constellation:
    """Uniform PAM alphabet ``scale * (2m - 1 - M)``, m = 1..M, M = 2**bits_per_symbol.

    ``power`` is the mean energy of the points under a uniform input. A
    zero-bit constellation is the single point {0} and therefore has zero
    power whatever was requested.
    """

    bits_per_symbol: int
    power: float
    scale: float
    points: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def mean_power(self) -> float:
        return float(np.mean(self.points**2))


def _pam(bits: int, power: float) -> Constellation:
    if isinstance(bits, bool) or int(bits) != bits or bits < 0:
        raise InvalidInputError(f"bits must be a nonnegative integer, got {bits!r}")
    bits = int(bits)
    if not np.isfinite(power) or power < 0:
        raise InvalidInputError(f"power must be finite and >= 0, got {power!r}")
    if bits == 0:
        return Constellation(0, 0.0, 0.0, np.zeros(1))
    m_levels = 2**bits
    scale = float(np.sqrt(3.0 * power / (m_levels * m_levels - 1.0)))
    odd = np.arange(1 - m_levels, m_levels, 2, dtype=float)
    return Constellation(bits, float(power), scale, scale * odd)


def make_constellation_ptp(bits: int, power: float) -> Constellation:
    """Point-to-point subchannel alphabet with ``2**bits`` points and mean energy ``power``.

    >>> make_constellation_ptp(2, 5.0).points
    array([-3., -1.,  1.,  3.])
    """
    return _pam(bits, power)


def make_constellation_bc(bits: int, power: float) -> Constellation:
    """Broadcast subchannel alphabet for a budget of ``bits`` one-bit ADCs.

    Each stored sample is refined over two channel-uses, so the alphabet
    has ``2**(2*bits)`` points.
    """
    if isinstance(bits, bool) or int(bits) != bits or bits < 0:
        raise InvalidInputError(f"bits must be a nonnegative integer, got {bits!r}")
    return _pam(2 * int(bits), power)


def _generator(seed: int, *key: int) -> np.random.Generator:
    # Philox is counter based; the spawn key selects an independent stream.
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


class NoiseStream:
    """Unit-variance Gaussian samples identified by ``(seed, stream_id)``.

    Two streams built from the same pair yield bitwise-identical samples;
    distinct ids give independent streams. Each concurrent task should own
    its stream.
    """

    def __init__(self, seed: int, stream_id: int | tuple[int, ...] = 0):
        self.seed = int(seed)
        self.stream_id = stream_id
        key = stream_id if isinstance(stream_id, tuple) else (stream_id,)
        self._rng = _generator(self.seed, 0, *key)

    def normal(self, size) -> np.ndarray:
        return self._rng.standard_normal(size)

    def __repr__(self):
        return f"NoiseStream(seed={self.seed}, stream_id={self.stream_id!r})"


def symbol_generator(seed: int, *key: int) -> np.random.Generator:
    """Generator for transmitted symbol indices, independent of every NoiseStream."""
    return _generator(seed, 1, *key)


def apply_channel(h, x, noise: NoiseStream | None = None) -> np.ndarray:
    """Return ``h @ x + n``.

    ``x`` may be a vector of length cols(h) or a cols(h) x n block of
    channel-uses. ``noise=None`` is the noiseless mode used in tests.
    """
    h = as_matrix(h)
    x = np.asarray(x, dtype=float)
    if x.shape[0] != h.shape[1]:
        raise InvalidInputError(f"input has {x.shape[0]} rows, channel expects {h.shape[1]}")
    y = h @ x
    if noise is not None:
        y = y + noise.normal(y.shape)
    return y


def snr_db_to_power(snr_db: float) -> float:
    """Transmit power for a given SNR in dB (noise variance is 1)."""
    return float(10.0 ** (snr_db / 10.0))


def power_to_snr_db(power: float) -> float:
    return float(10.0 * np.log10(power)) if power > 0 else float("-inf")
