"""
Receiver models built from one-bit threshold ADCs.

* :class:`AtRxConfig` / :func:`at_rx_run` -- the generic adaptive-threshold
  receiver, run causally one channel-use at a time.
* :func:`sar_ptp_run` -- ``n`` one-bit ADCs pipelined into a ``2**n``-level
  uniform quantizer, one new sample per channel-use.
* :func:`sar_bc_run` -- ``n`` one-bit ADCs refining one sample every two
  channel-uses into a ``2**(2n)``-level uniform quantizer (time sharing
  between two broadcast users).
* :func:`one_shot_channel` -- fixed thresholds, no memory: the discrete
  channel seen through it.
* :func:`build_uniform_quantizer` -- the reference quantizer the SAR
  constructions must reproduce.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InvalidInputError
from .infotheory import DmcMatrix, gaussian_cell_probability
from .linalg import as_matrix


def sign(x):
    """One-bit ADC: +1 where ``x >= 0``, else -1 (so sign(0) = +1)."""
    out = np.where(np.asarray(x) >= 0, 1, -1)
    return int(out) if out.ndim == 0 else out


def _check_bits(bits, name="bits"):
    if isinstance(bits, bool) or int(bits) != bits or bits < 1:
        raise InvalidInputError(f"{name} must be an integer >= 1, got {bits!r}")
    return int(bits)


# --------------------------------------------------------------------------
# adaptive-threshold receiver


@dataclass(frozen=True)
class AtRxConfig:
    """Receiver tuple (n, v, t, b, u).

    ``spatial`` v is n_q x n_r, ``fixed_thresholds`` t has length n_q,
    ``temporal`` b is an upper-triangular n x n matrix and
    ``adaptive_coeffs`` u a strictly upper-triangular n x n matrix, n being
    the block length.
    """

    spatial: np.ndarray
    fixed_thresholds: np.ndarray
    temporal: np.ndarray
    adaptive_coeffs: np.ndarray

    def __post_init__(self):
        v = as_matrix(self.spatial)
        t = np.atleast_1d(np.asarray(self.fixed_thresholds, dtype=float))
        b = as_matrix(self.temporal)
        u = as_matrix(self.adaptive_coeffs)
        if t.shape != (v.shape[0],):
            raise InvalidInputError(f"fixed_thresholds has length {t.size}, spatial matrix has {v.shape[0]} rows")
        if not np.all(np.isfinite(t)):
            raise InvalidInputError("fixed_thresholds must be finite")
        n = b.shape[0]
        if b.shape != (n, n) or u.shape != (n, n):
            raise InvalidInputError(f"temporal {b.shape} and adaptive {u.shape} matrices must both be n x n")
        if np.any(np.tril(b, -1) != 0):
            raise ConfigurationError("temporal matrix b must be upper-triangular")
        if np.any(np.tril(u) != 0):
            raise ConfigurationError("adaptive threshold matrix u must be strictly upper-triangular")
        for name, value in (("spatial", v), ("fixed_thresholds", t), ("temporal", b), ("adaptive_coeffs", u)):
            object.__setattr__(self, name, value)

    @property
    def block_length(self) -> int:
        return self.temporal.shape[0]

    @property
    def num_adcs(self) -> int:
        return self.spatial.shape[0]

    @property
    def num_antennas(self) -> int:
        return self.spatial.shape[1]


@dataclass
class AtRxState:
    """Mutable state of one receiver run.

    ``stored_outputs[:, j]`` holds the ADC outputs of channel-use j for
    j < channel_use_index and zeros afterwards; ``stored_inputs`` plays the
    role of the delay elements.
    """

    channel_use_index: int
    stored_outputs: np.ndarray
    stored_inputs: np.ndarray


class AtRxReceiver:
    """Steps an :class:`AtRxConfig` through a block, one received column at a time."""

    def __init__(self, cfg: AtRxConfig):
        self.cfg = cfg
        n = cfg.block_length
        self.state = AtRxState(0, np.zeros((cfg.num_adcs, n)), np.zeros((cfg.num_antennas, n)))

    def step(self, y_column) -> np.ndarray:
        cfg, st = self.cfg, self.state
        i = st.channel_use_index
        if i >= cfg.block_length:
            raise InvalidInputError("block already complete")
        y = np.asarray(y_column, dtype=float).reshape(-1)
        if y.shape != (cfg.num_antennas,):
            raise InvalidInputError(f"received column has length {y.size}, expected {cfg.num_antennas}")
        st.stored_inputs[:, i] = y
        # column i of Y b and of W u; only columns <= i (resp. < i) are nonzero terms
        y_bar = st.stored_inputs[:, : i + 1] @ cfg.temporal[: i + 1, i]
        t_adapt = st.stored_outputs[:, :i] @ cfg.adaptive_coeffs[:i, i]
        w = sign(cfg.spatial @ y_bar + t_adapt + cfg.fixed_thresholds)
        st.stored_outputs[:, i] = w
        st.channel_use_index = i + 1
        return w

    def run(self, received) -> np.ndarray:
        for i in range(received.shape[1]):
            self.step(received[:, i])
        return self.state.stored_outputs.astype(int)


def at_rx_run(cfg: AtRxConfig, received) -> np.ndarray:
    """ADC output matrix (n_q x n, entries +-1) for a received block Y (n_r x n).

    Channel-use i sees ``v @ (Y b)[:, i] + (W u)[:, i] + t``; the
    triangular structure of b and u means only inputs up to i and ADC
    outputs before i are used.
    """
    y = as_matrix(received)
    if y.shape != (cfg.num_antennas, cfg.block_length):
        raise InvalidInputError(
            f"received block has shape {y.shape}, expected {(cfg.num_antennas, cfg.block_length)}"
        )
    return AtRxReceiver(cfg).run(y)


# --------------------------------------------------------------------------
# uniform scalar quantizer


@dataclass(frozen=True)
class QuantizerSpec:
    """Scalar quantizer with strictly increasing ``boundaries``.

    Bin k is ``[boundaries[k-1], boundaries[k])``; values on a boundary go
    to the upper bin and values beyond the outermost boundaries saturate.
    """

    boundaries: np.ndarray
    centers: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        b = np.atleast_1d(np.asarray(self.boundaries, dtype=float))
        if b.size and (not np.all(np.isfinite(b)) or np.any(np.diff(b) <= 0)):
            raise InvalidInputError("quantizer boundaries must be finite and strictly increasing")
        object.__setattr__(self, "boundaries", b)

    @property
    def num_bins(self) -> int:
        return self.boundaries.size + 1

    @property
    def labels(self) -> np.ndarray:
        return np.arange(self.num_bins)

    def quantize(self, y):
        out = np.searchsorted(self.boundaries, np.asarray(y, dtype=float), side="right")
        return int(out) if out.ndim == 0 else out


def build_uniform_quantizer(bits: int, scale: float, gain: float) -> QuantizerSpec:
    """Symmetric uniform quantizer with ``2**bits`` bins and step ``2*scale*gain``.

    Boundaries sit at the even multiples of ``scale*gain`` up to
    ``+-2*(2**(bits-1) - 1)*scale*gain``; bin centres are the received
    constellation points ``gain*scale*(2k - 1 - M)``.
    """
    bits = _check_bits(bits)
    if not (scale > 0 and gain > 0 and np.isfinite(scale * gain)):
        raise InvalidInputError(f"scale and gain must be positive, got scale={scale}, gain={gain}")
    half = 2 ** (bits - 1)
    step = scale * gain
    if step == 0.0:
        raise InvalidInputError(f"step scale*gain underflows to zero (scale={scale}, gain={gain})")
    m = np.arange(-(half - 1), half, dtype=float)
    levels = 2**bits
    centers = step * np.arange(1 - levels, levels, 2, dtype=float)
    return QuantizerSpec(2.0 * m * step, centers)


# --------------------------------------------------------------------------
# successive-approximation constructions


def sar_ptp_decisions(bits: int, normalized_input) -> np.ndarray:
    """Decision matrix of the pipelined point-to-point SAR quantizer.

    Entry ``[j-1, i-1]`` is the weighted output of ADC j at channel-use i
    (1-based), i.e. ``2**(bits-j) * sign(y[i-j+1] - sum of the decisions
    the higher-significance ADCs took on that sample)``; zero where the ADC
    is idle during pipeline fill and flush. Shape is bits x (n + bits - 1).
    """
    bits = _check_bits(bits)
    y = np.asarray(normalized_input, dtype=float).reshape(-1)
    n = y.size
    w = np.zeros((bits, n + bits - 1))
    partial = np.zeros(n)
    for j in range(1, bits + 1):
        # ADC j works on sample i-j+1 at channel-use i, i = j .. n+j-1
        active = slice(j - 1, n + j - 1)
        w[j - 1, active] = 2.0 ** (bits - j) * sign(y - partial)
        partial = partial + w[j - 1, active]
    return w


def _levels_to_index(level_sum: np.ndarray, num_levels: int) -> np.ndarray:
    return ((level_sum + num_levels - 1) // 2).astype(np.int64)


def sar_ptp_run(bits: int, normalized_input) -> np.ndarray:
    """Bin index of every sample after ``bits`` one-bit ADCs in pipeline.

    The input is the subchannel output divided by ``a*sigma``; the result
    equals ``build_uniform_quantizer(bits, a, sigma)`` applied per sample.
    """
    w = sar_ptp_decisions(bits, normalized_input)
    n = w.shape[1] - w.shape[0] + 1
    level_sum = np.zeros(n)
    for j in range(w.shape[0]):
        level_sum += w[j, j : j + n]
    return _levels_to_index(np.rint(level_sum), 2**w.shape[0])


def bc_sar_schedule(bits_budget: int, num_samples: int) -> np.ndarray:
    """Which sample each ADC refines at each channel-use (-1 when idle).

    Samples arrive every second channel-use; sample l goes to ADC
    ``l mod bits_budget``, which spends the next ``2*bits_budget``
    channel-uses on it. Shape is bits_budget x (2*(num_samples-1) + 2*bits_budget).
    """
    nq = _check_bits(bits_budget, "bits_budget")
    if num_samples < 0:
        raise InvalidInputError("num_samples must be >= 0")
    steps = 2 * nq
    horizon = 2 * max(num_samples - 1, 0) + steps
    samples = np.repeat(np.arange(num_samples), steps)
    uses = 2 * samples + np.tile(np.arange(steps), num_samples)
    adcs = samples % nq
    load = np.zeros((nq, horizon), dtype=np.int64)
    np.add.at(load, (adcs, uses), 1)
    if np.any(load > 1):
        adc, use = np.argwhere(load > 1)[0]
        raise ConfigurationError(f"ADC {adc} double-booked at channel-use {use}")
    sched = np.full((nq, horizon), -1, dtype=np.int64)
    sched[adcs, uses] = samples
    return sched


def sar_bc_run(bits_budget: int, sampled_input) -> np.ndarray:
    """Bin index of every broadcast sample after ``2*bits_budget`` refinements.

    Follows :func:`bc_sar_schedule`: each channel-use an ADC takes one
    sign decision on its stored sample, weight ``2**(2*bits_budget - r)``
    at refinement step r. The result equals
    ``build_uniform_quantizer(2*bits_budget, a, sigma)`` applied per sample.
    """
    nq = _check_bits(bits_budget, "bits_budget")
    y = np.asarray(sampled_input, dtype=float).reshape(-1)
    n = y.size
    steps = 2 * nq
    sched = bc_sar_schedule(nq, n)
    ell = np.arange(n)
    partial = np.zeros(n)
    # refinements of different samples never interact, so step r is taken
    # for every sample at once, at the slot the schedule assigns it
    for r in range(1, steps + 1):
        owner = sched[ell % nq, 2 * ell + r - 1]
        if np.any(owner != ell):
            raise ConfigurationError(f"schedule does not give step {r} to its sample")
        partial += 2.0 ** (steps - r) * sign(y - partial)
    return _levels_to_index(np.rint(partial), 2**steps)


# --------------------------------------------------------------------------
# one-shot receiver


def one_shot_channel(thresholds, spatial, input_points, channel_gain=1.0) -> DmcMatrix:
    """Discrete channel from ``input_points`` to the one-shot ADC output vector.

    Each ADC k outputs ``sign(v_k * y + t_k)`` with ``y = h x + N`` a scalar
    observation. Output cells are the intervals between the effective
    switching points ``-t_k / v_k``; cells that produce the same output
    vector (e.g. duplicate thresholds) are merged.

    Parameters
    ----------
    thresholds : array_like, length n_q
        Fixed threshold vector t.
    spatial : array_like, n_q x 1
        Combiner v for a single receive antenna.
    input_points : array_like
        K scalars, or K x n_t transmit vectors.
    channel_gain : float or array_like (1 x n_t)
        Scalar gain or channel row h.

    Returns
    -------
    DmcMatrix
        Labels are the input points and the realizable output sign tuples.
    """
    t = np.atleast_1d(np.asarray(thresholds, dtype=float))
    v = np.asarray(spatial, dtype=float).reshape(-1)
    if v.shape != t.shape:
        raise InvalidInputError(f"spatial combiner has {v.size} entries for {t.size} thresholds")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
        raise InvalidInputError("thresholds and combiner must be finite")

    x = np.asarray(input_points, dtype=float)
    h = np.asarray(channel_gain, dtype=float)
    if h.ndim == 0:
        if x.ndim != 1:
            raise InvalidInputError("scalar gain needs scalar input points")
        means = float(h) * x
    else:
        h = h.reshape(-1)
        pts = x.reshape(len(x), -1) if x.ndim > 1 else x.reshape(-1, 1)
        if pts.shape[1] != h.size:
            raise InvalidInputError(f"input points have dimension {pts.shape[1]}, channel row has {h.size}")
        means = pts @ h
    if not np.all(np.isfinite(means)):
        raise InvalidInputError("input points must be finite")

    active = v != 0
    switch = np.unique(-t[active] / v[active])
    edges = np.concatenate(([-np.inf], switch, [np.inf]))
    # a representative point inside each interval fixes its output vector
    reps = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if np.isinf(lo) and np.isinf(hi):
            reps.append(0.0)
        elif np.isinf(lo):
            reps.append(hi - 1.0)
        elif np.isinf(hi):
            reps.append(lo + 1.0)
        else:
            reps.append(0.5 * (lo + hi))
    words = [tuple(int(s) for s in sign(v * r + t)) for r in reps]

    cell_probs = gaussian_cell_probability(edges[None, :-1] - means[:, None], edges[None, 1:] - means[:, None])
    labels: list[tuple] = []
    columns: list[np.ndarray] = []
    for word, col in zip(words, cell_probs.T):
        if word in labels:
            columns[labels.index(word)] = columns[labels.index(word)] + col
        else:
            labels.append(word)
            columns.append(col)
    in_labels = tuple(map(tuple, x.reshape(len(x), -1).tolist())) if x.ndim > 1 else tuple(x.tolist())
    return DmcMatrix(np.column_stack(columns), in_labels, tuple(labels))
