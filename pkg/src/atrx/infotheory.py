"""
Mutual information for the discrete channels and discrete-input AWGN
channels that arise from one-bit ADC receivers.

All quantities are in bits.

.. autosummary::

   gaussian_tail          -- P(N > x) for standard normal N
   mi_dmc                 -- exact MI of a discrete memoryless channel
   blahut_arimoto         -- DMC capacity with a duality-gap certificate
   mi_pam_quantized       -- MI of uniform PAM seen through a scalar quantizer
   mi_pam_continuous      -- MI of uniform PAM over the unquantized AWGN channel
   mi_from_counts         -- plug-in MI of an empirical joint histogram
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.special import logsumexp, ndtr

from .errors import ConvergenceError, InvalidInputError

_LN2 = math.log(2.0)
_STOCHASTIC_TOL = 1e-9


def gaussian_tail(x):
    """Standard normal upper tail ``P(N > x)``.

    Accepts scalars or arrays; ``ndtr`` evaluates the complementary error
    function directly so the relative accuracy holds far into the tail.
    """
    out = ndtr(-np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def gaussian_cell_probability(lo, hi):
    """``P(lo <= N < hi)`` for standard normal N, broadcasting over arrays.

    Subtracts upper tails when the cell lies right of zero and lower tails
    otherwise, which avoids cancellation for cells deep in either tail.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    right = ndtr(-lo) - ndtr(-hi)
    left = ndtr(hi) - ndtr(lo)
    return np.clip(np.where(lo > 0, right, left), 0.0, 1.0)


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


def z_channel_capacity(p: float) -> float:
    """Capacity of the Z-channel whose '1' input flips to '0' with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise InvalidInputError(f"cross-over probability must lie in [0, 1], got {p}")
    if p == 1.0:
        return 0.0
    return float(np.log2(1.0 + (1.0 - p) * p ** (p / (1.0 - p))))


@dataclass(frozen=True)
class DmcMatrix:
    """Row-stochastic transition matrix ``transitions[x, y] = p(y | x)``.

    Rows within 1e-9 of summing to one are renormalized on construction;
    anything further off is rejected.
    """

    transitions: np.ndarray
    input_labels: tuple = ()
    output_labels: tuple = ()

    def __post_init__(self):
        w = np.array(self.transitions, dtype=float)
        if w.ndim != 2 or w.size == 0:
            raise InvalidInputError(f"transition matrix must be 2-D and non-empty, got shape {w.shape}")
        if not np.all(np.isfinite(w)) or np.any(w < -_STOCHASTIC_TOL) or np.any(w > 1 + _STOCHASTIC_TOL):
            raise InvalidInputError("transition probabilities must lie in [0, 1]")
        sums = w.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > _STOCHASTIC_TOL):
            raise InvalidInputError(f"rows do not sum to 1 (max deviation {np.max(np.abs(sums - 1)):.3g})")
        w = np.clip(w, 0.0, 1.0)
        w = w / w.sum(axis=1, keepdims=True)
        object.__setattr__(self, "transitions", w)
        if self.input_labels and len(self.input_labels) != w.shape[0]:
            raise InvalidInputError("input_labels length does not match the number of rows")
        if self.output_labels and len(self.output_labels) != w.shape[1]:
            raise InvalidInputError("output_labels length does not match the number of columns")

    @property
    def num_inputs(self) -> int:
        return self.transitions.shape[0]

    @property
    def num_outputs(self) -> int:
        return self.transitions.shape[1]


@dataclass(frozen=True)
class MiResult:
    value: float
    method: str
    error_estimate: float = 0.0

    def __float__(self):
        return self.value


def _as_dmc(channel) -> DmcMatrix:
    return channel if isinstance(channel, DmcMatrix) else DmcMatrix(np.asarray(channel, dtype=float))


def _row_divergences(w: np.ndarray, q: np.ndarray) -> np.ndarray:
    """D(w[x] || q) for every row, in nats, with 0 log 0 = 0."""
    mask = w > 0
    ratio = np.where(mask, w / np.where(q > 0, q, 1.0), 1.0)
    return np.sum(np.where(mask, w * np.log(ratio), 0.0), axis=1)


def mi_dmc(channel, input_dist: Sequence[float] | None = None) -> MiResult:
    """Exact I(X;Y) of a DMC; ``input_dist`` defaults to uniform."""
    dmc = _as_dmc(channel)
    w = dmc.transitions
    if input_dist is None:
        p = np.full(dmc.num_inputs, 1.0 / dmc.num_inputs)
    else:
        p = np.asarray(input_dist, dtype=float)
        if p.shape != (dmc.num_inputs,):
            raise InvalidInputError(f"input distribution has shape {p.shape}, channel has {dmc.num_inputs} inputs")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise InvalidInputError("input distribution must be nonnegative and sum to 1")
    q = p @ w
    value = float(p @ _row_divergences(w, q)) / _LN2
    value = min(max(value, 0.0), float(np.log2(dmc.num_inputs)))
    return MiResult(value, "exact-dmc", 0.0)


def blahut_arimoto(channel, tolerance: float = 1e-9, max_iter: int = 100_000):
    """Capacity of a DMC by alternating maximization.

    Stops once the gap between ``max_x D(p(.|x) || q)`` (an upper bound on
    capacity) and the current ``I(X;Y)`` falls below ``tolerance`` bits.

    Returns
    -------
    capacity : float
        Lower end of the final bracket, so it lies within ``tolerance`` of
        the true capacity.
    input_dist : ndarray
        The maximizing input distribution found.
    """
    if not tolerance > 0:
        raise InvalidInputError(f"tolerance must be positive, got {tolerance}")
    w = _as_dmc(channel).transitions
    r = np.full(w.shape[0], 1.0 / w.shape[0])
    for _ in range(int(max_iter)):
        d = _row_divergences(w, r @ w)
        lower = float(r @ d) / _LN2
        upper = float(d.max()) / _LN2
        if upper - lower < tolerance:
            return max(lower, 0.0), r
        r = r * np.exp(d - d.max())
        r /= r.sum()
    raise ConvergenceError(f"Blahut-Arimoto did not reach a gap of {tolerance} in {max_iter} iterations")


def pam_quantized_dmc(points, gain: float, boundaries) -> DmcMatrix:
    """Transition matrix from PAM points through ``gain * x + N`` into quantizer bins.

    A value equal to a boundary belongs to the bin above it.
    """
    x = np.asarray(points, dtype=float)
    b = np.asarray(boundaries, dtype=float)
    edges = np.concatenate(([-np.inf], b, [np.inf]))
    mean = gain * x[:, None]
    probs = gaussian_cell_probability(edges[None, :-1] - mean, edges[None, 1:] - mean)
    return DmcMatrix(probs)


def mi_pam_quantized(constellation, gain: float, quantizer) -> MiResult:
    """I(X; q(gain*X + N)) for uniform X over ``constellation.points``."""
    if gain < 0:
        raise InvalidInputError(f"gain must be >= 0, got {gain}")
    boundaries = np.asarray(quantizer.boundaries, dtype=float)
    if not np.all(np.isfinite(boundaries)):
        raise InvalidInputError("quantizer boundaries must be finite")
    return mi_dmc(pam_quantized_dmc(constellation.points, gain, boundaries))


_HERMITE_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _hermite(n: int):
    if n not in _HERMITE_CACHE:
        z, w = hermgauss(n)
        _HERMITE_CACHE[n] = (np.sqrt(2.0) * z, w / np.sqrt(np.pi))
    return _HERMITE_CACHE[n]


def _mi_gauss_mixture(points: np.ndarray, gain: float, nodes: int) -> float:
    # I = log2 M - E_m E_N log2 sum_m' exp(-(d^2 + 2 d N) / 2),  d = gain (x_m - x_m')
    noise, weights = _hermite(nodes)
    d = gain * (points[:, None] - points[None, :])
    expo = -(d[:, :, None] ** 2 + 2.0 * d[:, :, None] * noise[None, None, :]) / 2.0
    inner = logsumexp(expo, axis=1) / _LN2
    return float(np.log2(len(points)) - np.mean(inner @ weights))


def mi_pam_continuous(constellation, gain: float, nodes: int = 127, estimate_error: bool = True) -> MiResult:
    """I(X; gain*X + N) for uniform X, by Gauss-Hermite quadrature.

    The expectation over each mixture component is exactly a Gaussian
    integral, so Hermite nodes centred on that component are used. When
    ``estimate_error`` is set the rule is repeated with twice the nodes and
    the difference is reported.
    """
    if gain < 0:
        raise InvalidInputError(f"gain must be >= 0, got {gain}")
    points = np.asarray(constellation.points, dtype=float)
    if len(points) == 1 or gain == 0 or np.ptp(points) == 0:
        return MiResult(0.0, "quadrature", 0.0)
    value = _mi_gauss_mixture(points, gain, nodes)
    err = abs(_mi_gauss_mixture(points, gain, 2 * nodes) - value) if estimate_error else 0.0
    value = min(max(value, 0.0), float(np.log2(len(points))))
    return MiResult(value, "quadrature", float(err))


def mi_from_counts(joint) -> float:
    """Plug-in I(X;Y) from a joint count table (rows = inputs, columns = outputs)."""
    c = np.asarray(joint, dtype=float)
    total = c.sum()
    if total <= 0:
        return 0.0
    pxy = c / total
    px = pxy.sum(axis=1, keepdims=True)
    py = pxy.sum(axis=0, keepdims=True)
    mask = pxy > 0
    value = np.sum(pxy[mask] * np.log2(pxy[mask] / (px @ py)[mask]))
    return float(max(value, 0.0))
