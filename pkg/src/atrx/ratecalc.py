"""
Achievable rates with adaptive-threshold one-bit ADC receivers.

Point-to-point: the channel is split by its SVD into parallel subchannels,
each given some of the one-bit ADCs (a SAR quantizer with as many bits) and
some of the transmit power; the rate is the best total mutual information
over both allocations.

Broadcast: each user runs the same construction on its own channel but only
every other channel-use carries its data, so each ADC group resolves twice
as many bits per sample at half the sample rate.

The one-shot baselines of the two motivating SISO/MISO examples live here
too.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidInputError
from .infotheory import blahut_arimoto, mi_dmc, mi_pam_continuous, mi_pam_quantized
from .linalg import Point2D, as_matrix, convex_hull_2d, hull_contains, svd
from .receiver import build_uniform_quantizer, one_shot_channel
from .signal_model import make_constellation_ptp

MiFn = Callable[[int, float, float], float]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_SCAN_POINTS = 65
_POWER_TOL = 1e-9
_TIE_MARGIN = 1e-12


# --------------------------------------------------------------------------
# per-subchannel rate functions


def subchannel_mi_quantized(bits: int, power: float, gain: float) -> float:
    """MI of a ``2**bits``-PAM subchannel behind the matching SAR quantizer."""
    if bits == 0 or power <= 0 or gain <= 0:
        return 0.0
    const = make_constellation_ptp(bits, power)
    if const.scale * gain == 0.0:
        # received points closer than the smallest float: nothing is resolvable
        return 0.0
    quant = build_uniform_quantizer(bits, const.scale, gain)
    return mi_pam_quantized(const, gain, quant).value


def subchannel_mi_continuous(bits: int, power: float, gain: float) -> float:
    """MI of the same alphabet over the unquantized subchannel."""
    if bits == 0 or power <= 0 or gain <= 0:
        return 0.0
    return mi_pam_continuous(make_constellation_ptp(bits, power), gain, estimate_error=False).value


def bc_subchannel_mi_quantized(bits: int, power: float, gain: float) -> float:
    """Per-sample MI of a broadcast subchannel with a budget of ``bits`` ADCs."""
    return subchannel_mi_quantized(2 * bits, power, gain)


def bc_subchannel_mi_continuous(bits: int, power: float, gain: float) -> float:
    return subchannel_mi_continuous(2 * bits, power, gain)


# --------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class Allocation:
    """ADC bits and transmit power per subchannel.

    ``bits`` must sum to ``bit_budget`` (defaults to their sum) and the
    powers must sum to ``power_budget`` within 1e-9 when one is given.
    """

    bits: tuple[int, ...]
    powers: tuple[float, ...]
    bit_budget: int | None = None
    power_budget: float | None = None

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        powers = tuple(float(p) for p in self.powers)
        if len(bits) != len(powers) or not bits:
            raise InvalidInputError(f"bits ({len(bits)}) and powers ({len(powers)}) must be equal-length and non-empty")
        if any(b < 0 for b in bits):
            raise InvalidInputError(f"negative bit count in {bits}")
        if any(p < 0 or not math.isfinite(p) for p in powers):
            raise InvalidInputError(f"powers must be finite and >= 0, got {powers}")
        budget = sum(bits) if self.bit_budget is None else int(self.bit_budget)
        if sum(bits) != budget:
            raise InvalidInputError(f"bits {bits} do not sum to the budget {budget}")
        if self.power_budget is not None and abs(sum(powers) - self.power_budget) > _POWER_TOL * max(1.0, self.power_budget):
            raise InvalidInputError(f"powers sum to {sum(powers)}, budget is {self.power_budget}")
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "powers", powers)
        object.__setattr__(self, "bit_budget", budget)
        object.__setattr__(self, "power_budget", sum(powers) if self.power_budget is None else float(self.power_budget))


@dataclass(frozen=True)
class PtpRateResult:
    rate_quantized: float
    rate_continuous: float
    best_allocation: Allocation
    per_subchannel_mi: tuple[float, ...]
    singular_values: tuple[float, ...]
    continuous_allocation: Allocation | None = None


@dataclass(frozen=True)
class RateRegion:
    """Convex, downward-closed region given by its hull vertices."""

    vertices: tuple[Point2D, ...]
    user_rates: tuple[float, float] = (0.0, 0.0)
    allocations: tuple[Allocation | None, Allocation | None] = (None, None)
    user_rates_continuous: tuple[float, float] = (0.0, 0.0)

    @property
    def corner(self) -> Point2D:
        return Point2D(*self.user_rates)

    def contains(self, point, tol: float = 1e-12) -> bool:
        return hull_contains(list(self.vertices), point, tol)


# --------------------------------------------------------------------------
# allocation search


def enumerate_bit_allocations(budget: int, parts: int) -> list[tuple[int, ...]]:
    """All ways to split ``budget`` ADCs over ``parts`` subchannels, lexicographic.

    >>> enumerate_bit_allocations(2, 2)
    [(0, 2), (1, 1), (2, 0)]
    """
    if budget < 0 or parts < 1:
        raise InvalidInputError(f"need budget >= 0 and parts >= 1, got ({budget}, {parts})")
    if parts == 1:
        return [(budget,)]
    out = []
    for first in range(budget + 1):
        for rest in enumerate_bit_allocations(budget - first, parts - 1):
            out.append((first,) + rest)
    return out


def _golden_max(f: Callable[[float], float], lo: float, hi: float, tol: float) -> tuple[float, float]:
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _line_search(f: Callable[[float], float], lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Maximize f on [lo, hi]: coarse scan, then golden section around the best cell."""
    grid = np.linspace(lo, hi, _SCAN_POINTS)
    vals = [f(x) for x in grid]
    k = int(np.argmax(vals))
    best_x, best_v = grid[k], vals[k]
    x, v = _golden_max(f, grid[max(k - 1, 0)], grid[min(k + 1, _SCAN_POINTS - 1)], tol)
    return (x, v) if v > best_v else (best_x, best_v)


def optimize_power(
    bits: Sequence[int],
    singulars: Sequence[float],
    total_power: float,
    mi_fn: MiFn = subchannel_mi_quantized,
    restarts: int = 8,
    seed: int = 0,
) -> tuple[np.ndarray, float]:
    """Split ``total_power`` over subchannels to maximize ``sum mi_fn(bits_k, P_k, sigma_k)``.

    Subchannels with no bits or zero gain get no power. One active
    subchannel takes everything; two are handled by a scan plus golden
    section on the split; more use pairwise coordinate ascent from
    ``restarts`` random starting points.

    If no subchannel can carry data the whole budget is parked on the
    first one so the powers still sum to ``total_power``.
    """
    bits = np.asarray(bits, dtype=int)
    sig = np.asarray(singulars, dtype=float)
    if bits.shape != sig.shape:
        raise InvalidInputError("bits and singular values must have the same length")
    if not (total_power >= 0 and math.isfinite(total_power)):
        raise InvalidInputError(f"total_power must be finite and >= 0, got {total_power}")
    s = len(bits)
    powers = np.zeros(s)
    active = np.flatnonzero((bits > 0) & (sig > 0))
    if active.size == 0 or total_power == 0:
        if s:
            powers[active[0] if active.size else 0] = total_power
        return powers, 0.0

    def rate(p_active):
        return sum(mi_fn(int(bits[k]), float(p), float(sig[k])) for k, p in zip(active, p_active))

    tol = 1e-7 * total_power
    if active.size == 1:
        powers[active[0]] = total_power
        return powers, rate([total_power])

    if active.size == 2:
        i, j = active
        x, best = _line_search(
            lambda p: mi_fn(int(bits[i]), p, float(sig[i])) + mi_fn(int(bits[j]), total_power - p, float(sig[j])),
            0.0,
            total_power,
            tol,
        )
        powers[i], powers[j] = x, total_power - x
        return powers, best

    rng = np.random.default_rng(seed)
    starts = [np.full(active.size, total_power / active.size)]
    starts += [rng.dirichlet(np.ones(active.size)) * total_power for _ in range(restarts - 1)]
    best_p, best_v = None, -np.inf
    for p in starts:
        p = p.copy()
        value = rate(p)
        while True:
            moved = 0.0
            for a in range(active.size):
                for b in range(a + 1, active.size):
                    pair = p[a] + p[b]
                    ka, kb = active[a], active[b]
                    x, _ = _line_search(
                        lambda q: mi_fn(int(bits[ka]), q, float(sig[ka])) + mi_fn(int(bits[kb]), pair - q, float(sig[kb])),
                        0.0,
                        pair,
                        tol,
                    )
                    moved = max(moved, abs(x - p[a]))
                    p[a], p[b] = x, pair - x
            new_value = rate(p)
            if moved <= 1e-6 * total_power or new_value <= value + 1e-12:
                value = max(value, new_value)
                break
            value = new_value
        if value > best_v + _TIE_MARGIN:
            best_p, best_v = p, value
    powers[active] = best_p
    return powers, best_v


def _maximize_over_allocations(sig: np.ndarray, budget: int, power: float, mi_fn: MiFn):
    best = None
    for bits in enumerate_bit_allocations(budget, len(sig)):
        powers, value = optimize_power(bits, sig, power, mi_fn)
        if best is None or value > best[2] + _TIE_MARGIN:
            best = (bits, powers, value)
    return best


def _singulars(h) -> np.ndarray:
    return svd(as_matrix(h)).singular_values


def theorem1_rate(h, n_q: int, power: float) -> PtpRateResult:
    """Best total rate over ADC-bit and power allocations across SVD subchannels.

    ``rate_quantized`` is computed behind the SAR quantizers the receiver
    actually builds; ``rate_continuous`` maximizes the same objective with
    unquantized subchannel outputs. Ties go to the lexicographically
    smallest bit vector.
    """
    if n_q < 0 or int(n_q) != n_q:
        raise InvalidInputError(f"n_q must be a nonnegative integer, got {n_q}")
    if not (power >= 0 and math.isfinite(power)):
        raise InvalidInputError(f"power must be finite and >= 0, got {power}")
    sig = _singulars(h)
    bits, powers, rate_q = _maximize_over_allocations(sig, int(n_q), float(power), subchannel_mi_quantized)
    per_sub = tuple(subchannel_mi_quantized(b, p, g) for b, p, g in zip(bits, powers, sig))
    c_bits, c_powers, rate_c = _maximize_over_allocations(sig, int(n_q), float(power), subchannel_mi_continuous)
    return PtpRateResult(
        rate_quantized=float(sum(per_sub)),
        rate_continuous=float(rate_c),
        best_allocation=Allocation(bits, tuple(powers), int(n_q), float(power)),
        per_subchannel_mi=per_sub,
        singular_values=tuple(float(x) for x in sig),
        continuous_allocation=Allocation(c_bits, tuple(c_powers), int(n_q), float(power)),
    )


def bc_user_rate(h, n_q: int, power: float, continuous: bool = False) -> tuple[float, Allocation]:
    """One broadcast user's best rate: half the per-sample MI with doubled bits per ADC."""
    sig = _singulars(h)
    mi_fn = bc_subchannel_mi_continuous if continuous else bc_subchannel_mi_quantized
    bits, powers, value = _maximize_over_allocations(sig, int(n_q), float(power), mi_fn)
    return 0.5 * value, Allocation(bits, tuple(powers), int(n_q), float(power))


def theorem2_region(h1, h2, n_q1: int, n_q2: int, power: float) -> RateRegion:
    """Achievable (R1, R2) region of the time-shared broadcast scheme.

    Each user's bound depends only on its own channel and ADC budget, so
    the region is the rectangle up to ``(R1*, R2*)``; its convex hull is
    returned as the vertex list.
    """
    for name, val in (("n_q1", n_q1), ("n_q2", n_q2)):
        if val < 0 or int(val) != val:
            raise InvalidInputError(f"{name} must be a nonnegative integer, got {val}")
    if not (power >= 0 and math.isfinite(power)):
        raise InvalidInputError(f"power must be finite and >= 0, got {power}")
    r1, a1 = bc_user_rate(h1, n_q1, power)
    r2, a2 = bc_user_rate(h2, n_q2, power)
    c1, _ = bc_user_rate(h1, n_q1, power, continuous=True)
    c2, _ = bc_user_rate(h2, n_q2, power, continuous=True)
    hull = convex_hull_2d([(0.0, 0.0), (r1, 0.0), (r1, r2), (0.0, r2)])
    return RateRegion(tuple(hull), (float(r1), float(r2)), (a1, a2), (float(c1), float(c2)))


# --------------------------------------------------------------------------
# one-shot baselines


def one_shot_mi_example1(power: float, thresholds, input_points) -> float:
    """MI of a SISO receiver with two fixed-threshold ADCs, uniform input.

    ``thresholds`` are the two switching levels of Y (ADC k outputs +1 when
    Y exceeds the k-th level).
    """
    t = np.asarray(thresholds, dtype=float)
    if t.shape != (2,) or not t[0] < t[1]:
        raise InvalidInputError(f"need two increasing thresholds, got {thresholds}")
    pts = np.asarray(input_points, dtype=float)
    if power == 0 or np.ptp(pts) == 0:
        return 0.0
    dmc = one_shot_channel(-t, [[1.0], [1.0]], pts, 1.0)
    return mi_dmc(dmc).value


def one_shot_rate_example1(power: float, thresholds=None, input_points=None, grid: int = 201) -> float:
    """Rate of the two-ADC one-shot SISO receiver.

    With explicit ``thresholds`` and ``input_points`` the configuration is
    evaluated as given. Otherwise three equiprobable points ``{-c, 0, c}``
    at full power are used and the symmetric thresholds ``+-tau*c`` are
    grid-searched over tau in (0, 1).
    """
    if not (power >= 0 and math.isfinite(power)):
        raise InvalidInputError(f"power must be finite and >= 0, got {power}")
    if thresholds is not None and input_points is not None:
        pts = np.asarray(input_points, dtype=float)
        if np.mean(pts**2) > power * (1 + 1e-9) + 1e-12:
            raise InvalidInputError("input points exceed the power budget")
        return one_shot_mi_example1(power, thresholds, pts)
    if power == 0:
        return 0.0
    c = math.sqrt(1.5 * power)
    pts = np.array([-c, 0.0, c]) if input_points is None else np.asarray(input_points, dtype=float)
    if thresholds is not None:
        return one_shot_mi_example1(power, thresholds, pts)
    span = float(np.max(np.abs(pts)))
    taus = np.linspace(0.0, 1.0, grid + 2)[1:-1]
    return max(one_shot_mi_example1(power, (-tau * span, tau * span), pts) for tau in taus)


@dataclass(frozen=True)
class SumRateExample2:
    r1: float
    r2: float
    threshold: float
    u1_distribution: tuple[float, float] = field(default=(0.5, 0.5))

    @property
    def sum_rate(self) -> float:
        return self.r1 + self.r2


def _marginal_dmc(dmc, keep_axis: int) -> np.ndarray:
    """Binary-input channel for U_keep with the other message uniform.

    Input points are ordered (u1, u2) in {0,1}^2, row index 2*u1 + u2.
    """
    w = dmc.transitions.reshape(2, 2, -1)
    return w.mean(axis=1) if keep_axis == 0 else w.mean(axis=0)


def example2_one_shot(power: float, threshold: float | None = None, zero_threshold: bool = False) -> SumRateExample2:
    """Rates of the two one-shot receivers of the two-antenna broadcast example.

    The transmitter sends ``(-1)**u1 * s/2`` on antenna 1 and
    ``(-1)**u2 * s`` on antenna 2 with ``s**2 = 4P/5``; both users see
    ``y = x1 + x2 + N``. Receiver A has a zero-threshold ADC and decodes
    ``u2``; receiver B compares against ``threshold`` and decodes ``u1``,
    whose input distribution is chosen by Blahut-Arimoto. ``threshold``
    defaults to ``s``, midway between the two positive received levels,
    which turns B's view of ``u1`` into a Z-channel with cross-over 1/2.
    ``zero_threshold=True`` gives both receivers zero thresholds.
    """
    if not (power >= 0 and math.isfinite(power)):
        raise InvalidInputError(f"power must be finite and >= 0, got {power}")
    if power == 0:
        return SumRateExample2(0.0, 0.0, 0.0)
    s = math.sqrt(0.8 * power)
    if zero_threshold:
        threshold = 0.0
    elif threshold is None:
        threshold = s
    elif threshold <= 0:
        raise InvalidInputError(f"threshold must be positive, got {threshold}")
    points = np.array([[(-1) ** u1 * s / 2, (-1) ** u2 * s] for u1 in (0, 1) for u2 in (0, 1)])
    h = np.array([1.0, 1.0])

    dmc_b = one_shot_channel([-threshold], [[1.0]], points, h)
    cap_b, p_u1 = blahut_arimoto(_marginal_dmc(dmc_b, 0), 1e-10)

    dmc_a = one_shot_channel([0.0], [[1.0]], points, h)
    # receiver A sees u2 through a channel averaged over the chosen u1 law
    wa = dmc_a.transitions.reshape(2, 2, -1)
    channel_a = np.einsum("i,ijk->jk", p_u1, wa)
    r1 = mi_dmc(channel_a).value
    return SumRateExample2(r1, float(cap_b), float(threshold), (float(p_u1[0]), float(p_u1[1])))


def one_shot_sumrate_example2(power: float, epsilon: float | None = None, zero_threshold: bool = False) -> float:
    """Sum-rate ``R1 + R2`` of :func:`example2_one_shot`; ``epsilon`` is receiver B's threshold."""
    return example2_one_shot(power, epsilon, zero_threshold).sum_rate
