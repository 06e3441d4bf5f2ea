import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atrx.errors import ConfigurationError, InvalidInputError
from atrx.receiver import (
    AtRxConfig,
    AtRxReceiver,
    at_rx_run,
    bc_sar_schedule,
    build_uniform_quantizer,
    one_shot_channel,
    sar_bc_run,
    sar_ptp_decisions,
    sar_ptp_run,
    sign,
)
from oracles import q_function, sar_pipeline_reference


def two_adc_config(temporal=None):
    """Two ADCs on one antenna; the second threshold moves by half the first decision."""
    return AtRxConfig(
        spatial=[[1.0], [1.0]],
        fixed_thresholds=[0.0, 0.0],
        temporal=np.eye(2) if temporal is None else temporal,
        adaptive_coeffs=[[0.0, -0.5], [0.0, 0.0]],
    )


def direct_at_rx(cfg, y):
    """Recompute every column from scratch, summing the matrix products in full."""
    n = y.shape[1]
    w = np.zeros((cfg.num_adcs, n))
    for i in range(n):
        y_bar = y @ cfg.temporal
        t_adapt = w @ cfg.adaptive_coeffs
        w[:, i] = np.where(cfg.spatial @ y_bar[:, i] + t_adapt[:, i] + cfg.fixed_thresholds >= 0, 1, -1)
    return w.astype(int)


def test_sign():
    assert sign(0.0) == 1
    assert sign(-3.2) == -1
    assert sign(1e-15) == 1
    np.testing.assert_array_equal(sign([-1.0, 0.0, 2.0]), [-1, 1, 1])


class TestAtRx:
    def test_two_adc_single_input(self):
        w = at_rx_run(two_adc_config(), [[0.3, 0.3]])
        assert (w[0, 0], w[1, 1]) == (1, -1)

    @pytest.mark.parametrize(
        "y, expected",
        [(-0.8, (-1, -1)), (-0.2, (-1, 1)), (0.3, (1, -1)), (0.9, (1, 1))],
    )
    def test_case_table(self, y, expected):
        w = at_rx_run(two_adc_config(), [[y, y]])
        assert (w[0, 0], w[1, 1]) == expected

    @pytest.mark.parametrize("y", [-0.8, -0.2, 0.3, 0.9])
    def test_case_table_with_delay_element(self, y):
        # b routes the first sample to both channel-uses, so the second input is irrelevant
        cfg = two_adc_config(temporal=[[1.0, 1.0], [0.0, 0.0]])
        held = at_rx_run(two_adc_config(), [[y, y]])
        delayed = at_rx_run(cfg, [[y, 123.0]])
        assert (delayed[0, 0], delayed[1, 1]) == (held[0, 0], held[1, 1])

    def test_no_adaptation_is_memoryless_sign(self):
        rng = np.random.default_rng(1)
        v = rng.normal(size=(3, 2))
        y = rng.normal(size=(2, 6))
        cfg = AtRxConfig(v, np.zeros(3), np.eye(6), np.zeros((6, 6)))
        np.testing.assert_array_equal(at_rx_run(cfg, y), np.where(v @ y >= 0, 1, -1))

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_direct_evaluation(self, seed):
        rng = np.random.default_rng(seed)
        n, nq, nr = 4, 3, 2
        cfg = AtRxConfig(
            rng.normal(size=(nq, nr)),
            rng.normal(size=nq),
            np.triu(rng.normal(size=(n, n))),
            np.triu(rng.normal(size=(n, n)), 1),
        )
        y = rng.normal(size=(nr, n))
        np.testing.assert_array_equal(at_rx_run(cfg, y), direct_at_rx(cfg, y))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 6))
    def test_causality(self, seed, i):
        rng = np.random.default_rng(seed)
        n = 6
        cfg = AtRxConfig(
            rng.normal(size=(2, 1)),
            rng.normal(size=2),
            np.triu(rng.normal(size=(n, n))),
            np.triu(rng.normal(size=(n, n)), 1),
        )
        y = rng.normal(size=(1, n))
        y_alt = y.copy()
        y_alt[:, i:] = rng.normal(size=(1, n - i))
        np.testing.assert_array_equal(at_rx_run(cfg, y)[:, :i], at_rx_run(cfg, y_alt)[:, :i])

    def test_stepwise_matches_run(self):
        cfg = two_adc_config()
        rx = AtRxReceiver(cfg)
        cols = [rx.step([0.3]), rx.step([0.3])]
        np.testing.assert_array_equal(np.column_stack(cols), at_rx_run(cfg, [[0.3, 0.3]]))
        with pytest.raises(InvalidInputError):
            rx.step([0.0])

    def test_lower_triangular_temporal_rejected(self):
        with pytest.raises(ConfigurationError):
            two_adc_config(temporal=[[1.0, 0.0], [1.0, 1.0]])

    def test_non_strict_adaptive_rejected(self):
        with pytest.raises(ConfigurationError):
            AtRxConfig([[1.0]], [0.0], np.eye(2), np.eye(2))

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            at_rx_run(two_adc_config(), [[0.1, 0.2, 0.3]])
        with pytest.raises(InvalidInputError):
            AtRxConfig([[1.0]], [0.0, 0.0], np.eye(2), np.zeros((2, 2)))


class TestUniformQuantizer:
    def test_one_bit(self):
        np.testing.assert_array_equal(build_uniform_quantizer(1, 1.0, 1.0).boundaries, [0.0])

    def test_two_bit_quarter_step(self):
        q = build_uniform_quantizer(2, 0.25, 1.0)
        np.testing.assert_allclose(q.boundaries, [-0.5, 0.0, 0.5])
        assert q.quantize(0.3) == 2

    def test_three_bit(self):
        q = build_uniform_quantizer(3, 1.0, 1.0)
        np.testing.assert_allclose(q.boundaries, [-6, -4, -2, 0, 2, 4, 6])
        np.testing.assert_allclose(q.centers, [-7, -5, -3, -1, 1, 3, 5, 7])
        assert q.num_bins == 8

    def test_saturation_and_ties(self):
        q = build_uniform_quantizer(2, 1.0, 1.0)
        assert q.quantize(-1e9) == 0
        assert q.quantize(1e9) == 3
        assert q.quantize(0.0) == 2
        assert q.quantize(2.0) == 3

    def test_zero_bits_rejected(self):
        with pytest.raises(InvalidInputError):
            build_uniform_quantizer(0, 1.0, 1.0)
        with pytest.raises(InvalidInputError):
            build_uniform_quantizer(2, -1.0, 1.0)

    @settings(max_examples=200, deadline=None)
    @given(
        st.integers(1, 6),
        st.floats(1e-3, 1e3),
        st.floats(-1e4, 1e4),
        st.floats(-1e4, 1e4),
    )
    def test_monotone(self, bits, step, y1, y2):
        q = build_uniform_quantizer(bits, step, 1.0)
        lo, hi = sorted((y1, y2))
        assert q.quantize(lo) <= q.quantize(hi)
        assert 0 <= q.quantize(lo) < q.num_bins


class TestSarPointToPoint:
    def test_raw_sample_in_third_bin(self):
        # step a*sigma = 1/4 puts boundaries at -1/2, 0, 1/2
        assert sar_ptp_run(2, [0.3 / 0.25])[0] == 2

    def test_below_range(self):
        assert sar_ptp_run(3, [-100.0])[0] == 0

    def test_decisions_shape_and_fill(self):
        w = sar_ptp_decisions(3, [0.5, -1.0, 2.0, 7.5])
        assert w.shape == (3, 6)
        assert w[1, 0] == 0 and w[2, :2].tolist() == [0, 0]
        assert w[0, 4:].tolist() == [0, 0]

    @pytest.mark.parametrize("bits", [1, 2, 3, 4])
    def test_grid_matches_uniform(self, bits):
        y = np.linspace(-(2**bits), 2**bits, 100_001)
        q = build_uniform_quantizer(bits, 1.0, 1.0)
        np.testing.assert_array_equal(sar_ptp_run(bits, y), q.quantize(y))

    @pytest.mark.parametrize("bits", [1, 2, 3, 4])
    def test_matches_time_stepped_pipeline(self, bits):
        y = np.random.default_rng(bits).uniform(-(2**bits) - 1, 2**bits + 1, 300)
        np.testing.assert_array_equal(sar_ptp_run(bits, y), sar_pipeline_reference(bits, y))

    def test_invalid_bits(self):
        with pytest.raises(InvalidInputError):
            sar_ptp_run(0, [0.0])


class TestSarBroadcast:
    def test_one_bit_budget_gives_four_bins(self):
        y = np.array([-3.0, -1.0, 0.5, 2.5])
        np.testing.assert_array_equal(sar_bc_run(1, y), [0, 1, 2, 3])

    @pytest.mark.parametrize("budget, expected", [(1, 2), (2, 8)])
    def test_zero_sample(self, budget, expected):
        assert sar_bc_run(budget, [0.0])[0] == expected

    @pytest.mark.parametrize("budget", [1, 2, 3])
    def test_schedule_shape(self, budget):
        sched = bc_sar_schedule(budget, 10)
        assert sched.shape == (budget, 2 * 9 + 2 * budget)
        for ell in range(10):
            # every sample gets exactly 2*budget refinement slots on one ADC
            assert np.count_nonzero(sched == ell) == 2 * budget
            assert set(np.argwhere(sched == ell)[:, 0]) == {ell % budget}
        # steady state: each ADC busy every channel-use
        assert np.all(sched[:, 2 * budget : 2 * 9] >= 0)

    @pytest.mark.parametrize("budget", [1, 2])
    def test_random_matches_uniform(self, budget):
        bits = 2 * budget
        y = np.random.default_rng(budget).uniform(-(2**bits) - 2, 2**bits + 2, 10_000)
        q = build_uniform_quantizer(bits, 1.0, 1.0)
        np.testing.assert_array_equal(sar_bc_run(budget, y), q.quantize(y))

    def test_grid_matches_uniform_three(self):
        y = np.linspace(-70, 70, 20_001)
        np.testing.assert_array_equal(sar_bc_run(3, y), build_uniform_quantizer(6, 1.0, 1.0).quantize(y))


class TestOneShot:
    def test_two_thresholds_three_cells(self):
        dmc = one_shot_channel([0.5, -0.5], [[1.0], [1.0]], [-1.0, 0.0, 1.0])
        assert dmc.num_outputs == 3
        assert (-1, 1) not in dmc.output_labels
        assert set(dmc.output_labels) == {(-1, -1), (1, -1), (1, 1)}

    def test_cells_match_gaussian_tails(self):
        dmc = one_shot_channel([0.5, -0.5], [[1.0], [1.0]], [-1.0, 0.0, 1.0])
        idx = {lab: k for k, lab in enumerate(dmc.output_labels)}
        for row, x in enumerate([-1.0, 0.0, 1.0]):
            lo_cell = 1 - q_function(-0.5 - x)
            top_cell = q_function(0.5 - x)
            assert dmc.transitions[row, idx[(-1, -1)]] == pytest.approx(lo_cell, abs=1e-12)
            assert dmc.transitions[row, idx[(1, 1)]] == pytest.approx(top_cell, abs=1e-12)
            assert dmc.transitions[row, idx[(1, -1)]] == pytest.approx(1 - lo_cell - top_cell, abs=1e-12)

    def test_high_snr_sign_is_identity(self):
        p = 1e6
        dmc = one_shot_channel([0.0], [[1.0]], [-math.sqrt(p), math.sqrt(p)])
        np.testing.assert_allclose(dmc.transitions, np.eye(2), atol=1e-12)

    def test_duplicate_thresholds_merge(self):
        dmc = one_shot_channel([0.0, 0.0], [[1.0], [1.0]], [-1.0, 1.0])
        assert dmc.num_outputs == 2

    def test_z_structure_on_outer_level(self):
        p_prime = 1e6 / 5
        eps = math.sqrt(p_prime)
        pts = np.array([-1.5, -0.5, 0.5, 1.5]) * math.sqrt(p_prime)
        dmc = one_shot_channel([-eps], [[1.0]], pts)
        idx = {lab: k for k, lab in enumerate(dmc.output_labels)}
        # -eps threshold: only the top point clears it with certainty
        np.testing.assert_allclose(dmc.transitions[:, idx[(1,)]], q_function(eps - pts), atol=1e-12)
        np.testing.assert_allclose(dmc.transitions[:, idx[(1,)]], [0, 0, 0, 1], atol=1e-12)

    def test_channel_row(self):
        pts = [[1.0, 1.0], [1.0, -1.0], [-1.0, -1.0]]
        dmc = one_shot_channel([0.0], [[1.0]], pts, channel_gain=[[1.0, 1.0]])
        idx = {lab: k for k, lab in enumerate(dmc.output_labels)}
        np.testing.assert_allclose(dmc.transitions[:, idx[(1,)]], q_function(-np.array([2.0, 0.0, -2.0])), atol=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(
        st.lists(st.floats(-5, 5), min_size=1, max_size=4),
        st.lists(st.floats(-5, 5), min_size=1, max_size=6),
    )
    def test_rows_are_distributions(self, thr, pts):
        dmc = one_shot_channel(thr, np.ones((len(thr), 1)), pts)
        assert np.all(dmc.transitions >= 0)
        np.testing.assert_allclose(dmc.transitions.sum(axis=1), 1.0, atol=1e-12)
        assert dmc.num_outputs <= len(thr) + 1

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidInputError):
            one_shot_channel([np.nan], [[1.0]], [0.0])


def test_underflowing_step_rejected():
    with pytest.raises(InvalidInputError):
        build_uniform_quantizer(2, 1e-200, 1e-200)
