import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from burstdfe import ConfigurationError, SymbolSequence, SynchronizationError, Waveform
from burstdfe.signal import (
    RrcMatchedFilter,
    demap_pam2,
    design_rrc,
    generate_prbs,
    map_pam2,
    pulse_shape,
    resample,
    synchronize,
)


class TestPrbs:
    def test_prbs7_balance(self):
        bits = generate_prbs(7, 127, seed=1)
        assert bits.sum() == 64
        assert (bits == 0).sum() == 63

    def test_prbs7_periodic(self):
        bits = generate_prbs(7, 254, seed=1)
        np.testing.assert_array_equal(bits[:127], bits[127:])

    def test_deterministic(self):
        np.testing.assert_array_equal(generate_prbs(23, 1000, 5), generate_prbs(23, 1000, 5))

    @pytest.mark.parametrize("order", [7, 9, 15])
    def test_maximal_period(self, order):
        period = 2 ** order - 1
        bits = generate_prbs(order, 2 * period, seed=3)
        np.testing.assert_array_equal(bits[:period], bits[period:])
        # no shorter period divides the sequence
        for p in range(1, period):
            if period % p == 0 and np.array_equal(bits[:period - p], bits[p:period]):
                pytest.fail(f"order {order} repeats after {p}")
        assert bits[:period].sum() == 2 ** (order - 1)

    def test_seeds_shift_the_sequence(self):
        assert not np.array_equal(generate_prbs(15, 200, 1), generate_prbs(15, 200, 2))

    def test_unsupported_order(self):
        with pytest.raises(ConfigurationError):
            generate_prbs(8, 10)


class TestPam2:
    def test_example(self):
        seq = map_pam2([0, 1, 1, 0])
        np.testing.assert_array_equal(seq.amplitudes, [-1, 1, 1, -1])
        np.testing.assert_array_equal(seq.source_bits, [0, 1, 1, 0])

    def test_empty(self):
        assert len(map_pam2([])) == 0

    def test_all_ones(self):
        np.testing.assert_array_equal(map_pam2(np.ones(9, int)).amplitudes, np.ones(9))

    @given(st.lists(st.integers(0, 1), max_size=200))
    def test_round_trip(self, bits):
        np.testing.assert_array_equal(demap_pam2(map_pam2(bits).amplitudes), bits)

    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            SymbolSequence(np.array([1.0, 0.5]), np.array([1, 1]))
        with pytest.raises(ValueError):
            SymbolSequence(np.array([1.0, -1.0]), np.array([1, 1]))
        with pytest.raises(ValueError):
            SymbolSequence(np.array([1.0]), np.array([1, 0]))

    def test_slicing_keeps_bits(self):
        seq = map_pam2([1, 0, 1, 1])[1:3]
        np.testing.assert_array_equal(seq.source_bits, [0, 1])


class TestRrc:
    def test_default_design(self):
        rrc = design_rrc(0.02, 32, 2)
        np.testing.assert_allclose(rrc.taps, rrc.taps[::-1], atol=1e-12)
        assert abs(np.sum(rrc.taps ** 2) - 1) < 1e-12

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.0, 1.0), st.integers(4, 64), st.sampled_from([1.25, 1.5, 2, 3, 4]))
    def test_symmetric_unit_energy(self, beta, span, sps):
        rrc = design_rrc(beta, span, sps)
        np.testing.assert_allclose(rrc.taps, rrc.taps[::-1], atol=1e-12)
        assert abs(np.sum(rrc.taps ** 2) - 1) < 1e-12
        assert np.all(np.isfinite(rrc.taps))

    @staticmethod
    def _cascade_isi(beta, span, sps=2):
        rrc = design_rrc(beta, span, sps)
        rc = np.convolve(rrc.taps, rrc.taps)
        c = rc.size // 2
        sampled = rc[c % sps::sps]
        peak_idx = c // sps
        return np.max(np.abs(np.delete(sampled, peak_idx))) / sampled[peak_idx]

    @pytest.mark.parametrize("beta,span", [(1.0, 16), (0.5, 32), (0.25, 32),
                                           (0.1, 64), (0.02, 192)])
    def test_nyquist_cascade(self, beta, span):
        assert self._cascade_isi(beta, span) < 1e-3

    def test_truncation_isi_shrinks_with_span(self):
        isi = [self._cascade_isi(0.02, s) for s in (16, 32, 64, 128)]
        assert all(a > b for a, b in zip(isi, isi[1:]))

    def test_large_roll_off_decays_faster(self):
        def tail(beta):
            rrc = design_rrc(beta, 32, 2)
            t = (np.arange(rrc.taps.size) - rrc.center) / 2
            return np.sum(rrc.taps[np.abs(t) > 4] ** 2)

        assert tail(1.0) < tail(0.02)

    @pytest.mark.parametrize("beta", [-0.1, 1.5])
    def test_invalid_roll_off(self, beta):
        with pytest.raises(ConfigurationError):
            design_rrc(beta, 32, 2)

    def test_matched_filter_recovers_symbols(self):
        sym = map_pam2(generate_prbs(15, 4000, 1))
        rrc = design_rrc(0.1, 32, 2)
        tx = pulse_shape(sym, rrc)
        y = RrcMatchedFilter(0.1, 32, 2).fit(tx.samples).transform(tx.samples)
        inner = slice(64, -64)
        np.testing.assert_allclose(y[inner], sym.amplitudes[inner], atol=0.02)

    def test_matched_filter_requires_fit(self):
        from sklearn.exceptions import NotFittedError

        with pytest.raises(NotFittedError):
            RrcMatchedFilter().transform(np.zeros(10))


class TestResample:
    def test_constant(self):
        w = Waveform(np.full(900, 0.7), 90e9)
        np.testing.assert_allclose(resample(w, 80e9).samples, 0.7, atol=1e-12)

    def test_same_rate_identity(self):
        x = np.random.default_rng(0).standard_normal(500)
        out = resample(Waveform(x, 80e9), 80e9)
        assert out.sample_rate == 80e9
        np.testing.assert_allclose(out.samples, x, atol=1e-9)

    def test_tone_amplitude(self):
        n = 9000  # 10 MHz bins at both 90 and 80 GSa/s
        t = np.arange(n) / 90e9
        w = Waveform(np.cos(2 * np.pi * 10e9 * t), 90e9)
        out = resample(w, 80e9)
        assert out.sample_rate == 80e9 and len(out) == 8000

        def amp(x):
            return np.max(np.abs(np.fft.rfft(x))) * 2 / x.size

        assert abs(20 * np.log10(amp(out.samples) / amp(w.samples))) < 0.1
        f = np.fft.rfftfreq(out.samples.size, 1 / 80e9)
        assert f[np.argmax(np.abs(np.fft.rfft(out.samples)))] == pytest.approx(10e9)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2 ** 31))
    def test_linear(self, a, b, seed):
        rng = np.random.default_rng(seed)
        x, y = rng.standard_normal(360), rng.standard_normal(360)

        def rs(v):
            return resample(Waveform(v, 90e9), 80e9).samples

        np.testing.assert_allclose(rs(a * x + b * y), a * rs(x) + b * rs(y), atol=1e-9)


class TestSynchronize:
    @staticmethod
    def _training(n=256):
        return map_pam2(generate_prbs(15, n, 1))

    def test_delay_17(self):
        tr = self._training()
        rx = np.concatenate([np.zeros(17), tr.amplitudes, np.zeros(40)])
        assert synchronize(rx, tr) == 17

    def test_no_delay(self):
        tr = self._training()
        assert synchronize(tr.amplitudes, tr) == 0

    def test_unrelated_noise_fails(self):
        tr = self._training()
        rx = np.random.default_rng(11).standard_normal(2000)
        with pytest.raises(SynchronizationError):
            synchronize(rx, tr, window=64)

    def test_short_training_rejected(self):
        with pytest.raises(ConfigurationError):
            synchronize(np.ones(100), np.ones(10))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(-48, 48))
    def test_any_shift_in_window(self, k):
        tr = self._training()
        payload = map_pam2(generate_prbs(23, 600, 9)).amplitudes
        stream = np.concatenate([payload[:100], tr.amplitudes, payload[100:]])
        # training sits at index 100; shift the view by k
        rx = stream[100 - k:] if k <= 100 else np.concatenate([np.zeros(k - 100), stream])
        assert synchronize(rx, tr, window=64) == k
