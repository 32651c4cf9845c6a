import math

import numpy as np
import pytest

from peakfdr.numerics import std_normal_cdf
from peakfdr.signal_model import (
    InvalidSignalError,
    Measurement,
    MeasurementFormatError,
    NoiseSpec,
    PlacementError,
    SignalSpec,
    generate_noise,
    place_occurrences,
    read_measurement_bin,
    read_measurement_csv,
    signal_train,
    synthesize,
    write_measurement_bin,
    write_measurement_csv,
)

SQRT2PI = math.sqrt(2.0 * math.pi)


class TestSignalSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            SignalSpec(5.0, 0.0, 3.0, (100.0,))
        with pytest.raises(ValueError):
            SignalSpec(-1.0, 3.0, 3.0, (100.0,))
        with pytest.raises(ValueError):
            SignalSpec(5.0, 3.0, 3.0, (200.0, 100.0))  # unsorted

    def test_per_occurrence_amplitudes(self):
        spec = SignalSpec([2.0, 4.0], 3.0, 3.0, (100.0, 300.0))
        assert np.array_equal(spec.amplitudes(), [2.0, 4.0])
        with pytest.raises(ValueError):
            SignalSpec([2.0], 3.0, 3.0, (100.0, 300.0)).amplitudes()


class TestSignalTrain:
    def test_empty_centers(self):
        mu = signal_train(SignalSpec(5.0, 3.0, 3.0, ()), 100)
        assert np.array_equal(mu, np.zeros(100))

    def test_peak_value_at_center(self):
        spec = SignalSpec(5.0, 3.0, 3.0, (50.0,))
        mu = signal_train(spec, 101)
        assert mu[50] == pytest.approx(5.0 / (3.0 * SQRT2PI), rel=1e-14)

    def test_vanishes_outside_support(self):
        spec = SignalSpec(5.0, 3.0, 3.0, (50.0,))
        mu = signal_train(spec, 101)
        assert np.all(mu[:41] == 0.0)
        assert np.all(mu[60:] == 0.0)
        assert np.all(mu >= 0.0)

    def test_mass_riemann_oracle(self):
        # total discrete mass of one bump vs a * (2 Phi(c) - 1), within 1%
        spec = SignalSpec(5.0, 3.0, 3.0, (500.0,))
        mu = signal_train(spec, 1000, 1.0)
        expected = 5.0 * (2.0 * std_normal_cdf(3.0) - 1.0)
        assert mu.sum() * 1.0 == pytest.approx(expected, rel=0.01)

    def test_overlapping_supports_add(self):
        one = signal_train(SignalSpec(5.0, 3.0, 3.0, (50.0,)), 120)
        two = signal_train(SignalSpec(5.0, 3.0, 3.0, (55.0,)), 120)
        both = signal_train(SignalSpec(5.0, 3.0, 3.0, (50.0, 55.0)), 120)
        assert np.allclose(both, one + two, rtol=1e-14)

    def test_support_outside_domain_raises(self):
        with pytest.raises(InvalidSignalError):
            signal_train(SignalSpec(5.0, 3.0, 3.0, (5.0,)), 100)
        with pytest.raises(InvalidSignalError):
            signal_train(SignalSpec(5.0, 3.0, 3.0, (95.0,)), 100)


class TestGenerateNoise:
    def test_zero_sigma(self):
        z = generate_noise(NoiseSpec(0.0, 3.0), 100, 1.0, 1, 2)
        assert np.array_equal(z, np.zeros(100))

    def test_determinism(self):
        a = generate_noise(NoiseSpec(1.0, 3.0), 500, 1.0, 7, 3)
        b = generate_noise(NoiseSpec(1.0, 3.0), 500, 1.0, 7, 3)
        assert np.array_equal(a, b)

    def test_variance_matches_closed_form(self):
        z = generate_noise(NoiseSpec(1.0, 3.0), 1_000_000, 1.0, 11, 0)
        expected = 1.0 / (2.0 * math.sqrt(math.pi) * 3.0)
        assert z.var() == pytest.approx(expected, rel=0.02)

    def test_autocorrelation_gaussian(self):
        nu = 3.0
        z = generate_noise(NoiseSpec(1.0, nu), 1_000_000, 1.0, 13, 0)
        var = z.var()
        for d in range(1, 6):
            emp = np.mean(z * np.roll(z, d)) / var
            assert emp == pytest.approx(math.exp(-d * d / (4.0 * nu * nu)), abs=0.02)

    def test_gaussianity_sanity(self):
        z = generate_noise(NoiseSpec(1.0, 3.0), 1_000_000, 1.0, 17, 0)
        s = (z - z.mean()) / z.std()
        skew = np.mean(s ** 3)
        exkurt = np.mean(s ** 4) - 3.0
        assert abs(skew) < 0.05
        assert abs(exkurt) < 0.1


class TestSynthesize:
    def test_zero_noise_equals_signal(self):
        spec = SignalSpec(5.0, 3.0, 3.0, (50.0,))
        m = synthesize(spec, NoiseSpec(0.0, 3.0), 120, 1.0, 1, 2)
        assert np.array_equal(m.samples, signal_train(spec, 120))

    def test_empty_centers_equals_noise(self):
        noise = NoiseSpec(1.0, 3.0)
        m = synthesize(SignalSpec(5.0, 3.0, 3.0, ()), noise, 120, 1.0, 5, 6)
        assert np.array_equal(m.samples, generate_noise(noise, 120, 1.0, 5, 6))

    def test_components_are_exact(self):
        spec = SignalSpec(5.0, 3.0, 3.0, (50.0,))
        noise = NoiseSpec(1.0, 4.0)
        m = synthesize(spec, noise, 200, 1.0, 9, 1)
        assert np.array_equal(m.signal, signal_train(spec, 200))
        assert np.array_equal(m.noise, generate_noise(noise, 200, 1.0, 9, 1))
        assert np.array_equal(m.samples, m.signal + m.noise)

    def test_bit_identical_across_runs(self):
        spec = SignalSpec(5.0, 3.0, 3.0, (50.0,))
        noise = NoiseSpec(1.0, 4.0)
        a = synthesize(spec, noise, 200, 1.0, 9, 1)
        b = synthesize(spec, noise, 200, 1.0, 9, 1)
        assert np.array_equal(a.samples, b.samples)


class TestPlaceOccurrences:
    def test_zero_count(self):
        assert place_occurrences(0, 1000).size == 0

    def test_single_center_within_margins(self):
        for s in range(20):
            c = place_occurrences(1, 1000, 1.0, 9.0, 9.0, seed=s, stream_id=0)
            assert 9.0 <= c[0] <= 990.0

    def test_pairwise_distances(self):
        # 10 supports of half-width 9 with min gap 9: centers >= 27 apart
        for s in range(1000):
            c = place_occurrences(10, 1000, 1.0, 9.0, 9.0, seed=42, stream_id=s)
            assert c.size == 10
            assert np.all(np.diff(c) >= 27.0)
            assert c[0] >= 9.0 and c[-1] <= 990.0

    def test_infeasible_raises(self):
        with pytest.raises(PlacementError):
            place_occurrences(10, 100, 1.0, 9.0, 9.0, seed=1, stream_id=0)

    def test_determinism(self):
        a = place_occurrences(10, 1000, 1.0, 9.0, 18.0, seed=3, stream_id=4)
        b = place_occurrences(10, 1000, 1.0, 9.0, 18.0, seed=3, stream_id=4)
        assert np.array_equal(a, b)


class TestMeasurement:
    def test_validation(self):
        with pytest.raises(ValueError):
            Measurement(np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            Measurement(np.array([1.0, np.nan, 2.0]))
        with pytest.raises(ValueError):
            Measurement(np.ones(5), dt=0.0)

    def test_times(self):
        m = Measurement(np.zeros(4), dt=0.5, origin=2.0)
        assert np.array_equal(m.times, [2.0, 2.5, 3.0, 3.5])


class TestSerialization:
    def test_csv_round_trip(self, tmp_path):
        spec = SignalSpec(5.0, 3.0, 3.0, (50.0,))
        m = synthesize(spec, NoiseSpec(1.0, 4.0), 200, 1.0, 21, 1)
        path = tmp_path / "m.csv"
        write_measurement_csv(m, path)
        back = read_measurement_csv(path)
        assert np.allclose(back.samples, m.samples, rtol=0, atol=0)
        assert np.allclose(back.signal, m.signal)
        assert np.allclose(back.noise, m.noise)
        assert back.dt == m.dt
        assert back.origin == m.origin

    def test_bin_round_trip(self, tmp_path):
        m = Measurement(np.random.default_rng(0).standard_normal(64), dt=0.25, origin=-3.0)
        path = tmp_path / "m.bin"
        write_measurement_bin(m, path)
        back = read_measurement_bin(path)
        assert np.array_equal(back.samples, m.samples)
        assert back.dt == 0.25
        assert back.origin == -3.0

    def test_bad_csv_raises(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("nope\n1,2,3\n")
        with pytest.raises(MeasurementFormatError):
            read_measurement_csv(path)

    def test_short_csv_raises(self, tmp_path):
        path = tmp_path / "short.csv"
        path.write_text("index,t,y\n0,0.0,1.0\n1,1.0,2.0\n")
        with pytest.raises(MeasurementFormatError):
            read_measurement_csv(path)
