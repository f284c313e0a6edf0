import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rankcpd.datagen import generate_segments, mean_shift_specs
from rankcpd.detector import (
    DetectorConfig,
    StatisticTrace,
    calibrate_threshold,
    detect_peaks,
    evaluated_times,
    local_maxima,
    null_threshold,
    scan,
    window_bounds,
    zero_pad,
)
from rankcpd.errors import InvalidArgumentError, SeriesTooShortError
from rankcpd.ranks import rank_energy


def trace_of(values, delta=1, eta=0.0):
    values = np.asarray(values, dtype=float)
    cfg = DetectorConfig(window=1, delta=delta, eta=eta)
    return StatisticTrace(np.arange(len(values)), values, cfg)


def brute_force_peaks(times, values, delta, eta):
    out = []
    for k, (t, v) in enumerate(zip(times, values)):
        if not v > eta:
            continue
        near = [j for j, s in enumerate(times) if abs(s - t) <= delta]
        if all(values[j] < v or (values[j] == v and j >= k) for j in near):
            out.append(int(t))
    return out


# peak picking

@pytest.mark.parametrize("values, delta, eta, expected", [
    ([0, 1, 3, 1, 0], 1, 2, [2]),
    ([0, 1, 3, 1, 0], 1, 5, []),
    ([3, 3, 3], 2, 1, [0]),
])
def test_peak_examples(values, delta, eta, expected):
    assert list(detect_peaks(trace_of(values), eta=eta, delta=delta).change_points) == expected


def test_peak_defaults_come_from_config():
    assert detect_peaks(trace_of([0, 1, 3, 1, 0], delta=1, eta=2)).change_points == (2,)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=25), st.integers(1, 4),
       st.integers(1, 3), st.sampled_from([-1.0, 0.5, 2.0]))
def test_peaks_match_brute_force(values, delta, step, eta):
    times = np.arange(len(values)) * step
    values = np.asarray(values, dtype=float)
    found = local_maxima(times, values, delta, eta)
    assert found == brute_force_peaks(times, values, delta, eta)
    # separation and threshold invariants
    assert all(b - a > delta for a, b in zip(found, found[1:]))
    lookup = dict(zip(times.tolist(), values.tolist()))
    assert all(lookup[t] > eta for t in found)


# padding and windows

def test_zero_pad_example():
    z = np.arange(6.0).reshape(3, 2) + 1
    padded, shift = zero_pad(z, 1)
    assert padded.shape == (5, 2) and shift == 1
    assert np.all(padded[0] == 0) and np.all(padded[-1] == 0)
    assert np.array_equal(padded[1:-1], z)


def test_zero_pad_covers_original_range():
    z = np.ones((30, 2))
    padded, shift = zero_pad(z, 10)
    cfg = DetectorConfig(window=10)
    times = evaluated_times(len(padded), cfg) - shift
    assert times[0] == 0 and times[-1] == 30


def test_zero_pad_rejects_nonpositive():
    with pytest.raises(InvalidArgumentError):
        zero_pad(np.ones((3, 1)), 0)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 20), st.integers(0, 40))
def test_window_contents(n, offset):
    t = n + offset
    (a, b), (c, d) = window_bounds(t, n)
    assert b == c and b - a == n and d - c == n
    assert list(range(a, b)) + list(range(c, d)) == list(range(t - n, t + n))


def test_scan_uses_the_expected_windows(rng):
    z = rng.normal(size=(30, 2))
    cfg = DetectorConfig(window=5, stride=3)
    trace = scan(z, cfg, workers=1)
    assert trace.times.tolist() == list(range(5, 26, 3))
    for t, v in zip(trace.times, trace.values):
        assert v == rank_energy(z[t - 5:t], z[t:t + 5]).raw


def test_constant_series_gives_constant_trace():
    for eps in (0.0, 0.5):
        trace = scan(np.zeros((40, 3)), DetectorConfig(window=6, epsilon=eps), workers=1)
        assert np.all(trace.values == trace.values[0])


def test_scan_is_deterministic_and_thread_independent(rng):
    z = rng.normal(size=(60, 2))
    cfg = DetectorConfig(window=8, epsilon=0.3, stride=2)
    a = scan(z, cfg, workers=1)
    b = scan(z, cfg, workers=1)
    c = scan(z, cfg, workers=4)
    assert a.values.tobytes() == b.values.tobytes() == c.values.tobytes()


def test_scaled_trace(rng):
    z = rng.normal(size=(30, 1))
    raw = scan(z, DetectorConfig(window=5), workers=1)
    scaled = scan(z, DetectorConfig(window=5, use_scaled=True), workers=1)
    np.testing.assert_allclose(scaled.values, raw.values * 2.5, rtol=1e-15)


def test_short_series_is_an_error():
    with pytest.raises(SeriesTooShortError):
        scan(np.zeros((9, 1)), DetectorConfig(window=5))


@pytest.mark.parametrize("kwargs", [{"window": 0}, {"window": 3, "delta": 0},
                                    {"window": 3, "stride": 0}, {"window": 3, "epsilon": -1}])
def test_config_validation(kwargs):
    with pytest.raises(InvalidArgumentError):
        DetectorConfig(**kwargs)


def test_monotone_responsiveness():
    n, length = 20, 60
    peaks = {}
    for shift in (0.5, 1.0, 2.0):
        tops = []
        for seed in range(20):
            data = generate_segments(mean_shift_specs(2, length, 2, shift), seed)
            trace = scan(data.series, DetectorConfig(window=n), workers=1)
            near = np.abs(trace.times - length) <= n
            tops.append(trace.values[near].max())
        peaks[shift] = np.mean(tops)
    assert peaks[0.5] <= peaks[1.0] <= peaks[2.0]


# thresholds

def test_calibrate_threshold_is_a_null_quantile(rng):
    z = rng.normal(size=(40, 2))
    cfg = DetectorConfig(window=10)
    eta = calibrate_threshold(z, cfg, n_permutations=50, seed=3)
    again = calibrate_threshold(z, cfg, n_permutations=50, seed=3)
    assert eta == again and eta > 0
    with pytest.raises(InvalidArgumentError):
        calibrate_threshold(z, cfg, at=35)


def test_null_threshold_orders_quantiles():
    q90 = null_threshold(20, 2, quantile=0.90, n_trials=300)
    q99 = null_threshold(20, 2, quantile=0.99, n_trials=300)
    assert 0 < q90 < q99
    soft = null_threshold(10, 2, epsilon=0.5, n_trials=30)
    assert soft > 0
