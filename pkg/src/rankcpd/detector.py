"""Sliding-window change point detection with (soft) rank energy."""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .errors import InvalidArgumentError, SeriesTooShortError
from .halton import generate_halton
from .ranks import energy_from_distances, permutation_null, rank_energy, soft_rank_energy


def as_series(values):
    """Validate a time series as a finite ``(T, d)`` float array."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise InvalidArgumentError("series must be a non-empty (T, d) array")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("series contains non-finite values")
    return arr


@dataclass(frozen=True)
class DetectorConfig:
    """Scan and peak-picking parameters.

    ``epsilon == 0`` selects rank energy, ``epsilon > 0`` soft rank energy.
    ``use_scaled`` reports ``mn/(m+n)`` times the statistic instead of the raw
    value. ``sinkhorn_tolerance`` and ``sinkhorn_max_iters`` are passed to the
    entropic solver for every window.
    """

    window: int
    epsilon: float = 0.0
    delta: int = 1
    eta: float = 0.0
    use_scaled: bool = False
    stride: int = 1
    normalize_cost: bool = False
    sinkhorn_tolerance: float = 1e-9
    sinkhorn_max_iters: int = 10_000

    def __post_init__(self):
        if self.window < 1:
            raise InvalidArgumentError(f"window must be positive, got {self.window}")
        if self.delta < 1:
            raise InvalidArgumentError(f"delta must be at least 1, got {self.delta}")
        if self.stride < 1:
            raise InvalidArgumentError(f"stride must be positive, got {self.stride}")
        if self.epsilon < 0:
            raise InvalidArgumentError(f"epsilon must be non-negative, got {self.epsilon}")

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True, eq=False)
class StatisticTrace:
    times: np.ndarray
    values: np.ndarray
    config: DetectorConfig

    def __len__(self):
        return len(self.times)


@dataclass(frozen=True)
class Detections:
    change_points: tuple


def window_bounds(t, window):
    """Index ranges ``[t - n, t)`` and ``[t, t + n)`` of the two windows at ``t``."""
    return (t - window, t), (t, t + window)


def evaluated_times(length, config):
    n = config.window
    if length < 2 * n:
        raise SeriesTooShortError(
            f"series of length {length} is shorter than two windows (2 x {n}); pad it first"
        )
    return np.arange(n, length - n + 1, config.stride, dtype=np.int64)


def _default_workers():
    env = os.environ.get("RANKCPD_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def scan(series, config, workers=None, grid=None):
    """Evaluate the two-sample statistic at every ``t`` in ``n, n + stride, ..., T - n``.

    The left window holds ``Z[t-n], ..., Z[t-1]`` and the right window
    ``Z[t], ..., Z[t+n-1]``. One Halton grid of size ``2n`` is shared by all
    positions. Positions are evaluated concurrently (``workers`` threads,
    default ``RANKCPD_THREADS`` or the CPU count); the trace is assembled in
    time order and does not depend on the number of workers.
    """
    z = as_series(series)
    n = config.window
    times = evaluated_times(z.shape[0], config)
    if grid is None:
        grid = generate_halton(2 * n, z.shape[1])

    def at(t):
        x = z[t - n : t]
        y = z[t : t + n]
        if config.epsilon == 0:
            stat = rank_energy(x, y, grid)
        else:
            stat = soft_rank_energy(
                x, y, config.epsilon, grid,
                normalize_cost=config.normalize_cost,
                max_iters=config.sinkhorn_max_iters,
                tolerance=config.sinkhorn_tolerance,
            )
        return stat.scaled if config.use_scaled else stat.raw

    workers = _default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(times) < 2:
        values = [at(int(t)) for t in times]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(at, (int(t) for t in times)))
    return StatisticTrace(times=times, values=np.asarray(values, dtype=np.float64), config=config)


def local_maxima(times, values, delta, eta):
    """Indices ``t`` with ``sigma(t) > eta`` that are maximal within ``+-delta``.

    Exactly tied maxima inside one neighbourhood resolve to the earliest index.
    """
    times = np.asarray(times)
    values = np.asarray(values, dtype=np.float64)
    found = []
    lo = 0
    hi = 0
    size = len(times)
    for k in range(size):
        v = values[k]
        if not v > eta:
            continue
        t = times[k]
        while times[lo] < t - delta:
            lo += 1
        if hi < k:
            hi = k
        while hi + 1 < size and times[hi + 1] <= t + delta:
            hi += 1
        left = values[lo:k]
        right = values[k + 1 : hi + 1]
        if (left.size and left.max() >= v) or (right.size and right.max() > v):
            continue
        found.append(int(t))
    return found


def detect_peaks(trace, eta=None, delta=None):
    """Declare change points on a trace; ``eta``/``delta`` default to its config."""
    eta = trace.config.eta if eta is None else eta
    delta = trace.config.delta if delta is None else delta
    return Detections(tuple(local_maxima(trace.times, trace.values, delta, eta)))


def zero_pad(series, pad):
    """Prepend and append ``pad`` zero rows. Returns ``(padded, shift)``.

    Index ``t`` of the padded series is ``t - shift`` in the original.
    """
    z = as_series(series)
    if pad < 1:
        raise InvalidArgumentError(f"pad must be positive, got {pad}")
    zeros = np.zeros((pad, z.shape[1]))
    return np.vstack([zeros, z, zeros]), int(pad)


def calibrate_threshold(series, config, n_permutations=200, quantile=0.95, seed=0, at=None):
    """Threshold from a permutation null on one window pair.

    The two windows at ``at`` (default: the first evaluated position) are
    pooled, randomly relabelled ``n_permutations`` times and the ``quantile``
    of the resulting statistics (raw or scaled, per ``config.use_scaled``) is
    returned.
    """
    z = as_series(series)
    n = config.window
    times = evaluated_times(z.shape[0], config)
    t = int(times[0]) if at is None else int(at)
    if t < n or t > z.shape[0] - n:
        raise InvalidArgumentError(f"position {t} has no complete window pair")
    null = permutation_null(
        z[t - n : t], z[t : t + n], config.epsilon, n_permutations, seed,
        **({} if config.epsilon == 0 else {
            "normalize_cost": config.normalize_cost,
            "max_iters": config.sinkhorn_max_iters,
            "tolerance": config.sinkhorn_tolerance,
        }),
    )
    column = 1 if config.use_scaled else 0
    return float(np.quantile(null[:, column], quantile))


def null_threshold(window, dim, epsilon=0.0, quantile=0.95, n_trials=200, seed=0,
                   use_scaled=False, **solver_options):
    """Universal threshold from the null distribution of the statistic.

    Rank energy is distribution-free under the null: for continuous data the
    pooled ranks are a uniformly random relabelling of the Halton grid, so the
    exact null is sampled by splitting the grid at random (no transport
    solves). For ``epsilon > 0`` the null is simulated with i.i.d. standard
    Gaussian windows.
    """
    grid = generate_halton(2 * window, dim)
    rng = np.random.default_rng(seed)
    values = np.empty(n_trials)
    if epsilon == 0:
        dist = kernels.distances(grid.points, grid.points)
        for k in range(n_trials):
            perm = rng.permutation(2 * window)
            values[k] = energy_from_distances(dist, perm[:window], perm[window:])
    else:
        for k in range(n_trials):
            x = rng.standard_normal((window, dim))
            y = rng.standard_normal((window, dim))
            values[k] = soft_rank_energy(x, y, epsilon, grid, **solver_options).raw
    if use_scaled:
        values *= window / 2
    return float(np.quantile(values, quantile))
