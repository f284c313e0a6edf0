"""Multivariate hard/soft ranks and the (soft) rank energy two-sample statistic."""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionMismatchError, InvalidArgumentError
from .halton import HaltonGrid, generate_halton
from .ot import cost_matrix, row_normalize, solve_exact, solve_sinkhorn


@dataclass(frozen=True, eq=False)
class TwoSample:
    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = _as_sample(self.xs, "xs")
        ys = _as_sample(self.ys, "ys")
        if xs.shape[1] != ys.shape[1]:
            raise DimensionMismatchError(
                f"xs have dimension {xs.shape[1]}, ys {ys.shape[1]}"
            )
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def m(self):
        return self.xs.shape[0]

    @property
    def n(self):
        return self.ys.shape[0]

    @property
    def dim(self):
        return self.xs.shape[1]

    def pooled(self):
        """xs followed by ys, the row order used for every transport problem."""
        return np.vstack([self.xs, self.ys])


def _as_sample(x, name):
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise InvalidArgumentError(f"{name} must be a non-empty list of vectors")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True, eq=False)
class RankSet:
    x_ranks: np.ndarray
    y_ranks: np.ndarray
    kind: str  # "hard" or "soft"
    epsilon: float = 0.0
    grid_index: np.ndarray | None = None  # hard ranks only: pooled row -> grid row

    @property
    def m(self):
        return self.x_ranks.shape[0]

    @property
    def n(self):
        return self.y_ranks.shape[0]


@dataclass(frozen=True)
class StatisticValue:
    raw: float
    scaled: float
    kind: str  # "RE" or "sRE"
    epsilon: float
    m: int
    n: int

    def as_dict(self):
        return {
            "raw": self.raw,
            "scaled": self.scaled,
            "kind": self.kind,
            "epsilon": self.epsilon,
            "m": self.m,
            "n": self.n,
        }


def _resolve(xs, ys, grid):
    sample = xs if isinstance(xs, TwoSample) else TwoSample(xs, ys)
    total = sample.m + sample.n
    if grid is None:
        grid = generate_halton(total, sample.dim)
    elif not isinstance(grid, HaltonGrid):
        points = np.asarray(grid, dtype=np.float64)
        if points.ndim == 1:
            points = points[:, None]
        grid = HaltonGrid(points=points, bases=())
    if grid.count != total:
        raise InvalidArgumentError(
            f"grid has {grid.count} points, sample has {total}"
        )
    if grid.dim != sample.dim:
        raise DimensionMismatchError(
            f"grid has dimension {grid.dim}, sample {sample.dim}"
        )
    return sample, grid


def _canonical_ties(pooled, assignment):
    """Hand grid points to identical source points in increasing index order.

    Any permutation of the grid points within a group of identical sources is
    equally optimal. Fixing the order this way makes the result independent of
    the solver's internal tie-breaking, and because xs precede ys in the pool
    the two samples receive interleaved low-discrepancy subsets of the group's
    grid points rather than, say, its innermost and outermost halves.
    """
    _, inverse, counts = np.unique(pooled, axis=0, return_inverse=True, return_counts=True)
    if np.all(counts == 1):
        return assignment
    inverse = inverse.ravel()
    out = assignment.copy()
    for label in np.flatnonzero(counts > 1):
        rows = np.flatnonzero(inverse == label)
        out[rows] = np.sort(assignment[rows])
    return out


def hard_ranks(xs, ys=None, grid=None):
    """Exact-OT ranks: each pooled point is sent to its assigned grid point.

    ``xs`` may also be a :class:`TwoSample` (then ``ys`` is ignored). Without
    ``grid`` the first ``m + n`` Halton points of matching dimension are used.
    """
    sample, grid = _resolve(xs, ys, grid)
    pooled = sample.pooled()
    plan = solve_exact(cost_matrix(pooled, grid))
    assignment = _canonical_ties(pooled, plan.assignment)
    ranks = grid.points[assignment]
    return RankSet(
        x_ranks=ranks[: sample.m],
        y_ranks=ranks[sample.m :],
        kind="hard",
        epsilon=0.0,
        grid_index=assignment,
    )


def soft_ranks(xs, ys=None, epsilon=1.0, grid=None, normalize_cost=False,
               max_iters=10_000, tolerance=1e-9):
    """Entropic soft ranks: conditional mean of grid points under the Sinkhorn plan.

    Each pooled point's rank is ``sum_j Pbar[i, j] * h_j`` where ``Pbar`` is
    the row-normalised entropic plan. ``normalize_cost`` rescales the cost
    matrix to unit maximum before solving.
    """
    sample, grid = _resolve(xs, ys, grid)
    if not epsilon > 0:
        raise InvalidArgumentError(f"epsilon must be positive, got {epsilon}")
    pooled = sample.pooled()
    cost = cost_matrix(pooled, grid, normalize=normalize_cost)
    plan = solve_sinkhorn(cost, epsilon, max_iters=max_iters, tolerance=tolerance)
    ranks = row_normalize(plan) @ grid.points
    return RankSet(
        x_ranks=ranks[: sample.m],
        y_ranks=ranks[sample.m :],
        kind="soft",
        epsilon=float(epsilon),
    )


def _mean_distance(a, b):
    # fsum is correctly rounded, so the result does not depend on summation
    # order; this keeps the statistic exactly symmetric in its two samples
    return math.fsum(kernels.distances(a, b).ravel().tolist()) / (a.shape[0] * b.shape[0])


def energy_statistic(ranks):
    """Energy distance between the x- and y-rank clouds.

    ``raw = 2 E|Rx - Ry| - E|Rx - Rx'| - E|Ry - Ry'|`` with empirical means
    over all ordered pairs (self-pairs included, they contribute zero), and
    ``scaled = raw * m n / (m + n)``.
    """
    rx = np.ascontiguousarray(ranks.x_ranks, dtype=np.float64)
    ry = np.ascontiguousarray(ranks.y_ranks, dtype=np.float64)
    if rx.shape[0] == 0 or ry.shape[0] == 0:
        raise InvalidArgumentError("rank sets must be non-empty on both sides")
    m, n = rx.shape[0], ry.shape[0]
    cross = _mean_distance(rx, ry)
    within = _mean_distance(rx, rx) + _mean_distance(ry, ry)
    raw = 2.0 * cross - within
    kind = "RE" if ranks.kind == "hard" else "sRE"
    return StatisticValue(
        raw=raw,
        scaled=raw * (m * n / (m + n)),
        kind=kind,
        epsilon=float(ranks.epsilon),
        m=m,
        n=n,
    )


def rank_energy(xs, ys=None, grid=None):
    """Rank energy of two samples (exact OT ranks)."""
    return energy_statistic(hard_ranks(xs, ys, grid))


def soft_rank_energy(xs, ys=None, epsilon=1.0, grid=None, normalize_cost=False,
                     max_iters=10_000, tolerance=1e-9):
    """Soft rank energy of two samples at regularisation ``epsilon``."""
    return energy_statistic(
        soft_ranks(xs, ys, epsilon, grid, normalize_cost, max_iters, tolerance)
    )


def two_sample_statistic(xs, ys, epsilon=0.0, grid=None, **solver_options):
    """RE when ``epsilon == 0``, sRE otherwise."""
    if epsilon == 0:
        return rank_energy(xs, ys, grid)
    return soft_rank_energy(xs, ys, epsilon, grid, **solver_options)


def permutation_null(xs, ys=None, epsilon=0.0, n_permutations=200, seed=0, grid=None,
                     **solver_options):
    """Statistics of random relabellings of the pooled sample.

    Ranks are equivariant under reordering of the pooled points, so the pooled
    ranks are computed once and only the split into two groups is permuted.
    Returns an array of ``(raw, scaled)`` rows.
    """
    sample, grid = _resolve(xs, ys, grid)
    if epsilon == 0:
        ranks = hard_ranks(sample, grid=grid)
    else:
        ranks = soft_ranks(sample, epsilon=epsilon, grid=grid, **solver_options)
    pooled = np.vstack([ranks.x_ranks, ranks.y_ranks])
    dist = kernels.distances(pooled, pooled)
    m, n = sample.m, sample.n
    rng = np.random.default_rng(seed)
    out = np.empty((n_permutations, 2))
    for k in range(n_permutations):
        perm = rng.permutation(m + n)
        raw = energy_from_distances(dist, perm[:m], perm[m:])
        out[k] = raw, raw * (m * n / (m + n))
    return out


def energy_from_distances(dist, ix, iy):
    """Raw energy statistic of the groups ``ix``/``iy`` of a pairwise distance matrix."""
    return (2.0 * dist[np.ix_(ix, iy)].mean()
            - dist[np.ix_(ix, ix)].mean() - dist[np.ix_(iy, iy)].mean())
