"""Discrete optimal transport between two equal-size uniform point clouds.

Two solvers are provided:

* :func:`solve_exact` -- the Kantorovich linear program. With uniform, equal
  marginals its optimum is attained at a scaled permutation, so it is solved
  as a linear assignment problem.
* :func:`solve_sinkhorn` -- the entropy-regularised problem
  ``min <C, P> - eps * H(P)`` over the same couplings, solved in the dual
  with log-stabilised Sinkhorn scaling, epsilon annealing and a Newton
  refinement for small ``eps``.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import kernels
from .errors import (
    ConvergenceWarning,
    CountMismatchError,
    DimensionMismatchError,
    InvalidArgumentError,
    NonFiniteError,
    SolverError,
)

# exponents at or below this are flushed to zero: exp(-300) ~ 5e-131 is far
# below any marginal tolerance and avoids subnormal arithmetic
EXP_FLOOR = -300.0
# absorb scalings into the duals once they leave [1/ABSORB, ABSORB]
ABSORB = 1e50
ANNEAL_FACTOR = 4.0
STAGE_TOLERANCE = 1e-2  # relative to the 1/N marginal, for annealing stages
SINKHORN_WARMUP = 100  # final-stage sweeps before switching to Newton
STAGE_BUDGET = 1000
NEWTON_MAX_SIZE = 4000


@dataclass(frozen=True, eq=False)
class TransportPlan:
    """A coupling with (approximately) uniform marginals.

    ``epsilon`` is 0 for the exact plan. ``marginal_violation`` is the
    achieved worst-case ``|row or column sum - 1/N|``.
    """

    coupling: np.ndarray
    epsilon: float
    marginal_violation: float
    iterations: int = 0
    converged: bool = True
    assignment: np.ndarray | None = None

    @property
    def size(self):
        return self.coupling.shape[0]

    def transport_cost(self, cost):
        return float(np.sum(np.asarray(cost) * self.coupling))


def _as_points(x, name):
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise InvalidArgumentError(f"{name} must be a list of vectors")
    return arr


def cost_matrix(sources, targets, normalize=False):
    """Squared Euclidean distances ``C[i, j] = |sources[i] - targets[j]|^2``.

    ``targets`` may be a :class:`~rankcpd.halton.HaltonGrid` or an array.
    With ``normalize=True`` the matrix is divided by its largest entry, which
    changes the meaning of any regularisation strength used with it.
    """
    targets = getattr(targets, "points", targets)
    src = _as_points(sources, "sources")
    tgt = _as_points(targets, "targets")
    if src.shape[1] != tgt.shape[1]:
        raise DimensionMismatchError(
            f"sources have dimension {src.shape[1]}, targets {tgt.shape[1]}"
        )
    if src.shape[0] != tgt.shape[0]:
        raise CountMismatchError(
            f"{src.shape[0]} sources but {tgt.shape[0]} targets"
        )
    cost = kernels.squared_distances(np.ascontiguousarray(src), np.ascontiguousarray(tgt))
    if normalize:
        top = cost.max()
        if top > 0:
            cost /= top
    return cost


def _check_cost(cost):
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1] or cost.shape[0] == 0:
        raise InvalidArgumentError(f"cost must be a non-empty square matrix, got shape {cost.shape}")
    if not np.all(np.isfinite(cost)):
        raise NonFiniteError("cost matrix has non-finite entries")
    return cost


def marginal_violation(coupling):
    n = coupling.shape[0]
    target = 1.0 / n
    rows = np.abs(coupling.sum(axis=1) - target).max()
    cols = np.abs(coupling.sum(axis=0) - target).max()
    return float(max(rows, cols))


def solve_exact(cost):
    """Optimal uniform-marginal coupling as a scaled permutation matrix.

    Rows are augmented in index order, so ties between equally good
    permutations are broken deterministically.
    """
    cost = _check_cost(cost)
    n = cost.shape[0]
    assignment = np.asarray(kernels.linear_assignment(cost), dtype=np.int64)
    coupling = np.zeros((n, n))
    coupling[np.arange(n), assignment] = 1.0 / n
    return TransportPlan(
        coupling=coupling,
        epsilon=0.0,
        marginal_violation=marginal_violation(coupling),
        assignment=assignment,
    )


def _dual_objective(f, g, plan, eps, a, b):
    return a * f.sum() + b * g.sum() - eps * plan.sum()


def _newton_step(plan, eps, a, b):
    """Newton direction for the dual marginal equations.

    The potential on the last column is pinned to remove the constant shift
    ``(f + c, g - c)`` that leaves the plan unchanged.
    """
    r = plan.sum(axis=1)
    c = plan.sum(axis=0)
    q = plan / r[:, None]
    schur = np.diag(c) - plan.T @ q
    rhs = eps * (b - c) - q.T @ (eps * (a - r))
    schur = schur[:-1, :-1]
    schur[np.diag_indices_from(schur)] += 1e-14 * c.max()
    try:
        dg = scipy.linalg.solve(schur, rhs[:-1], assume_a="pos", check_finite=False)
    except (np.linalg.LinAlgError, ValueError):
        dg = np.linalg.lstsq(schur, rhs[:-1], rcond=None)[0]
    dg = np.append(dg, 0.0)
    df = (eps * (a - r) - plan @ dg) / r
    return df, dg


def _violation(plan, a, b):
    return max(np.abs(plan.sum(axis=1) - a).max(), np.abs(plan.sum(axis=0) - b).max())


def solve_sinkhorn(cost, epsilon, max_iters=10_000, tolerance=1e-9):
    """Entropy-regularised optimal coupling with uniform ``1/N`` marginals.

    Returns the unique minimiser of ``sum(C * P) + eps * sum(P log P)`` up to
    the stopping rule: stop once the worst row/column marginal error is at
    most ``tolerance`` or after ``max_iters`` iterations (Sinkhorn sweeps and
    Newton steps both count). On budget exhaustion a
    :class:`~rankcpd.errors.ConvergenceWarning` is emitted and the plan is
    returned with ``converged=False``.

    All updates act on the dual potentials ``f, g`` with
    ``P = exp((f_i + g_j - C_ij) / eps)``; the kernel is rebuilt from the
    potentials whenever the multiplicative scalings grow large, so nothing
    overflows. ``eps`` is reached by annealing down from ``max(C)``.
    """
    cost = _check_cost(cost)
    epsilon = float(epsilon)
    if not epsilon > 0 or not np.isfinite(epsilon):
        raise InvalidArgumentError(f"epsilon must be positive and finite, got {epsilon}")
    if not tolerance > 0:
        raise InvalidArgumentError(f"tolerance must be positive, got {tolerance}")
    if max_iters < 1:
        raise InvalidArgumentError(f"max_iters must be positive, got {max_iters}")

    n = cost.shape[0]
    a = b = 1.0 / n
    f = np.zeros(n)
    g = np.zeros(n)

    stages = [epsilon]
    top = float(cost.max())
    while stages[-1] < top:
        stages.append(stages[-1] * ANNEAL_FACTOR)
    stages.reverse()

    it = 0
    err = np.inf
    for k, eps in enumerate(stages):
        final = k == len(stages) - 1
        stage_tol = tolerance if final else STAGE_TOLERANCE * a
        budget = max_iters - it
        if not final:
            budget = min(budget, STAGE_BUDGET)
        elif n <= NEWTON_MAX_SIZE:
            budget = min(budget, SINKHORN_WARMUP)
        f, g, used, err = _scaling_sweeps(cost, f, g, eps, a, b, stage_tol, budget)
        it += used
        if it >= max_iters:
            break

    plan = kernels.gibbs_kernel(f, g, cost, epsilon, EXP_FLOOR)
    err = _violation(plan, a, b)
    if err > tolerance and it < max_iters and n <= NEWTON_MAX_SIZE:
        f, g, plan, err, used = _newton_refine(cost, f, g, plan, epsilon, a, b, tolerance, max_iters - it)
        it += used
    if err > tolerance and it < max_iters:
        f, g, used, _ = _scaling_sweeps(cost, f, g, epsilon, a, b, tolerance, max_iters - it)
        it += used
        plan = kernels.gibbs_kernel(f, g, cost, epsilon, EXP_FLOOR)
        err = _violation(plan, a, b)

    converged = err <= tolerance
    if not converged:
        warnings.warn(
            f"Sinkhorn stopped after {it} iterations with marginal violation "
            f"{err:.3e} > tolerance {tolerance:.3e}",
            ConvergenceWarning,
            stacklevel=2,
        )
    return TransportPlan(
        coupling=plan,
        epsilon=epsilon,
        marginal_violation=float(err),
        iterations=it,
        converged=bool(converged),
    )


def _scaling_sweeps(cost, f, g, eps, a, b, tol, budget):
    """Stabilised Sinkhorn at fixed ``eps``; returns updated potentials."""
    f = f.copy()
    g = g.copy()
    kernel = kernels.gibbs_kernel(f, g, cost, eps, EXP_FLOOR)
    u = np.ones_like(f)
    v = np.ones_like(g)
    used = 0
    err = np.inf
    while used < budget:
        kv = kernel @ v
        # row error of the current (column-feasible) iterate
        err = np.abs(u * kv - a).max()
        if used > 0 and err <= tol:
            break
        if not np.all(kv > 0):
            raise SolverError("row of the Gibbs kernel vanished; potentials diverged")
        u = a / kv
        ktu = kernel.T @ u
        if not np.all(ktu > 0):
            raise SolverError("column of the Gibbs kernel vanished; potentials diverged")
        v = b / ktu
        used += 1
        if u.max() > ABSORB or v.max() > ABSORB or u.min() < 1 / ABSORB or v.min() < 1 / ABSORB:
            f += eps * np.log(u)
            g += eps * np.log(v)
            kernel = kernels.gibbs_kernel(f, g, cost, eps, EXP_FLOOR)
            u[:] = 1.0
            v[:] = 1.0
    f += eps * np.log(u)
    g += eps * np.log(v)
    return f, g, used, err


def _newton_refine(cost, f, g, plan, eps, a, b, tol, budget):
    value = _dual_objective(f, g, plan, eps, a, b)
    err = _violation(plan, a, b)
    used = 0
    while used < budget and err > tol:
        df, dg = _newton_step(plan, eps, a, b)
        step = 1.0
        accepted = False
        while step > 1e-10:
            fn = f + step * df
            gn = g + step * dg
            with np.errstate(over="ignore", invalid="ignore"):
                pn = kernels.gibbs_kernel(fn, gn, cost, eps, EXP_FLOOR)
                vn = _dual_objective(fn, gn, pn, eps, a, b)
                en = _violation(pn, a, b)
            flat = abs(vn - value) <= 1e-13 * max(1.0, abs(value))
            if np.isfinite(vn) and (vn > value or (flat and en < err)):
                accepted = True
                break
            step *= 0.5
        used += 1
        if not accepted:
            break
        f, g, plan, value, err = fn, gn, pn, vn, en
    return f, g, plan, err, used


def row_normalize(plan):
    """Divide each row of the coupling by its sum (rows then sum to 1)."""
    coupling = getattr(plan, "coupling", plan)
    coupling = np.asarray(coupling, dtype=np.float64)
    sums = coupling.sum(axis=1)
    if np.any(sums <= 0):
        raise SolverError("coupling has a zero row; a feasible plan never does")
    return coupling / sums[:, None]
