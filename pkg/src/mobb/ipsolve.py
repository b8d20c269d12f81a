"""Single-objective 0-1 branch and bound for weighted-sum and e-constraint scalarizations.

Best-bound search with LP relaxation bounds. On a time limit the incumbent
(if any) is returned together with the best proven global bound, so callers
can degrade gracefully instead of failing.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass

import numpy as np

from .lp import INFEASIBLE, OPTIMAL, RelaxedSubproblem, solve_lp
from .model import Instance

STATUS_OPTIMAL = "optimal"
STATUS_FEASIBLE_TIMEOUT = "feasible_timeout"
STATUS_INFEASIBLE = "infeasible"
STATUS_NO_SOLUTION_TIMEOUT = "no_solution_timeout"

_INT_TOL = 1e-6


@dataclass(frozen=True)
class ScalarResult:
    status: str
    solution: tuple = None    # binary n-vector
    value: float = None
    bound: float = -math.inf  # best proven lower bound


def _fractional_var(x, free):
    """Most fractional free variable, or -1 if x is integral on the free set."""
    best, best_frac = -1, _INT_TOL
    for j in free:
        frac = abs(x[j] - round(x[j]))
        if frac > best_frac:
            best, best_frac = j, frac
    return best


def solve_single_objective(sub: RelaxedSubproblem, c, time_limit: float = math.inf,
                           node_limit: int = None) -> ScalarResult:
    """min c.x over the binary subproblem, by best-bound branch and bound.

    ``node_limit`` caps the number of expanded nodes; unlike the wall-clock
    limit it makes truncated solves reproducible across runs.
    """
    c = np.asarray(c, dtype=float)
    deadline = time.monotonic() + time_limit if math.isfinite(time_limit) else math.inf
    root = solve_lp(sub, c)
    if root.status == INFEASIBLE:
        return ScalarResult(status=STATUS_INFEASIBLE, bound=math.inf)

    best_val = math.inf
    best_x = None
    heap = []
    seq = 0

    def push(node_sub, res):
        nonlocal seq, best_val, best_x
        free = node_sub.free_vars()
        j = _fractional_var(res.x, free)
        if j < 0:
            xr = np.rint(res.x).astype(np.int64)
            val = float(c @ xr)
            if val < best_val - 1e-12:
                best_val = val
                best_x = tuple(int(v) for v in xr)
            return
        heapq.heappush(heap, (res.value, seq, node_sub, j))
        seq += 1

    push(sub, root)
    global_bound = root.value
    expanded = 0
    while heap:
        bound, _, node_sub, j = heap[0]
        global_bound = bound
        if bound >= best_val - 1e-9:
            return ScalarResult(status=STATUS_OPTIMAL, solution=best_x,
                                value=best_val, bound=best_val)
        if time.monotonic() > deadline:
            break
        if node_limit is not None and expanded >= node_limit:
            break
        expanded += 1
        heapq.heappop(heap)
        for v in (0, 1):
            child = node_sub.with_fixing(j, v)
            res = solve_lp(child, c)
            if res.status == OPTIMAL and res.value < best_val - 1e-9:
                push(child, res)
    if heap:
        global_bound = min(global_bound, heap[0][0])
        if best_x is not None:
            return ScalarResult(status=STATUS_FEASIBLE_TIMEOUT, solution=best_x,
                                value=best_val, bound=global_bound)
        return ScalarResult(status=STATUS_NO_SOLUTION_TIMEOUT, bound=global_bound)
    if best_x is None:
        return ScalarResult(status=STATUS_INFEASIBLE, bound=math.inf)
    return ScalarResult(status=STATUS_OPTIMAL, solution=best_x,
                        value=best_val, bound=best_val)


def solve_weighted_sum_ip(sub: RelaxedSubproblem, lam, time_limit: float = math.inf,
                          node_limit: int = None):
    """Weighted-sum scalarization to integer optimality.

    Returns (result, (lam, level_rhs)): the level set lam.Cx >= level_rhs is a
    valid inequality for the subproblem. On timeout the proven bound is used
    as the level-set right-hand side.
    """
    lam = np.asarray(lam, dtype=float)
    c = lam @ sub.instance.C
    res = solve_single_objective(sub, c, time_limit, node_limit)
    if res.status == STATUS_OPTIMAL:
        return res, (lam, res.value)
    if res.status in (STATUS_FEASIBLE_TIMEOUT, STATUS_NO_SOLUTION_TIMEOUT):
        return res, (lam, res.bound)
    return res, None


def solve_econstraint(sub: RelaxedSubproblem, k: int, eps, time_limit: float = math.inf):
    """Two-stage e-constraint scalarization: min z_k under z_i <= eps_i, then
    min sum z_i under the stage-1 cap. Returns (result, n_ip_solves).

    An optimal stage-2 solution is efficient for the underlying problem.
    """
    inst = sub.instance
    p = inst.p
    eps = list(eps)
    if len(eps) != p - 1:
        raise ValueError(f"eps needs {p - 1} entries, got {len(eps)}")
    others = [i for i in range(p) if i != k]
    stage1 = RelaxedSubproblem(inst, dict(sub.fixings), list(sub.cut_rows),
                               list(sub.objective_rows))
    for i, e in zip(others, eps):
        # z_i <= e  as  -C_i x >= -e
        stage1.cut_rows.append((-inst.C[i].astype(float), -float(e)))
    res1 = solve_single_objective(stage1, inst.C[k].astype(float), time_limit)
    if res1.status == STATUS_INFEASIBLE:
        return res1, 1
    if res1.status == STATUS_NO_SOLUTION_TIMEOUT:
        return res1, 1
    cap = res1.value
    stage2 = RelaxedSubproblem(inst, dict(stage1.fixings), list(stage1.cut_rows),
                               list(stage1.objective_rows))
    stage2.cut_rows.append((-inst.C[k].astype(float), -float(cap)))
    c2 = inst.C.sum(axis=0).astype(float)
    res2 = solve_single_objective(stage2, c2, time_limit)
    if res2.status in (STATUS_INFEASIBLE, STATUS_NO_SOLUTION_TIMEOUT):
        # stage-1 incumbent is still feasible for the e-constraint problem
        return ScalarResult(status=STATUS_FEASIBLE_TIMEOUT, solution=res1.solution,
                            value=res1.value, bound=res1.bound), 2
    return res2, 2


def augmented_unit_weights(p: int, delta: float = 1e-3):
    """The warmstart weight set: p augmented unit vectors plus equal weights."""
    weights = []
    for k in range(p):
        w = np.full(p, delta)
        w[k] = 1.0
        weights.append(w / w.sum())
    weights.append(np.full(p, 1.0 / p))
    return weights
