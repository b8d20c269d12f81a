"""Dense two-phase simplex and the vector-LP frontier of the linear relaxation."""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field

import numpy as np

from .bounds import Kind, LowerBoundSet, local_ideal
from .model import FLOAT_TOL, Instance, ModelError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

EXACT_2D = "exact2d"
OUTER_APPROX = "outer"

_PIVOT_TOL = 1e-9
_FEAS_TOL = 1e-7
_BLAND_AFTER = 1000   # degenerate pivots before switching to Bland's rule


class InfeasibleSubproblem(Exception):
    """The relaxation of a subproblem admits no solution."""


@dataclass(frozen=True)
class LpResult:
    status: str
    value: float = 0.0
    x: np.ndarray = None      # full n-vector including fixed entries


@dataclass
class RelaxedSubproblem:
    """A node's relaxation: fixings plus inherited valid-inequality pool.

    ``cut_rows`` are decision-space inequalities a.x >= rhs (level-set cuts are
    stored here after integer rounding); ``objective_rows`` are (lam, rhs)
    pairs meaning lam.C.x >= rhs.
    """

    instance: Instance
    fixings: dict = field(default_factory=dict)
    cut_rows: list = field(default_factory=list)       # [(np.ndarray a, rhs)]
    objective_rows: list = field(default_factory=list) # [(np.ndarray lam, rhs)]
    _built: tuple = field(default=None, init=False, repr=False, compare=False)

    def with_fixing(self, j: int, v: int) -> "RelaxedSubproblem":
        fx = dict(self.fixings)
        fx[j] = v
        return RelaxedSubproblem(self.instance, fx, list(self.cut_rows),
                                 list(self.objective_rows))

    def free_vars(self):
        return [j for j in range(self.instance.n) if j not in self.fixings]

    def ge_rows(self):
        """All cut rows as decision-space (a, rhs) with a.x >= rhs."""
        rows = [(np.asarray(a, dtype=float), float(r)) for a, r in self.cut_rows]
        for lam, r in self.objective_rows:
            rows.append((np.asarray(lam, dtype=float) @ self.instance.C, float(r)))
        return rows


def _simplex(c, A, b):
    """min c.y  s.t.  A y <= b, y >= 0. Returns (status, value, y)."""
    m, nv = A.shape
    A = A.astype(float).copy()
    b = b.astype(float).copy()
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0
    na = int(neg.sum())
    # columns: structural | slacks | artificials | rhs
    T = np.zeros((m, nv + m + na + 1))
    T[:, :nv] = A
    T[:, nv:nv + m] = np.eye(m)
    T[np.where(neg)[0], nv + np.where(neg)[0]] = -1.0
    art_cols = []
    basis = np.empty(m, dtype=int)
    k = 0
    for i in range(m):
        if neg[i]:
            col = nv + m + k
            T[i, col] = 1.0
            art_cols.append(col)
            basis[i] = col
            k += 1
        else:
            basis[i] = nv + i
    T[:, -1] = b

    ncols = nv + m + na

    def run(obj_row, allowed_cols):
        nonlocal T
        degenerate = 0
        while True:
            use_bland = degenerate > _BLAND_AFTER
            entering = -1
            if use_bland:
                for j in allowed_cols:
                    if obj_row[j] < -_PIVOT_TOL:
                        entering = j
                        break
            else:
                vals = obj_row[allowed_cols]
                jmin = int(np.argmin(vals))
                if vals[jmin] < -_PIVOT_TOL:
                    entering = allowed_cols[jmin]
            if entering < 0:
                return OPTIMAL
            col = T[:, entering]
            pos = col > _PIVOT_TOL
            if not pos.any():
                return UNBOUNDED
            ratios = np.where(pos, T[:, -1] / np.where(pos, col, 1.0), np.inf)
            rmin = float(ratios.min())
            if rmin <= _PIVOT_TOL:
                degenerate += 1
            tie = np.where(np.abs(ratios - rmin) <= 1e-12)[0]
            if use_bland and len(tie) > 1:
                leave = int(tie[np.argmin(basis[tie])])
            else:
                leave = int(tie[0])
            piv = T[leave, entering]
            T[leave] /= piv
            factor = T[:, entering].copy()
            factor[leave] = 0.0
            T -= np.outer(factor, T[leave])
            obj_row -= obj_row[entering] * T[leave]
            basis[leave] = entering

    rows_alive = np.ones(m, dtype=bool)
    if na:
        # phase 1: minimize the sum of artificials
        obj1 = np.zeros(ncols + 1)
        for col in art_cols:
            obj1[col] = 1.0
        for i in range(m):
            if basis[i] in art_cols:
                obj1 -= T[i]
        allowed = list(range(nv + m))
        status = run(obj1, allowed)
        phase1 = -obj1[-1]
        if phase1 > _FEAS_TOL:
            return INFEASIBLE, 0.0, None
        # drive remaining artificials out of the basis
        for i in range(m):
            if basis[i] in art_cols:
                row = T[i, :nv + m]
                nz = np.where(np.abs(row) > _PIVOT_TOL)[0]
                if len(nz) == 0:
                    rows_alive[i] = False
                    continue
                j = int(nz[0])
                piv = T[i, j]
                T[i] /= piv
                factor = T[:, j].copy()
                factor[i] = 0.0
                T -= np.outer(factor, T[i])
                basis[i] = j

    # phase 2
    c_full = np.zeros(ncols + 1)
    c_full[:nv] = c
    obj2 = c_full.copy()
    for i in range(m):
        if rows_alive[i] and abs(c_full[basis[i]]) > 0:
            obj2 -= c_full[basis[i]] * T[i]
    allowed = [j for j in range(nv + m) if j not in art_cols]
    status = run(obj2, allowed)
    if status == UNBOUNDED:
        return UNBOUNDED, 0.0, None
    y = np.zeros(nv)
    for i in range(m):
        if rows_alive[i] and basis[i] < nv:
            y[basis[i]] = T[i, -1]
    return OPTIMAL, float(-obj2[-1]), y


def _build_le_system(sub: RelaxedSubproblem):
    """LE-form rows over the free variables, with fixings substituted out.

    Memoized on the subproblem: rows never change once solving starts, and a
    frontier computation solves many LPs over the same constraint system.
    """
    if sub._built is not None:
        return sub._built[0]
    inst = sub.instance
    A_le, b_le = inst.le_normalized()
    rows = [A_le.astype(float)]
    rhs = [b_le.astype(float)]
    for a, r in sub.ge_rows():
        rows.append(-a[None, :])
        rhs.append(np.array([-r]))
    A = np.vstack(rows)
    b = np.concatenate(rhs)
    free = sub.free_vars()
    if sub.fixings:
        fixed_idx = sorted(sub.fixings)
        xf = np.array([sub.fixings[j] for j in fixed_idx], dtype=float)
        b = b - A[:, fixed_idx] @ xf
    Af = A[:, free]
    # rows with no free support must hold outright
    empty = np.all(np.abs(Af) <= 1e-12, axis=1)
    if np.any(b[empty] < -_FEAS_TOL):
        sub._built = (None,)
        return None
    Af = Af[~empty]
    bf = b[~empty]
    n_struct = Af.shape[0]
    # box: x_j <= 1 for free variables
    if free:
        Af = np.vstack([Af, np.eye(len(free))])
        bf = np.concatenate([bf, np.ones(len(free))])
    fixed_idx = np.asarray(sorted(sub.fixings), dtype=np.int64)
    xf = np.asarray([sub.fixings[j] for j in fixed_idx], dtype=float)
    sub._built = ((np.asarray(free, dtype=np.int64), Af, bf, n_struct,
                   fixed_idx, xf),)
    return sub._built[0]


def _greedy_knapsack_lp(c, w, cap):
    """min c.y s.t. w.y <= cap, 0 <= y <= 1, with w >= 0: fractional greedy."""
    if cap < -_FEAS_TOL:
        return None
    y = np.zeros(len(c))
    gain = np.where(c < -_PIVOT_TOL)[0]
    freebies = gain[w[gain] <= _PIVOT_TOL]
    y[freebies] = 1.0
    paid = gain[w[gain] > _PIVOT_TOL]
    order = paid[np.lexsort((paid, c[paid] / w[paid]))]
    cum = np.cumsum(w[order])
    nfull = int(np.searchsorted(cum, float(cap) + 1e-12, side="right"))
    y[order[:nfull]] = 1.0
    if nfull < len(order):
        left = float(cap) - (cum[nfull - 1] if nfull else 0.0)
        frac = left / w[order[nfull]]
        if frac > _PIVOT_TOL:
            y[order[nfull]] = frac
    return y


def solve_lp(sub: RelaxedSubproblem, c) -> LpResult:
    """min c.x over the subproblem's relaxation (0 <= x <= 1, fixings applied)."""
    c = np.asarray(c, dtype=float)
    inst = sub.instance
    built = _build_le_system(sub)
    if built is None:
        return LpResult(status=INFEASIBLE)
    free, Af, bf, n_struct, fixed_idx, xf = built
    x_full = np.zeros(inst.n)
    offset = 0.0
    if len(fixed_idx):
        x_full[fixed_idx] = xf
        offset = float(c[fixed_idx] @ xf)
    if not len(free):
        return LpResult(status=OPTIMAL, value=offset, x=x_full)
    cf = c[free]
    if n_struct == 1 and np.all(Af[0] >= 0):
        # fractional knapsack: one nonnegative row plus box bounds
        y = _greedy_knapsack_lp(cf, Af[0], bf[0])
        if y is None:
            return LpResult(status=INFEASIBLE)
        x_full[free] = y
        return LpResult(status=OPTIMAL, value=float(cf @ y) + offset, x=x_full)
    status, value, y = _simplex(cf, Af, bf)
    if status != OPTIMAL:
        if status == INFEASIBLE:
            return LpResult(status=INFEASIBLE)
        raise ModelError("unbounded LP over a boxed binary relaxation")
    x_full[free] = np.clip(y, 0.0, 1.0)
    return LpResult(status=OPTIMAL, value=value + offset, x=x_full)


def solve_lp_batch(sub: RelaxedSubproblem, Cs) -> list:
    """min c.x for several objective rows over one relaxation.

    Shares the built constraint system across rows; with the fractional
    knapsack fast path this avoids most per-solve overhead.
    """
    Cs = np.asarray(Cs, dtype=float)
    built = _build_le_system(sub)
    if built is None:
        return [LpResult(status=INFEASIBLE)] * len(Cs)
    free, Af, bf, n_struct, fixed_idx, xf = built
    if not (len(free) and n_struct == 1 and np.all(Af[0] >= 0)):
        return [solve_lp(sub, c) for c in Cs]
    w, cap = Af[0], bf[0]
    if cap < -_FEAS_TOL:
        return [LpResult(status=INFEASIBLE)] * len(Cs)
    offsets = Cs[:, fixed_idx] @ xf if len(fixed_idx) else np.zeros(len(Cs))
    base = np.zeros(sub.instance.n)
    if len(fixed_idx):
        base[fixed_idx] = xf
    out = []
    for c_row, off in zip(Cs[:, free], offsets):
        y = _greedy_knapsack_lp(c_row, w, cap)
        x_full = base.copy()
        x_full[free] = y
        out.append(LpResult(status=OPTIMAL, value=float(c_row @ y) + float(off),
                            x=x_full))
    return out


def solve_weighted_lp(sub: RelaxedSubproblem, lam) -> LpResult:
    """min lam.C.x over the relaxation; (lam, value) supports the frontier."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0) or not np.any(lam > 0):
        raise ModelError("weight vector must be nonnegative and nonzero")
    return solve_lp(sub, lam @ sub.instance.C)


def _lexmin(sub: RelaxedSubproblem, k: int, order):
    """Lexicographic minimum over the relaxation: min z_k, then the others."""
    inst = sub.instance
    res = solve_lp(sub, inst.C[k].astype(float))
    if res.status == INFEASIBLE:
        return None
    vk = res.value
    capped = RelaxedSubproblem(inst, dict(sub.fixings), list(sub.cut_rows),
                               list(sub.objective_rows))
    capped.cut_rows.append((-inst.C[k].astype(float), -(vk + 1e-7)))
    c2 = np.zeros(inst.n)
    for i in order:
        c2 = c2 + inst.C[i].astype(float)
    res2 = solve_lp(capped, c2)
    if res2.status == INFEASIBLE:  # numeric edge: fall back to stage-1 point
        res2 = res
    y = inst.C @ res2.x
    return vk, y, res2.x


def _normalize(lam):
    lam = np.asarray(lam, dtype=float)
    return lam / lam.sum()


def _frontier_2d(sub: RelaxedSubproblem, tol: float = FLOAT_TOL) -> LowerBoundSet:
    """All extreme supported points of a biobjective relaxation, dichotomically."""
    inst = sub.instance
    left = _lexmin(sub, 0, [1])
    if left is None:
        raise InfeasibleSubproblem(inst.name)
    right = _lexmin(sub, 1, [0])
    v1, yL, xL = left
    v2, yR, xR = right
    hyperplanes = [(np.array([1.0, 0.0]), v1), (np.array([0.0, 1.0]), v2)]
    points = [yL]
    sols = [xL]
    if not np.allclose(yL, yR, atol=1e-7):
        points.append(yR)
        sols.append(xR)
        stack = [(yL, yR)]
        while stack:
            ya, yb = stack.pop()
            lam = np.array([ya[1] - yb[1], yb[0] - ya[0]])
            if lam[0] <= 1e-9 or lam[1] <= 1e-9:
                continue
            lam = _normalize(lam)
            res = solve_weighted_lp(sub, lam)
            hyperplanes.append((lam, res.value))
            if res.value < float(lam @ ya) - tol:
                yc = inst.C @ res.x
                points.append(yc)
                sols.append(res.x)
                stack.append((ya, yc))
                stack.append((yc, yb))
    order = np.lexsort((np.asarray(points)[:, 1], np.asarray(points)[:, 0]))
    points = [points[i] for i in order]
    sols = [sols[i] for i in order]
    return LowerBoundSet(kind=Kind.FULL, hyperplanes=hyperplanes,
                         extreme_points=points, extreme_solutions=sols,
                         facet_offsets=np.array([v1, v2]))


@functools.lru_cache(maxsize=256)
def _p_subsets(h, p):
    return np.asarray(list(itertools.combinations(range(h), p)))


def _region_vertices(normals, rhs, p):
    """Vertices of {y : lam.y >= rhs for all planes} via p-subset intersection."""
    h = len(rhs)
    if h < p:
        return np.empty((0, p))
    combos = _p_subsets(h, p)
    Ms = normals[combos]
    good = np.abs(np.linalg.det(Ms)) > 1e-9
    if not good.any():
        return np.empty((0, p))
    verts = np.linalg.solve(Ms[good], rhs[combos[good]][..., None])[..., 0]
    feas = np.all(verts @ normals.T >= rhs[None, :] - 1e-6, axis=1)
    verts = verts[feas]
    if not len(verts):
        return verts
    rounded = np.round(verts, 7)
    _, idx = np.unique(rounded, axis=0, return_index=True)
    return verts[np.sort(idx)]


def _frontier_outer(sub: RelaxedSubproblem, refine_max: int,
                    facet_tol: float = 1e-7) -> LowerBoundSet:
    """Outer approximation of the frontier for p >= 3 objectives.

    Starts from the augmented unit weights plus the all-ones weight and
    refines vertices of the current outer region that are cut off by a fresh
    supporting hyperplane. Stopping early keeps the bound valid, only weaker.
    """
    inst = sub.instance
    p = inst.p
    delta = 1e-3
    weights = []
    for k in range(p):
        w = np.full(p, delta)
        w[k] = 1.0
        weights.append(_normalize(w))
    weights.append(_normalize(np.ones(p)))
    Cf = inst.C.astype(float)
    objs = np.vstack([np.asarray(weights) @ Cf, Cf])
    results = solve_lp_batch(sub, objs)
    if any(r.status == INFEASIBLE for r in results):
        raise InfeasibleSubproblem(inst.name)
    hyperplanes, points, sols = [], [], []
    for w, res in zip(weights, results[:len(weights)]):
        hyperplanes.append((w, res.value))
        points.append(inst.C @ res.x)
        sols.append(res.x)
    # valid axis facets from pure per-objective minima
    offsets = np.array([r.value for r in results[len(weights):]])
    _refine(sub, hyperplanes, points, sols, refine_max, facet_tol)
    points, sols = _dedupe_points(points, sols)
    return LowerBoundSet(kind=Kind.FULL, hyperplanes=hyperplanes,
                         extreme_points=points, extreme_solutions=sols,
                         facet_offsets=offsets)


def _refine(sub, hyperplanes, points, sols, refine_max, facet_tol):
    """Cut off unsupported vertices of the outer region, in rounds, in place."""
    inst = sub.instance
    p = inst.p
    cache = {}

    def weighted(lam):
        key = tuple(np.round(lam, 9))
        if key not in cache:
            cache[key] = solve_weighted_lp(sub, lam)
        return cache[key]

    solves = 0
    supported = set()
    plane_keys = {tuple(np.round(lam, 9)) for lam, _ in hyperplanes}
    while solves < refine_max:
        normals = np.asarray([lam for lam, _ in hyperplanes])
        rhs = np.asarray([r for _, r in hyperplanes])
        verts = _region_vertices(normals, rhs, p)
        if not len(verts):
            break
        slack = np.abs(verts @ normals.T - rhs[None, :])
        vert_keys = [tuple(row) for row in np.round(verts, 7)]
        pending = {}
        for i, v in enumerate(verts):
            key = vert_keys[i]
            if key in supported:
                continue
            active = slack[i] <= 1e-6
            if not active.any():
                continue
            lam = _normalize(normals[active].sum(axis=0))
            lam_key = tuple(np.round(lam, 9))
            if lam_key in plane_keys:
                supported.add(key)
                continue
            res = weighted(lam)
            solves += 1
            if res.value > float(lam @ v) + facet_tol:
                pending.setdefault(lam_key, (lam, res))
            else:
                supported.add(key)
            if solves >= refine_max:
                break
        if not pending:
            break
        for lam_key, (lam, res) in pending.items():
            plane_keys.add(lam_key)
            hyperplanes.append((lam, res.value))
            points.append(inst.C @ res.x)
            sols.append(res.x)


def _dedupe_points(points, sols):
    uniq = {}
    for y, x in zip(points, sols):
        uniq.setdefault(tuple(np.round(y, 7)), (y, x))
    return ([uniq[k][0] for k in sorted(uniq)],
            [uniq[k][1] for k in sorted(uniq)])


def refine_frontier(sub: RelaxedSubproblem, L: LowerBoundSet,
                    refine_max: int, facet_tol: float = 1e-7) -> LowerBoundSet:
    """Continue outer-approximation refinement of a full bound set.

    Fathoming tests are monotone in the bound, so callers may first test the
    unrefined bound and only pay for refinement when the node survives.
    """
    if refine_max <= 0 or L.kind != Kind.FULL or sub.instance.p == 2:
        return L
    hyperplanes = list(L.hyperplanes)
    points = list(L.extreme_points)
    sols = list(L.extreme_solutions)
    _refine(sub, hyperplanes, points, sols, refine_max, facet_tol)
    points, sols = _dedupe_points(points, sols)
    return LowerBoundSet(kind=Kind.FULL, hyperplanes=hyperplanes,
                         extreme_points=points, extreme_solutions=sols,
                         facet_offsets=L.facet_offsets)


def lower_bound_frontier(sub: RelaxedSubproblem, mode: str = None,
                         refine_max: int = 50) -> LowerBoundSet:
    """Full lower bound set of a subproblem's linear relaxation.

    Raises InfeasibleSubproblem when the relaxation is empty.
    """
    p = sub.instance.p
    if mode is None:
        mode = EXACT_2D if p == 2 else OUTER_APPROX
    if mode == EXACT_2D:
        if p != 2:
            raise ModelError("exact dichotomic frontier requires p == 2")
        return _frontier_2d(sub)
    return _frontier_outer(sub, refine_max=refine_max)
