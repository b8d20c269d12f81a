"""Bound sets: incumbent list, local upper bounds, lower bound sets and gap measures."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import FLOAT_TOL, ModelError, Solution, weakly_dominates


class Kind:
    FULL = "full"
    SIMPLE = "simple"


@dataclass
class LowerBoundSet:
    """Polyhedral outer approximation of a subproblem's nondominated frontier.

    ``hyperplanes`` is a list of (lambda, rhs) pairs with lambda >= 0, each a
    valid inequality lambda . y >= rhs for every feasible image of the
    subproblem. ``facet_offsets`` are valid componentwise lower bounds (the
    axis-parallel extreme facets). The simple kind carries one level-set
    hyperplane plus the facets inherited from its parent node.
    """

    kind: str
    hyperplanes: list            # [(np.ndarray lam, float rhs)]
    extreme_points: list = field(default_factory=list)     # np.ndarray images
    extreme_solutions: list = field(default_factory=list)  # aligned full x vectors
    facet_offsets: np.ndarray = None                       # p-vector or None
    _plane_cache: tuple = field(default=None, init=False, repr=False, compare=False)

    @property
    def p(self) -> int:
        if self.hyperplanes:
            return len(self.hyperplanes[0][0])
        if self.facet_offsets is not None:
            return len(self.facet_offsets)
        raise ModelError("empty lower bound set")

    def all_planes(self):
        """Hyperplanes plus axis facets, as (lam, rhs) pairs."""
        planes = list(self.hyperplanes)
        if self.facet_offsets is not None:
            p = len(self.facet_offsets)
            for k in range(p):
                e = np.zeros(p)
                e[k] = 1.0
                planes.append((e, float(self.facet_offsets[k])))
        return planes

    def plane_matrix(self):
        """All planes stacked: (normals of shape (h, p), rhs of shape (h,))."""
        planes = self.all_planes()
        if self._plane_cache is None or self._plane_cache[0] != len(planes):
            normals = np.asarray([lam for lam, _ in planes], dtype=float)
            rhs = np.asarray([r for _, r in planes], dtype=float)
            self._plane_cache = (len(planes), normals, rhs)
        return self._plane_cache[1], self._plane_cache[2]


def local_ideal(L: LowerBoundSet) -> np.ndarray:
    """Componentwise minimum of the lower bound set."""
    if L.facet_offsets is not None:
        return np.asarray(L.facet_offsets, dtype=float)
    if not L.extreme_points:
        raise ModelError("lower bound set has no extreme points and no facets")
    return np.min(np.asarray(L.extreme_points, dtype=float), axis=0)


def is_strictly_above(L: LowerBoundSet, y) -> bool:
    """True iff y lies in the interior of L + R^p_>= (strict on every plane)."""
    y = np.asarray(y, dtype=float)
    for lam, rhs in L.all_planes():
        if float(lam @ y) <= rhs + FLOAT_TOL:
            return False
    return True


def surviving_mask(L: LowerBoundSet, U) -> np.ndarray:
    """Boolean mask of the rows of U strictly above L (batched)."""
    U = np.asarray(U, dtype=float)
    if U.size == 0:
        return np.zeros(len(U), dtype=bool)
    normals, rhs = L.plane_matrix()
    if len(rhs) == 0:
        return np.ones(len(U), dtype=bool)
    return np.all(U @ normals.T > rhs[None, :] + FLOAT_TOL, axis=1)


def dominance_fathom(L: LowerBoundSet, K: "LocalUpperBoundSet"):
    """Fathoming test iii): no local upper bound strictly above L."""
    surviving = K.arr[surviving_mask(L, K.arr)]
    return len(surviving) == 0, surviving


def spanning_points(L: LowerBoundSet, lu) -> list:
    """Axis-parallel projections of a local upper bound onto the bound set.

    The i-th spanning point moves from lu along -e_i until the boundary of
    L + R^p_>= is hit; the remaining coordinates stay pinned at lu. If the ray
    misses every facet the coordinate is clamped at the local ideal.
    """
    lu = np.asarray(lu, dtype=float)
    p = len(lu)
    ideal = local_ideal(L)
    planes = L.all_planes()
    points = []
    for i in range(p):
        t_max = lu[i] - ideal[i]
        t = t_max
        for lam, rhs in planes:
            if lam[i] > 1e-12:
                t = min(t, (float(lam @ lu) - rhs) / lam[i])
        t = max(0.0, min(t, t_max))
        sp = lu.copy()
        sp[i] -= t
        points.append(sp)
    return points


def hv_simplex_gap(lu, spanning) -> float:
    """|det(G)| / p! for the simplex spanned by lu and its spanning points."""
    lu = np.asarray(lu, dtype=float)
    G = np.column_stack([np.asarray(sp, dtype=float) - lu for sp in spanning])
    return abs(float(np.linalg.det(G))) / math.factorial(len(lu))


def hv_box_gap(lu, l_ideal) -> float:
    """Volume of the box between the local ideal point and a local upper bound."""
    diff = np.maximum(np.asarray(lu, dtype=float) - np.asarray(l_ideal, dtype=float), 0.0)
    return float(np.prod(diff))


MEASURE_LHG = "lhg"
MEASURE_HSZ = "hsz"


def gap_values(L: LowerBoundSet, surviving, measure: str) -> np.ndarray:
    """Per-lub gap measure over the rows of ``surviving`` (batched)."""
    U = np.asarray(surviving, dtype=float)
    if not len(U):
        return np.zeros(0)
    ideal = local_ideal(L)
    if measure == MEASURE_HSZ:
        return np.prod(np.maximum(U - ideal[None, :], 0.0), axis=1)
    if measure != MEASURE_LHG:
        raise ModelError(f"unknown gap measure {measure!r}")
    p = U.shape[1]
    t = U - ideal[None, :]
    normals, rhs = L.plane_matrix()
    if len(rhs):
        proj = U @ normals.T - rhs[None, :]
        for i in range(p):
            col = normals[:, i]
            mask = col > 1e-12
            if mask.any():
                t[:, i] = np.minimum(t[:, i],
                                     np.min(proj[:, mask] / col[mask][None, :], axis=1))
    return np.prod(np.maximum(t, 0.0), axis=1) / math.factorial(p)


def node_gap(L: LowerBoundSet, K: "LocalUpperBoundSet", measure: str) -> float:
    """Largest per-lub gap over the local upper bounds still above L."""
    surviving = K.arr[surviving_mask(L, K.arr)]
    if not len(surviving):
        return 0.0
    return float(gap_values(L, surviving, measure).max())


def gap_argmax_lub(L: LowerBoundSet, surviving, measure: str):
    """The surviving local upper bound attaining the node's gap measure."""
    if not len(surviving):
        return None
    vals = gap_values(L, surviving, measure)
    return np.asarray(surviving)[int(np.argmax(vals))]


@dataclass
class IncumbentList:
    """Mutually nondominated feasible images, one representing solution each."""

    entries: list = field(default_factory=list)  # [Solution]

    def images(self):
        return [s.image for s in self.entries]

    def update(self, candidate: Solution):
        """Insert a feasible solution; returns (accepted, removed solutions)."""
        cand = candidate.image
        for s in self.entries:
            if weakly_dominates(s.image, cand):
                return False, []
        kept, removed = [], []
        for s in self.entries:
            if weakly_dominates(cand, s.image):
                removed.append(s)
            else:
                kept.append(s)
        kept.append(candidate)
        self.entries = kept
        return True, removed


def update_incumbents(U: IncumbentList, candidate: Solution):
    accepted, removed = U.update(candidate)
    return U, accepted, removed


class LocalUpperBoundSet:
    """Corner points of the search region induced by the incumbent list.

    Maintained incrementally: inserting an accepted image z splits every lub u
    with z < u into its p children and filters non-maximal candidates. Only
    insertions are needed; images dominated later contribute nothing to the
    search region.
    """

    def __init__(self, p: int, M: int):
        self.p = p
        self.M = int(M)
        self.arr = np.full((1, p), int(M), dtype=np.int64)

    @property
    def lubs(self):
        return list(self.arr)

    def update(self, z):
        z = np.asarray(z, dtype=np.int64)
        hit = np.all(z[None, :] < self.arr, axis=1)
        if not hit.any():
            return self
        children = np.repeat(self.arr[hit], self.p, axis=0)
        cols = np.tile(np.arange(self.p), int(hit.sum()))
        children[np.arange(len(children)), cols] = z[cols]
        self.arr = _maximal(np.vstack([self.arr[~hit], children]))
        return self

    def as_tuples(self):
        return sorted(tuple(int(v) for v in u) for u in self.arr)


def _maximal(points):
    """Componentwise-maximal, deduplicated subset of integer vectors (rows)."""
    if not len(points):
        return np.empty((0, 0), dtype=np.int64)
    U = np.unique(np.asarray(points, dtype=np.int64).reshape(len(points), -1), axis=0)
    if len(U) <= 1:
        return U
    # after dedupe, u <= v for v != u implies u is strictly covered somewhere
    le = np.all(U[:, None, :] <= U[None, :, :], axis=2)
    return U[le.sum(axis=1) == 1]


def update_local_upper_bounds(K: LocalUpperBoundSet, z) -> LocalUpperBoundSet:
    return K.update(z)


def brute_force_lubs(images, p: int, M: int):
    """Grid-scan oracle for the local upper bound set (tests only)."""
    import itertools

    if not images:
        return [tuple([M] * p)]
    zs = [np.asarray(z, dtype=np.int64) for z in images]
    axes = [sorted({int(z[k]) for z in zs} | {M}) for k in range(p)]
    cands = []
    for u in itertools.product(*axes):
        ua = np.asarray(u, dtype=np.int64)
        if not any(np.all(z < ua) for z in zs):
            cands.append(ua)
    return sorted(tuple(int(v) for v in u) for u in _maximal(cands))


def default_big_m(C) -> int:
    """1 + the largest absolute objective row sum; exceeds any attainable value."""
    C = np.asarray(C)
    return int(np.max(np.sum(np.abs(C), axis=1))) + 1
