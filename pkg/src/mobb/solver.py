"""Multi-objective 0-1 branch and bound with adaptive objective-space improvements.

The main loop follows the classic node-select / lower-bound / incumbent-update /
fathom / branch cycle. Optional features: dynamic hypervolume-gap node
selection (lhg/hsz), weighted-sum warmstart with level-set cuts, scheduled
two-stage e-constraint solves, simple lower bound sets at fixed tree levels,
and terminal enumeration of almost-fixed nodes.
"""

from __future__ import annotations

import heapq
import math
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import bounds as bnd
from .bounds import (IncumbentList, Kind, LocalUpperBoundSet, LowerBoundSet,
                     MEASURE_HSZ, MEASURE_LHG, default_big_m, gap_argmax_lub,
                     gap_values, is_strictly_above, local_ideal, node_gap,
                     surviving_mask)
from .ipsolve import (STATUS_INFEASIBLE, STATUS_NO_SOLUTION_TIMEOUT,
                      STATUS_OPTIMAL, augmented_unit_weights, solve_econstraint,
                      solve_weighted_sum_ip)
from .lp import (InfeasibleSubproblem, RelaxedSubproblem,
                 lower_bound_frontier, refine_frontier)
from .model import (DEFAULT_ENUM_CAP, Instance, ModelError, Solution,
                    enumerate_nondominated, is_feasible)

SELECT_DEPTH = "depth"
SELECT_BREADTH = "breadth"
SELECT_LHG = "lhg"
SELECT_HSZ = "hsz"

BRANCH_MOF = "mof"
BRANCH_SOR = "sor"

_INT_TOL = 1e-6

# effort cap for the simple-lower-bound weighted-sum IP at inner nodes
_SLB_NODE_LIMIT = 200


@dataclass
class SolverConfig:
    node_selection: str = SELECT_DEPTH
    branching: str = BRANCH_MOF
    warmstart: bool = False
    ec_enabled: bool = False
    slb_enabled: bool = False
    slb_level: int = 5
    te_enabled: bool = False
    te_threshold: int = 10
    time_limit: float = 7200.0
    refine_max: int = 50
    ec_objective: int = 0          # index k minimized in the e-constraint stage 1
    big_m: int = None
    enum_cap: int = DEFAULT_ENUM_CAP
    trace: bool = False
    collect_fathomed: bool = False

    def __post_init__(self):
        if self.te_threshold > self.enum_cap:
            raise ModelError("te_threshold exceeds the enumeration cap")
        if self.slb_level < 1:
            raise ModelError("slb_level must be >= 1")
        if self.node_selection not in (SELECT_DEPTH, SELECT_BREADTH, SELECT_LHG, SELECT_HSZ):
            raise ModelError(f"unknown node selection {self.node_selection!r}")
        if self.branching not in (BRANCH_MOF, BRANCH_SOR):
            raise ModelError(f"unknown branching rule {self.branching!r}")

    @property
    def measure(self) -> str:
        return MEASURE_LHG if self.node_selection == SELECT_LHG else MEASURE_HSZ

    @property
    def dynamic(self) -> bool:
        return self.node_selection in (SELECT_LHG, SELECT_HSZ)


@dataclass
class Node:
    id: int
    parent: int
    depth: int
    fixings: dict
    gap: float                       # frozen gap inherited from the parent
    cuts: list                       # [(np.ndarray int coeffs, int rhs)] a.x >= rhs
    parent_facet_offsets: np.ndarray = None
    parent_surviving_lubs: list = None


@dataclass
class SolveStats:
    nodes_explored: int = 0
    ips: int = 0
    wall_time: float = 0.0
    fathomed: dict = field(default_factory=lambda: {
        "infeasibility": 0, "optimality": 0, "dominance": 0, "enumeration": 0})
    branched: int = 0
    solved: bool = False
    root_lb_time: float = 0.0
    ec_iterations: list = field(default_factory=list)
    slb_depths: list = field(default_factory=list)     # (iteration, depth)
    te_iterations: list = field(default_factory=list)  # (iteration, free_count)
    fathom_log: list = field(default_factory=list)     # (fixings, cause) when collected
    cut_log: list = field(default_factory=list)        # (fixings, coeffs, rhs)
    trace: list = field(default_factory=list)


def add_level_cut(C, lam, rhs):
    """Round a level-set inequality lam.Cx >= rhs to integer data.

    Coefficients are rounded up, the right-hand side down, which keeps the cut
    valid for binary x. Returns (coeffs, rhs) or None if trivially redundant.
    """
    a_bar = np.asarray(lam, dtype=float) @ np.asarray(C, dtype=float)
    coeffs = np.ceil(a_bar - 1e-9).astype(np.int64)
    b = int(math.floor(rhs + 1e-9))
    if int(coeffs[coeffs < 0].sum()) >= b:
        return None
    return coeffs, b


def prune_redundant_cuts(cuts, L: LowerBoundSet):
    """Drop cuts with strictly positive slack at every extreme solution of L."""
    if not cuts or L.kind != Kind.FULL or not L.extreme_solutions:
        return cuts
    kept = []
    for a, rhs in cuts:
        af = np.asarray(a, dtype=float)
        active = any(float(af @ x) <= rhs + 1e-6 for x in L.extreme_solutions)
        if active:
            kept.append((a, rhs))
    return kept


def _knapsack_row(instance: Instance):
    """First all-nonnegative <= row: the designated weight row for sum-of-ratios."""
    for i, s in enumerate(instance.senses):
        row = instance.A[i]
        if s == "le" and np.all(row >= 0) and np.any(row > 0):
            return row
    return None


def sum_of_ratios_variable(instance: Instance, free):
    """Free variable with the largest summed objective-to-weight ratio."""
    row = _knapsack_row(instance)
    scores = np.sum(np.abs(instance.C), axis=0).astype(float)
    if row is not None:
        denom = np.where(row > 0, row, 1).astype(float)
        scores = scores / denom
    best = free[0]
    for j in free:
        if scores[j] > scores[best]:
            best = j
    return best


def choose_branch_variable(instance: Instance, L: LowerBoundSet, free, config: SolverConfig):
    """Most-often-fractional over the bound's extreme solutions, else sum-of-ratios."""
    if not free:
        raise ModelError("no free variables to branch on")
    if config.branching == BRANCH_MOF and L.kind == Kind.FULL and L.extreme_solutions:
        X = np.asarray(L.extreme_solutions)[:, free]
        counts = np.sum(np.abs(X - np.rint(X)) > _INT_TOL, axis=0)
        best = int(np.argmax(counts))  # argmax keeps the lowest index on ties
        if counts[best] > 0:
            return free[best]
    return sum_of_ratios_variable(instance, free)


def slb_weight(parent_lubs, p: int):
    """Weight for the simple lower bound: normal through the per-objective
    minimal surviving local upper bounds of the parent, else equal weights."""
    ones = np.full(p, 1.0 / p)
    if parent_lubs is None or not len(parent_lubs):
        return ones
    pts = []
    for k in range(p):
        pts.append(min(parent_lubs, key=lambda u: (u[k], tuple(u))))
    pts = np.asarray(pts, dtype=float)
    diffs = pts[1:] - pts[0]
    if np.linalg.matrix_rank(diffs, tol=1e-9) < p - 1:
        return ones
    _, _, vt = np.linalg.svd(diffs)
    v = vt[-1]
    if v.sum() < 0:
        v = -v
    if np.any(v < -1e-9) or v.sum() <= 1e-12:
        return ones
    v = np.clip(v, 0.0, None)
    return v / v.sum()


class _Queue:
    """Node queue: stack, FIFO, or max-heap on the frozen gap (ties: newest)."""

    def __init__(self, strategy: str):
        self.strategy = strategy
        self._stack = []
        self._fifo = deque()
        self._heap = []
        self._seq = 0

    def push(self, node: Node):
        if self.strategy == SELECT_DEPTH:
            self._stack.append(node)
        elif self.strategy == SELECT_BREADTH:
            self._fifo.append(node)
        else:
            heapq.heappush(self._heap, (-node.gap, -self._seq, node))
            self._seq += 1

    def pop(self) -> Node:
        if self.strategy == SELECT_DEPTH:
            return self._stack.pop()
        if self.strategy == SELECT_BREADTH:
            return self._fifo.popleft()
        return heapq.heappop(self._heap)[2]

    def __len__(self):
        if self.strategy == SELECT_DEPTH:
            return len(self._stack)
        if self.strategy == SELECT_BREADTH:
            return len(self._fifo)
        return len(self._heap)


def select_node(queue: _Queue, config: SolverConfig) -> Node:
    if len(queue) == 0:
        raise ModelError("empty node queue")
    return queue.pop()


class Solver:
    """One branch-and-bound run; owns all mutable search state."""

    def __init__(self, instance: Instance, config: SolverConfig = None):
        self.instance = instance
        self.config = config or SolverConfig()
        self.stats = SolveStats()
        p = instance.p
        self.M = int(self.config.big_m) if self.config.big_m else default_big_m(instance.C)
        self.U = IncumbentList()
        self.K = LocalUpperBoundSet(p, self.M)
        self.root_cuts = []
        self._deadline = None
        self._next_id = 0

    # -- helpers ----------------------------------------------------------

    def _remaining(self) -> float:
        return max(self._deadline - time.monotonic(), 0.01)

    def _accept(self, sol: Solution) -> bool:
        accepted, _ = self.U.update(sol)
        if accepted:
            self.K.update(np.asarray(sol.image))
        return accepted

    def _new_node(self, **kw) -> Node:
        node = Node(id=self._next_id, **kw)
        self._next_id += 1
        return node

    def _record_fathom(self, node: Node, cause: str):
        self.stats.fathomed[cause] += 1
        if self.config.collect_fathomed:
            self.stats.fathom_log.append((dict(node.fixings), cause))

    # -- warmstart --------------------------------------------------------

    def warmstart(self) -> bool:
        """Solve the predefined weight set at the root; False if infeasible."""
        inst = self.instance
        for lam in augmented_unit_weights(inst.p):
            sub = RelaxedSubproblem(inst, {}, list(self.root_cuts))
            res, level = solve_weighted_sum_ip(sub, lam, self._remaining())
            self.stats.ips += 1
            if res.status == STATUS_INFEASIBLE:
                return False
            if res.solution is not None:
                self._accept(Solution.from_x(inst, res.solution))
            if level is not None:
                cut = add_level_cut(inst.C, level[0], level[1])
                if cut is not None:
                    self.root_cuts.append(cut)
                    self.stats.cut_log.append(({}, cut[0], cut[1]))
        return True

    # -- scheduled e-constraint solves ------------------------------------

    def ec_step(self, L: LowerBoundSet, iteration: int):
        surviving = self.K.arr[surviving_mask(L, self.K.arr)]
        lu = gap_argmax_lub(L, surviving, self.config.measure)
        if lu is None:
            return
        k = self.config.ec_objective
        eps = [int(lu[i]) - 1 for i in range(self.instance.p) if i != k]
        sub = RelaxedSubproblem(self.instance, {}, list(self.root_cuts))
        res, n_ips = solve_econstraint(sub, k, eps, self._remaining())
        self.stats.ips += n_ips
        self.stats.ec_iterations.append(iteration)
        if res.status == STATUS_OPTIMAL and res.solution is not None:
            self._accept(Solution.from_x(self.instance, res.solution))

    # -- simple lower bound -----------------------------------------------

    def simple_lower_bound(self, node: Node, sub: RelaxedSubproblem):
        """Level-set bound from one weighted-sum IP plus the parent's facets.

        Returns (LowerBoundSet or None); None means fathom by infeasibility.
        """
        p = self.instance.p
        lam = slb_weight(node.parent_surviving_lubs, p)
        # deterministic node budget so seeded runs reproduce exactly; the
        # global deadline still bounds the wall time
        res, level = solve_weighted_sum_ip(sub, lam, self._remaining(),
                                           node_limit=_SLB_NODE_LIMIT)
        self.stats.ips += 1
        if res.status == STATUS_INFEASIBLE:
            return None
        if res.solution is not None:
            self._accept(Solution.from_x(self.instance, res.solution))
        offsets = node.parent_facet_offsets
        if offsets is None:
            offsets = np.full(p, -float(self.M))
        hyperplanes = []
        if res.status != STATUS_NO_SOLUTION_TIMEOUT and level is not None:
            hyperplanes.append((np.asarray(level[0], dtype=float), float(level[1])))
            cut = add_level_cut(self.instance.C, level[0], level[1])
            if cut is not None:
                node.cuts = node.cuts + [cut]
                self.stats.cut_log.append((dict(node.fixings), cut[0], cut[1]))
        return LowerBoundSet(kind=Kind.SIMPLE, hyperplanes=hyperplanes,
                             facet_offsets=np.asarray(offsets, dtype=float))

    # -- terminal enumeration ---------------------------------------------

    def terminal_enumeration(self, node: Node):
        sols = enumerate_nondominated(self.instance, node.fixings,
                                      cap=self.config.enum_cap)
        for sol in sols:
            self._accept(sol)

    # -- node processing ---------------------------------------------------

    def _extract_integral(self, L: LowerBoundSet):
        """Pass integer extreme-point solutions of the bound to the incumbent list."""
        if not L.extreme_solutions:
            return
        X = np.asarray(L.extreme_solutions)
        Xr = np.rint(X)
        for i in np.where(np.max(np.abs(X - Xr), axis=1) <= _INT_TOL)[0]:
            xi = Xr[i].astype(np.int64)
            if is_feasible(self.instance, xi):
                self._accept(Solution.from_x(self.instance, xi))

    def process_node(self, node: Node, iteration: int, queue: _Queue):
        cfg = self.config
        inst = self.instance
        free = [j for j in range(inst.n) if j not in node.fixings]

        if not free:
            sols = enumerate_nondominated(inst, node.fixings, cap=cfg.enum_cap)
            if not sols:
                self._record_fathom(node, "infeasibility")
                return "infeasibility"
            self._accept(sols[0])
            cause = ("optimality" if sols[0].image in set(self.U.images())
                     else "dominance")
            self._record_fathom(node, cause)
            return cause

        if cfg.te_enabled and len(free) <= cfg.te_threshold:
            self.terminal_enumeration(node)
            self.stats.te_iterations.append((iteration, len(free)))
            self._record_fathom(node, "enumeration")
            return "enumeration"

        sub = RelaxedSubproblem(inst, dict(node.fixings), list(node.cuts))
        use_slb = (cfg.slb_enabled and node.depth >= cfg.slb_level
                   and node.depth % cfg.slb_level == 0)
        refine_later = False
        if use_slb:
            self.stats.slb_depths.append((iteration, node.depth))
            L = self.simple_lower_bound(node, sub)
            if L is None:
                self._record_fathom(node, "infeasibility")
                return "infeasibility"
        else:
            # refinement is deferred: fathoming is monotone in the bound, so
            # the cheap initial bound settles most nodes without it
            refine_later = inst.p >= 3 and cfg.refine_max > 0
            t0 = time.monotonic()
            try:
                L = lower_bound_frontier(sub, refine_max=0)
            except InfeasibleSubproblem:
                self._record_fathom(node, "infeasibility")
                return "infeasibility"
            if node.depth == 0:
                if refine_later:
                    L = refine_frontier(sub, L, cfg.refine_max)
                    refine_later = False
                if self.stats.root_lb_time == 0.0:
                    self.stats.root_lb_time = time.monotonic() - t0

        n = inst.n
        if (cfg.ec_enabled and iteration % n == 0
                and iteration <= inst.p * n * n):
            self.ec_step(L, iteration)

        self._extract_integral(L)

        # fathoming by optimality: bound collapsed to one integral incumbent point
        if L.kind == Kind.FULL and len(L.extreme_points) == 1:
            pt = np.asarray(L.extreme_points[0])
            ptr = np.rint(pt)
            if np.max(np.abs(pt - ptr)) <= _INT_TOL:
                key = tuple(int(v) for v in ptr)
                if key in set(self.U.images()):
                    self._record_fathom(node, "optimality")
                    return "optimality"

        surviving = self.K.arr[surviving_mask(L, self.K.arr)]
        if not len(surviving):
            self._record_fathom(node, "dominance")
            return "dominance"

        if refine_later:
            L = refine_frontier(sub, L, cfg.refine_max)
            self._extract_integral(L)
            surviving = self.K.arr[surviving_mask(L, self.K.arr)]
            if not len(surviving):
                self._record_fathom(node, "dominance")
                return "dominance"

        gap = (float(gap_values(L, surviving, cfg.measure).max())
               if cfg.dynamic else 0.0)
        node.cuts = prune_redundant_cuts(node.cuts, L)
        j = choose_branch_variable(inst, L, free, cfg)
        offsets = local_ideal(L)
        for v in (0, 1):
            fixings = dict(node.fixings)
            fixings[j] = v
            child = self._new_node(parent=node.id, depth=node.depth + 1,
                                   fixings=fixings, gap=gap,
                                   cuts=list(node.cuts),
                                   parent_facet_offsets=offsets,
                                   parent_surviving_lubs=surviving.copy())
            queue.push(child)
        self.stats.branched += 1
        return "branched"

    # -- main loop ---------------------------------------------------------

    def solve(self):
        cfg = self.config
        start = time.monotonic()
        self._deadline = start + cfg.time_limit
        feasible = True
        if cfg.warmstart:
            feasible = self.warmstart()
        if feasible:
            queue = _Queue(cfg.node_selection)
            root = self._new_node(parent=-1, depth=0, fixings={},
                                  gap=math.inf, cuts=list(self.root_cuts))
            queue.push(root)
            iteration = 0
            self.stats.solved = True
            while len(queue):
                if time.monotonic() > self._deadline:
                    self.stats.solved = False
                    break
                node = select_node(queue, cfg)
                iteration += 1
                self.stats.nodes_explored += 1
                outcome = self.process_node(node, iteration, queue)
                if cfg.trace:
                    self.stats.trace.append({
                        "iteration": iteration, "node": node.id,
                        "depth": node.depth, "outcome": outcome,
                        "free": self.instance.n - len(node.fixings)})
        else:
            self.stats.solved = True
        self.stats.wall_time = time.monotonic() - start
        entries = sorted(self.U.entries, key=lambda s: s.image)
        points = [s.image for s in entries]
        return points, entries, self.stats


def solve(instance: Instance, config: SolverConfig = None):
    """Compute the nondominated set and a minimal complete solution set."""
    return Solver(instance, config).solve()
