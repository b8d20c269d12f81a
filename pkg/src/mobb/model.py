"""Problem representation, dominance algebra and the exhaustive enumeration oracle.

All objective and constraint data are integer; dominance checks on feasible
images are therefore exact. Fractional (LP-derived) points are compared with a
fixed 1e-9 tolerance elsewhere.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

# Comparison tolerance for fractional values; integer data is compared exactly.
FLOAT_TOL = 1e-9

SENSE_LE = "le"
SENSE_GE = "ge"
SENSE_EQ = "eq"
_SENSES = (SENSE_LE, SENSE_GE, SENSE_EQ)

DEFAULT_ENUM_CAP = 25


class ModelError(ValueError):
    """Raised on inconsistent problem data or misuse of a model operation."""


@dataclass(frozen=True)
class Instance:
    """A multi-objective binary linear program: min Cx s.t. Ax (sense) b, x in {0,1}^n."""

    C: np.ndarray            # p x n integer objective matrix
    A: np.ndarray            # m x n integer constraint matrix
    b: np.ndarray            # m integer right-hand sides
    senses: tuple            # m entries over {"le", "ge", "eq"}
    name: str = "unnamed"

    def __post_init__(self):
        C = np.asarray(self.C, dtype=np.int64)
        A = np.asarray(self.A, dtype=np.int64)
        b = np.asarray(self.b, dtype=np.int64)
        if C.ndim != 2 or A.ndim != 2 or b.ndim != 1:
            raise ModelError("C and A must be matrices, b a vector")
        p, n = C.shape
        m = A.shape[0]
        if p < 2:
            raise ModelError(f"need at least 2 objectives, got {p}")
        if n < 1 or m < 1:
            raise ModelError("need at least one variable and one constraint")
        if A.shape[1] != n:
            raise ModelError(f"A has {A.shape[1]} columns, expected {n}")
        if b.shape[0] != m:
            raise ModelError(f"b has {b.shape[0]} entries, expected {m}")
        senses = tuple(self.senses)
        if len(senses) != m:
            raise ModelError(f"{len(senses)} senses for {m} constraints")
        for s in senses:
            if s not in _SENSES:
                raise ModelError(f"unknown sense {s!r}")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "senses", senses)

    @property
    def p(self) -> int:
        return self.C.shape[0]

    @property
    def n(self) -> int:
        return self.C.shape[1]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def le_normalized(self):
        """All constraints as (A_le, b_le) with sense <=; eq rows become two rows."""
        rows, rhs = [], []
        for i, s in enumerate(self.senses):
            if s == SENSE_LE:
                rows.append(self.A[i])
                rhs.append(self.b[i])
            elif s == SENSE_GE:
                rows.append(-self.A[i])
                rhs.append(-self.b[i])
            else:
                rows.append(self.A[i])
                rhs.append(self.b[i])
                rows.append(-self.A[i])
                rhs.append(-self.b[i])
        return np.array(rows, dtype=np.int64), np.array(rhs, dtype=np.int64)


@dataclass(frozen=True)
class Solution:
    """A binary vector together with its objective image."""

    x: tuple
    image: tuple

    @classmethod
    def from_x(cls, instance: Instance, x) -> "Solution":
        y = evaluate(instance, x)
        return cls(x=tuple(int(v) for v in x), image=tuple(int(v) for v in y))


class Dominance(enum.Enum):
    STRICTLY_DOMINATES = "strictly_dominates"
    DOMINATES = "dominates"
    EQUAL = "equal"                      # weak dominance both ways
    INCOMPARABLE = "incomparable"
    DOMINATED_BY = "dominated_by"
    STRICTLY_DOMINATED_BY = "strictly_dominated_by"


def evaluate(instance: Instance, x) -> np.ndarray:
    """Objective image C x of a binary vector."""
    x = np.asarray(x, dtype=np.int64)
    if x.shape != (instance.n,):
        raise ModelError(f"x has shape {x.shape}, expected ({instance.n},)")
    return instance.C @ x


def compare(y1, y2) -> Dominance:
    """Classify y1 against y2 under the componentwise Pareto orders."""
    y1 = np.asarray(y1)
    y2 = np.asarray(y2)
    if y1.shape != y2.shape:
        raise ModelError(f"incomparable shapes {y1.shape} vs {y2.shape}")
    le = bool(np.all(y1 <= y2))
    ge = bool(np.all(y1 >= y2))
    if le and ge:
        return Dominance.EQUAL
    if le:
        if np.all(y1 < y2):
            return Dominance.STRICTLY_DOMINATES
        return Dominance.DOMINATES
    if ge:
        if np.all(y1 > y2):
            return Dominance.STRICTLY_DOMINATED_BY
        return Dominance.DOMINATED_BY
    return Dominance.INCOMPARABLE


def weakly_dominates(y1, y2) -> bool:
    return bool(np.all(np.asarray(y1) <= np.asarray(y2)))


def dominates(y1, y2) -> bool:
    y1 = np.asarray(y1)
    y2 = np.asarray(y2)
    return bool(np.all(y1 <= y2)) and bool(np.any(y1 < y2))


def is_feasible(instance: Instance, x) -> bool:
    """Check every constraint row with its sense for a binary vector."""
    x = np.asarray(x, dtype=np.int64)
    if x.shape != (instance.n,):
        raise ModelError(f"x has shape {x.shape}, expected ({instance.n},)")
    lhs = instance.A @ x
    for i, s in enumerate(instance.senses):
        if s == SENSE_LE and lhs[i] > instance.b[i]:
            return False
        if s == SENSE_GE and lhs[i] < instance.b[i]:
            return False
        if s == SENSE_EQ and lhs[i] != instance.b[i]:
            return False
    return True


def _pareto_filter_lex(images):
    """Nondominated subset of a lex-sorted list of distinct integer tuples.

    In lexicographic order a point can only be weakly dominated by an earlier
    one, so a single forward sweep against the running front suffices.
    """
    front = []
    for y in images:
        ya = np.asarray(y)
        if any(np.all(np.asarray(f) <= ya) for f in front):
            continue
        front.append(y)
    return front


def enumerate_nondominated(instance: Instance, fixings=None, cap: int = DEFAULT_ENUM_CAP):
    """Brute-force oracle: nondominated points over all feasible completions.

    Returns a list of Solutions, one per nondominated point, sorted by image.
    Among solutions with equal image the lexicographically smallest x is kept.
    An infeasible subproblem yields an empty list.
    """
    fixings = dict(fixings or {})
    n = instance.n
    for j, v in fixings.items():
        if not 0 <= j < n or v not in (0, 1):
            raise ModelError(f"bad fixing {j}:{v}")
    free = [j for j in range(n) if j not in fixings]
    nfree = len(free)
    if nfree > cap:
        raise ModelError(f"{nfree} free variables exceed enumeration cap {cap}")

    A_le, b_le = instance.le_normalized()
    base = np.zeros(n, dtype=np.int64)
    for j, v in fixings.items():
        base[j] = v

    best_x = {}  # image tuple -> first (lex-smallest) x
    chunk_bits = min(nfree, 16)
    total = 1 << nfree
    step = 1 << chunk_bits
    # Bit i of the counter drives free[i]; counting order equals lex order on x.
    shifts = np.array([nfree - 1 - i for i in range(nfree)], dtype=np.uint64)
    for start in range(0, total, step):
        idx = np.arange(start, min(start + step, total), dtype=np.uint64)
        bits = (idx[:, None] >> shifts[None, :]) & 1
        X = np.tile(base, (len(idx), 1))
        if nfree:
            X[:, free] = bits.astype(np.int64)
        feas = np.all(X @ A_le.T <= b_le, axis=1)
        Xf = X[feas]
        imgs = Xf @ instance.C.T
        for x, y in zip(Xf, imgs):
            key = tuple(int(v) for v in y)
            if key not in best_x:
                best_x[key] = tuple(int(v) for v in x)
    if not best_x:
        return []
    images = sorted(best_x)
    front = _pareto_filter_lex(images)
    return [Solution(x=best_x[y], image=y) for y in front]


def ideal_and_nadir(points):
    """Componentwise min (ideal) and max (Nadir) over a nonempty point set."""
    pts = np.asarray(list(points))
    if pts.size == 0:
        raise ModelError("ideal_and_nadir of empty set")
    return pts.min(axis=0), pts.max(axis=0)
