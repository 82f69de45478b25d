"""Dense two-phase simplex for the small equality-form LPs used in this package.

The instances (LHV membership, separating-functional polishing, cube
positivity oracles) have at most a few hundred variables, so the solver
favours determinism over speed: Bland's anti-cycling rule throughout, and a
refactored basis at every pivot.

Problems are stated as

    maximize    c . x
    subject to  A x = b,   x_j >= 0 for j with nonneg[j], else x_j free.

Infeasible problems come back with a Farkas certificate ``y`` satisfying
``y.A <= 0`` on nonnegative columns, ``y.A == 0`` on free columns and
``y.b > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-9
MAX_PIVOTS = 50_000


@dataclass
class LinearProgram:
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    nonneg: np.ndarray  # boolean mask, True = lower bound 0, False = free

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.b = np.asarray(self.b, dtype=float)
        self.nonneg = np.asarray(self.nonneg, dtype=bool)
        k, nv = self.A.shape
        if self.c.size != nv or self.b.size != k or self.nonneg.size != nv:
            raise ValueError("inconsistent LP dimensions")
        if not (np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.A))
                and np.all(np.isfinite(self.b))):
            raise ValueError("LP data must be finite")


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None = None
    value: float | None = None
    dual: np.ndarray | None = None
    farkas: np.ndarray | None = None
    ray: np.ndarray | None = None
    iterations: int = 0
    diagnostics: dict = field(default_factory=dict)


class _Simplex:
    """Bland-rule simplex on min-form data with explicit basis refactoring."""

    def __init__(self, A, b, c):
        self.A = A
        self.b = b
        self.c = c
        self.m, self.n = A.shape
        self.iterations = 0

    def run(self, basis):
        A, b, c = self.A, self.b, self.c
        while True:
            self.iterations += 1
            if self.iterations > MAX_PIVOTS:
                raise RuntimeError("simplex failed to converge (pivot limit)")
            B = A[:, basis]
            xB = np.linalg.solve(B, b)
            y = np.linalg.solve(B.T, c[basis])
            red = c - A.T @ y
            red[basis] = 0.0
            enter = -1
            for j in range(self.n):
                if red[j] < -PIVOT_TOL:
                    enter = j
                    break
            if enter < 0:
                return "optimal", basis, xB, y
            d = np.linalg.solve(B, A[:, enter])
            leave = -1
            best = np.inf
            for i in range(self.m):
                if d[i] > PIVOT_TOL:
                    ratio = xB[i] / d[i]
                    # Bland tie-break: smallest basis column index
                    if ratio < best - PIVOT_TOL or (
                        ratio < best + PIVOT_TOL
                        and (leave < 0 or basis[i] < basis[leave])
                    ):
                        best = ratio
                        leave = i
            if leave < 0:
                ray = np.zeros(self.n)
                ray[enter] = 1.0
                for i in range(self.m):
                    ray[basis[i]] = -d[i]
                return "unbounded", basis, xB, ray
            basis = list(basis)
            basis[leave] = enter
        # unreachable


def lp_solve(p: LinearProgram) -> LpResult:
    """Solve an equality-form LP; see module docstring for conventions."""
    k, nv = p.A.shape

    # min-form conversion: negate objective, split free variables, flip rows
    # so the right-hand side is nonnegative.
    cols = []  # (original index, sign)
    for j in range(nv):
        cols.append((j, 1.0))
        if not p.nonneg[j]:
            cols.append((j, -1.0))
    ns = len(cols)
    As = np.empty((k, ns))
    cs = np.empty(ns)
    for jj, (j, s) in enumerate(cols):
        As[:, jj] = s * p.A[:, j]
        cs[jj] = -s * p.c[j]
    rowsign = np.where(p.b < 0, -1.0, 1.0)
    As = rowsign[:, None] * As
    bs = rowsign * p.b

    # phase 1: artificial basis
    A1 = np.hstack([As, np.eye(k)])
    c1 = np.concatenate([np.zeros(ns), np.ones(k)])
    sx = _Simplex(A1, bs, c1)
    status, basis, xB, y1 = sx.run(list(range(ns, ns + k)))
    if status != "optimal":  # pragma: no cover - phase 1 is always bounded
        raise RuntimeError("phase 1 terminated abnormally")
    w = float(c1[basis] @ xB)
    if w > FEAS_TOL:
        farkas = rowsign * y1
        return LpResult(status="infeasible", farkas=farkas,
                        iterations=sx.iterations,
                        diagnostics={"phase1_objective": w})

    # Drive artificial columns out of the basis.  An artificial that cannot
    # be pivoted onto any structural column sits on a redundant constraint;
    # that row is dropped before phase 2.
    basis = list(basis)
    stuck = []  # basis positions whose artificial marks a redundant row
    for i in range(k):
        if basis[i] < ns:
            continue
        B = A1[:, basis]
        tab_row = np.linalg.solve(B, As)[i]
        pivot = -1
        for j in range(ns):
            if j not in basis and abs(tab_row[j]) > 1e-8:
                pivot = j
                break
        if pivot >= 0:
            basis[i] = pivot
        else:
            stuck.append(i)
    if stuck:
        drop_rows = sorted(basis[i] - ns for i in stuck)
        row_map = [r for r in range(k) if r not in drop_rows]
        As = As[row_map]
        bs = bs[row_map]
        rowsign_red = rowsign[row_map]
        basis = [basis[i] for i in range(k) if i not in stuck]
    else:
        rowsign_red = rowsign
        row_map = list(range(k))

    # phase 2 on original costs
    sx2 = _Simplex(As, bs, cs)
    status, basis, xB, yout = sx2.run(basis)
    iterations = sx.iterations + sx2.iterations
    if status == "unbounded":
        ray = np.zeros(nv)
        for jj, (j, s) in enumerate(cols):
            ray[j] += s * yout[jj]
        return LpResult(status="unbounded", ray=ray, iterations=iterations)

    x = np.zeros(nv)
    for i, bi in enumerate(basis):
        j, s = cols[bi]
        x[j] += s * xB[i]
    dual = np.zeros(k)
    dual[row_map] = -(rowsign_red * yout)
    value = float(p.c @ x)
    resid = float(np.max(np.abs(p.A @ x - p.b))) if k else 0.0
    return LpResult(status="optimal", x=x, value=value, dual=dual,
                    iterations=iterations,
                    diagnostics={"primal_residual": resid})
