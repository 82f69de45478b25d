"""Semidefinite programming layer.

Two entry points:

* :func:`sdp_solve` — equality-constrained primal form over PSD blocks,

      maximize    sum_b <C_b, X_b>
      subject to  sum_b <A_ib, X_b> = b_i,   X_b >= 0,

* :func:`solve_lmi` — linear-matrix-inequality form over free scalars,

      maximize    c . x
      subject to  H0_k + sum_j x_j M_kj >= 0,   A x = b,

which is the natural shape for the moment-matrix and assemblage problems.
Feasibility questions are posed in margin form ("maximize t subject to
X - t*I >= 0 plus the affine constraints") via :func:`solve_lmi` so callers
get a signed margin instead of a bare yes/no.

Both forms are lowered onto cvxopt's ``conelp`` cone solver (a primal-dual
interior-point method that produces infeasibility certificates).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from cvxopt import matrix as cvxmat
from cvxopt import solvers as cvxsolvers

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 200
SYM_TOL = 1e-12


class SolverError(RuntimeError):
    """Raised when the interior-point method fails to converge."""


@dataclass
class SemidefiniteProgram:
    """Primal-form SDP over a list of symmetric PSD blocks."""

    block_sides: list
    C: list  # symmetric objective block per side
    constraints: list  # (A_blocks, rhs) with symmetric A blocks
    maximize: bool = True

    def __post_init__(self):
        self.C = [np.asarray(c, dtype=float) for c in self.C]
        if len(self.C) != len(self.block_sides):
            raise ValueError("one objective block per PSD block required")
        for side, c in zip(self.block_sides, self.C):
            _check_sym(c, side, "objective block")
        norm = []
        for ablocks, rhs in self.constraints:
            ablocks = [np.asarray(a, dtype=float) for a in ablocks]
            if len(ablocks) != len(self.block_sides):
                raise ValueError("constraint must supply one block per PSD block")
            for side, a in zip(self.block_sides, ablocks):
                _check_sym(a, side, "constraint block")
            norm.append((ablocks, float(rhs)))
        self.constraints = norm

    def to_json(self) -> dict:
        return {
            "block_sides": [int(s) for s in self.block_sides],
            "C": [c.tolist() for c in self.C],
            "constraints": [
                {"A": [a.tolist() for a in ab], "b": rhs}
                for ab, rhs in self.constraints
            ],
            "maximize": self.maximize,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SemidefiniteProgram":
        return cls(
            block_sides=list(obj["block_sides"]),
            C=[np.asarray(c, dtype=float) for c in obj["C"]],
            constraints=[(c["A"], c["b"]) for c in obj["constraints"]],
            maximize=bool(obj.get("maximize", True)),
        )


@dataclass
class SdpResult:
    status: str  # "optimal" | "infeasible" | "unbounded" | "max_iter_exceeded"
    value: float | None = None
    X: list | None = None  # PSD blocks (primal slacks)
    x: np.ndarray | None = None  # scalar variables (LMI form)
    y: np.ndarray | None = None  # equality duals
    Z: list | None = None  # dual PSD blocks
    residuals: dict = field(default_factory=dict)


def _check_sym(a, side, what):
    if a.shape != (side, side):
        raise ValueError(f"{what} has shape {a.shape}, expected ({side},{side})")
    if np.max(np.abs(a - a.T)) > SYM_TOL:
        raise ValueError(f"{what} is not symmetric within {SYM_TOL}")


def _conelp(c, G, h, sides, A=None, b=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Run cvxopt conelp with saved/restored options; arrays in, arrays out."""
    saved = dict(cvxsolvers.options)
    try:
        cvxsolvers.options.update({
            "show_progress": False,
            "abstol": tol,
            "reltol": tol,
            "feastol": max(tol, 1e-9),
            "maxiters": int(max_iter),
        })
        kwargs = {}
        if A is not None and len(b):
            kwargs = {"A": cvxmat(np.asarray(A, dtype=float)),
                      "b": cvxmat(np.asarray(b, dtype=float))}
        sol = cvxsolvers.conelp(
            cvxmat(np.asarray(c, dtype=float)),
            cvxmat(np.asarray(G, dtype=float)),
            cvxmat(np.asarray(h, dtype=float)),
            dims={"l": 0, "q": [], "s": [int(s) for s in sides]},
            **kwargs,
        )
    finally:
        cvxsolvers.options.clear()
        cvxsolvers.options.update(saved)
    return sol


def _split_blocks(vec, sides):
    out = []
    ofs = 0
    for s in sides:
        blk = np.asarray(vec[ofs:ofs + s * s], dtype=float).reshape(s, s, order="F")
        out.append(0.5 * (blk + blk.T))
        ofs += s * s
    return out


def solve_lmi(objective, blocks, eq_A=None, eq_b=None,
              tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER) -> SdpResult:
    """Maximize ``objective . x`` subject to affine PSD blocks and ``A x = b``.

    ``blocks`` is a list of ``(H0, terms)`` with ``terms`` a dict mapping the
    scalar-variable index ``j`` to its symmetric coefficient matrix, so block
    ``k`` reads ``H0_k + sum_j x_j * terms_k[j] >= 0``.
    """
    objective = np.asarray(objective, dtype=float)
    nv = objective.size
    sides = []
    gsize = 0
    for H0, _terms in blocks:
        side = np.asarray(H0).shape[0]
        sides.append(side)
        gsize += side * side
    G = np.zeros((gsize, nv))
    h = np.zeros(gsize)
    ofs = 0
    for H0, terms in blocks:
        side = np.asarray(H0).shape[0]
        h[ofs:ofs + side * side] = np.asarray(H0, dtype=float).ravel(order="F")
        for j, M in terms.items():
            G[ofs:ofs + side * side, j] = -np.asarray(M, dtype=float).ravel(order="F")
        ofs += side * side
    A = None
    b = np.zeros(0)
    if eq_A is not None:
        A = np.atleast_2d(np.asarray(eq_A, dtype=float))
        b = np.atleast_1d(np.asarray(eq_b, dtype=float))

    sol = _conelp(-objective, G, h, sides, A, b, tol=tol, max_iter=max_iter)
    status = sol["status"]
    res = {k: sol.get(k) for k in ("gap", "relative gap",
                                   "primal infeasibility", "dual infeasibility")}
    if status == "optimal":
        x = np.asarray(sol["x"], dtype=float).ravel()
        return SdpResult(
            status="optimal",
            value=float(objective @ x),
            x=x,
            X=_split_blocks(sol["s"], sides),
            Z=_split_blocks(sol["z"], sides),
            y=(np.asarray(sol["y"], dtype=float).ravel() if sol["y"] is not None
               and len(sol["y"]) else None),
            residuals=res,
        )
    if status == "primal infeasible":
        return SdpResult(
            status="infeasible",
            Z=_split_blocks(sol["z"], sides),
            y=(np.asarray(sol["y"], dtype=float).ravel()
               if sol["y"] is not None and len(sol["y"]) else None),
            residuals=res,
        )
    if status == "dual infeasible":
        return SdpResult(
            status="unbounded",
            x=(np.asarray(sol["x"], dtype=float).ravel()
               if sol["x"] is not None else None),
            residuals=res,
        )
    # "unknown": hand back the last iterate for diagnosis
    return SdpResult(
        status="max_iter_exceeded",
        x=(np.asarray(sol["x"], dtype=float).ravel() if sol["x"] is not None else None),
        X=_split_blocks(sol["s"], sides) if sol["s"] is not None else None,
        residuals=res,
    )


def sdp_solve(p: SemidefiniteProgram, tol: float = DEFAULT_TOL,
              max_iter: int = DEFAULT_MAX_ITER) -> SdpResult:
    """Solve a primal-form SDP by lowering it to the LMI form.

    The scalar variables are the upper-triangle entries of every block; each
    block's PSD constraint scatters those entries back into matrix shape.
    """
    if tol < 1e-9:
        raise ValueError("tol below 1e-9 is not supported")
    # variable layout: per block, entries (i, j) with i <= j
    index = []
    for bidx, side in enumerate(p.block_sides):
        for i in range(side):
            for j in range(i, side):
                index.append((bidx, i, j))
    nv = len(index)
    var_of = {key: pos for pos, key in enumerate(index)}

    objective = np.zeros(nv)
    for pos, (bidx, i, j) in enumerate(index):
        w = 1.0 if i == j else 2.0
        objective[pos] = w * p.C[bidx][i, j]
    if not p.maximize:
        objective = -objective

    blocks = []
    for bidx, side in enumerate(p.block_sides):
        terms = {}
        for i in range(side):
            for j in range(i, side):
                M = np.zeros((side, side))
                M[i, j] = 1.0
                M[j, i] = 1.0
                if i == j:
                    M[i, j] = 1.0
                terms[var_of[(bidx, i, j)]] = M
        blocks.append((np.zeros((side, side)), terms))

    nc = len(p.constraints)
    A = np.zeros((nc, nv))
    b = np.zeros(nc)
    for r, (ablocks, rhs) in enumerate(p.constraints):
        for pos, (bidx, i, j) in enumerate(index):
            w = 1.0 if i == j else 2.0
            A[r, pos] = w * ablocks[bidx][i, j]
        b[r] = rhs

    res = solve_lmi(objective, blocks, A if nc else None, b if nc else None,
                    tol=tol, max_iter=max_iter)
    if res.status == "optimal":
        res.value = res.value if p.maximize else -res.value
        if nc:
            ax = A @ res.x
            res.residuals["primal_equality"] = float(np.max(np.abs(ax - b)))
        res.residuals["min_eigenvalue"] = float(
            min(np.linalg.eigvalsh(X)[0] for X in res.X))
    return res


def feasibility_margin(blocks, eq_A=None, eq_b=None, tol=DEFAULT_TOL,
                       max_iter=DEFAULT_MAX_ITER):
    """Margin form of a PSD feasibility problem.

    Adds one scalar ``t`` and maximizes it subject to ``block_k - t*I >= 0``
    for every block, so the optimum is the best attainable smallest
    eigenvalue.  ``blocks`` follow the :func:`solve_lmi` convention over the
    original variables; the extra ``t`` is appended as the last variable.
    Returns ``(margin, result)``.
    """
    nv = 1 + max(
        [j for _H0, terms in blocks for j in terms], default=-1)
    tvar = nv
    obj = np.zeros(nv + 1)
    obj[tvar] = 1.0
    shifted = []
    for H0, terms in blocks:
        side = np.asarray(H0).shape[0]
        terms = dict(terms)
        terms[tvar] = -np.eye(side)
        shifted.append((H0, terms))
    A = None
    b = None
    if eq_A is not None:
        A = np.hstack([np.atleast_2d(np.asarray(eq_A, dtype=float)),
                       np.zeros((np.atleast_2d(eq_A).shape[0], 1))])
        b = eq_b
    res = solve_lmi(obj, shifted, A, b, tol=tol, max_iter=max_iter)
    if res.status != "optimal":
        raise SolverError(f"feasibility margin solve ended with {res.status}")
    return float(res.value), res
