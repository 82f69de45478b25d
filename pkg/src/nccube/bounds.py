"""Bell functionals: classical bounds, LHV membership, block-positivity,
see-saw lower bounds and violation ratios.

The classical side is handled by exact enumeration of deterministic
strategies (the extreme points of the LHV polytope); the quantum side pairs
the moment-matrix upper bound with an alternating-optimization lower bound
so every reported violation is bracketed from both sides.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iproduct

import numpy as np

from . import linprog, matcore, npa, sdp
from .boxes import Box, QuantumRealization, box_from_quantum
from .cube import deterministic_responses

ENUM_LIMIT = 10 ** 4
BLOCK_TOL = 1e-10


@dataclass
class BellFunctional:
    m: int
    n: int
    t: np.ndarray  # real, shape (n, n, m, m), indexed (a, b, x-1, y-1)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        if self.t.shape != (self.n, self.n, self.m, self.m):
            raise ValueError(f"coefficient shape {self.t.shape} does not match "
                             f"(n,n,m,m)=({self.n},{self.n},{self.m},{self.m})")
        if not np.all(np.isfinite(self.t)):
            raise ValueError("functional entries must be finite")

    def value(self, box: Box) -> float:
        """The pairing sum t[a,b,x,y] * P(a,b|x,y)."""
        if (self.m, self.n) != (box.m, box.n):
            raise ValueError("shape mismatch between functional and box")
        return float(np.sum(self.t * box.p))

    def to_json(self) -> dict:
        return {"m": self.m, "n": self.n, "t": [float(v) for v in self.t.ravel()]}

    @classmethod
    def from_json(cls, obj: dict) -> "BellFunctional":
        m, n = int(obj["m"]), int(obj["n"])
        return cls(m=m, n=n,
                   t=np.asarray(obj["t"], dtype=float).reshape(n, n, m, m))


def chsh_functional() -> BellFunctional:
    t = np.zeros((2, 2, 2, 2))
    for a in range(2):
        for b in range(2):
            for x in range(2):
                for y in range(2):
                    t[a, b, x, y] = (-1.0) ** ((a ^ b) + x * y)
    return BellFunctional(m=2, n=2, t=t)


def all_ones_functional(m: int = 2, n: int = 2) -> BellFunctional:
    return BellFunctional(m=m, n=n, t=np.ones((n, n, m, m)))


def unit_functional(m: int = 2, n: int = 2) -> BellFunctional:
    """The functional with value 1 on every normalized box."""
    return BellFunctional(m=m, n=n, t=np.full((n, n, m, m), 1.0 / m ** 2))


def zero_functional(m: int = 2, n: int = 2) -> BellFunctional:
    return BellFunctional(m=m, n=n, t=np.zeros((n, n, m, m)))


def _check_enum(m: int, n: int):
    if n ** m > ENUM_LIMIT:
        raise ValueError(f"{n ** m} deterministic strategies per party "
                         f"exceeds the enumeration limit {ENUM_LIMIT}")


def classical_bound(t: BellFunctional) -> dict:
    """Exact maximum over deterministic strategy pairs.

    Enumerates Bob's responses; Alice's best reply per setting is a direct
    argmax, so the overall cost is n^m * m * n * m instead of n^(2m).
    Returns ``{"value", "argmax": (g, h)}`` with g, h tuples mapping setting
    index (0-based) to outcome.
    """
    _check_enum(t.m, t.n)
    m, n = t.m, t.n
    best = -np.inf
    arg = None
    for h in iproduct(range(n), repeat=m):
        # M[x, a] = sum_y t[a, h(y), x, y]
        M = np.zeros((m, n))
        for y, hb in enumerate(h):
            M += t.t[:, hb, :, y].T
        g = tuple(int(np.argmax(M[x])) for x in range(m))
        val = float(sum(M[x, g[x]] for x in range(m)))
        if val > best + 1e-15 or arg is None:
            best = val
            arg = (g, h)
    return {"value": best, "argmax": arg}


def is_block_positive(t: BellFunctional) -> bool:
    """True iff the functional is nonnegative on every deterministic strategy
    pair, which by convexity is nonnegativity on all product states."""
    _check_enum(t.m, t.n)
    m, n = t.m, t.n
    worst = np.inf
    for h in iproduct(range(n), repeat=m):
        M = np.zeros((m, n))
        for y, hb in enumerate(h):
            M += t.t[:, hb, :, y].T
        worst = min(worst, float(M.min(axis=1).sum()))
    return worst >= -BLOCK_TOL


def deterministic_box(g, h, m: int, n: int) -> Box:
    """The product box of two deterministic responses."""
    p = np.zeros((n, n, m, m))
    for x in range(m):
        for y in range(m):
            p[g[x], h[y], x, y] = 1.0
    return Box(m=m, n=n, p=p)


def _strategy_columns(m: int, n: int):
    """All deterministic product boxes as flat columns, plus the responses."""
    responses = deterministic_responses(m, n)
    cols = np.zeros((n * n * m * m, len(responses) ** 2))
    pairs = []
    k = 0
    for g in responses:
        for h in responses:
            cols[:, k] = deterministic_box(g, h, m, n).p.ravel()
            pairs.append((g, h))
            k += 1
    return cols, pairs


def lhv_membership(box: Box, tol: float = 1e-8) -> dict:
    """Decide membership in the LHV polytope by linear programming.

    Feasibility of nonnegative weights on deterministic product boxes that
    reproduce the table.  On the infeasible side the returned functional is
    polished by a second LP (maximize the gap over sup-norm-bounded
    functionals) so the separation ``<t, box> - classical_bound(t)`` is
    numerically robust, not just a raw dual vector.
    """
    _check_enum(box.m, box.n)
    m, n = box.m, box.n
    cols, pairs = _strategy_columns(m, n)
    nrow, ncol = cols.shape
    A = np.vstack([cols, np.ones((1, ncol))])
    b = np.concatenate([box.p.ravel(), [1.0]])
    res = linprog.lp_solve(linprog.LinearProgram(
        c=np.zeros(ncol), A=A, b=b, nonneg=np.ones(ncol, dtype=bool)))
    if res.status == "optimal":
        weights = {pairs[k]: float(res.x[k]) for k in range(ncol)
                   if res.x[k] > tol}
        return {"member": True, "weights": weights}
    if res.status != "infeasible":  # pragma: no cover - LP is always bounded
        raise RuntimeError(f"membership LP ended with {res.status}")

    # Separation LP:  max <t, p> - s   s.t.  <t, D_gh> <= s,  |t| <= 1.
    # Variables: t (free, nrow), s (free), one slack per strategy pair and
    # two slacks per box entry for the sup-norm box.
    nt = nrow
    nvar = nt + 1 + ncol + 2 * nt
    c = np.zeros(nvar)
    c[:nt] = box.p.ravel()
    c[nt] = -1.0
    rows = []
    rhs = []
    for k in range(ncol):
        r = np.zeros(nvar)
        r[:nt] = cols[:, k]
        r[nt] = -1.0
        r[nt + 1 + k] = 1.0
        rows.append(r)
        rhs.append(0.0)
    for i in range(nt):
        r = np.zeros(nvar)
        r[i] = 1.0
        r[nt + 1 + ncol + 2 * i] = 1.0
        rows.append(r)
        rhs.append(1.0)
        r = np.zeros(nvar)
        r[i] = -1.0
        r[nt + 1 + ncol + 2 * i + 1] = 1.0
        rows.append(r)
        rhs.append(1.0)
    nonneg = np.ones(nvar, dtype=bool)
    nonneg[:nt + 1] = False
    sep = linprog.lp_solve(linprog.LinearProgram(
        c=c, A=np.asarray(rows), b=np.asarray(rhs), nonneg=nonneg))
    if sep.status != "optimal":  # pragma: no cover
        raise RuntimeError(f"separation LP ended with {sep.status}")
    t = BellFunctional(m=m, n=n, t=sep.x[:nt].reshape(n, n, m, m))
    return {"member": False, "functional": t, "gap": float(sep.value)}


def _embed_real(h: np.ndarray) -> np.ndarray:
    """Hermitian d x d -> symmetric 2d x 2d with the same spectrum (doubled)."""
    return np.block([[h.real, -h.imag], [h.imag, h.real]])


def _unembed(x: np.ndarray) -> np.ndarray:
    d = x.shape[0] // 2
    re = 0.5 * (x[:d, :d] + x[d:, d:])
    im = 0.5 * (x[d:, :d] - x[:d, d:])
    return re + 1j * im


def _best_povm(R: list) -> list:
    """Maximize sum_a Tr(E_a R_a) over POVMs, exactly.

    Two outcomes reduce to the positive part of R_0 - R_1; more outcomes are
    solved as a small SDP in the real embedding (tight by the symmetry that
    averages any solution back onto embedded-Hermitian form).
    """
    d = R[0].shape[0]
    n = len(R)
    if n == 2:
        diff = matcore.require_hermitian(R[0] - R[1], tol=1e-8)
        w, v = np.linalg.eigh(diff)
        pos = v[:, w >= 0.0]
        E0 = pos @ pos.conj().T
        return [E0, np.eye(d) - E0]
    side = 2 * d
    sides = [side] * n
    C = [_embed_real(np.asarray(r, dtype=complex)) for r in R]
    constraints = []
    target = np.eye(side)
    for i in range(side):
        for j in range(i, side):
            M = np.zeros((side, side))
            M[i, j] = M[j, i] = 0.5 if i != j else 1.0
            constraints.append(([M] * n, target[i, j]))
    res = sdp.sdp_solve(sdp.SemidefiniteProgram(
        block_sides=sides, C=C, constraints=constraints, maximize=True))
    if res.status != "optimal":
        raise sdp.SolverError(f"POVM subproblem ended with {res.status}")
    out = [_unembed(X) for X in res.X]
    # clean residual asymmetry and renormalize the completeness sum
    out = [0.5 * (e + e.conj().T) for e in out]
    total = sum(out)
    corr = (np.eye(d) - total) / n
    return [e + corr for e in out]


def _random_projective(rng, d: int, n: int) -> list:
    """Random rank-partitioned projective measurement in dimension d."""
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, _ = np.linalg.qr(g)
    els = [np.zeros((d, d), dtype=complex) for _ in range(n)]
    for i in range(d):
        v = q[:, i]
        els[i % n] += np.outer(v, v.conj())
    return els


def _bell_operator(t: BellFunctional, E, F, dA, dB) -> np.ndarray:
    W = np.zeros((dA * dB, dA * dB), dtype=complex)
    for x in range(t.m):
        for y in range(t.m):
            for a in range(t.n):
                for b in range(t.n):
                    coeff = t.t[a, b, x, y]
                    if coeff:
                        W += coeff * matcore.kron(E[x][a], F[y][b])
    return W


def see_saw_lower_bound(t: BellFunctional, dA: int = 2, dB: int = 2,
                        restarts: int = 20, seed: int = 0,
                        max_iter: int = 200, ftol: float = 1e-10) -> dict:
    """Alternating-optimization lower bound on the quantum value.

    Each sweep updates Alice's POVMs setting by setting (exact subproblem
    optimum), then Bob's, then the state (top eigenvector of the Bell
    operator), so the value is non-decreasing within a restart.  Returns the
    best value and its realization.
    """
    if dA > 8 or dB > 8:
        raise ValueError("local dimensions above 8 are not supported")
    rng = np.random.default_rng(seed)
    m, n = t.m, t.n
    best_val = -np.inf
    best = None
    for _ in range(max(1, restarts)):
        E = [_random_projective(rng, dA, n) for _ in range(m)]
        F = [_random_projective(rng, dB, n) for _ in range(m)]
        W = matcore.require_hermitian(_bell_operator(t, E, F, dA, dB), tol=1e-8)
        w, v = np.linalg.eigh(W)
        psi = v[:, -1]
        val = float(w[-1])
        for _ in range(max_iter):
            rho = np.outer(psi, psi.conj())
            # Alice sweep: R[x][a] = sum_{b,y} t * Tr_B(rho (I x F_y^b))
            K = [[matcore.partial_trace(
                rho @ matcore.kron(np.eye(dA), F[y][b]), (dA, dB), "B")
                for b in range(n)] for y in range(m)]
            for x in range(m):
                R = [sum(t.t[a, b, x, y] * K[y][b]
                         for b in range(n) for y in range(m))
                     for a in range(n)]
                E[x] = _best_povm([0.5 * (r + r.conj().T) for r in R])
            # Bob sweep
            L = [[matcore.partial_trace(
                rho @ matcore.kron(E[x][a], np.eye(dB)), (dA, dB), "A")
                for a in range(n)] for x in range(m)]
            for y in range(m):
                R = [sum(t.t[a, b, x, y] * L[x][a]
                         for a in range(n) for x in range(m))
                     for b in range(n)]
                F[y] = _best_povm([0.5 * (r + r.conj().T) for r in R])
            W = matcore.require_hermitian(
                _bell_operator(t, E, F, dA, dB), tol=1e-8)
            w, v = np.linalg.eigh(W)
            psi = v[:, -1]
            new_val = float(w[-1])
            if new_val <= val + ftol:
                val = max(val, new_val)
                break
            val = new_val
        if val > best_val:
            best_val = val
            best = QuantumRealization(
                dA=dA, dB=dB, rho=np.outer(psi, psi.conj()),
                E=[[e.copy() for e in s] for s in E],
                F=[[f.copy() for f in s] for s in F])
    return {"value": best_val, "realization": best}


def n_bound(v: BellFunctional, cone: str = "classical", tol: float = 1e-7) -> float:
    """Supremum of the functional over the named cone's normalized boxes.

    ``cone`` is ``"classical"`` or ``"quantum-level-k"`` for an integer k.
    """
    if cone == "classical":
        return classical_bound(v)["value"]
    if cone.startswith("quantum-level-"):
        level = int(cone[len("quantum-level-"):])
        return npa.npa_bound(v, level=level, tol=max(tol, 1e-9))
    raise ValueError(f"unknown cone {cone!r}")


def violation_ratio(t: BellFunctional, level: int = 1, dA: int = 2,
                    dB: int = 2, restarts: int = 20, seed: int = 0) -> dict:
    """Quantum-over-classical violation bracket for a Bell functional."""
    classical = classical_bound(t)["value"]
    if classical <= 1e-9:
        raise ValueError("classical bound is not positive; ratio undefined")
    upper = npa.npa_bound(t, level=level)
    lower = see_saw_lower_bound(t, dA=dA, dB=dB, restarts=restarts,
                                seed=seed)["value"]
    return {"classical": classical,
            "quantum_upper": upper,
            "quantum_lower": lower,
            "ratio_upper": upper / classical,
            "ratio_lower": lower / classical}
