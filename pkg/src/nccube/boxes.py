"""Bipartite correlation boxes, generators and quantum realizations.

A box stores the conditional probability table ``p[a, b, x, y]`` with
outcomes 0-indexed and settings 1-indexed in the interface (array axes 2 and
3 hold setting-1 at index 0).  Each (x, y) slice is a normalized
distribution over outcome pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matcore

ENTRY_TOL = 1e-12
NORM_TOL = 1e-10


@dataclass
class Box:
    m: int  # settings per party
    n: int  # outcomes per measurement
    p: np.ndarray  # shape (n, n, m, m), indexed (a, b, x-1, y-1)

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.shape != (self.n, self.n, self.m, self.m):
            raise ValueError(f"probability table shape {p.shape} does not match "
                             f"(n,n,m,m)=({self.n},{self.n},{self.m},{self.m})")
        if p.min() < -ENTRY_TOL:
            raise ValueError(f"negative probability {p.min()} below tolerance")
        p = np.clip(p, 0.0, None)
        totals = p.sum(axis=(0, 1))
        if np.max(np.abs(totals - 1.0)) > NORM_TOL:
            raise ValueError("outcome distributions are not normalized per setting pair")
        self.p = p

    def prob(self, a: int, b: int, x: int, y: int) -> float:
        return float(self.p[a, b, x - 1, y - 1])

    def marginal_a(self) -> np.ndarray:
        """P(a|x) averaged over Bob's setting (identical per setting when
        non-signalling)."""
        return self.p.sum(axis=1).mean(axis=2)

    def marginal_b(self) -> np.ndarray:
        return self.p.sum(axis=0).mean(axis=1)

    def to_json(self) -> dict:
        return {"m": self.m, "n": self.n, "p": [float(v) for v in self.p.ravel()]}

    @classmethod
    def from_json(cls, obj: dict) -> "Box":
        m, n = int(obj["m"]), int(obj["n"])
        p = np.asarray(obj["p"], dtype=float).reshape(n, n, m, m)
        return cls(m=m, n=n, p=p)


@dataclass
class QuantumRealization:
    dA: int
    dB: int
    rho: np.ndarray  # density matrix on dA*dB
    E: list  # E[x-1][a]: Alice POVM element, dA x dA
    F: list  # F[y-1][b]: Bob POVM element, dB x dB

    def __post_init__(self):
        self.rho = matcore.as_matrix(self.rho)
        self.E = [[matcore.as_matrix(e) for e in setting] for setting in self.E]
        self.F = [[matcore.as_matrix(f) for f in setting] for setting in self.F]

    def validate(self, tol: float = NORM_TOL):
        d = self.dA * self.dB
        if self.rho.shape != (d, d):
            raise ValueError("state dimension does not match dA*dB")
        if abs(np.trace(self.rho).real - 1.0) > tol or abs(np.trace(self.rho).imag) > tol:
            raise ValueError("state trace is not 1")
        if matcore.min_eigenvalue(self.rho) < -tol:
            raise ValueError("state is not positive semidefinite")
        for side, povms, dim in (("E", self.E, self.dA), ("F", self.F, self.dB)):
            for x, setting in enumerate(povms, start=1):
                total = np.zeros((dim, dim), dtype=complex)
                for el in setting:
                    if matcore.min_eigenvalue(el) < -tol:
                        raise ValueError(f"{side} element of setting {x} not PSD")
                    total += el
                if np.max(np.abs(total - np.eye(dim))) > tol:
                    raise ValueError(f"{side} setting {x} does not sum to identity")
        return self

    def to_json(self) -> dict:
        return {
            "dA": self.dA, "dB": self.dB,
            "rho": matcore.matrix_to_json(self.rho),
            "E": [[matcore.matrix_to_json(e) for e in s] for s in self.E],
            "F": [[matcore.matrix_to_json(f) for f in s] for s in self.F],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "QuantumRealization":
        return cls(
            dA=int(obj["dA"]), dB=int(obj["dB"]),
            rho=matcore.matrix_from_json(obj["rho"]),
            E=[[matcore.matrix_from_json(e) for e in s] for s in obj["E"]],
            F=[[matcore.matrix_from_json(f) for f in s] for s in obj["F"]],
        )


def is_nonsignalling(box: Box, tol: float = 1e-9) -> dict:
    """Check both marginal families for setting independence.

    Returns ``{"ok": bool, "max_violation": float}`` where the violation is
    the largest spread of P(b|y) across Alice's settings and vice versa.
    """
    pb = box.p.sum(axis=0)  # (b, x, y)
    pa = box.p.sum(axis=1)  # (a, x, y)
    viol_b = float(np.max(pb.max(axis=1) - pb.min(axis=1))) if box.m > 1 else 0.0
    viol_a = float(np.max(pa.max(axis=2) - pa.min(axis=2))) if box.m > 1 else 0.0
    v = max(viol_a, viol_b)
    return {"ok": v <= tol, "max_violation": v}


def box_from_quantum(r: QuantumRealization) -> Box:
    """Fill the probability table via the trace rule for product measurements."""
    r.validate()
    m = len(r.E)
    n = len(r.E[0])
    p = np.zeros((n, n, m, m))
    for xi in range(m):
        for yi in range(m):
            for a in range(n):
                for b in range(n):
                    op = matcore.kron(r.E[xi][a], r.F[yi][b])
                    p[a, b, xi, yi] = float(np.trace(r.rho @ op).real)
    return Box(m=m, n=n, p=p)


def pr_box() -> Box:
    """The extremal non-signalling box: a xor b = (x-1)(y-1), uniformly."""
    p = np.zeros((2, 2, 2, 2))
    for a in range(2):
        for b in range(2):
            for xi in range(2):
                for yi in range(2):
                    if (a ^ b) == (xi * yi):
                        p[a, b, xi, yi] = 0.5
    return Box(m=2, n=2, p=p)


def uniform_box(m: int, n: int) -> Box:
    return Box(m=m, n=n, p=np.full((n, n, m, m), 1.0 / n ** 2))


def isotropic_box(v: float) -> Box:
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility {v} outside [0, 1]")
    return Box(m=2, n=2, p=v * pr_box().p + (1.0 - v) * uniform_box(2, 2).p)


def l1_distance(p: Box, q: Box) -> float:
    if (p.m, p.n) != (q.m, q.n):
        raise ValueError("box shapes differ")
    return float(np.abs(p.p - q.p).sum())


def as_dual_tensor(box: Box, tol: float = 1e-8) -> np.ndarray:
    """Reindex the table as a bipartite dual-space coefficient array.

    Output shape is (n*m, n*m) with row index (a, x) and column index (b, y)
    flattened a-major; requires a non-signalling input so both partial
    column-sum families are setting-independent.
    """
    ns = is_nonsignalling(box, tol)
    if not ns["ok"]:
        raise ValueError(f"signalling input (violation {ns['max_violation']})")
    t = np.transpose(box.p, (0, 2, 1, 3))  # (a, x, b, y)
    return t.reshape(box.n * box.m, box.n * box.m)


def box_from_dual_tensor(arr: np.ndarray, m: int, n: int) -> Box:
    t = np.asarray(arr, dtype=float).reshape(n, m, n, m)
    return Box(m=m, n=n, p=np.transpose(t, (0, 2, 1, 3)))


def tsirelson_realization() -> QuantumRealization:
    """Maximally entangled two-qubit realization optimal for the CHSH score."""
    phip = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2.0)
    rho = np.outer(phip, phip.conj())

    def basis_proj(vecs):
        return [np.outer(v, v.conj()) for v in vecs]

    z0 = np.array([1, 0], dtype=complex)
    z1 = np.array([0, 1], dtype=complex)
    x0 = np.array([1, 1], dtype=complex) / np.sqrt(2.0)
    x1 = np.array([1, -1], dtype=complex) / np.sqrt(2.0)
    c, s = np.cos(np.pi / 8), np.sin(np.pi / 8)
    zpx0 = np.array([c, s], dtype=complex)       # +1 eigenvector of (Z+X)/sqrt2
    zpx1 = np.array([-s, c], dtype=complex)
    zmx0 = np.array([c, -s], dtype=complex)      # +1 eigenvector of (Z-X)/sqrt2
    zmx1 = np.array([s, c], dtype=complex)
    E = [basis_proj([z0, z1]), basis_proj([x0, x1])]
    F = [basis_proj([zpx0, zpx1]), basis_proj([zmx0, zmx1])]
    return QuantumRealization(dA=2, dB=2, rho=rho, E=E, F=F)


def tsirelson_box() -> Box:
    return box_from_quantum(tsirelson_realization())
