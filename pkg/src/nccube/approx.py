"""Finite-dimensional approximation of two-setting, two-outcome quantum boxes.

One universal projective measurement family lives on a direct sum of N qubit
blocks: the first setting is the same |0><0| / |1><1| split in every block,
the second setting's block k projects onto the line at angle
``alpha_k = k*pi/(2N)``, so the principal angles between the two settings
sweep the quarter circle uniformly.  Any canonical-gauge two-qubit
realization is then approximated by a state supported on a few blocks.

Snapping each party to its single nearest grid angle leaves a first-order
error in the angle mismatch, which is not small enough in L1; instead each
party's angle is written as a convex combination of its two neighbouring
grid angles (using the reflected angle ``-alpha_1`` below the first grid
point, which the universal projectors also realize, via the local reflection
diag(1,-1) that fixes the first setting).  The resulting state is a mixture
of at most four embedded pure states and the first-order terms cancel,
leaving an L1 error of order ``(pi/2N)^2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from . import matcore
from .boxes import Box, l1_distance

NORM_TOL = 1e-12


def _proj(theta: float) -> np.ndarray:
    v = np.array([np.cos(theta), np.sin(theta)], dtype=complex)
    return np.outer(v, v.conj())


@dataclass
class TwoQubitRealization:
    """Canonical-gauge two-qubit realization of a 2x2 box.

    The first setting of each party measures in the computational basis; the
    second measures the line at ``alpha`` (Alice) or ``beta`` (Bob) against
    its orthocomplement.
    """

    psi: np.ndarray  # unit vector in C^4
    alpha: float
    beta: float

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=complex).reshape(4)
        if abs(np.linalg.norm(self.psi) - 1.0) > NORM_TOL:
            raise ValueError("state vector is not normalized")
        for name, ang in (("alpha", self.alpha), ("beta", self.beta)):
            if not 0.0 <= ang <= np.pi / 2 + 1e-12:
                raise ValueError(f"{name}={ang} outside [0, pi/2]")

    def alice_projectors(self, x: int) -> list:
        th = 0.0 if x == 1 else self.alpha
        P = _proj(th)
        return [P, np.eye(2) - P]

    def bob_projectors(self, y: int) -> list:
        th = 0.0 if y == 1 else self.beta
        P = _proj(th)
        return [P, np.eye(2) - P]

    def to_json(self) -> dict:
        return {"psi_re": [float(v) for v in self.psi.real],
                "psi_im": [float(v) for v in self.psi.imag],
                "alpha": float(self.alpha), "beta": float(self.beta)}

    @classmethod
    def from_json(cls, obj: dict) -> "TwoQubitRealization":
        psi = (np.asarray(obj["psi_re"], dtype=float)
               + 1j * np.asarray(obj["psi_im"], dtype=float))
        return cls(psi=psi, alpha=float(obj["alpha"]), beta=float(obj["beta"]))


@dataclass
class UniversalModel:
    """The N-block projector family; ``projectors[(a, x)]`` with settings
    x in {1, 2} and outcomes a in {0, 1} are 2N x 2N projectors."""

    N: int
    projectors: dict

    def grid_angle(self, k: int) -> float:
        return k * np.pi / (2 * self.N)


def universal_model(N: int) -> UniversalModel:
    if N < 1:
        raise ValueError("N must be at least 1")
    dim = 2 * N
    p01 = np.zeros((dim, dim), dtype=complex)
    p02 = np.zeros((dim, dim), dtype=complex)
    for k in range(1, N + 1):
        ofs = 2 * (k - 1)
        p01[ofs, ofs] = 1.0
        p02[ofs:ofs + 2, ofs:ofs + 2] = _proj(k * np.pi / (2 * N))
    eye = np.eye(dim, dtype=complex)
    return UniversalModel(N=N, projectors={
        (0, 1): p01, (1, 1): eye - p01,
        (0, 2): p02, (1, 2): eye - p02,
    })


def choose_index(angle: float, N: int) -> int:
    """Grid index whose angle is closest to the target; ties go down."""
    if not 0.0 <= angle <= np.pi / 2 + 1e-12:
        raise ValueError(f"angle {angle} outside [0, pi/2]")
    h = np.pi / (2 * N)
    best = 1
    for k in range(2, N + 1):
        if abs(k * h - angle) < abs(best * h - angle) - 1e-15:
            best = k
    return best


def _bracket(angle: float, N: int) -> list:
    """Two-point convex combination of the target angle over the signed grid.

    Returns ``[(signed_grid_angle, weight), ...]`` (one entry when the angle
    sits exactly on the grid).  Below the first grid point the reflected
    angle ``-alpha_1`` serves as the lower neighbour.
    """
    h = np.pi / (2 * N)
    angles = np.arange(1, N + 1) * h
    if angle <= angles[0]:
        lo, hi = -angles[0], angles[0]
    else:
        i = int(np.searchsorted(angles, angle))
        if i >= N:
            return [(float(angles[N - 1]), 1.0)]
        lo, hi = float(angles[i - 1]), float(angles[i])
    lam = (hi - angle) / (hi - lo)
    out = []
    if lam > 1e-14:
        out.append((lo, lam))
    if 1.0 - lam > 1e-14:
        out.append((hi, 1.0 - lam))
    return out


def box_from_realization(r: TwoQubitRealization) -> Box:
    p = np.zeros((2, 2, 2, 2))
    for x in (1, 2):
        QA = r.alice_projectors(x)
        for y in (1, 2):
            QB = r.bob_projectors(y)
            for a in range(2):
                for b in range(2):
                    M = matcore.kron(QA[a], QB[b])
                    p[a, b, x - 1, y - 1] = float(
                        (r.psi.conj() @ M @ r.psi).real)
    return Box(m=2, n=2, p=p)


def _embed_component(psi4: np.ndarray, k: int, sign: float, N: int) -> np.ndarray:
    """One party-local embedding factor: block-k isometry, with the local
    reflection diag(1,-1) first when the signed grid angle is negative."""
    V = np.zeros((2 * N, 2), dtype=complex)
    ofs = 2 * (k - 1)
    V[ofs, 0] = 1.0
    V[ofs + 1, 1] = 1.0
    if sign < 0:
        V = V @ np.diag([1.0, -1.0])
    return V


def approximate(r: TwoQubitRealization, eps: float) -> dict:
    """Approximate the realization's box inside the universal model.

    ``N = ceil(pi/sqrt(eps))``; the output state is the mixture of the (at
    most four) embedded pure states given by bracketing each party's angle
    between neighbouring grid angles.  The measured L1 distance is checked
    against ``eps`` before returning.
    """
    if not 0.0 < eps <= 4.0:
        raise ValueError("eps must lie in (0, 4]")
    N = int(ceil(np.pi / np.sqrt(eps)))
    model = universal_model(N)
    target = box_from_realization(r)
    h = np.pi / (2 * N)
    comp_a = _bracket(r.alpha, N)
    comp_b = _bracket(r.beta, N)

    dim = 2 * N
    psi_mat = r.psi.reshape(2, 2)
    rho = np.zeros((dim * dim, dim * dim), dtype=complex)
    p = np.zeros((2, 2, 2, 2))
    for ang_a, wa in comp_a:
        ka = int(round(abs(ang_a) / h))
        VA = _embed_component(r.psi, ka, np.sign(ang_a), N)
        for ang_b, wb in comp_b:
            kb = int(round(abs(ang_b) / h))
            VB = _embed_component(r.psi, kb, np.sign(ang_b), N)
            # state as a dim x dim coefficient matrix: Psi = VA psi VB^T
            Psi = VA @ psi_mat @ VB.T
            vec = Psi.reshape(dim * dim)
            rho += (wa * wb) * np.outer(vec, vec.conj())
            for x in (1, 2):
                A = model.projectors[(0, x)]
                for y in (1, 2):
                    B = model.projectors[(0, y)]
                    # <Psi|(A x B)|Psi> = Tr(Psi^dag A Psi B^T)
                    pa = float(np.trace(Psi.conj().T @ A @ Psi).real)
                    pb = float(np.trace(Psi.conj().T @ Psi @ B.T).real)
                    pab = float(np.trace(Psi.conj().T @ A @ Psi @ B.T).real)
                    p[0, 0, x - 1, y - 1] += wa * wb * pab
                    p[0, 1, x - 1, y - 1] += wa * wb * (pa - pab)
                    p[1, 0, x - 1, y - 1] += wa * wb * (pb - pab)
                    p[1, 1, x - 1, y - 1] += wa * wb * (1.0 - pa - pb + pab)
    box = Box(m=2, n=2, p=p)
    distance = l1_distance(target, box)
    if distance > eps:
        raise AssertionError(
            f"construction defect: distance {distance} exceeds eps {eps}")
    return {"N": N,
            "k0": choose_index(r.alpha, N),
            "l0": choose_index(r.beta, N),
            "components": {"alice": comp_a, "bob": comp_b},
            "rho": rho,
            "box": box,
            "distance": distance}


def canonicalize_realization(psi, QA, QB, tol: float = 1e-9) -> TwoQubitRealization:
    """Bring an arbitrary rank-1 projective two-qubit realization into the
    canonical gauge by local unitaries; the box is unchanged.

    ``QA`` and ``QB`` are ``[setting][outcome]`` projector lists (two
    settings, two outcomes).  The first setting is rotated onto the
    computational basis and the second setting's retained outcome onto a
    line at a nonnegative angle in [0, pi/2].
    """
    psi = np.asarray(psi, dtype=complex).reshape(4)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-9:
        raise ValueError("state vector is not normalized")

    def local_unitary(Q):
        P0, P1 = (matcore.as_matrix(q) for q in Q[0])
        R0 = matcore.as_matrix(Q[1][0])
        for P in (P0, P1, R0, Q[1][1]):
            P = matcore.as_matrix(P)
            if np.max(np.abs(P @ P - P)) > tol or abs(np.trace(P) - 1.0) > tol:
                raise ValueError("measurements must be rank-1 projective")
        if np.max(np.abs(P0 + P1 - np.eye(2))) > tol:
            raise ValueError("first-setting projectors do not sum to identity")
        w0, v0s = np.linalg.eigh(P0)
        v0 = v0s[:, np.argmax(w0)]
        v1 = v0s[:, np.argmin(w0)]
        w, ws = np.linalg.eigh(R0)
        wvec = ws[:, np.argmax(w)]
        c0 = np.vdot(v0, wvec)
        c1 = np.vdot(v1, wvec)
        ph0 = c0 / abs(c0) if abs(c0) > tol else 1.0
        ph1 = c1 / abs(c1) if abs(c1) > tol else 1.0
        U = np.vstack([np.conj(ph0) * v0.conj(), np.conj(ph1) * v1.conj()])
        angle = float(np.arctan2(abs(c1), abs(c0)))
        return U, angle

    UA, alpha = local_unitary(QA)
    UB, beta = local_unitary(QB)
    psi_new = (matcore.kron(UA, UB) @ psi)
    return TwoQubitRealization(psi=psi_new / np.linalg.norm(psi_new),
                               alpha=alpha, beta=beta)


def tsirelson_two_qubit() -> TwoQubitRealization:
    """Canonical-gauge realization whose box attains the optimal CHSH score."""
    from .boxes import tsirelson_realization

    r = tsirelson_realization()
    phip = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2.0)
    return canonicalize_realization(phip, r.E, r.F)
