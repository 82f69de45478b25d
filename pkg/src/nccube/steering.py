"""Steering assemblages: local-hidden-state membership and functional bounds.

An assemblage is the family of subnormalized conditional states Bob holds
after Alice announces outcome ``a`` for setting ``x``; validity means each
member is PSD, the per-setting sums agree (no signalling to Bob) and the
common sum has unit trace.  The classical side is the local-hidden-state
(LHS) cone; its membership test and functional bound both work with one
unnormalized PSD matrix per deterministic response function, which turns
the mixture condition into a semidefinite program.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matcore, sdp
from .cube import deterministic_responses

PSD_TOL = 1e-10
SUM_TOL = 1e-9
HERM_TOL = 1e-12
RESPONSE_LIMIT = 4096


@dataclass
class Assemblage:
    m: int
    n: int
    d: int
    sigma: list  # sigma[x-1][a]: d x d complex matrix

    def __post_init__(self):
        self.sigma = [[matcore.as_matrix(s) for s in setting]
                      for setting in self.sigma]
        if len(self.sigma) != self.m or any(len(s) != self.n for s in self.sigma):
            raise ValueError("sigma must be indexed [setting][outcome]")
        for setting in self.sigma:
            for s in setting:
                if s.shape != (self.d, self.d):
                    raise ValueError("member dimension mismatch")
                if matcore.min_eigenvalue(s, tol=1e-8) < -PSD_TOL:
                    raise ValueError("assemblage member is not PSD")
        sums = [sum(setting) for setting in self.sigma]
        for s in sums[1:]:
            if np.max(np.abs(s - sums[0])) > SUM_TOL:
                raise ValueError("per-setting sums differ (signalling to Bob)")
        if abs(np.trace(sums[0]).real - 1.0) > SUM_TOL:
            raise ValueError("reduced state trace is not 1")

    def member(self, a: int, x: int) -> np.ndarray:
        return self.sigma[x - 1][a]

    def reduced_state(self) -> np.ndarray:
        return sum(self.sigma[0])

    def to_json(self) -> dict:
        return {"m": self.m, "n": self.n, "d": self.d,
                "sigma": [[matcore.matrix_to_json(s) for s in setting]
                          for setting in self.sigma]}

    @classmethod
    def from_json(cls, obj: dict) -> "Assemblage":
        return cls(m=int(obj["m"]), n=int(obj["n"]), d=int(obj["d"]),
                   sigma=[[matcore.matrix_from_json(s) for s in setting]
                          for setting in obj["sigma"]])


@dataclass
class SteeringFunctional:
    m: int
    n: int
    d: int
    F: list  # F[x-1][a]: Hermitian d x d matrix

    def __post_init__(self):
        self.F = [[matcore.as_matrix(f) for f in setting] for setting in self.F]
        if len(self.F) != self.m or any(len(s) != self.n for s in self.F):
            raise ValueError("F must be indexed [setting][outcome]")
        for setting in self.F:
            for f in setting:
                if f.shape != (self.d, self.d):
                    raise ValueError("coefficient dimension mismatch")
                if not matcore.is_hermitian(f, tol=HERM_TOL):
                    raise ValueError("coefficient matrix is not Hermitian")

    def to_json(self) -> dict:
        return {"m": self.m, "n": self.n, "d": self.d,
                "F": [[matcore.matrix_to_json(f) for f in setting]
                      for setting in self.F]}

    @classmethod
    def from_json(cls, obj: dict) -> "SteeringFunctional":
        return cls(m=int(obj["m"]), n=int(obj["n"]), d=int(obj["d"]),
                   F=[[matcore.matrix_from_json(f) for f in setting]
                      for setting in obj["F"]])


def assemblage_from_state(rho, E, dA: int, dB: int) -> Assemblage:
    """Partial-trace construction: sigma(a|x) = Tr_A(rho (E_x^a tensor 1))."""
    rho = matcore.as_matrix(rho)
    m = len(E)
    n = len(E[0])
    sigma = []
    for x in range(m):
        setting = []
        for a in range(n):
            op = matcore.kron(E[x][a], np.eye(dB))
            setting.append(matcore.partial_trace(rho @ op, (dA, dB), "A"))
        sigma.append(setting)
    return Assemblage(m=m, n=n, d=dB, sigma=sigma)


def steering_value(F: SteeringFunctional, s: Assemblage) -> float:
    if (F.m, F.n, F.d) != (s.m, s.n, s.d):
        raise ValueError("shape mismatch between functional and assemblage")
    total = 0.0 + 0.0j
    for x in range(1, F.m + 1):
        for a in range(F.n):
            total += np.trace(F.F[x - 1][a] @ s.member(a, x))
    if abs(total.imag) > 1e-10:
        raise ValueError(f"pairing has imaginary residue {total.imag}")
    return float(total.real)


def _check_responses(m: int, n: int):
    if n ** m > RESPONSE_LIMIT:
        raise ValueError(f"{n ** m} deterministic responses exceeds the "
                         f"limit {RESPONSE_LIMIT}")


def _response_operator(F: SteeringFunctional, g) -> np.ndarray:
    return sum(F.F[x][g[x]] for x in range(F.m))


def lhs_bound(F: SteeringFunctional) -> float:
    """Closed-form LHS supremum: the hidden state concentrates on the top
    eigenvector of the best deterministic response's summed coefficient."""
    _check_responses(F.m, F.n)
    return max(matcore.max_eigenvalue(_response_operator(F, g), tol=1e-8)
               for g in deterministic_responses(F.m, F.n))


def _embed(h: np.ndarray) -> np.ndarray:
    """Hermitian d x d -> real symmetric 2d x 2d with doubled spectrum."""
    h = np.asarray(h, dtype=complex)
    return np.block([[h.real, -h.imag], [h.imag, h.real]])


def _hermitian_basis(d: int):
    """Real basis of Hermitian d x d matrices; coefficients of H are
    (H_ii, Re H_ij, Im H_ij) for i < j in this order."""
    basis = []
    for i in range(d):
        B = np.zeros((d, d), dtype=complex)
        B[i, i] = 1.0
        basis.append(B)
    for i in range(d):
        for j in range(i + 1, d):
            B = np.zeros((d, d), dtype=complex)
            B[i, j] = B[j, i] = 1.0
            basis.append(B)
            B = np.zeros((d, d), dtype=complex)
            B[i, j] = 1.0j
            B[j, i] = -1.0j
            basis.append(B)
    return basis


def _hermitian_coords(h: np.ndarray, d: int) -> np.ndarray:
    out = [h[i, i].real for i in range(d)]
    for i in range(d):
        for j in range(i + 1, d):
            out.extend([h[i, j].real, h[i, j].imag])
    return np.asarray(out)


def _from_coords(v: np.ndarray, d: int) -> np.ndarray:
    basis = _hermitian_basis(d)
    return sum(float(c) * B for c, B in zip(v, basis))


def lhs_bound_sdp(F: SteeringFunctional, tol: float = 1e-8) -> float:
    """The same LHS supremum as an SDP over the unnormalized hidden states;
    kept as an independent oracle for the closed form."""
    _check_responses(F.m, F.n)
    responses = deterministic_responses(F.m, F.n)
    side = 2 * F.d
    C = [0.5 * _embed(_response_operator(F, g)) for g in responses]
    constraints = [([0.5 * np.eye(side)] * len(responses), 1.0)]
    res = sdp.sdp_solve(sdp.SemidefiniteProgram(
        block_sides=[side] * len(responses), C=C, constraints=constraints,
        maximize=True), tol=max(tol, 1e-9))
    if res.status != "optimal":
        raise sdp.SolverError(f"LHS-cone solve ended with {res.status}")
    return res.value


def lhs_membership(s: Assemblage, tol: float = 1e-7) -> dict:
    """Decide LHS membership in margin form.

    Searches for PSD matrices, one per deterministic response, whose
    outcome-consistent sums reproduce every assemblage member; the margin is
    the best attainable smallest eigenvalue over those matrices.  On the
    non-member side the separating functional is polished by a second SDP
    (maximize the violation over operator-norm-bounded functionals).
    """
    _check_responses(s.m, s.n)
    responses = deterministic_responses(s.m, s.n)
    d = s.d
    nb = d * d  # real parameters per Hermitian matrix
    basis = _hermitian_basis(d)
    emb = [_embed(B) for B in basis]

    blocks = []
    for gi in range(len(responses)):
        terms = {gi * nb + k: emb[k] for k in range(nb)}
        blocks.append((np.zeros((2 * d, 2 * d)), terms))

    nv = len(responses) * nb
    rows = []
    rhs = []
    for x in range(1, s.m + 1):
        for a in range(s.n):
            if x > 1 and a == s.n - 1:
                # implied by the other rows plus assemblage validity; kept
                # out so the equality system has full row rank
                continue
            target = _hermitian_coords(s.member(a, x), d)
            for k in range(nb):
                row = np.zeros(nv)
                for gi, g in enumerate(responses):
                    if g[x - 1] == a:
                        row[gi * nb + k] = 1.0
                rows.append(row)
                rhs.append(target[k])
    margin, res = sdp.feasibility_margin(blocks, np.asarray(rows),
                                         np.asarray(rhs))
    if margin >= -tol:
        omegas = [_from_coords(res.x[gi * nb:(gi + 1) * nb], d)
                  for gi in range(len(responses))]
        return {"member": True, "margin": float(margin),
                "decomposition": {g: w for g, w in zip(responses, omegas)}}
    functional = _separating_functional(s, responses)
    return {"member": False, "margin": float(margin),
            "functional": functional["F"], "gap": functional["gap"]}


def _separating_functional(s: Assemblage, responses) -> dict:
    """Best violating functional with every coefficient in the operator-norm
    unit ball:  max <F, sigma> - max_g lambda_max(sum_x F_{g(x),x})."""
    d = s.d
    nb = d * d
    basis = _hermitian_basis(d)
    emb = [_embed(B) for B in basis]
    nF = s.m * s.n * nb
    svar = nF  # scalar bounding the response operators
    nv = nF + 1

    def var(x, a, k):
        return ((x - 1) * s.n + a) * nb + k

    obj = np.zeros(nv)
    for x in range(1, s.m + 1):
        for a in range(s.n):
            coords = _hermitian_coords(s.member(a, x), d)
            # Tr(F sigma) in coordinates: diagonal terms once, off-diagonal
            # real/imag terms twice (the basis elements have two entries).
            w = np.ones(nb)
            w[d:] = 2.0
            for k in range(nb):
                obj[var(x, a, k)] += w[k] * coords[k]
    obj[svar] = -1.0

    blocks = []
    side = 2 * d
    for g in responses:
        terms = {svar: np.eye(side)}
        for x in range(1, s.m + 1):
            for k in range(nb):
                key = var(x, g[x - 1], k)
                terms[key] = terms.get(key, np.zeros((side, side))) - emb[k]
        blocks.append((np.zeros((side, side)), terms))
    for x in range(1, s.m + 1):
        for a in range(s.n):
            up = {var(x, a, k): -emb[k] for k in range(nb)}
            lo = {var(x, a, k): emb[k] for k in range(nb)}
            blocks.append((np.eye(side), up))  # I - F >= 0
            blocks.append((np.eye(side), lo))  # I + F >= 0
    res = sdp.solve_lmi(obj, blocks)
    if res.status != "optimal":
        raise sdp.SolverError(f"separation solve ended with {res.status}")
    F = [[_from_coords(res.x[var(x, a, 0):var(x, a, 0) + nb], d)
          for a in range(s.n)] for x in range(1, s.m + 1)]
    return {"F": SteeringFunctional(m=s.m, n=s.n, d=d, F=F),
            "gap": float(res.value)}


def assemblage_bound(F: SteeringFunctional, tol: float = 1e-8) -> float:
    """Supremum of the functional over all valid assemblages.

    Every PSD family with setting-independent unit-trace sums is attainable
    quantum-mechanically, so this is the quantum steering bound.
    """
    d = F.d
    nb = d * d
    basis = _hermitian_basis(d)
    emb = [_embed(B) for B in basis]
    nv = F.m * F.n * nb

    def var(x, a, k):
        return ((x - 1) * F.n + a) * nb + k

    w = np.ones(nb)
    w[d:] = 2.0
    obj = np.zeros(nv)
    for x in range(1, F.m + 1):
        for a in range(F.n):
            coords = _hermitian_coords(F.F[x - 1][a], d)
            for k in range(nb):
                obj[var(x, a, k)] = w[k] * coords[k]

    blocks = []
    for x in range(1, F.m + 1):
        for a in range(F.n):
            terms = {var(x, a, k): emb[k] for k in range(nb)}
            blocks.append((np.zeros((2 * d, 2 * d)), terms))

    rows = []
    rhs = []
    for x in range(2, F.m + 1):
        for k in range(nb):
            row = np.zeros(nv)
            for a in range(F.n):
                row[var(x, a, k)] = 1.0
                row[var(1, a, k)] = -1.0
            rows.append(row)
            rhs.append(0.0)
    trace_row = np.zeros(nv)
    for a in range(F.n):
        for i in range(d):
            trace_row[var(1, a, i)] = 1.0
    rows.append(trace_row)
    rhs.append(1.0)

    res = sdp.solve_lmi(obj, blocks, np.asarray(rows), np.asarray(rhs),
                        tol=max(tol, 1e-9))
    if res.status != "optimal":
        raise sdp.SolverError(f"assemblage-bound solve ended with {res.status}")
    return res.value


def steering_violation(F: SteeringFunctional) -> dict:
    """Quantum-over-classical steering bracket for a functional."""
    lhs = lhs_bound(F)
    if lhs <= 1e-9:
        raise ValueError("LHS bound is not positive; ratio undefined")
    quantum = assemblage_bound(F)
    return {"lhs": lhs, "quantum": quantum, "ratio": quantum / lhs}


def zx_functional() -> SteeringFunctional:
    """Two-setting qubit functional with coefficients (+/-)Z and (+/-)X."""
    Z = np.diag([1.0, -1.0]).astype(complex)
    X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    return SteeringFunctional(m=2, n=2, d=2, F=[[Z, -Z], [X, -X]])


def phi_plus_zx_assemblage() -> Assemblage:
    """Assemblage steered from the maximally entangled two-qubit state by
    measurements in the Z and X eigenbases."""
    phip = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2.0)
    rho = np.outer(phip, phip.conj())
    z0 = np.array([1, 0], dtype=complex)
    z1 = np.array([0, 1], dtype=complex)
    x0 = np.array([1, 1], dtype=complex) / np.sqrt(2.0)
    x1 = np.array([1, -1], dtype=complex) / np.sqrt(2.0)
    E = [[np.outer(v, v.conj()) for v in (z0, z1)],
         [np.outer(v, v.conj()) for v in (x0, x1)]]
    return assemblage_from_state(rho, E, 2, 2)


def product_assemblage(rho_a, rho_b, E) -> Assemblage:
    """Unsteerable fixture: sigma(a|x) = Tr(rho_A E_x^a) rho_B."""
    rho_a = matcore.as_matrix(rho_a)
    rho_b = matcore.as_matrix(rho_b)
    dA = rho_a.shape[0]
    dB = rho_b.shape[0]
    return assemblage_from_state(matcore.kron(rho_a, rho_b), E, dA, dB)
