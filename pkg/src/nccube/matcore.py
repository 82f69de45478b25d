"""Dense complex linear algebra primitives shared by all other modules.

Matrices are plain ``numpy.ndarray`` objects with ``complex128`` entries;
this module adds the handful of operations the rest of the package needs
(Kronecker products, partial traces, eigenvalue queries) together with the
JSON wire format ``{"rows": r, "cols": c, "re": [...], "im": [...]}``.
"""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-10


def as_matrix(m) -> np.ndarray:
    """Coerce to a 2-d complex array without copying when possible."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={a.ndim}")
    return a


def dagger(m) -> np.ndarray:
    return as_matrix(m).conj().T


def is_hermitian(m, tol: float = HERMITIAN_TOL) -> bool:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        return False
    return bool(np.max(np.abs(a - a.conj().T)) <= tol)


def require_hermitian(m, tol: float = HERMITIAN_TOL, what: str = "matrix") -> np.ndarray:
    a = as_matrix(m)
    if not is_hermitian(a, tol):
        dev = np.max(np.abs(a - a.conj().T)) if a.shape[0] == a.shape[1] else None
        raise ValueError(f"{what} is not Hermitian within {tol} (deviation {dev})")
    return a


def kron(a, b) -> np.ndarray:
    """Kronecker product; (i1*rb+i2, j1*cb+j2) entry is a[i1,j1]*b[i2,j2]."""
    return np.kron(as_matrix(a), as_matrix(b))


def partial_trace(m, dims: tuple[int, int], party: str) -> np.ndarray:
    """Trace out one party of a matrix on a (dA*dB)-dimensional product space.

    ``party`` names the subsystem that is traced *out*: ``"A"`` returns the
    dB x dB reduction, ``"B"`` the dA x dA one.  The full trace is preserved.
    """
    dA, dB = dims
    a = as_matrix(m)
    if a.shape != (dA * dB, dA * dB):
        raise ValueError(f"matrix shape {a.shape} does not match dims {dims}")
    t = a.reshape(dA, dB, dA, dB)
    if party == "A":
        return np.einsum("ibid->bd", t)
    if party == "B":
        return np.einsum("aici->ac", t)
    raise ValueError(f"party must be 'A' or 'B', got {party!r}")


def eigvals_hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix; rejects non-Hermitian input."""
    a = require_hermitian(m, tol)
    return np.linalg.eigvalsh(a)


def min_eigenvalue(m, tol: float = HERMITIAN_TOL) -> float:
    return float(eigvals_hermitian(m, tol)[0])


def max_eigenvalue(m, tol: float = HERMITIAN_TOL) -> float:
    return float(eigvals_hermitian(m, tol)[-1])


def is_psd(m, tol: float = HERMITIAN_TOL) -> bool:
    return min_eigenvalue(m, tol) >= -tol


def matrix_to_json(m) -> dict:
    a = as_matrix(m)
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "re": [float(v) for v in a.real.ravel()],
        "im": [float(v) for v in a.imag.ravel()],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj["im"], dtype=float)
    if re.size != rows * cols or im.size != rows * cols:
        raise ValueError("entry count does not match rows*cols")
    return (re + 1j * im).reshape(rows, cols)
