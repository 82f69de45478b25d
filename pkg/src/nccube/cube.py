"""Coefficient-level model of the generalized non-commuting cube and its dual.

An element is stored as the coefficient array ``z[a, x]`` of the spectral
projections indexed by outcome ``a`` (0-based) and setting ``x`` (1-based in
the interface, column ``x-1`` in storage).  Two arrays describe the same
element exactly when their difference is constant down each column with the
column constants summing to zero; that null space is the kernel of the
quotient the algebra lives in, and every operation here is well defined on
it.

The dual side consists of arrays ``f[a, x]`` whose outcome sums are
setting-independent; its positive normalized elements are exactly the
single-party behavior tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

COEFF_TOL = 1e-10


@dataclass
class CubeElement:
    m: int  # settings
    n: int  # outcomes per setting
    z: np.ndarray  # complex, shape (n, m)

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=complex)
        if self.z.shape != (self.n, self.m):
            raise ValueError(f"coefficient shape {self.z.shape} != ({self.n},{self.m})")

    def to_json(self) -> dict:
        return {"m": self.m, "n": self.n,
                "re": [float(v) for v in self.z.real.ravel()],
                "im": [float(v) for v in self.z.imag.ravel()]}

    @classmethod
    def from_json(cls, obj: dict) -> "CubeElement":
        m, n = int(obj["m"]), int(obj["n"])
        z = (np.asarray(obj["re"], float) + 1j * np.asarray(obj["im"], float))
        return cls(m=m, n=n, z=z.reshape(n, m))


@dataclass
class DualFunctional:
    m: int
    n: int
    f: np.ndarray  # complex, shape (n, m)

    def __post_init__(self):
        self.f = np.asarray(self.f, dtype=complex)
        if self.f.shape != (self.n, self.m):
            raise ValueError(f"coefficient shape {self.f.shape} != ({self.n},{self.m})")

    def column_sums(self) -> np.ndarray:
        return self.f.sum(axis=0)

    def is_member(self, tol: float = COEFF_TOL) -> bool:
        """Outcome sums must not depend on the setting."""
        s = self.column_sums()
        return bool(np.max(np.abs(s - s[0])) <= tol) if self.m else True

    def is_positive_functional(self, tol: float = COEFF_TOL) -> bool:
        return (self.is_member(tol)
                and np.max(np.abs(self.f.imag)) <= 1e-12
                and float(self.f.real.min()) >= -1e-12)

    def is_state(self, tol: float = COEFF_TOL) -> bool:
        return (self.is_positive_functional(tol)
                and bool(np.max(np.abs(self.column_sums() - 1.0)) <= tol))

    def to_json(self) -> dict:
        return {"m": self.m, "n": self.n,
                "re": [float(v) for v in self.f.real.ravel()],
                "im": [float(v) for v in self.f.imag.ravel()]}


def is_zero(t: CubeElement, tol: float = COEFF_TOL) -> bool:
    """True iff the coefficients are a per-setting constant with zero total.

    This is the exact kernel criterion: columns must be constant and the
    column constants must sum to zero.
    """
    col = t.z.mean(axis=0)
    if np.max(np.abs(t.z - col[None, :])) > tol:
        return False
    return bool(abs(col.sum()) <= tol)


def canonical_rep(t: CubeElement) -> CubeElement:
    """Gauge-fix the coset representative by equalizing the column means.

    Subtracts the kernel element ``u_x = mean_a z[a,x] - overall_mean``; the
    map is linear and idempotent, and kills exactly the kernel.
    """
    col = t.z.mean(axis=0)
    u = col - col.mean()
    return CubeElement(m=t.m, n=t.n, z=t.z - u[None, :])


def is_positive(t: CubeElement, tol: float = COEFF_TOL) -> bool:
    """Positivity of the quotient element, in closed form.

    The element is positive iff some kernel shift makes the coefficients
    entrywise real and nonnegative: imaginary parts must be constant down
    each column with the constants summing to zero, and the real column
    minima must have nonnegative sum.
    """
    im_col = t.z.imag.mean(axis=0)
    if np.max(np.abs(t.z.imag - im_col[None, :])) > tol:
        return False
    if abs(im_col.sum()) > tol:
        return False
    return bool(t.z.real.min(axis=0).sum() >= -tol)


def to_group_basis(t: CubeElement) -> dict:
    """Expand over the unit and the cyclic-generator powers.

    Returns ``{"unit": c0, "s": S}`` where ``S[k-1, x-1]`` is the coefficient
    of the k-th power of the setting-x generator, ``k = 1..n-1``.  This is
    the inverse discrete Fourier transform of the coefficient columns.
    """
    n, m = t.n, t.m
    omega = np.exp(2j * np.pi / n)
    unit = complex(t.z.sum()) / n
    S = np.zeros((n - 1, m), dtype=complex)
    for k in range(1, n):
        for x in range(m):
            S[k - 1, x] = sum(omega ** ((a * k) % n) * t.z[a, x] for a in range(n)) / n
    return {"unit": unit, "s": S}


def from_group_basis(unit: complex, S: np.ndarray, m: int, n: int) -> CubeElement:
    """Inverse of :func:`to_group_basis` up to a kernel element."""
    omega = np.exp(2j * np.pi / n)
    z = np.zeros((n, m), dtype=complex)
    # distribute the unit evenly: unit = sum over one full projector family
    z += unit / m
    for k in range(1, n):
        for x in range(m):
            for a in range(n):
                z[a, x] += S[k - 1, x] * omega ** ((-a * k) % n)
    return CubeElement(m=m, n=n, z=z)


def pair(f: DualFunctional, t: CubeElement, tol: float = COEFF_TOL) -> complex:
    """Dual pairing ``sum f[a,x] z[a,x]``; invariant under kernel shifts."""
    if (f.m, f.n) != (t.m, t.n):
        raise ValueError("shape mismatch between functional and element")
    if not f.is_member(tol):
        raise ValueError("functional violates the setting-independent-sum condition")
    return complex(np.sum(f.f * t.z))


def vertex_states(m: int, n: int) -> list:
    """All deterministic states, one per response function settings->outcomes."""
    count = n ** m
    if count > 10 ** 6:
        raise ValueError(f"enumeration of {count} deterministic states refused")
    out = []
    for g in product(range(n), repeat=m):
        f = np.zeros((n, m))
        for x, a in enumerate(g):
            f[a, x] = 1.0
        out.append(DualFunctional(m=m, n=n, f=f))
    return out


def deterministic_responses(m: int, n: int) -> list:
    """Response functions settings->outcomes as tuples, in lexicographic order."""
    count = n ** m
    if count > 10 ** 6:
        raise ValueError(f"enumeration of {count} responses refused")
    return list(product(range(n), repeat=m))
