import numpy as np
import pytest

from nccube import cube
from nccube.linprog import LinearProgram, lp_solve


def el(z, m=None, n=None):
    z = np.asarray(z, dtype=complex)
    n_, m_ = z.shape
    return cube.CubeElement(m=m or m_, n=n or n_, z=z)


def test_is_zero_examples():
    # columns constant with constants summing to zero
    assert cube.is_zero(el([[1, -1], [1, -1]]))
    ind = np.zeros((2, 2))
    ind[0, 0] = 1.0
    assert not cube.is_zero(el(ind))
    # constant c != 0 across two settings: sum 2c != 0
    assert not cube.is_zero(el(np.full((2, 2), 0.7)))


def test_canonical_rep():
    e = el([[1, -1], [1, -1]])
    assert np.allclose(cube.canonical_rep(e).z, 0.0)
    rng = np.random.default_rng(0)
    for _ in range(100):
        z = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
        c1 = cube.canonical_rep(el(z))
        c2 = cube.canonical_rep(c1)
        assert np.allclose(c1.z, c2.z)
        # difference from the input is a kernel element
        assert cube.is_zero(el(z - c1.z))


def test_is_zero_iff_canonical_zero():
    rng = np.random.default_rng(1)
    for _ in range(200):
        z = np.round(rng.normal(size=(2, 3)), 1)
        e = el(z)
        assert cube.is_zero(e) == bool(
            np.max(np.abs(cube.canonical_rep(e).z)) <= 1e-10)


def test_is_positive_examples():
    assert cube.is_positive(el([[0.2, 0.3], [0.1, 0.0]]))
    assert cube.is_positive(el([[1, 2], [-0.5, 3]]))  # minima sum 1.5
    assert not cube.is_positive(el([[-1, 0.5], [-1, 0.5]]))  # minima sum -0.5
    # imaginary parts constant per column and cancelling are allowed
    z = np.array([[1.0 + 1j, 1.0 - 1j], [2.0 + 1j, 0.5 - 1j]])
    assert cube.is_positive(el(z))
    # non-constant imaginary column is not
    z2 = np.array([[1.0 + 1j, 1.0], [2.0, 0.5]])
    assert not cube.is_positive(el(z2))


def lp_positive_oracle(e):
    """Feasibility of z + shift >= 0 with the shift in the kernel, by LP."""
    n, m = e.n, e.m
    imcol = e.z.imag.mean(axis=0)
    if np.max(np.abs(e.z.imag - imcol[None, :])) > 1e-10:
        return False
    if abs(imcol.sum()) > 1e-10:
        return False
    # variables: u_x (free), slack s_ax >= 0 with z_ax + u_x - s_ax = 0,
    # and sum_x u_x = -sum(imag consts) = 0 handled on the real part.
    nv = m + n * m
    rows = []
    rhs = []
    for x in range(m):
        for a in range(n):
            r = np.zeros(nv)
            r[x] = 1.0
            r[m + x * n + a] = -1.0
            rows.append(r)
            rhs.append(-e.z.real[a, x])
    r = np.zeros(nv)
    r[:m] = 1.0
    rows.append(r)
    rhs.append(0.0)
    nonneg = np.ones(nv, dtype=bool)
    nonneg[:m] = False
    res = lp_solve(LinearProgram(c=np.zeros(nv), A=np.asarray(rows),
                                 b=np.asarray(rhs), nonneg=nonneg))
    return res.status == "optimal"


def test_positive_closed_form_matches_lp_oracle():
    rng = np.random.default_rng(2)
    for _ in range(200):
        m = int(rng.integers(1, 5))
        n = int(rng.integers(2, 5))
        z = np.round(rng.normal(scale=1.0, size=(n, m)), 2)
        e = el(z)
        assert cube.is_positive(e) == lp_positive_oracle(e), z


def test_group_basis_round_trip():
    rng = np.random.default_rng(3)
    for _ in range(50):
        m, n = int(rng.integers(1, 4)), int(rng.integers(2, 5))
        z = rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))
        e = el(z)
        g = cube.to_group_basis(e)
        back = cube.from_group_basis(g["unit"], g["s"], m, n)
        assert cube.is_zero(el(e.z - back.z, m=m, n=n), tol=1e-9)


def test_group_basis_known_values():
    # n=2, m=1, z=(1,0): unit 1/2, s coefficient 1/2
    g = cube.to_group_basis(el(np.array([[1.0], [0.0]])))
    assert g["unit"] == pytest.approx(0.5)
    assert g["s"][0, 0] == pytest.approx(0.5)
    # all-ones column per setting is the unit times m
    g2 = cube.to_group_basis(el(np.ones((2, 2))))
    assert g2["unit"] == pytest.approx(2.0)
    assert np.allclose(g2["s"], 0.0)
    # n=3 pure generator coefficient
    omega = np.exp(2j * np.pi / 3)
    z = np.array([[1.0], [omega.conjugate()], [omega.conjugate() ** 2]])
    g3 = cube.to_group_basis(el(z))
    assert g3["s"][0, 0] == pytest.approx(1.0)
    assert abs(g3["s"][1, 0]) < 1e-12
    assert abs(g3["unit"]) < 1e-12


def test_pairing():
    f = cube.DualFunctional(m=2, n=2, f=np.array([[1.0, 1.0], [0.0, 0.0]]))
    z = np.array([[0.3, 0.4], [0.7, 0.6]])
    assert cube.pair(f, el(z)) == pytest.approx(0.7)
    # invariance under kernel shifts
    rng = np.random.default_rng(4)
    for _ in range(100):
        u = rng.normal(size=2)
        u -= u.mean()
        shifted = z + u[None, :]
        assert cube.pair(f, el(shifted)) == pytest.approx(
            cube.pair(f, el(z)), abs=1e-12)


def test_pair_rejects_non_member():
    bad = cube.DualFunctional(m=2, n=2, f=np.array([[1.0, 0.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        cube.pair(bad, el(np.zeros((2, 2))))


def test_positive_functional_against_positive_element():
    rng = np.random.default_rng(5)
    states = cube.vertex_states(2, 3)
    for _ in range(100):
        z = rng.normal(size=(3, 2))
        e = el(z)
        if not cube.is_positive(e):
            continue
        for f in states:
            assert cube.pair(f, e).real >= -1e-9


def test_vertex_states():
    assert len(cube.vertex_states(1, 2)) == 2
    assert len(cube.vertex_states(2, 2)) == 4
    vs = cube.vertex_states(3, 3)
    assert len(vs) == 27
    for f in vs:
        assert f.is_state()
    with pytest.raises(ValueError):
        cube.vertex_states(30, 3)


def test_dual_functional_membership():
    good = cube.DualFunctional(m=2, n=2, f=np.array([[0.2, 0.9], [0.8, 0.1]]))
    assert good.is_member()
    assert good.is_state()
    neg = cube.DualFunctional(m=1, n=2, f=np.array([[1.5], [-0.5]]))
    assert neg.is_member() and not neg.is_positive_functional()


def test_json_round_trip():
    e = el(np.array([[1.0 + 2j, 0.0], [3.0, -1j]]))
    back = cube.CubeElement.from_json(e.to_json())
    assert np.allclose(back.z, e.z)
