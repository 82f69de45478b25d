"""End-to-end acceptance suite.

Each test prints one ``ACCEPTANCE <k>: PASS|FAIL`` line (visible with
``pytest -s`` or in captured output on failure) and asserts the criterion.
Derived reference values are recomputed by independent oracles inside this
file wherever the criterion calls for one.
"""

import time
from itertools import product as iproduct

import numpy as np
import pytest

from nccube import approx, bounds, boxes, cube, npa, steering
from nccube.linprog import LinearProgram, lp_solve

SQRT2 = np.sqrt(2.0)


def report(k, ok, detail):
    print(f"ACCEPTANCE {k}: {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, detail


def test_acceptance_1_chsh_classical_bound():
    t = bounds.chsh_functional()
    t0 = time.perf_counter()
    value = bounds.classical_bound(t)["value"]
    elapsed = time.perf_counter() - t0
    # independent oracle: brute force over all 16 strategy pairs
    oracle = max(sum(t.t[g[x], h[y], x, y] for x in range(2) for y in range(2))
                 for g in iproduct(range(2), repeat=2)
                 for h in iproduct(range(2), repeat=2))
    ok = value == 2.0 and oracle == 2.0 and elapsed < 0.1
    report(1, ok, f"classical CHSH bound {value} (oracle {oracle}), "
                  f"{elapsed * 1e3:.1f} ms")


def test_acceptance_2_chsh_tsirelson_bracket():
    t0 = time.perf_counter()
    upper = npa.npa_bound(bounds.chsh_functional(), level=1)
    lower = bounds.see_saw_lower_bound(bounds.chsh_functional(),
                                       restarts=20, seed=0)["value"]
    elapsed = time.perf_counter() - t0
    ok = (abs(upper - 2 * SQRT2) <= 1e-4
          and lower >= 2 * SQRT2 - 1e-4
          and elapsed < 10)
    report(2, ok, f"bracket [{lower:.7f}, {upper:.7f}] around "
                  f"2*sqrt(2) = {2 * SQRT2:.7f}, {elapsed:.2f} s")


def test_acceptance_3_pr_box_separation():
    t0 = time.perf_counter()
    pr = boxes.pr_box()
    ns = boxes.is_nonsignalling(pr, 1e-12)
    lhv = bounds.lhv_membership(pr)
    sep_gap = None
    if not lhv["member"]:
        f = lhv["functional"]
        sep_gap = f.value(pr) - bounds.classical_bound(f)["value"]
    verdict = npa.npa_feasible(pr, level=1)
    elapsed = time.perf_counter() - t0
    ok = (ns["ok"] and ns["max_violation"] < 1e-12
          and not lhv["member"] and sep_gap is not None
          and sep_gap >= 2.0 - 1e-6
          and not verdict.feasible and verdict.margin <= -1e-3
          and elapsed < 10)
    report(3, ok, f"nonsignalling (viol {ns['max_violation']:.1e}), "
                  f"LHV separated with gap {sep_gap}, "
                  f"level-1 margin {verdict.margin:.4f}, {elapsed:.2f} s")


def _bisect(flip, lo, hi, iters=14):
    """Assumes flip(lo) is True and flip(hi) is False; returns the boundary."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if flip(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_acceptance_4_isotropic_thresholds():
    t0 = time.perf_counter()
    v_lhv = _bisect(
        lambda v: bounds.lhv_membership(boxes.isotropic_box(v))["member"],
        0.3, 0.7)
    v_npa = _bisect(
        lambda v: npa.npa_feasible(boxes.isotropic_box(v), level=1).feasible,
        0.6, 0.8)
    elapsed = time.perf_counter() - t0
    ok = (abs(v_lhv - 0.5) <= 1e-3
          and abs(v_npa - 1 / SQRT2) <= 1e-3
          and elapsed < 60)
    report(4, ok, f"LHV flip at v = {v_lhv:.5f} (target 0.5), "
                  f"level-1 flip at v = {v_npa:.5f} "
                  f"(target {1 / SQRT2:.5f}), {elapsed:.1f} s")


def test_acceptance_5_approximation():
    t0 = time.perf_counter()
    r = approx.tsirelson_two_qubit()
    expected_N = {0.5: 5, 0.2: 8, 0.1: 10}
    ok = True
    details = []
    for eps, N_want in expected_N.items():
        out = approx.approximate(r, eps)
        repaired = 16 * np.sin(np.pi / (4 * out["N"])) ** 2
        good = (out["N"] == N_want and out["distance"] <= eps
                and out["distance"] <= repaired)
        ok = ok and good
        details.append(f"eps={eps}: N={out['N']} "
                       f"dist={out['distance']:.4f} (bound {repaired:.4f})")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 30
    report(5, ok, "; ".join(details) + f", {elapsed:.2f} s")


def _lp_positive_oracle(e):
    """Independent positivity oracle: LP feasibility of a kernel shift."""
    imcol = e.z.imag.mean(axis=0)
    if np.max(np.abs(e.z.imag - imcol[None, :])) > 1e-10:
        return False
    if abs(imcol.sum()) > 1e-10:
        return False
    n, m = e.n, e.m
    nv = m + n * m
    rows, rhs = [], []
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


def test_acceptance_6_cube_positivity_oracle():
    rng = np.random.default_rng(6)
    disagree = 0
    for _ in range(1000):
        m = int(rng.integers(1, 5))
        n = int(rng.integers(2, 5))
        if rng.random() < 0.5:
            z = np.round(rng.normal(size=(n, m)), 2).astype(complex)
        else:
            z = np.round(rng.normal(size=(n, m)), 2) \
                + 1j * np.round(rng.normal(scale=0.3, size=(n, m)), 2)
        e = cube.CubeElement(m=m, n=n, z=z)
        if cube.is_positive(e) != _lp_positive_oracle(e):
            disagree += 1
    report(6, disagree == 0,
           f"closed form vs LP oracle on 1000 random elements, "
           f"{disagree} disagreements")


def _random_projective_realization(rng):
    def settings(d):
        out = []
        for _ in range(2):
            g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            q, _ = np.linalg.qr(g)
            P0 = np.outer(q[:, 0], q[:, 0].conj())
            out.append([P0, np.eye(d) - P0])
        return out

    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi /= np.linalg.norm(psi)
    return boxes.QuantumRealization(dA=2, dB=2, rho=np.outer(psi, psi.conj()),
                                    E=settings(2), F=settings(2))


def test_acceptance_7_npa_certificate_soundness():
    rng = np.random.default_rng(7)
    prob = npa.build_level(2, 2, 2)
    worst_resid = 0.0
    worst_eig = 0.0
    all_feasible = True
    for _ in range(20):
        r = _random_projective_realization(rng)
        mm = npa.moment_matrix_from_realization(r, 2)
        chk = npa.check_moment_matrix(prob, mm, tol=1e-10)
        worst_resid = max(worst_resid, chk["max_class_spread"],
                          chk["identity_error"])
        worst_eig = min(worst_eig, chk["min_eigenvalue"])
        box = boxes.box_from_quantum(r)
        for level in (1, 2):
            if not npa.npa_feasible(box, level=level).feasible:
                all_feasible = False
    ok = worst_resid <= 1e-10 and worst_eig >= -1e-10 and all_feasible
    report(7, ok, f"20 realizations: max residual {worst_resid:.2e}, "
                  f"min eigenvalue {worst_eig:.2e}, "
                  f"levels 1-2 all feasible: {all_feasible}")


def _random_lhs_assemblage(rng, m=2, n=2, d=2, terms=4):
    """Explicit LHS mixture of deterministic responses and random states."""
    responses = list(iproduct(range(n), repeat=m))
    weights = rng.dirichlet(np.ones(terms))
    sigma = [[np.zeros((d, d), dtype=complex) for _ in range(n)]
             for _ in range(m)]
    for w in weights:
        g = responses[rng.integers(len(responses))]
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        v /= np.linalg.norm(v)
        state = np.outer(v, v.conj())
        for x in range(m):
            sigma[x][g[x]] = sigma[x][g[x]] + w * state
    return steering.Assemblage(m=m, n=n, d=d, sigma=sigma)


def test_acceptance_8_steering():
    F = steering.zx_functional()
    closed = steering.lhs_bound(F)
    via_sdp = steering.lhs_bound_sdp(F)
    qb = steering.assemblage_bound(F)
    ratio = steering.steering_violation(F)["ratio"]
    rejected = not steering.lhs_membership(
        steering.phi_plus_zx_assemblage())["member"]
    rng = np.random.default_rng(8)
    accepted = sum(
        steering.lhs_membership(_random_lhs_assemblage(rng))["member"]
        for _ in range(100))
    ok = (abs(closed - SQRT2) <= 1e-6 and abs(via_sdp - SQRT2) <= 1e-6
          and abs(qb - 2.0) <= 1e-4 and abs(ratio - SQRT2) <= 1e-3
          and rejected and accepted == 100)
    report(8, ok, f"lhs {closed:.7f} / sdp {via_sdp:.7f}, quantum {qb:.5f}, "
                  f"ratio {ratio:.5f}, steered assemblage rejected: "
                  f"{rejected}, {accepted}/100 LHS mixtures accepted")


def test_acceptance_9_bound_properties():
    rng = np.random.default_rng(9)
    e = bounds.unit_functional()
    ok = True
    worst = {"unit": 0.0, "hom": 0.0, "sub": 0.0, "mono": 0.0}
    assert abs(bounds.n_bound(e, "classical") - 1.0) <= 1e-9
    for _ in range(100):
        t = rng.normal(size=(2, 2, 2, 2))
        v = bounds.BellFunctional(m=2, n=2, t=t)
        w = bounds.BellFunctional(m=2, n=2, t=rng.normal(size=(2, 2, 2, 2)))
        alpha = float(rng.uniform(0, 3))
        nv = bounds.n_bound(v, "classical")
        worst["hom"] = max(worst["hom"], abs(
            bounds.n_bound(bounds.BellFunctional(m=2, n=2, t=alpha * t),
                           "classical") - alpha * nv))
        s = bounds.BellFunctional(m=2, n=2, t=v.t + w.t)
        worst["sub"] = max(worst["sub"],
                           bounds.n_bound(s, "classical")
                           - bounds.n_bound(v, "classical")
                           - bounds.n_bound(w, "classical"))
        worst["mono"] = max(worst["mono"],
                            nv - bounds.n_bound(v, "quantum-level-1"))
    ok = (worst["hom"] <= 1e-9 and worst["sub"] <= 1e-7
          and worst["mono"] <= 1e-6)
    report(9, ok, f"unit ok, homogeneity residual {worst['hom']:.1e}, "
                  f"subadditivity residual {worst['sub']:.1e}, "
                  f"classical-vs-level-1 excess {worst['mono']:.1e}")


def test_acceptance_10_published_example_audit():
    """Audit of the published 2x2 all-ones example.

    With e1, e2 the computational basis and f1, f2 its 45-degree rotation,
    A_i = |e_i><e_i| / 2 and B_j = |f_j><f_j| / 2 give
    Tr(A_i B_j) = |<e_i|f_j>|^2 / 4 = 1/8 for every i, j — not sqrt(2)/8 as
    published — and the all-ones functional has quantum and classical bounds
    both equal to 4, so its violation ratio is 1, not >= sqrt(2).
    """
    e1 = np.array([1.0, 0.0])
    e2 = np.array([0.0, 1.0])
    f1 = np.array([SQRT2 / 2, SQRT2 / 2])
    f2 = np.array([-SQRT2 / 2, SQRT2 / 2])
    A = [np.outer(v, v) / 2 for v in (e1, e2, e1, e2)]
    B = [np.outer(v, v) / 2 for v in (f1, f2, f1, f2)]
    vals = np.array([[np.trace(Ai @ Bj).real for Bj in B] for Ai in A])
    ones = bounds.all_ones_functional()
    classical = bounds.classical_bound(ones)["value"]
    quantum = npa.npa_bound(ones, level=1)
    ratio = quantum / classical
    ok = (np.max(np.abs(vals - 0.125)) <= 1e-12
          and classical == 4.0
          and abs(ratio - 1.0) <= 1e-6)
    report(10, ok, f"Tr(A_i B_j) = {vals[0, 0]:.6f} for all i,j "
                   f"(published value sqrt(2)/8 = {SQRT2 / 8:.6f} is not "
                   f"reproduced), all-ones ratio {ratio:.8f}")
