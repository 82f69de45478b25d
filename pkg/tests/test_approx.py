import numpy as np
import pytest

from nccube import approx, boxes


def chsh_value(box):
    return sum((-1.0) ** ((a ^ b) + x * y) * box.p[a, b, x, y]
               for a in range(2) for b in range(2)
               for x in range(2) for y in range(2))


def random_canonical(rng):
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi /= np.linalg.norm(psi)
    return approx.TwoQubitRealization(
        psi=psi, alpha=rng.uniform(0, np.pi / 2),
        beta=rng.uniform(0, np.pi / 2))


def test_realization_validation():
    with pytest.raises(ValueError):
        approx.TwoQubitRealization(psi=np.ones(4), alpha=0.0, beta=0.0)
    with pytest.raises(ValueError):
        approx.TwoQubitRealization(psi=np.array([1, 0, 0, 0]),
                                   alpha=2.0, beta=0.0)


def test_universal_model_invariants():
    for N in range(1, 21):
        model = approx.universal_model(N)
        eye = np.eye(2 * N)
        for x in (1, 2):
            P0 = model.projectors[(0, x)]
            P1 = model.projectors[(1, x)]
            assert np.max(np.abs(P0 + P1 - eye)) == 0.0
            for P in (P0, P1):
                assert np.max(np.abs(P @ P - P)) < 1e-12
            assert np.trace(P0).real == pytest.approx(N)
    with pytest.raises(ValueError):
        approx.universal_model(0)


def test_universal_model_block_angles():
    m1 = approx.universal_model(1)
    # N=1: the single second-setting block sits at pi/2, i.e. |1><1|
    assert np.allclose(m1.projectors[(0, 2)], np.diag([0.0, 1.0]))
    m2 = approx.universal_model(2)
    assert m2.grid_angle(1) == pytest.approx(np.pi / 4)
    assert m2.grid_angle(2) == pytest.approx(np.pi / 2)


def test_choose_index():
    assert approx.choose_index(np.pi / 4, 10) == 5
    assert approx.choose_index(0.3, 10) == 2
    assert approx.choose_index(np.pi / 2, 7) == 7
    assert approx.choose_index(np.pi / 4, 5) == 2  # tie goes down
    with pytest.raises(ValueError):
        approx.choose_index(-0.1, 5)
    # nearest-grid guarantee
    for N in (3, 8, 13):
        h = np.pi / (2 * N)
        for angle in np.linspace(h, np.pi / 2, 40):
            k = approx.choose_index(angle, N)
            assert abs(k * h - angle) <= np.pi / (4 * N) + 1e-12


def test_box_from_realization_fixtures():
    det = approx.TwoQubitRealization(psi=np.array([1, 0, 0, 0]),
                                     alpha=0.0, beta=0.0)
    box = approx.box_from_realization(det)
    for x in (1, 2):
        for y in (1, 2):
            assert box.prob(0, 0, x, y) == pytest.approx(1.0)
    phip = np.array([1, 0, 0, 1]) / np.sqrt(2.0)
    corr = approx.box_from_realization(
        approx.TwoQubitRealization(psi=phip, alpha=0.0, beta=0.0))
    for x in (1, 2):
        for y in (1, 2):
            assert corr.prob(0, 0, x, y) == pytest.approx(0.5)
            assert corr.prob(0, 1, x, y) == pytest.approx(0.0)
    ts = approx.box_from_realization(approx.tsirelson_two_qubit())
    assert chsh_value(ts) == pytest.approx(2 * np.sqrt(2.0), abs=1e-10)


def test_box_from_realization_nonsignalling():
    rng = np.random.default_rng(0)
    for _ in range(20):
        box = approx.box_from_realization(random_canonical(rng))
        assert boxes.is_nonsignalling(box, 1e-10)["ok"]


def test_approximate_on_grid_is_exact():
    # N = ceil(pi/sqrt(0.2)) = 8; pi/4 = 2 * (pi/16) is on the grid
    r = approx.tsirelson_two_qubit()
    out = approx.approximate(r, 0.2)
    assert out["N"] == 8
    assert out["distance"] < 1e-10


def test_approximate_sweep():
    r = approx.tsirelson_two_qubit()
    for eps in (0.5, 0.2, 0.1, 0.05):
        out = approx.approximate(r, eps)
        assert out["N"] == int(np.ceil(np.pi / np.sqrt(eps)))
        assert out["distance"] <= eps
        assert out["distance"] <= 16 * np.sin(np.pi / (4 * out["N"])) ** 2


def test_approximate_rho_consistency():
    """The returned state must reproduce the returned box inside the model."""
    rng = np.random.default_rng(1)
    r = random_canonical(rng)
    out = approx.approximate(r, 0.5)
    N = out["N"]
    model = approx.universal_model(N)
    rho = out["rho"]
    assert abs(np.trace(rho).real - 1.0) < 1e-10
    assert np.min(np.linalg.eigvalsh(rho)) > -1e-10
    for x in (1, 2):
        for y in (1, 2):
            for a in range(2):
                for b in range(2):
                    op = np.kron(model.projectors[(a, x)],
                                 model.projectors[(b, y)])
                    val = float(np.trace(rho @ op).real)
                    assert val == pytest.approx(
                        out["box"].prob(a, b, x, y), abs=1e-10)


def test_approximate_random_realizations():
    rng = np.random.default_rng(2)
    for _ in range(20):
        r = random_canonical(rng)
        target = approx.box_from_realization(r)
        for eps in (0.5, 0.1):
            out = approx.approximate(r, eps)
            assert boxes.l1_distance(target, out["box"]) <= eps
            assert boxes.is_nonsignalling(out["box"], 1e-9)["ok"]


def test_approximate_eps_validation():
    r = approx.tsirelson_two_qubit()
    with pytest.raises(ValueError):
        approx.approximate(r, 0.0)
    with pytest.raises(ValueError):
        approx.approximate(r, 5.0)


def test_canonicalize_identity_on_canonical_input():
    rng = np.random.default_rng(3)
    r = random_canonical(rng)
    QA = [r.alice_projectors(1), r.alice_projectors(2)]
    QB = [r.bob_projectors(1), r.bob_projectors(2)]
    r2 = approx.canonicalize_realization(r.psi, QA, QB)
    assert r2.alpha == pytest.approx(r.alpha, abs=1e-9)
    assert r2.beta == pytest.approx(r.beta, abs=1e-9)
    assert boxes.l1_distance(approx.box_from_realization(r2),
                             approx.box_from_realization(r)) < 1e-9


def test_canonicalize_random_realizations_preserve_box():
    rng = np.random.default_rng(4)
    for _ in range(100):
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi /= np.linalg.norm(psi)

        def random_projective_settings():
            out = []
            for _ in range(2):
                g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
                q, _r = np.linalg.qr(g)
                P0 = np.outer(q[:, 0], q[:, 0].conj())
                out.append([P0, np.eye(2) - P0])
            return out

        QA = random_projective_settings()
        QB = random_projective_settings()
        # reference box straight from the raw projectors
        p = np.zeros((2, 2, 2, 2))
        for x in (1, 2):
            for y in (1, 2):
                for a in range(2):
                    for b in range(2):
                        M = np.kron(QA[x - 1][a], QB[y - 1][b])
                        p[a, b, x - 1, y - 1] = float(
                            (psi.conj() @ M @ psi).real)
        ref = boxes.Box(m=2, n=2, p=p)
        r = approx.canonicalize_realization(psi, QA, QB)
        assert 0.0 <= r.alpha <= np.pi / 2 + 1e-12
        assert 0.0 <= r.beta <= np.pi / 2 + 1e-12
        assert boxes.l1_distance(approx.box_from_realization(r), ref) < 1e-9


def test_canonicalize_rejects_non_projective():
    psi = np.array([1, 0, 0, 0], dtype=complex)
    Q = [[np.eye(2) * 0.5, np.eye(2) * 0.5]] * 2
    with pytest.raises(ValueError):
        approx.canonicalize_realization(psi, Q, Q)


def test_json_round_trip():
    r = approx.tsirelson_two_qubit()
    back = approx.TwoQubitRealization.from_json(r.to_json())
    assert np.allclose(back.psi, r.psi)
    assert back.alpha == r.alpha
