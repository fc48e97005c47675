import numpy as np
import pytest

from conftest import random_problem

from nchodisk import (
    INFINITY,
    ContractViolation,
    NchoProblem,
    NotGenericError,
    Su11Element,
    apply_transcript,
    chordal_distance,
    decompose_pencil,
    decompose_quadratic_pencil,
    gauge_unitary,
    inverse_transcript,
    is_infinity,
    mobius_apply,
    normalize_a,
    positivity_margin,
    standard_ncho_problem,
    standardize_p2,
    transform_ab,
)


def random_group_element(rng, bmax=0.5):
    b = bmax * rng.uniform() * np.exp(2j * np.pi * rng.uniform())
    a = np.sqrt(1.0 + abs(b) ** 2) * np.exp(2j * np.pi * rng.uniform())
    return Su11Element(a, b)


def test_group_invariants():
    rng = np.random.default_rng(1)
    for _ in range(20):
        g = random_group_element(rng)
        assert abs(abs(g.a) ** 2 - abs(g.b) ** 2 - 1.0) < 1e-12
        h = random_group_element(rng)
        gh = g.compose(h)
        assert abs(abs(gh.a) ** 2 - abs(gh.b) ** 2 - 1.0) < 1e-12
        gi = g.compose(g.inverse())
        assert abs(gi.a - 1.0) < 1e-12 and abs(gi.b) < 1e-12


def test_group_rejects_bad_normalization():
    with pytest.raises(ContractViolation):
        Su11Element(1.0, 1.0)


def test_mobius_identity():
    g = Su11Element.identity()
    for z in (0.3, -0.2 + 0.4j, 2.0):
        assert mobius_apply(g, z) == z


def test_mobius_boost_at_zero():
    g = Su11Element.boost(0.7)
    assert abs(mobius_apply(g, 0.0) - np.tanh(0.7)) < 1e-14


def test_mobius_infinity_handling():
    g = Su11Element.boost(0.4)
    pole = -np.conj(g.a) / np.conj(g.b)
    assert is_infinity(mobius_apply(g, pole))
    img = mobius_apply(g, INFINITY)
    assert abs(img - g.a / np.conj(g.b)) < 1e-14
    rot = Su11Element.rotation(0.3)
    assert is_infinity(mobius_apply(rot, INFINITY))


def test_mobius_preserves_circle_and_disk():
    rng = np.random.default_rng(5)
    for _ in range(50):
        g = random_group_element(rng)
        z = np.exp(2j * np.pi * rng.uniform())
        assert abs(abs(mobius_apply(g, z)) - 1.0) < 1e-12
        w = 0.95 * rng.uniform() * np.exp(2j * np.pi * rng.uniform())
        assert abs(mobius_apply(g, w)) < 1.0


def test_chordal_distance():
    assert chordal_distance(INFINITY, INFINITY) == 0.0
    assert chordal_distance(0.0, INFINITY) == 1.0
    assert chordal_distance(1.0, 1.0) == 0.0


def test_transform_ab_identity():
    a = np.diag([2.0, 1.0]).astype(complex)
    b = np.array([[0.1, 0.2j], [0.0, 0.1]])
    ga, gb = transform_ab(Su11Element.identity(), a, b)
    assert np.max(np.abs(ga - a)) < 1e-15
    assert np.max(np.abs(gb - b)) < 1e-15


def test_transform_ab_hyperbolic_closed_form():
    # symmetric coupling pair: closed form for both boost directions
    g_coup = 0.25
    a = np.eye(2, dtype=complex)
    b = g_coup * np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    theta = np.arctanh(2.0 * g_coup)
    f = 1.0 / np.sqrt(1.0 - 4.0 * g_coup**2)
    for sign, gel in (
        (+1, Su11Element(np.cosh(theta / 2), np.sinh(theta / 2))),
        (-1, Su11Element(1j * np.cosh(theta / 2), -1j * np.sinh(theta / 2))),
    ):
        ga, gb = transform_ab(gel, a, b)
        expect_a = f * np.array([[1.0, -sign * 4 * g_coup**2], [-sign * 4 * g_coup**2, 1.0]])
        expect_b = g_coup * f * np.array([[-1.0, sign * 1.0], [sign * 1.0, -1.0]])
        assert np.max(np.abs(ga - expect_a)) < 1e-12
        assert np.max(np.abs(gb - expect_b)) < 1e-12


def test_transform_ab_functorial():
    rng = np.random.default_rng(8)
    for _ in range(10):
        g1, g2 = random_group_element(rng), random_group_element(rng)
        prob = random_problem(rng, p=2)
        a2, b2 = transform_ab(g2, *transform_ab(g1, prob.A, prob.B))
        a12, b12 = transform_ab(g2.compose(g1), prob.A, prob.B)
        assert np.max(np.abs(a2 - a12)) < 1e-10
        assert np.max(np.abs(b2 - b12)) < 1e-10


def test_transform_ab_circle_covariance():
    rng = np.random.default_rng(12)
    prob = random_problem(rng, p=2)
    g = random_group_element(rng)
    ga, gb = transform_ab(g, prob.A, prob.B)
    for _ in range(8):
        z = np.exp(2j * np.pi * rng.uniform())
        lhs = gb * z + ga + gb.conj().T * np.conj(z)
        w = mobius_apply(g.inverse(), z)
        rhs = abs(-np.conj(g.b) * z + g.a) ** 2 * (
            prob.B * w + prob.A + prob.B.conj().T * np.conj(w)
        )
        assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_poles_move_by_mobius():
    rng = np.random.default_rng(21)
    for _ in range(8):
        prob = random_problem(rng, p=2)
        g = random_group_element(rng)
        dec = decompose_pencil(prob)
        ga, gb = transform_ab(g, prob.A, prob.B)
        dec_g = decompose_quadratic_pencil(ga, gb)
        # sphere multiset: finite roots plus infinity with deficiency multiplicity
        def sphere_roots(dec_, p):
            pts = list(dec_.poles) + [INFINITY] * (2 * p - dec_.degree)
            return pts

        images = [mobius_apply(g, al) for al in sphere_roots(dec, prob.p)]
        targets = sphere_roots(dec_g, prob.p)
        for img in images:
            d = min(chordal_distance(img, t) for t in targets)
            assert d < 1e-8


def test_gauge_unitary_examples():
    a = np.diag([2.0, 1.0]).astype(complex)
    b = 0.5 * np.array([[0, 1j], [-1j, 0]])
    c = np.zeros((2, 2))
    ua, ub, uc = gauge_unitary(np.eye(2), a, b, c)
    assert np.allclose(ua, a) and np.allclose(ub, b)
    # rows are the conjugated eigenvectors of the skew coupling: the gauge
    # diagonalizes it to (1/2) diag(1, -1)
    u = np.array([[1.0, 1j], [1.0, -1j]]) / np.sqrt(2.0)
    _, ub, _ = gauge_unitary(u, np.eye(2), b, c)
    assert np.max(np.abs(ub - np.diag([0.5, -0.5]))) < 1e-12
    with pytest.raises(ContractViolation):
        gauge_unitary(2.0 * np.eye(2), a, b, c)


def test_gauge_preserves_poles():
    rng = np.random.default_rng(31)
    prob = random_problem(rng, p=2)
    u = np.linalg.qr(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))[0]
    dec0 = decompose_pencil(prob)
    ua, ub, _ = gauge_unitary(u, prob.A, prob.B, prob.C0)
    dec1 = decompose_quadratic_pencil(ua, ub)
    for al in dec0.poles:
        assert min(abs(al - x) for x in dec1.poles) < 1e-10


def test_normalize_a_diagonal():
    a = np.diag([4.0, 1.0]).astype(complex)
    b = np.array([[0.1, 0.2], [0.3, 0.4]], dtype=complex)
    na, nb, _ = normalize_a(a, b, np.zeros((2, 2)))
    assert np.max(np.abs(na - np.eye(2))) < 1e-12
    d = np.diag([0.5, 1.0])
    assert np.max(np.abs(nb - d @ b @ d)) < 1e-12
    with pytest.raises(ContractViolation):
        normalize_a(np.diag([1.0, -1.0]), b, np.zeros((2, 2)))


def test_standardize_classical_family():
    prob = standard_ncho_problem(2.0, 2.0, 0.0, 0.5)
    std, transcript = standardize_p2(prob)
    dec = decompose_pencil(std)
    assert dec.zero_is_pole
    inner = [al for al in dec.poles if al != 0 and abs(al) < 1]
    assert len(inner) == 1
    assert abs(inner[0] - 0.5) < 1e-10  # alpha = 1/sqrt(beta*gamma)
    assert np.max(np.abs(std.A - np.eye(2))) < 1e-12
    assert np.max(np.abs(std.B[1, :])) < 1e-12
    assert abs(std.B[0, 0]) > 0
    assert 2 * abs(std.B[0, 0]) + abs(std.B[0, 1]) ** 2 < 1.0


def test_standardize_transcript_replay_and_inverse():
    rng = np.random.default_rng(17)
    for _ in range(6):
        prob = random_problem(rng, p=2)
        std, transcript = standardize_p2(prob)
        replay = apply_transcript(prob, transcript)
        for f in ("A", "B", "C0", "lam_coeff"):
            assert np.array_equal(getattr(replay, f), getattr(std, f))
        back = apply_transcript(std, inverse_transcript(transcript))
        for f in ("A", "B", "C0", "lam_coeff"):
            assert np.max(np.abs(getattr(back, f) - getattr(prob, f))) < 1e-10


def test_standardize_random_properties():
    rng = np.random.default_rng(23)
    for _ in range(10):
        prob = random_problem(rng, p=2)
        std, _ = standardize_p2(prob)
        assert np.max(np.abs(std.A - np.eye(2))) < 1e-9
        assert np.max(np.abs(std.B[1, :])) < 1e-9
        b1, b2 = std.B[0, 0], std.B[0, 1]
        assert abs(b1) > 1e-9
        assert 2 * abs(b1) + abs(b2) ** 2 < 1.0
        assert positivity_margin(std).margin > 0.0
        dec = decompose_pencil(std)
        inner = [al for al in dec.poles if al != 0 and abs(al) < 1]
        assert len(inner) == 1
        # chosen phase puts the inner pole on the positive real axis
        assert abs(inner[0].imag) < 1e-9 and inner[0].real > 0


def test_standardize_idempotent_on_standard_input():
    prob = standard_ncho_problem(2.0, 2.0, 0.0, 0.5)
    std, _ = standardize_p2(prob)
    std2, transcript2 = standardize_p2(std)
    for f in ("A", "B", "C0", "lam_coeff"):
        assert np.max(np.abs(getattr(std2, f) - getattr(std, f))) < 1e-10


def test_standardize_rejects_degenerate():
    prob = NchoProblem(p=2, mu=1.0, A=np.eye(2), B=np.zeros((2, 2)), C0=np.zeros((2, 2)))
    with pytest.raises(NotGenericError):
        standardize_p2(prob)
