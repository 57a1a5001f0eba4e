import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from calibra.errors import DimMismatch, NotHalfDim, UnsupportedAmbient
from calibra.forms import OrientedPlane, coordinate_plane, evaluate
from calibra.holonomy import complex_structure, holomorphic_volume, kahler_power
from calibra.octonion import cross7, triple_cross
from calibra.planes import (
    CLASS_TOL,
    AngleList,
    canonical_frame,
    characterising_angles,
    classify,
    j_invariance_defect,
    kahler_angles,
    principal_angles,
    psi_angles,
    random_plane,
    random_rotation,
    slag_plane,
    upsilon_value,
)

seeds = st.integers(0, 2**31)


def admissible_theta(rng, n):
    """Random characterising angles in the admissible range."""
    head = np.sort(rng.uniform(0.0, np.pi / 2, n - 1)) if n > 1 else np.zeros(0)
    lo = head[-1] if n > 1 else 0.0
    last = rng.uniform(lo, np.pi - lo)
    return np.concatenate([head, [last]])


def _same_oriented_plane(A, B, tol=1e-10):
    M = A.basis @ B.basis.T
    return np.max(np.abs(M @ M.T - np.eye(len(M)))) < tol and np.linalg.det(M) > 0


# principal angles ------------------------------------------------------------

def test_principal_angles_identical():
    P = coordinate_plane(4, [1, 2])
    assert principal_angles(P, P).angles == (0.0, 0.0)


def test_principal_angles_rotated():
    E = np.eye(4)
    P = coordinate_plane(4, [1, 2])
    for t in (0.1, 0.7, 1.4):
        Q = OrientedPlane([E[0], np.cos(t) * E[1] + np.sin(t) * E[2]])
        a = principal_angles(P, Q).as_array()
        assert np.allclose(a, [0.0, t], atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), seeds)
def test_principal_angles_symmetric(n, seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, n))
    P, Q = random_plane(rng, n, k), random_plane(rng, n, k)
    assert np.allclose(principal_angles(P, Q).as_array(), principal_angles(Q, P).as_array(),
                       atol=1e-12)


def test_dim_mismatch():
    with pytest.raises(DimMismatch):
        principal_angles(coordinate_plane(4, [1, 2]), coordinate_plane(4, [1]))
    with pytest.raises(NotHalfDim):
        characterising_angles(coordinate_plane(5, [1, 2]), coordinate_plane(5, [3, 4]))


# characterising angles --------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), seeds)
def test_characterising_angles_of_slag_planes(n, seed):
    rng = np.random.default_rng(seed)
    th = admissible_theta(rng, n)
    got = characterising_angles(slag_plane(np.zeros(n)), slag_plane(th)).as_array()
    assert np.allclose(got, th, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), seeds)
def test_psi_rule(n, seed):
    rng = np.random.default_rng(seed)
    P, Q = random_plane(rng, 2 * n, n), random_plane(rng, 2 * n, n)
    th = characterising_angles(P, Q).as_array()
    psi = psi_angles(P, Q).as_array()
    want = th.copy()
    want[-1] = np.pi - th[-1]
    assert np.allclose(psi, want, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), seeds)
def test_characterising_ranges_and_principal_prefix(n, seed):
    rng = np.random.default_rng(seed)
    P, Q = random_plane(rng, 2 * n, n), random_plane(rng, 2 * n, n)
    th = characterising_angles(P, Q).as_array()
    al = principal_angles(P, Q).as_array()
    assert np.allclose(th[:-1], al[:-1], atol=1e-10)
    assert np.all(np.diff(th[:-1]) >= 0) and np.all(th[:-1] <= np.pi / 2 + 1e-12)
    if n > 1:
        assert th[-2] - 1e-12 <= th[-1] <= np.pi - th[-2] + 1e-12


def test_characterising_angles_self():
    rng = np.random.default_rng(0)
    P = random_plane(rng, 6, 3)
    assert np.allclose(characterising_angles(P, P).as_array(), 0, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), seeds)
def test_canonical_frame_reconstruction(n, seed):
    rng = np.random.default_rng(seed)
    P, Q = random_plane(rng, 2 * n, n), random_plane(rng, 2 * n, n)
    th, E = canonical_frame(P, Q)
    assert np.max(np.abs(E @ E.T - np.eye(2 * n))) < 1e-10
    P2 = OrientedPlane(E[:n], check=False)
    Q2 = OrientedPlane(np.cos(th)[:, None] * E[:n] + np.sin(th)[:, None] * E[n:], check=False)
    assert _same_oriented_plane(P, P2)
    assert _same_oriented_plane(Q, Q2)
    assert np.allclose(characterising_angles(P2, Q2).as_array(), th, atol=1e-9)
    assert np.allclose(characterising_angles(P, Q).as_array(), th, atol=1e-9)


def test_degenerate_right_angles():
    # theta_{n-1} = theta_n = pi/2: R^2 and i R^2
    th = characterising_angles(slag_plane([0, 0]), slag_plane([np.pi / 2, np.pi / 2]))
    assert np.allclose(th.as_array(), [np.pi / 2, np.pi / 2], atol=1e-12)


# Kahler angles -----------------------------------------------------------------

def test_kahler_angles_complex_and_lagrangian():
    E = np.eye(6)
    J = complex_structure(3)
    P = OrientedPlane([E[0], J @ E[0], E[2], J @ E[2]])
    assert np.allclose(kahler_angles(P).as_array(), 0, atol=1e-12)
    L = OrientedPlane([E[0], E[2]])
    assert np.allclose(kahler_angles(L).as_array(), np.pi / 2, atol=1e-12)
    R4 = coordinate_plane(8, [1, 3, 5, 7])
    assert np.allclose(kahler_angles(R4).as_array(), np.pi / 2, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 4), seeds)
def test_kahler_power_is_product_of_cosines(n, seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, n + 1))
    P = random_plane(rng, 2 * n, 2 * k)
    th = kahler_angles(P).as_array()
    val = evaluate(kahler_power(n, k), P.basis)
    assert abs(val - np.prod(np.cos(th))) < 1e-10


def test_wirtinger_bound_on_random_planes():
    rng = np.random.default_rng(1)
    for n, k in ((2, 1), (3, 1), (3, 2), (4, 2)):
        A = rng.standard_normal((20000, 2 * n, 2 * k))
        Q, R = np.linalg.qr(A)
        F = np.swapaxes(Q, 1, 2)
        vals = evaluate(kahler_power(n, k), F)
        assert np.max(vals) <= 1 + 1e-12


def test_upsilon_bound_and_lagrangian_equality():
    rng = np.random.default_rng(2)
    for n in (2, 3, 4):
        for _ in range(200):
            P = random_plane(rng, 2 * n, n)
            ups = upsilon_value(P)
            assert abs(ups) <= 1 + 1e-12
        # Lagrangian planes: U(n) images of R^n attain equality
        for _ in range(50):
            A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            U, _ = np.linalg.qr(A)
            B = np.zeros((n, 2 * n))
            B[:, 0::2] = U.real.T
            B[:, 1::2] = U.imag.T
            L = OrientedPlane(B)
            assert classify(L).defects["omega"] < CLASS_TOL
            assert abs(abs(upsilon_value(L)) - 1) < 1e-12


def test_j_invariance():
    E = np.eye(4)
    assert j_invariance_defect(OrientedPlane([E[0], E[1]])) < 1e-15
    assert j_invariance_defect(OrientedPlane([E[0], E[2]])) > 0.5


# classification ------------------------------------------------------------------

def test_classify_associative_and_coassociative():
    E = np.eye(7)
    c = classify(OrientedPlane(E[:3]))
    assert c.label == "associative" and c.defects["associator"] == 0.0
    c = classify(OrientedPlane(E[3:]))
    assert c.label == "coassociative"
    assert c.defects["phi_restricted"] == 0.0


def test_classify_generated_g2_planes():
    rng = np.random.default_rng(3)
    u, v = np.linalg.qr(rng.standard_normal((7, 2)))[0].T
    assert classify(OrientedPlane([u, v, cross7(u, v)])).label == "associative"
    assert classify(random_plane(rng, 7, 3)).label == "generic"


def test_classify_cayley():
    rng = np.random.default_rng(4)
    x, y, z = np.linalg.qr(rng.standard_normal((8, 3)))[0].T
    P = OrientedPlane(np.array([x, y, z, triple_cross(x, y, z)]), check=False)
    c = classify(P)
    assert c.label == "cayley"
    assert c.values["Phi"] < 0
    assert classify(-P).values["Phi"] > 0
    assert classify(-P).defects["tau"] == pytest.approx(c.defects["tau"], abs=1e-15)
    assert classify(random_plane(rng, 8, 4)).label == "generic"


def test_classify_special_lagrangian_phase():
    c = classify(slag_plane([1.0, 1.2, np.pi - 2.2]))
    assert c.label == "special_lagrangian"
    assert c.phase == pytest.approx(np.pi)
    assert classify(slag_plane([0.3, -0.3])).phase == 0.0
    assert classify(slag_plane([0.3, 0.5])).label == "lagrangian"


def test_classify_complex():
    E = np.eye(8)
    J = complex_structure(4)
    c = classify(OrientedPlane([E[0], J @ E[0], E[4], J @ E[4]]))
    assert c.label == "complex"


def test_classify_orientation_stability():
    rng = np.random.default_rng(5)
    for n in (2, 3):
        P = random_plane(rng, 2 * n, n)
        a, b = classify(P), classify(-P)
        assert a.label == b.label
        for key in a.defects:
            assert a.defects[key] == pytest.approx(b.defects[key], abs=1e-14)
        assert a.values["re_upsilon"] == pytest.approx(-b.values["re_upsilon"], abs=1e-14)


def test_classify_unsupported():
    with pytest.raises(UnsupportedAmbient):
        classify(coordinate_plane(5, [1, 2]))


def test_slag_plane_examples():
    assert np.array_equal(slag_plane([0, 0, 0]).basis, np.eye(6)[0::2])
    L = slag_plane([0.4])
    assert np.allclose(L.basis, [[np.cos(0.4), np.sin(0.4)]])
    re, _ = holomorphic_volume(3)
    th = np.array([0.2, 0.9, -0.4])
    assert abs(evaluate(re, slag_plane(th).basis) - np.cos(th.sum())) < 1e-14


def test_rotation_invariance_of_angles():
    rng = np.random.default_rng(6)
    P, Q = random_plane(rng, 6, 3), random_plane(rng, 6, 3)
    R = random_rotation(rng, 6)
    a = characterising_angles(P, Q).as_array()
    b = characterising_angles(P.transformed(R), Q.transformed(R)).as_array()
    assert np.allclose(a, b, atol=1e-10)


def test_anglelist_container():
    a = AngleList((0.1, np.float64(0.2)))
    assert a.sum() == pytest.approx(0.3)
    assert list(a) == [0.1, 0.2] and len(a) == 2 and isinstance(a[1], float)
