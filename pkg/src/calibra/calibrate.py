"""Comass estimation, torus forms, the angle criterion for pairs of planes and
Nance-type calibration witnesses."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy.optimize import brentq, minimize

from .errors import (
    ClosureFailed,
    DegenerateAngle,
    DimMismatch,
    NotTransverse,
    PolygonInfeasible,
    UnsupportedDim,
)
from .forms import Form, OrientedPlane, evaluate, make_form, pullback
from .octonion import quat_conj, quat_from_imag, quat_mul
from .planes import (
    AngleList,
    canonical_frame,
    characterising_angles,
    principal_angles,
    slag_plane,
)

ANGLE_TOL = 1e-9
TRANSVERSE_TOL = 1e-8
WITNESS_TOL = 1e-9


@dataclass(frozen=True)
class ComassReport:
    value: float
    argmax: OrientedPlane
    starts: int
    converged_fraction: float


@dataclass(frozen=True)
class NanceWitness:
    """w_j on the unit 2-sphere (imaginary quaternions), the unit imaginary
    quaternions u_j (as 3-vectors) and the assembled n-form on R^{2n}."""

    polygon: np.ndarray
    u: np.ndarray
    eta: Form
    theta: tuple


@dataclass(frozen=True)
class AngleReport:
    theta: AngleList
    psi: AngleList
    psi_sum: float
    minimizing: bool
    boundary: bool = False
    witness: NanceWitness | None = None
    eta: Form | None = None          # witness pulled back to the input coordinates
    witness_error: str | None = None


# comass ------------------------------------------------------------------

def _frame_values(T: np.ndarray, X: np.ndarray) -> np.ndarray:
    """eval of the form with antisymmetric tensor T on frames X (S, k, n)."""
    v = np.tensordot(X[:, 0], T, axes=([1], [0]))
    for a in range(1, X.shape[1]):
        v = np.einsum("si,si...->s...", X[:, a], v)
    return v


def _frame_gradient(T: np.ndarray, X: np.ndarray) -> np.ndarray:
    """d eval / d X for frames X of shape (S, k, n)."""
    S, k, n = X.shape
    G = np.empty_like(X)
    letters = "abcdefgh"[:k]
    for a in range(k):
        ops = [X[:, b] for b in range(k) if b != a]
        subs = ",".join(f"s{letters[b]}" for b in range(k) if b != a)
        spec = f"{letters},{subs}->s{letters[a]}" if subs else f"{letters}->{letters[a]}"
        if subs:
            G[:, a] = np.einsum(spec, T, *ops, optimize=True)
        else:
            G[:, a] = np.broadcast_to(T, (S, n))
    return G


def _reorthonormalize(X: np.ndarray) -> np.ndarray:
    """QR of each frame keeping its orientation (positive diagonal of R)."""
    Q, R = np.linalg.qr(np.swapaxes(X, -1, -2))
    d = np.sign(np.diagonal(R, axis1=-2, axis2=-1))
    d[d == 0] = 1.0
    return np.swapaxes(Q * d[:, None, :], -1, -2)


def _ascend(T, X, step0=0.1, min_step=1e-12, max_iter=3000):
    S = X.shape[0]
    vals = _frame_values(T, X)
    step = np.full(S, step0)
    active = np.ones(S, dtype=bool)
    converged = np.zeros(S, dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        Xa = X[idx]
        G = _frame_gradient(T, Xa)
        # project off the plane (tangent space of the Grassmannian)
        G = G - np.einsum("sak,sbk,sbj->saj", G, Xa, Xa)
        Xn = _reorthonormalize(Xa + step[idx, None, None] * G)
        vn = _frame_values(T, Xn)
        ok = vn > vals[idx]
        X[idx[ok]] = Xn[ok]
        vals[idx[ok]] = vn[ok]
        step[idx[ok]] *= 2.0
        step[idx[~ok]] *= 0.5
        done = step[idx] < min_step
        converged[idx[done]] = True
        active[idx[done]] = False
    return X, vals, converged


def comass(form: Form, starts: int = 100, seed: int = 0) -> ComassReport:
    """Estimate the comass of a constant form by multistart projected
    gradient ascent over oriented orthonormal k-frames.

    Each start is refined with step doubling on success and halving on
    failure until the step falls below 1e-12 (counted as converged) or an
    iteration cap is hit.
    """
    if form.k < 1:
        raise DimMismatch("comass needs degree >= 1")
    if starts < 1:
        raise ValueError("starts must be >= 1")
    n, k = form.n, form.k
    rng = np.random.default_rng(seed)
    T = form.tensor()
    X = _reorthonormalize(rng.standard_normal((starts, k, n)))
    X, vals, converged = _ascend(T, X)
    best = int(np.argmax(vals))
    # final polish of the best start with a fresh step
    Xb, vb, _ = _ascend(T, X[best:best + 1].copy(), step0=1e-2)
    P = OrientedPlane(Xb[0], check=False)
    return ComassReport(float(evaluate(form, P.basis)), P, starts,
                        float(converged.mean()))


# torus forms -------------------------------------------------------------

def _as_quaternions(u) -> np.ndarray:
    u = np.atleast_2d(np.asarray(u, dtype=float))
    if u.shape[1] == 3:
        return quat_from_imag(u)
    if u.shape[1] == 4:
        return u
    raise DimMismatch("quaternions are given as 3 imaginary or 4 full components")


def torus_value(u, theta) -> np.ndarray:
    """Re prod_j (cos theta_j + sin theta_j u_j) for theta of shape (..., n)."""
    U = _as_quaternions(u)
    theta = np.asarray(theta, dtype=float)
    prod = None
    for j in range(U.shape[0]):
        t = theta[..., j]
        f = np.cos(t)[..., None] * np.array([1.0, 0, 0, 0]) + np.sin(t)[..., None] * U[j]
        prod = f if prod is None else quat_mul(prod, f)
    return prod[..., 0]


def torus_form_max(u) -> float:
    """Maximum of Re prod (cos theta_j + sin theta_j u_j) over the n-torus.

    Dense grid (64 points per axis for n <= 3, 32 for n = 4) followed by
    local refinement from the ten best cells. Sampling the full torus covers
    orientation-reversed product frames as well.
    """
    U = _as_quaternions(u)
    n = U.shape[0]
    if n > 4 or n < 1:
        raise UnsupportedDim(f"torus forms supported for 1 <= n <= 4, got {n}")
    m = 64 if n <= 3 else 32
    axis = np.arange(m) * (2 * np.pi / m)
    one = np.array([1.0, 0, 0, 0])
    F = np.cos(axis)[None, :, None] * one + np.sin(axis)[None, :, None] * U[:, None, :]
    # partial products over the first n - 1 axes, then Re(a b) = <a, conj b>
    prod = np.ones((1, 4)) * one
    for j in range(n - 1):
        prod = quat_mul(prod[:, None, :], F[j][None, :, :]).reshape(-1, 4)
    vals = (prod @ (F[-1] * [1.0, -1.0, -1.0, -1.0]).T).ravel()
    top = np.argpartition(vals, -10)[-10:] if vals.size > 10 else np.arange(vals.size)
    top = top[np.argsort(vals[top])[::-1]]
    best = float(vals[top[0]])
    idx = np.stack(np.unravel_index(top, (m,) * n), axis=-1)
    grid = axis[idx]
    for i in range(len(top)):
        res = minimize(lambda t: -torus_value(U, t), grid[i], method="BFGS",
                       options={"gtol": 1e-12})
        best = max(best, float(-res.fun))
    return best


# spherical polygons and witnesses ----------------------------------------

def _increments(rho, theta):
    s2 = np.sin(rho) ** 2
    c = (np.cos(theta) - np.cos(rho) ** 2) / s2
    return np.arccos(np.clip(c, -1.0, 1.0))


def _rotate_to_standard(W: np.ndarray) -> np.ndarray:
    """Rotate so that w_1 = (0,0,1) and w_2 lies in {x = 0, y > 0}."""
    e3 = W[0] / np.linalg.norm(W[0])
    a = W[1] - (W[1] @ e3) * e3
    if np.linalg.norm(a) < 1e-14:
        a = np.cross(e3, [1.0, 0, 0])
        if np.linalg.norm(a) < 1e-8:
            a = np.cross(e3, [0, 1.0, 0])
    e2 = a / np.linalg.norm(a)
    e1 = np.cross(e2, e3)
    R = np.array([e1, e2, e3])      # rows: new axes, right-handed
    return W @ R.T


def spherical_polygon(theta) -> np.ndarray:
    """Points w_1..w_n on the unit sphere with d(w_j, w_{j+1 mod n}) = theta_j,
    placed on a common circle of colatitude rho.

    On a circle of colatitude rho the azimuthal step for a chord of length
    theta satisfies cos theta = cos^2 rho + sin^2 rho cos delta. Two closures
    are possible: the steps sum to 2 pi (circle centre inside the polygon),
    or the longest step equals the sum of the others (centre outside, the
    longest side is traversed backwards). The first is tried first; rho is
    found by bracketed root finding on [max theta / 2, pi / 2].
    """
    theta = np.asarray(theta, dtype=float)
    n = theta.size
    if n < 2:
        raise PolygonInfeasible("need at least two sides")
    if np.any(theta <= 0) or np.any(theta >= np.pi):
        raise PolygonInfeasible("sides must lie in (0, pi)")
    jmax = int(np.argmax(theta))
    others = theta.sum() - theta[jmax]
    if theta[jmax] > others + 1e-12:
        raise PolygonInfeasible(
            f"largest side {theta[jmax]:.6g} exceeds the sum of the others {others:.6g}")
    if theta.sum() > 2 * np.pi + 1e-12:
        raise PolygonInfeasible("perimeter exceeds 2 pi")
    lo, hi = theta[jmax] / 2, np.pi / 2

    def g_inside(rho):
        return _increments(rho, theta).sum() - 2 * np.pi

    def g_outside(rho):
        d = _increments(rho, theta)
        return d[jmax] - (d.sum() - d[jmax])

    signs = np.ones(n)
    if abs(g_outside(hi)) < 1e-12 or abs(g_inside(hi)) < 1e-12:
        rho = hi
        if abs(g_outside(hi)) < 1e-12:
            signs[jmax] = -1.0
    elif g_inside(lo) >= 0 >= g_inside(hi):
        rho = brentq(g_inside, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    elif g_outside(lo) >= 0 >= g_outside(hi):
        rho = brentq(g_outside, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        signs[jmax] = -1.0
    else:
        raise ClosureFailed("no sign change in either closure bracket")
    delta = _increments(rho, theta) * signs
    phi = np.concatenate([[0.0], np.cumsum(delta[:-1])])
    W = np.stack([np.sin(rho) * np.cos(phi), np.sin(rho) * np.sin(phi),
                  np.full(n, np.cos(rho))], axis=1)
    W = _rotate_to_standard(W)
    d = np.arccos(np.clip(np.einsum("ij,ij->i", W, np.roll(W, -1, axis=0)), -1, 1))
    err = np.max(np.abs(d - theta))
    if err > 1e-10:
        raise ClosureFailed(f"side lengths reproduced only to {err:.3g}")
    return W


def nance_form(u) -> Form:
    """Re((dx_1 + u_1 dy_1) ^ ... ^ (dx_n + u_n dy_n)) on C^n (interleaved).

    The coefficient of the monomial choosing dy_j for j in S is the real part
    of the ordered product of the u_j, j in S.
    """
    U = _as_quaternions(u)
    n = U.shape[0]
    terms = []
    for choice in product((0, 1), repeat=n):
        q = np.array([1.0, 0, 0, 0])
        idx = []
        for j, c in enumerate(choice):
            idx.append(2 * j + 1 + c)
            if c:
                q = quat_mul(q, U[j])
        if q[0] != 0.0:
            terms.append((idx, float(q[0])))
    return make_form(2 * n, n, terms)


def nance_witness(theta) -> NanceWitness:
    """Calibration witness for R^n and P(theta) built from a spherical polygon.

    With w_j unit imaginary quaternions, w_j conj(w_{j+1}) = cos theta_j +
    sin theta_j u_j; the telescoping product is 1, so the assembled form takes
    the value 1 on both planes. When sin theta_j is below 1e-12, u_j is
    unconstrained and the previous u (or i for j = 1) is used.
    """
    theta = np.asarray(theta, dtype=float)
    W = spherical_polygon(theta)
    n = theta.size
    U = np.zeros((n, 3))
    for j in range(n):
        q = quat_mul(quat_from_imag(W[j]), quat_conj(quat_from_imag(W[(j + 1) % n])))
        s = np.sin(theta[j])
        if s < 1e-12:
            U[j] = U[j - 1] if j > 0 else np.array([1.0, 0, 0])
        else:
            U[j] = q[1:] / s
            U[j] /= np.linalg.norm(U[j])
    eta = nance_form(U)
    v0 = evaluate(eta, np.eye(2 * n)[0::2])
    v1 = evaluate(eta, slag_plane(theta).basis)
    if abs(v0 - 1) > WITNESS_TOL or abs(v1 - 1) > WITNESS_TOL:
        raise DegenerateAngle(f"witness values {v0:.12g}, {v1:.12g}")
    return NanceWitness(W, U, eta, tuple(float(t) for t in theta))


def angle_theorem(P: OrientedPlane, Q: OrientedPlane,
                  want_witness: bool = False) -> AngleReport:
    """Decide whether the union of two transverse oriented n-planes in R^{2n}
    passes the angle criterion sum(psi) >= pi, psi the characterising angles
    of (P, -Q).

    With ``want_witness`` a Nance calibration is built in the canonical frame
    of (P, Q) and pulled back, so ``report.eta`` takes the value 1 on both P
    and Q.
    """
    if P.ambient_dim != Q.ambient_dim or P.dim != Q.dim:
        raise DimMismatch("planes must share dimension and ambient space")
    alpha = principal_angles(P, Q)
    if alpha[0] <= TRANSVERSE_TOL:
        raise NotTransverse(f"smallest principal angle {alpha[0]:.3g}")
    theta = characterising_angles(P, Q)
    psi = characterising_angles(P, -Q)
    s = psi.sum()
    minimizing = s >= np.pi - ANGLE_TOL
    boundary = abs(s - np.pi) <= ANGLE_TOL
    witness = eta = err = None
    if want_witness and minimizing:
        th, E = canonical_frame(P, Q)
        n = P.dim
        try:
            witness = nance_witness(th)
            A = np.empty_like(E)
            A[0::2] = E[:n]
            A[1::2] = E[n:]
            eta = pullback(witness.eta, A)
        except (PolygonInfeasible, ClosureFailed, DegenerateAngle) as exc:
            err = f"{type(exc).__name__}: {exc}"
    return AngleReport(theta, psi, float(s), bool(minimizing), bool(boundary),
                       witness, eta, err)
