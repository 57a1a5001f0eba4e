"""Angle invariants of planes and classification against the standard
calibrations."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import DimMismatch, NotHalfDim, UnsupportedAmbient
from .forms import OrientedPlane, evaluate
from .holonomy import (
    complex_structure,
    g2_phi,
    g2_star_phi,
    holomorphic_volume,
    kahler_form,
    kahler_power,
    spin7_phi,
)
from .octonion import associator, tau

CLASS_TOL = 1e-8

# order decides the label when several tests pass: most specific first
_LABEL_ORDER = ("special_lagrangian", "complex", "associative", "coassociative",
                "cayley", "lagrangian")


@dataclass(frozen=True)
class AngleList:
    """Angles in radians. ``kind`` records how they were produced."""

    angles: tuple[float, ...]
    kind: str = "principal"

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))

    def __iter__(self):
        return iter(self.angles)

    def __len__(self):
        return len(self.angles)

    def __getitem__(self, i):
        return self.angles[i]

    def sum(self) -> float:
        return float(sum(self.angles))

    def as_array(self) -> np.ndarray:
        return np.array(self.angles)


@dataclass(frozen=True)
class PlaneClass:
    label: str
    defects: dict = field(default_factory=dict)
    phase: float | None = None
    values: dict = field(default_factory=dict)


def _check_pair(P: OrientedPlane, Q: OrientedPlane) -> None:
    if P.ambient_dim != Q.ambient_dim or P.dim != Q.dim:
        raise DimMismatch(
            f"planes of dim {P.dim}, {Q.dim} in R^{P.ambient_dim}, R^{Q.ambient_dim}")


def _clipped_arccos(s):
    return np.arccos(np.clip(s, -1.0, 1.0))


def principal_angles(P: OrientedPlane, Q: OrientedPlane) -> AngleList:
    """Angles whose cosines are the singular values of the basis
    inner-product matrix, ascending.

    Sines come from the part of Q orthogonal to P and the angle is
    arctan2(sin, cos), which stays accurate for nearly coincident directions
    where arccos alone would lose half the digits.
    """
    _check_pair(P, Q)
    M = P.basis @ Q.basis.T
    c = np.linalg.svd(M, compute_uv=False)                   # descending
    R = Q.basis - M.T @ P.basis
    s = np.sort(np.linalg.svd(R, compute_uv=False))        # ascending
    s = np.concatenate([s, np.zeros(c.size - s.size)])[:c.size]
    ang = np.arctan2(np.clip(s, 0.0, 1.0), np.clip(c, 0.0, 1.0))
    return AngleList(tuple(np.sort(ang)), "principal")


def canonical_frame(P: OrientedPlane, Q: OrientedPlane):
    """Orthonormal frame putting an oriented pair of n-planes in R^{2n} in
    standard position.

    Returns ``(theta, E)`` where ``theta`` are the characterising angles and
    ``E`` is a ``(2n, 2n)`` array whose rows e_1..e_{2n} satisfy
    P = span(e_1..e_n) with that orientation and Q = span(cos t_j e_j +
    sin t_j e_{n+j}) with that orientation.

    Degenerate cases: repeated singular values take whatever singular vectors
    the SVD returns; when the largest principal angle is pi/2 the product of
    cosines is 0 and theta_n = pi/2 with no orientation flip.
    """
    _check_pair(P, Q)
    n = P.dim
    if P.ambient_dim != 2 * n:
        raise NotHalfDim(f"{n}-planes in R^{P.ambient_dim}")
    M = P.basis @ Q.basis.T
    U, s, Vt = np.linalg.svd(M)
    p = U.T @ P.basis            # rows are principal vectors of P
    q = Vt @ Q.basis             # matched principal vectors of Q
    if np.linalg.det(U) < 0:
        p[-1] = -p[-1]
    if np.linalg.det(Vt) < 0:
        q[-1] = -q[-1]
    cos = np.clip(np.einsum("ij,ij->i", p, q), -1.0, 1.0)
    # e_{n+j} from the Q vectors
    E = np.zeros((2 * n, 2 * n))
    E[:n] = p
    rows = []
    sin = np.zeros(n)
    for j in range(n):
        r = q[j] - cos[j] * p[j]
        sin[j] = nr = np.linalg.norm(r)
        rows.append(r / nr if nr > 1e-12 else None)
    basis = list(p)
    for j, r in enumerate(rows):
        if r is None:
            continue
        for b in basis:
            r = r - (r @ b) * b
        r = r / np.linalg.norm(r)
        E[n + j] = r
        basis.append(r)
    # fill directions where Q meets P (theta_j = 0 or pi)
    for j, r in enumerate(rows):
        if r is not None:
            continue
        for cand in np.eye(2 * n):
            c = cand.copy()
            for b in basis:
                c = c - (c @ b) * b
            if np.linalg.norm(c) > 0.5:
                c = c / np.linalg.norm(c)
                E[n + j] = c
                basis.append(c)
                break
    # rows of E were built so that q_j = cos_j p_j + sin_j e_{n+j}, sin_j >= 0
    theta = np.arctan2(sin, cos)
    return theta, E


def characterising_angles(P: OrientedPlane, Q: OrientedPlane) -> AngleList:
    """Angles theta_1..theta_n with theta_1..theta_{n-1} in [0, pi/2] and
    theta_{n-1} <= theta_n <= pi - theta_{n-1}.

    The first n-1 are principal angles; the last is the largest principal
    angle or its supplement, decided by the sign of det(<p_i, q_j>) in the
    given orientations.
    """
    _check_pair(P, Q)
    n = P.dim
    if P.ambient_dim != 2 * n:
        raise NotHalfDim(f"{n}-planes in R^{P.ambient_dim}")
    alpha = np.array(principal_angles(P, Q).angles)
    if np.linalg.det(P.basis @ Q.basis.T) < 0:
        alpha[-1] = np.pi - alpha[-1]
    return AngleList(tuple(alpha), "characterising")


def psi_angles(P: OrientedPlane, Q: OrientedPlane) -> AngleList:
    """Characterising angles of (P, -Q)."""
    return AngleList(characterising_angles(P, -Q).angles, "characterising")


def _restricted_omega(P: OrientedPlane) -> np.ndarray:
    if P.ambient_dim % 2:
        raise DimMismatch("ambient dimension must be even")
    J = complex_structure(P.ambient_dim // 2)
    # omega(u, v) = <Ju, v>
    return (P.basis @ J.T) @ P.basis.T


def kahler_angles(P: OrientedPlane) -> AngleList:
    """Kahler angles theta_1 <= ... <= theta_k of a 2k-plane in C^n.

    The restriction of omega to P has singular values cos theta_j, each
    twice. When omega^k/k! is negative on the oriented frame the last angle
    is replaced by its supplement, so that omega^k/k! = prod cos theta_j.
    """
    if P.ambient_dim % 2 or P.dim % 2:
        raise DimMismatch("need an even-dimensional plane in an even-dimensional space")
    W = _restricted_omega(P)
    s = np.sort(np.linalg.svd(W, compute_uv=False))[::-1]
    cos = s[0::2]
    theta = _clipped_arccos(cos)
    k = P.dim // 2
    val = evaluate(kahler_power(P.ambient_dim // 2, k), P.basis)
    if val < 0:
        theta[-1] = np.pi - theta[-1]
    return AngleList(tuple(theta), "kahler")


def slag_plane(theta) -> OrientedPlane:
    """P(theta) = {(e^{i theta_1} x_1, ..., e^{i theta_n} x_n)} with basis
    cos theta_j d/dx_j + sin theta_j d/dy_j."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    n = theta.size
    B = np.zeros((n, 2 * n))
    for j, t in enumerate(theta):
        B[j, 2 * j] = np.cos(t)
        B[j, 2 * j + 1] = np.sin(t)
    return OrientedPlane(B)


def upsilon_value(P: OrientedPlane) -> complex:
    """Upsilon = dz_1 ^ ... ^ dz_n on the oriented frame of an n-plane in C^n."""
    n = P.ambient_dim // 2
    re, im = holomorphic_volume(n)
    return complex(evaluate(re, P.basis), evaluate(im, P.basis))


def _triples_max(form_or_fn, basis, k):
    vals = [form_or_fn(basis[list(c)]) for c in combinations(range(len(basis)), k)]
    return max(vals) if vals else 0.0


def plane_defects(P: OrientedPlane) -> tuple[dict, dict]:
    """All applicable defects and signed calibration values for P."""
    N, k = P.ambient_dim, P.dim
    B = P.basis
    defects, values = {}, {}
    if N % 2 == 0 and N // 2 <= 4:
        n = N // 2
        W = _restricted_omega(P)
        if k == n:
            defects["omega"] = float(np.max(np.abs(W))) if k > 1 else 0.0
            ups = upsilon_value(P)
            values["re_upsilon"], values["im_upsilon"] = ups.real, ups.imag
            defects["im_upsilon"] = abs(ups.imag)
            defects["re_upsilon"] = 1.0 - abs(ups.real)
        if k % 2 == 0 and k > 0:
            val = evaluate(kahler_power(n, k // 2), B)
            values["kahler"] = val
            defects["kahler"] = 1.0 - abs(val)
    if N == 7:
        if k == 3:
            values["phi"] = evaluate(g2_phi(), B)
            defects["phi"] = 1.0 - abs(values["phi"])
            defects["associator"] = float(np.linalg.norm(associator(B[0], B[1], B[2])))
        if k == 4:
            values["star_phi"] = evaluate(g2_star_phi(), B)
            defects["star_phi"] = 1.0 - abs(values["star_phi"])
            phi = g2_phi()
            defects["phi_restricted"] = float(_triples_max(
                lambda f: abs(evaluate(phi, f)), B, 3))
    if N == 8 and k == 4:
        values["Phi"] = evaluate(spin7_phi(), B)
        defects["Phi"] = 1.0 - abs(values["Phi"])
        defects["tau"] = float(np.linalg.norm(tau(B[0], B[1], B[2], B[3])))
    return defects, values


def classify(P: OrientedPlane) -> PlaneClass:
    """Label P by the calibrations it is calibrated by (up to orientation).

    Every applicable defect is returned. The label is decided by:

    * special_lagrangian: omega and Im Upsilon vanish; phase 0 or pi by the
      sign of Re Upsilon on the given orientation
    * complex: 1 - |omega^k/k!| vanishes
    * associative: the associator vanishes on P (R^7, k = 3)
    * coassociative: phi restricts to zero (R^7, k = 4)
    * cayley: tau vanishes (R^8, k = 4)
    * lagrangian: omega vanishes
    """
    N, k = P.ambient_dim, P.dim
    supported = (N % 2 == 0 and N // 2 <= 4 and (k == N // 2 or k % 2 == 0)) \
        or (N == 7 and k in (3, 4)) or (N == 8 and k == 4)
    if not supported:
        raise UnsupportedAmbient(f"no calibration tests for {k}-planes in R^{N}")
    defects, values = plane_defects(P)
    passed = {
        "special_lagrangian": ("omega" in defects and defects["omega"] < CLASS_TOL
                               and defects["im_upsilon"] < CLASS_TOL),
        "complex": "kahler" in defects and defects["kahler"] < CLASS_TOL,
        "associative": "associator" in defects and defects["associator"] < CLASS_TOL,
        "coassociative": "phi_restricted" in defects and defects["phi_restricted"] < CLASS_TOL,
        "cayley": "tau" in defects and defects["tau"] < CLASS_TOL,
        "lagrangian": "omega" in defects and defects["omega"] < CLASS_TOL,
    }
    for label in _LABEL_ORDER:
        if passed[label]:
            phase = None
            if label == "special_lagrangian":
                phase = 0.0 if values["re_upsilon"] > 0 else float(np.pi)
            return PlaneClass(label, defects, phase, values)
    return PlaneClass("generic", defects, None, values)


def j_invariance_defect(P: OrientedPlane) -> float:
    """|| pr_P J pr_P - J pr_P || (spectral norm); zero iff P is complex."""
    J = complex_structure(P.ambient_dim // 2)
    pr = P.projector()
    return float(np.linalg.norm(pr @ J @ pr - J @ pr, 2))


def random_plane(rng, n: int, k: int) -> OrientedPlane:
    """Haar-random oriented k-plane in R^n."""
    A = rng.standard_normal((n, k))
    q, r = np.linalg.qr(A)
    q = q * np.sign(np.diag(r))
    return OrientedPlane(q.T, check=False)


def random_rotation(rng, n: int) -> np.ndarray:
    A = rng.standard_normal((n, n))
    q, r = np.linalg.qr(A)
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
