"""Lawlor necks in C^n: angle integrals, asymptotic angles, parameter
inversion and sampled special Lagrangian checks.

The neck is N = {(d_1 z_1(t), ..., d_n z_n(t)) : t in R, |d| = 1} with
z_j = r_j e^{i theta_j}, r_j^2 = c_j^2 + t^2 and a_j = c_j^{-2}. Here ``t``
is the profile parameter and ``d`` (called ``dir``) a point of the unit
sphere S^{n-1}.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.stats import norm, qmc

from .errors import NoConvergence, PreconditionError, QuadratureFailure, UnsupportedDim
from .forms import OrientedPlane, evaluate
from .holonomy import holomorphic_volume, kahler_form

QUAD_TOL = 1e-10


@dataclass(frozen=True)
class LawlorParams:
    a: tuple[float, ...]

    def __post_init__(self):
        a = tuple(float(x) for x in np.atleast_1d(self.a))
        if not 2 <= len(a) <= 4:
            raise UnsupportedDim(f"Lawlor necks supported for 2 <= n <= 4, got {len(a)}")
        if not all(np.isfinite(x) and x > 0 for x in a):
            raise PreconditionError("all a_j must be positive")
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def c(self) -> np.ndarray:
        return np.asarray(self.a) ** -0.5


@dataclass(frozen=True)
class NeckSample:
    point: np.ndarray
    tangent: OrientedPlane
    t: float
    dir: np.ndarray


@dataclass(frozen=True)
class LawlorSolveReport:
    params: LawlorParams
    residual: float
    iterations: int


def _esym(a) -> np.ndarray:
    """Elementary symmetric polynomials e_0..e_n of a."""
    e = np.zeros(len(a) + 1)
    e[0] = 1.0
    for x in a:
        e[1:] = e[1:] + x * e[:-1]
    return e


def _q(a, x):
    """(prod(1 + a_k x) - 1) / x written as a polynomial so x = 0 is regular."""
    e = _esym(a)
    out = np.zeros_like(np.asarray(x, dtype=float))
    for m in range(len(a), 0, -1):
        out = out * x + e[m]
    return out


def integrand(a, j: int, t):
    """a_j / ((1 + a_j t^2) sqrt(q(t^2)))."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(t, dtype=float) ** 2
    return a[j] / ((1.0 + a[j] * x) * np.sqrt(_q(a, x)))


def _quad(f, lo, hi):
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            val, err = quad(f, lo, hi, epsabs=1e-13, epsrel=1e-13, limit=400)
        except IntegrationWarning as w:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", IntegrationWarning)
                val, err = quad(f, lo, hi, epsabs=1e-13, epsrel=1e-13, limit=400)
            if err > QUAD_TOL:
                raise QuadratureFailure(str(w), achieved_error=err) from None
    if err > QUAD_TOL:
        raise QuadratureFailure(f"quadrature error estimate {err:.3g}", achieved_error=err)
    return val


def _theta_one(a, j, t):
    """theta_j(t) for t >= 0; [1, t] is mapped to [1/t, 1] by s = 1/x."""
    if t == 0:
        return 0.0
    if t <= 1.0:
        return _quad(lambda s: integrand(a, j, s), 0.0, t)
    head = _quad(lambda s: integrand(a, j, s), 0.0, 1.0)
    tail = _quad(lambda x: integrand(a, j, 1.0 / x) / x ** 2, 1.0 / t, 1.0)
    return head + tail


def lawlor_angles(p: LawlorParams, t: float) -> np.ndarray:
    """theta_j(t) = int_0^t a_j / ((1 + a_j s^2) sqrt(q(s^2))) ds, odd in t."""
    a = np.asarray(p.a)
    s = np.sign(t)
    return np.array([s * _theta_one(a, j, abs(float(t))) for j in range(p.n)])


@lru_cache(maxsize=4096)
def _asymptotic(a: tuple) -> tuple:
    a = np.asarray(a)
    out = []
    for j in range(len(a)):
        head = _quad(lambda s: integrand(a, j, s), 0.0, 1.0)
        # s = 1/x turns [1, inf) into (0, 1]; the integrand decays like s^-(n+1)
        tail = _quad(lambda x: integrand(a, j, 1.0 / x) / x ** 2 if x > 0 else 0.0,
                     0.0, 1.0)
        out.append(head + tail)
    return tuple(out)


def lawlor_asymptotic(p: LawlorParams) -> np.ndarray:
    """theta_j(infinity). These sum to pi/2; the neck is asymptotic to
    P(-psi/2) and P(psi/2) with psi = 2 theta(infinity)."""
    return np.array(_asymptotic(p.a))


def lawlor_solve(psi, tol: float = 1e-8, max_iter: int = 100) -> LawlorSolveReport:
    """Find a (with a_1 = 1) so that 2 theta(infinity) = psi.

    Newton iteration in log(a_2), ..., log(a_n) with a central-difference
    Jacobian (step 1e-6) and backtracking, from the symmetric guess.
    """
    psi = np.asarray(psi, dtype=float)
    n = psi.size
    if not 2 <= n <= 4:
        raise UnsupportedDim(f"Lawlor necks supported for 2 <= n <= 4, got {n}")
    if np.any(psi <= 0) or np.any(psi >= np.pi):
        raise PreconditionError("each psi_j must lie in (0, pi)")
    if abs(psi.sum() - np.pi) > 1e-10:
        raise PreconditionError(f"sum(psi) - pi = {psi.sum() - np.pi:.3g}")

    def residual(x):
        a = (1.0,) + tuple(np.exp(x))
        return 2.0 * np.array(_asymptotic(a)) - psi

    x = np.zeros(n - 1)
    r = residual(x)
    best = float(np.max(np.abs(r)))
    h = 1e-6
    for it in range(1, max_iter + 1):
        if best < tol:
            return LawlorSolveReport(LawlorParams((1.0,) + tuple(np.exp(x))), best, it - 1)
        J = np.empty((n, n - 1))
        for i in range(n - 1):
            e = np.zeros(n - 1)
            e[i] = h
            J[:, i] = (residual(x + e) - residual(x - e)) / (2 * h)
        dx = np.linalg.lstsq(J, -r, rcond=None)[0]
        lam = 1.0
        while lam > 1e-6:
            xn = x + lam * dx
            rn = residual(xn)
            if np.max(np.abs(rn)) < best:
                break
            lam *= 0.5
        else:
            break
        x, r = xn, rn
        best = float(np.max(np.abs(r)))
    if best < tol:
        return LawlorSolveReport(LawlorParams((1.0,) + tuple(np.exp(x))), best, max_iter)
    raise NoConvergence(f"lawlor_solve stalled at residual {best:.3g}",
                        report={"a": (1.0,) + tuple(np.exp(x)), "residual": best})


# sampling ----------------------------------------------------------------

def sphere_directions(n: int, count: int, seed: int = 0) -> np.ndarray:
    """``count`` points on S^{n-1} from a scrambled Halton sequence pushed
    through the normal quantile function."""
    u = qmc.Halton(d=n, scramble=True, seed=seed).random(count)
    g = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def profile(p: LawlorParams, t: float):
    """z_j(t) and dz_j/dt."""
    a = np.asarray(p.a)
    c = p.c
    th = lawlor_angles(p, t)
    r = np.sqrt(c ** 2 + t ** 2)
    dr = t / r
    dth = integrand(a, np.arange(p.n), t)
    z = r * np.exp(1j * th)
    dz = (dr + 1j * r * dth) * np.exp(1j * th)
    return z, dz


def _complex_to_real(z) -> np.ndarray:
    z = np.asarray(z)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def _sphere_tangents(d: np.ndarray) -> np.ndarray:
    """Orthonormal basis of d-perp."""
    n = d.size
    M = np.column_stack([d, np.eye(n)])
    Q, _ = np.linalg.qr(M)
    return Q[:, 1:n].T


def neck_sample(p: LawlorParams, t: float, d) -> NeckSample:
    d = np.asarray(d, dtype=float)
    d = d / np.linalg.norm(d)
    z, dz = profile(p, t)
    point = _complex_to_real(d * z)
    vecs = [_complex_to_real(d * dz)] + [_complex_to_real(v * z) for v in _sphere_tangents(d)]
    Q, R = np.linalg.qr(np.array(vecs).T)
    B = (Q * np.sign(np.diag(R))).T
    # orient so the phase-i calibration Im Upsilon is positive
    _, im = holomorphic_volume(p.n)
    if evaluate(im, B) < 0:
        B[0] = -B[0]
    return NeckSample(point, OrientedPlane(B, check=False), float(t), d)


def lawlor_sample(p: LawlorParams, t_values, directions: int, seed: int = 0) -> list:
    """Samples ordered by t, then by direction."""
    D = sphere_directions(p.n, directions, seed)
    return [neck_sample(p, t, d) for t in t_values for d in D]


def slag_defect(sample: NeckSample) -> tuple[float, float, float]:
    """(max |omega| on tangent pairs, |Re Upsilon|, |1 - Im Upsilon|)."""
    B = sample.tangent.basis
    n = B.shape[0]
    W = kahler_form(n).as_matrix()
    w = float(np.max(np.abs(B @ W @ B.T)))
    re, im = holomorphic_volume(n)
    vr, vi = evaluate(re, B), evaluate(im, B)
    if vi < 0:
        vi = -vi
    return w, abs(float(vr)), abs(1.0 - float(vi))


def ode_residual(p: LawlorParams, t: float) -> float:
    """max_j |conj(z_j) dz_j/ds - i conj(z_1 ... z_n)| with dt/ds = C sqrt(q(t^2)),
    C = c_1 ... c_n."""
    z, dz = profile(p, t)
    a = np.asarray(p.a)
    dtds = np.prod(p.c) * np.sqrt(_q(a, t * t))
    lhs = np.conj(z) * dz * dtds
    rhs = 1j * np.conj(np.prod(z))
    return float(np.max(np.abs(lhs - rhs)))


def modulus_identity_defect(p: LawlorParams, t: float) -> float:
    """|r_1 ... r_n cos(theta) - c_1 ... c_n|."""
    z, _ = profile(p, t)
    return float(abs(np.prod(np.abs(z)) * np.cos(np.sum(np.angle(z))) - np.prod(p.c)))
