"""Surface patches in R^m: fundamental forms, mean curvature, area and the
first variation of area.

Immersions are vectorised callables ``X(u, v) -> array (..., m)``. Analytic
first and second derivatives may be supplied through ``derivs(u, v)``
returning ``(Xu, Xv, Xuu, Xuv, Xvv)``; otherwise central differences are
used (step 1e-5 for first derivatives, 1e-4 for second).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DegenerateMetric, PreconditionError
from .exprparse import parse

DET_TOL = 1e-12
H1 = 1e-5
H2 = 1e-4


@dataclass(frozen=True)
class SurfacePatch:
    immersion: Callable
    domain: tuple[float, float, float, float]      # u0, u1, v0, v1
    derivs: Callable | None = None
    name: str = "patch"

    def __call__(self, u, v):
        return self.immersion(np.asarray(u, float), np.asarray(v, float))

    def derivatives(self, u, v):
        """(Xu, Xv, Xuu, Xuv, Xvv) at (u, v)."""
        u = np.asarray(u, float)
        v = np.asarray(v, float)
        if self.derivs is not None:
            return tuple(np.asarray(d, float) for d in self.derivs(u, v))
        X = self.immersion
        Xu = (X(u + H1, v) - X(u - H1, v)) / (2 * H1)
        Xv = (X(u, v + H1) - X(u, v - H1)) / (2 * H1)
        c = X(u, v)
        Xuu = (X(u + H2, v) - 2 * c + X(u - H2, v)) / H2 ** 2
        Xvv = (X(u, v + H2) - 2 * c + X(u, v - H2)) / H2 ** 2
        Xuv = (X(u + H2, v + H2) - X(u + H2, v - H2)
               - X(u - H2, v + H2) + X(u - H2, v - H2)) / (4 * H2 ** 2)
        return Xu, Xv, Xuu, Xuv, Xvv

    def first_derivatives(self, u, v):
        if self.derivs is not None:
            d = self.derivs(np.asarray(u, float), np.asarray(v, float))
            return np.asarray(d[0], float), np.asarray(d[1], float)
        X = self.immersion
        u = np.asarray(u, float)
        v = np.asarray(v, float)
        return ((X(u + H1, v) - X(u - H1, v)) / (2 * H1),
                (X(u, v + H1) - X(u, v - H1)) / (2 * H1))


@dataclass(frozen=True)
class VariationField:
    field: Callable
    compact: bool = True
    derivs: Callable | None = None          # (Vu, Vv)

    def __call__(self, u, v):
        return self.field(np.asarray(u, float), np.asarray(v, float))

    def first_derivatives(self, u, v):
        u = np.asarray(u, float)
        v = np.asarray(v, float)
        if self.derivs is not None:
            a, b = self.derivs(u, v)
            return np.asarray(a, float), np.asarray(b, float)
        F = self.field
        return ((F(u + H1, v) - F(u - H1, v)) / (2 * H1),
                (F(u, v + H1) - F(u, v - H1)) / (2 * H1))


def _metric(Xu, Xv):
    E = np.einsum("...i,...i->...", Xu, Xu)
    F = np.einsum("...i,...i->...", Xu, Xv)
    G = np.einsum("...i,...i->...", Xv, Xv)
    return E, F, G


def first_fundamental_form(patch: SurfacePatch, u, v) -> np.ndarray:
    Xu, Xv = patch.first_derivatives(u, v)
    E, F, G = _metric(Xu, Xv)
    return np.stack([np.stack([E, F], -1), np.stack([F, G], -1)], -2)


def _normal_projector(Xu, Xv, E, F, G):
    det = E * G - F * F
    gi = np.stack([np.stack([G, -F], -1), np.stack([-F, E], -1)], -2) / det[..., None, None]
    T = np.stack([Xu, Xv], -2)                     # (..., 2, m)
    m = Xu.shape[-1]
    Ptan = np.einsum("...ai,...ab,...bj->...ij", T, gi, T)
    return np.eye(m) - Ptan, gi


def second_fundamental_form(patch: SurfacePatch, u, v) -> np.ndarray:
    """Normal parts of X_uu, X_uv, X_vv, shape (..., 3, m)."""
    Xu, Xv, Xuu, Xuv, Xvv = patch.derivatives(u, v)
    E, F, G = _metric(Xu, Xv)
    if np.any(E * G - F * F <= DET_TOL):
        raise DegenerateMetric("first fundamental form degenerate")
    N, _ = _normal_projector(Xu, Xv, E, F, G)
    S = np.stack([Xuu, Xuv, Xvv], -2)
    return np.einsum("...ij,...aj->...ai", N, S)


def mean_curvature(patch: SurfacePatch, u, v) -> np.ndarray:
    """H = (g^{ab} X_ab) projected to the normal space."""
    Xu, Xv, Xuu, Xuv, Xvv = patch.derivatives(u, v)
    E, F, G = _metric(Xu, Xv)
    det = E * G - F * F
    if np.any(det <= DET_TOL):
        raise DegenerateMetric(f"det of first fundamental form {np.min(det):.3g}")
    N, gi = _normal_projector(Xu, Xv, E, F, G)
    trace = (gi[..., 0, 0, None] * Xuu + 2 * gi[..., 0, 1, None] * Xuv
             + gi[..., 1, 1, None] * Xvv)
    return np.einsum("...ij,...j->...i", N, trace)


def _gauss_grid(domain, grid):
    nu, nv = (grid, grid) if np.isscalar(grid) else grid
    u0, u1, v0, v1 = domain
    xu, wu = np.polynomial.legendre.leggauss(int(nu))
    xv, wv = np.polynomial.legendre.leggauss(int(nv))
    U = 0.5 * (u1 - u0) * xu + 0.5 * (u1 + u0)
    V = 0.5 * (v1 - v0) * xv + 0.5 * (v1 + v0)
    W = np.outer(wu, wv) * 0.25 * (u1 - u0) * (v1 - v0)
    UU, VV = np.meshgrid(U, V, indexing="ij")
    return UU, VV, W


def _area_from_derivs(Xu, Xv, W):
    E, F, G = _metric(Xu, Xv)
    det = E * G - F * F
    if np.any(det <= DET_TOL) or not np.all(np.isfinite(det)):
        raise DegenerateMetric(f"det of first fundamental form {np.nanmin(det):.3g}")
    return float(np.sum(np.sqrt(det) * W))


def area(patch: SurfacePatch, grid=64) -> float:
    """Gauss-Legendre tensor quadrature of sqrt(det g); ``grid`` is the
    number of nodes per axis (an int or a pair)."""
    UU, VV, W = _gauss_grid(patch.domain, grid)
    Xu, Xv = patch.first_derivatives(UU, VV)
    return _area_from_derivs(Xu, Xv, W)


def _check_support(patch: SurfacePatch, X: VariationField, samples=33):
    u0, u1, v0, v1 = patch.domain
    s = np.linspace(0, 1, samples)
    us = np.concatenate([u0 + (u1 - u0) * s, u0 + (u1 - u0) * s,
                         np.full(samples, u0), np.full(samples, u1)])
    vs = np.concatenate([np.full(samples, v0), np.full(samples, v1),
                         v0 + (v1 - v0) * s, v0 + (v1 - v0) * s])
    worst = float(np.max(np.abs(X(us, vs))))
    if worst >= 1e-12:
        raise PreconditionError(f"variation field is {worst:.3g} on the boundary")


def perturbed_area(patch: SurfacePatch, X: VariationField, t: float, grid=64) -> float:
    UU, VV, W = _gauss_grid(patch.domain, grid)
    Xu, Xv = patch.first_derivatives(UU, VV)
    Vu, Vv = X.first_derivatives(UU, VV)
    return _area_from_derivs(Xu + t * Vu, Xv + t * Vv, W)


def first_variation(patch: SurfacePatch, X: VariationField, grid=64,
                    step: float = 1e-4) -> tuple[float, float]:
    """(d/dt area(patch + t X) at 0, -int <X, H> dA).

    The derivative is a central difference Richardson-extrapolated from
    steps ``step`` and ``step / 2``.
    """
    if X.compact:
        _check_support(patch, X)

    def D(h):
        return (perturbed_area(patch, X, h, grid) - perturbed_area(patch, X, -h, grid)) / (2 * h)

    lhs = (4 * D(step / 2) - D(step)) / 3
    UU, VV, W = _gauss_grid(patch.domain, grid)
    Xu, Xv = patch.first_derivatives(UU, VV)
    E, F, G = _metric(Xu, Xv)
    H = mean_curvature(patch, UU, VV)
    rhs = -float(np.sum(np.einsum("...i,...i->...", X(UU, VV), H) * np.sqrt(E * G - F * F) * W))
    return float(lhs), rhs


# presets -------------------------------------------------------------------

def helicoid(domain=(-1.0, 1.0, -np.pi, np.pi)) -> SurfacePatch:
    """(t cos s, t sin s, s) with parameters (t, s)."""
    def X(t, s):
        return np.stack(np.broadcast_arrays(t * np.cos(s), t * np.sin(s), s), -1)

    def d(t, s):
        t, s = np.broadcast_arrays(t, s)
        c, sn, z = np.cos(s), np.sin(s), np.zeros_like(t)
        return (np.stack([c, sn, z], -1), np.stack([-t * sn, t * c, np.ones_like(t)], -1),
                np.stack([z, z, z], -1), np.stack([-sn, c, z], -1),
                np.stack([-t * c, -t * sn, z], -1))
    return SurfacePatch(X, tuple(domain), d, "helicoid")


def catenoid(domain=(-1.0, 1.0, -np.pi, np.pi)) -> SurfacePatch:
    """(cosh t cos s, cosh t sin s, t) with parameters (t, s)."""
    def X(t, s):
        return np.stack(np.broadcast_arrays(np.cosh(t) * np.cos(s), np.cosh(t) * np.sin(s), t), -1)

    def d(t, s):
        t, s = np.broadcast_arrays(t, s)
        ch, sh, c, sn = np.cosh(t), np.sinh(t), np.cos(s), np.sin(s)
        z = np.zeros_like(t)
        return (np.stack([sh * c, sh * sn, np.ones_like(t)], -1),
                np.stack([-ch * sn, ch * c, z], -1),
                np.stack([ch * c, ch * sn, z], -1),
                np.stack([-sh * sn, sh * c, z], -1),
                np.stack([-ch * c, -ch * sn, z], -1))
    return SurfacePatch(X, tuple(domain), d, "catenoid")


def sphere(domain=(0.0, np.pi, 0.0, 2 * np.pi)) -> SurfacePatch:
    """(sin a cos b, sin a sin b, cos a) with colatitude a and azimuth b."""
    def X(a, b):
        return np.stack(np.broadcast_arrays(np.sin(a) * np.cos(b), np.sin(a) * np.sin(b), np.cos(a)), -1)

    def d(a, b):
        a, b = np.broadcast_arrays(a, b)
        sa, ca, sb, cb = np.sin(a), np.cos(a), np.sin(b), np.cos(b)
        z = np.zeros_like(a)
        return (np.stack([ca * cb, ca * sb, -sa], -1),
                np.stack([-sa * sb, sa * cb, z], -1),
                np.stack([-sa * cb, -sa * sb, -ca], -1),
                np.stack([-ca * sb, ca * cb, z], -1),
                np.stack([-sa * cb, -sa * sb, z], -1))
    return SurfacePatch(X, tuple(domain), d, "sphere")


def plane_patch(origin, e1, e2, domain=(0.0, 1.0, 0.0, 1.0)) -> SurfacePatch:
    o, a, b = (np.asarray(x, float) for x in (origin, e1, e2))

    def X(u, v):
        u, v = np.broadcast_arrays(u, v)
        return o + u[..., None] * a + v[..., None] * b

    def d(u, v):
        shape = np.broadcast(u, v).shape + (a.size,)
        z = np.zeros(shape)
        return np.broadcast_to(a, shape), np.broadcast_to(b, shape), z, z, z
    return SurfacePatch(X, tuple(domain), d, "plane")


def graph_patch(f: Callable, domain=(0.0, 1.0, 0.0, 1.0), name="graph") -> SurfacePatch:
    """(u, v, f(u, v)); derivatives by central differences."""
    def X(u, v):
        u, v = np.broadcast_arrays(u, v)
        return np.stack([u, v, np.broadcast_to(f(u, v), u.shape)], -1)
    return SurfacePatch(X, tuple(domain), None, name)


def graph_from_expression(text: str, domain=(0.0, 1.0, 0.0, 1.0)) -> SurfacePatch:
    return graph_patch(parse(text, ("u", "v")), domain, f"graph:{text}")


PRESETS = {"helicoid": helicoid, "catenoid": catenoid, "sphere": sphere}


def preset(name: str, domain=None) -> SurfacePatch:
    if name.startswith("graph:"):
        return graph_from_expression(name[6:], domain or (0.0, 1.0, 0.0, 1.0))
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}")
    return PRESETS[name]() if domain is None else PRESETS[name](domain)


# polynomial patches and fields ----------------------------------------------

class PolyMap:
    """Vector of bivariate polynomials, coefficients ``C[i, p, q]`` of u^p v^q."""

    def __init__(self, C):
        self.C = np.asarray(C, float)

    def __call__(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return np.stack([npoly.polyval2d(u, v, c) for c in self.C], -1)

    def diff(self, du: int = 0, dv: int = 0) -> "PolyMap":
        C = self.C
        if du:
            C = npoly.polyder(C, du, axis=1)
        if dv:
            C = npoly.polyder(C, dv, axis=2)
        return PolyMap(C)

    def __mul__(self, scalar_poly):
        """Product with a scalar polynomial given as a 2D coefficient array."""
        s = np.asarray(scalar_poly, float)
        return PolyMap(np.array([_polymul2d(c, s) for c in self.C]))


def _polymul2d(a, b):
    out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1))
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            if a[i, j]:
                out[i:i + b.shape[0], j:j + b.shape[1]] += a[i, j] * b
    return out


def polynomial_patch(P: PolyMap, domain=(0.0, 1.0, 0.0, 1.0), name="polynomial") -> SurfacePatch:
    Pu, Pv = P.diff(1, 0), P.diff(0, 1)
    Puu, Puv, Pvv = P.diff(2, 0), P.diff(1, 1), P.diff(0, 2)

    def d(u, v):
        return Pu(u, v), Pv(u, v), Puu(u, v), Puv(u, v), Pvv(u, v)
    return SurfacePatch(P, tuple(domain), d, name)


def polynomial_field(P: PolyMap, compact=True) -> VariationField:
    Pu, Pv = P.diff(1, 0), P.diff(0, 1)
    return VariationField(P, compact, lambda u, v: (Pu(u, v), Pv(u, v)))


# (u (1 - u) v (1 - v))^2 on the unit square
_BUMP = _polymul2d(*(2 * [np.outer([0.0, 1.0, -1.0], [0.0, 1.0, -1.0])]))


def random_polynomial_patch(rng, m: int = 3, degree: int = 3, scale: float = 0.5) -> SurfacePatch:
    """Graph-like patch (u, v, p_1, ..., p_{m-2}) over the unit square with
    random polynomial heights, then rotated by a random orthogonal map."""
    C = np.zeros((m, degree + 1, degree + 1))
    C[0, 1, 0] = 1.0
    C[1, 0, 1] = 1.0
    for i in range(2, m):
        c = rng.uniform(-scale, scale, (degree + 1, degree + 1))
        c[np.add.outer(np.arange(degree + 1), np.arange(degree + 1)) > degree] = 0.0
        C[i] = c
    Q, R = np.linalg.qr(rng.standard_normal((m, m)))
    C = np.einsum("ij,jpq->ipq", Q * np.sign(np.diag(R)), C)
    return polynomial_patch(PolyMap(C), name="random-polynomial")


def random_bump_field(rng, m: int = 3, degree: int = 2, scale: float = 1.0) -> VariationField:
    """Random polynomial vector times (u(1-u)v(1-v))^2: vanishes on the
    boundary of the unit square together with its first derivatives."""
    C = rng.uniform(-scale, scale, (m, degree + 1, degree + 1))
    return polynomial_field(PolyMap(C) * _BUMP)
