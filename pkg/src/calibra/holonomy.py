"""Standard calibration forms and the identities relating them.

Coordinate conventions
----------------------
* C^n inside R^{2n} is interleaved: (x1, y1, ..., xn, yn) are coordinates
  1..2n and z_j = x_j + i y_j.
* R^7 = R x C^3 uses x1 for the real line and z_j = x_{2j} + i x_{2j+1}.
* R^8 = R x R^7 puts the extra line first: phi's x_i becomes x_{i+1}.

Moving a form between conventions goes through :func:`calibra.forms.relabel`,
which tracks the sign of every re-sorted index.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np

from .errors import DegreeMismatch, UnsupportedAmbient
from .forms import (
    Form,
    contract,
    dx,
    hodge_star,
    make_form,
    one_form,
    power,
    relabel,
    volume_form,
    wedge,
)
from .octonion import cayley_form, phi_form


@dataclass(frozen=True)
class StructureTag:
    """Names a standard form.

    ``name`` is one of ``kahler``, ``slag_real``, ``slag_imag``, ``g2_phi``,
    ``g2_star_phi``, ``spin7_phi``; ``n`` is the complex dimension for the
    first three and ``phase`` is only used by ``slag_real``.
    """

    name: str
    n: int | None = None
    phase: float = 0.0

    def __post_init__(self):
        if self.name in ("kahler", "slag_real", "slag_imag"):
            if self.n is None or not 1 <= self.n <= 4:
                raise UnsupportedAmbient(f"{self.name} needs complex dimension n in [1, 4]")
        elif self.name not in ("g2_phi", "g2_star_phi", "spin7_phi"):
            raise ValueError(f"unknown structure {self.name!r}")


def kahler_form(n: int) -> Form:
    """omega = sum dx_j ^ dy_j on C^n (interleaved)."""
    return make_form(2 * n, 2, [((2 * j + 1, 2 * j + 2), 1.0) for j in range(n)])


def kahler_power(n: int, k: int) -> Form:
    """omega^k / k! on C^n."""
    return power(kahler_form(n), k) / factorial(k)


@lru_cache(maxsize=None)
def holomorphic_volume(n: int) -> tuple[Form, Form]:
    """(Re Upsilon, Im Upsilon) for Upsilon = dz_1 ^ ... ^ dz_n."""
    re = Form(2 * n, 0, [1.0])
    im = Form(2 * n, 0, [0.0])
    for j in range(n):
        dxj, dyj = dx(2 * j + 1, n=2 * n), dx(2 * j + 2, n=2 * n)
        # (re + i im) ^ (dx + i dy)
        re, im = wedge(re, dxj) - wedge(im, dyj), wedge(re, dyj) + wedge(im, dxj)
    return re, im


def slag_form(n: int, phase: float = 0.0) -> Form:
    """Re(e^{-i phase} Upsilon) = cos(phase) Re Upsilon + sin(phase) Im Upsilon."""
    re, im = holomorphic_volume(n)
    return np.cos(phase) * re + np.sin(phase) * im


def complex_structure(n: int) -> np.ndarray:
    """J on R^{2n} (interleaved): J dx_j-direction = dy_j-direction."""
    J = np.zeros((2 * n, 2 * n))
    for j in range(n):
        J[2 * j + 1, 2 * j] = 1.0
        J[2 * j, 2 * j + 1] = -1.0
    return J


def g2_phi() -> Form:
    return phi_form()


def g2_star_phi() -> Form:
    return make_form(7, 4, [
        ((4, 5, 6, 7), 1.0), ((2, 3, 6, 7), 1.0), ((2, 3, 4, 5), 1.0),
        ((1, 3, 5, 7), 1.0), ((1, 3, 4, 6), -1.0), ((1, 2, 5, 6), -1.0),
        ((1, 2, 4, 7), -1.0),
    ])


def spin7_phi() -> Form:
    return cayley_form()


def standard_form(tag: StructureTag) -> Form:
    if tag.name == "kahler":
        return kahler_form(tag.n)
    if tag.name == "slag_real":
        return slag_form(tag.n, tag.phase)
    if tag.name == "slag_imag":
        return holomorphic_volume(tag.n)[1]
    if tag.name == "g2_phi":
        return g2_phi()
    if tag.name == "g2_star_phi":
        return g2_star_phi()
    return spin7_phi()


# conventions -------------------------------------------------------------

R7_FROM_C3 = (2, 3, 4, 5, 6, 7)     # C^3 coordinate i -> R^7 coordinate
R8_FROM_R7 = (2, 3, 4, 5, 6, 7, 8)


def to_r7(a: Form) -> Form:
    """Place a form on C^3 into R^7 = R x C^3."""
    return relabel(a, R7_FROM_C3, 7)


def to_r8(a: Form) -> Form:
    """Place a form on R^7 into R^8 = R x R^7."""
    return relabel(a, R8_FROM_R7, 8)


# identities --------------------------------------------------------------

def structure_identities() -> list[tuple[str, float]]:
    """Every flat-space identity among the standard forms.

    Returns ``(name, max coefficient deviation)`` pairs; each deviation
    should be at rounding level.
    """
    out = []
    phi, sphi, Phi = g2_phi(), g2_star_phi(), spin7_phi()
    w3 = to_r7(kahler_form(3))
    re3, im3 = (to_r7(f) for f in holomorphic_volume(3))
    dx1_7 = dx(1, n=7)
    out.append(("phi = dx1^omega + Re Upsilon",
                phi.max_abs_diff(wedge(dx1_7, w3) + re3)))
    out.append(("*phi = omega^2/2 - dx1^Im Upsilon",
                sphi.max_abs_diff(power(w3, 2) / 2 - wedge(dx1_7, im3))))
    re4, _ = holomorphic_volume(4)
    out.append(("Phi = omega^2/2 + Re Upsilon",
                Phi.max_abs_diff(power(kahler_form(4), 2) / 2 + re4)))
    out.append(("Phi = dx1^phi + *phi",
                Phi.max_abs_diff(wedge(dx(1, n=8), to_r8(phi)) + to_r8(sphi))))
    out.append(("hodge_star(phi) = *phi", hodge_star(phi).max_abs_diff(sphi)))
    out.append(("hodge_star(Phi) = Phi", hodge_star(Phi).max_abs_diff(Phi)))
    for n in range(1, 5):
        out.append((f"omega^{n}/{n}! = vol on C^{n}",
                    kahler_power(n, n).max_abs_diff(volume_form(2 * n))))
        for k in range(n + 1):
            lhs = hodge_star(kahler_power(n, k))
            out.append((f"*(omega^{k}/{k}!) = omega^{n - k}/{n - k}! on C^{n}",
                        lhs.max_abs_diff(kahler_power(n, n - k))))
    return out


# Lambda^2_7 ---------------------------------------------------------------

def lambda27_generator(u, v) -> Form:
    """u ^ v + Phi(u, v, ., .)."""
    Phi = spin7_phi()
    return wedge(one_form(u), one_form(v)) + contract(v, contract(u, Phi))


@lru_cache(maxsize=None)
def _cayley_operator() -> np.ndarray:
    """Matrix of beta -> *(Phi ^ beta) on the 28 basis 2-forms of R^8."""
    Phi = spin7_phi()
    cols = []
    for i in range(28):
        e = np.zeros(28)
        e[i] = 1.0
        cols.append(hodge_star(wedge(Phi, Form(8, 2, e))).coeffs)
    return np.array(cols).T


@lru_cache(maxsize=None)
def lambda27_eigenvalue() -> float:
    """Eigenvalue of beta -> *(Phi ^ beta) on Lambda^2_7, measured on a generator."""
    rng = np.random.default_rng(7)
    g = lambda27_generator(rng.standard_normal(8), rng.standard_normal(8)).coeffs
    L = _cayley_operator()
    return float(g @ L @ g / (g @ g))


@lru_cache(maxsize=None)
def lambda27_projector() -> np.ndarray:
    L = _cayley_operator()
    mu = lambda27_eigenvalue()
    vals, vecs = np.linalg.eigh(L)
    sel = np.abs(vals - mu) < 1e-8
    V = vecs[:, sel]
    P = V @ V.T
    P.setflags(write=False)
    return P


def lambda27_project(beta: Form) -> Form:
    """Orthogonal projection of a 2-form on R^8 onto Lambda^2_7."""
    if beta.n != 8 or beta.k != 2:
        raise DegreeMismatch("need a 2-form on R^8")
    return Form(8, 2, lambda27_projector() @ beta.coeffs)


def cayley_index(sigma: int, euler: int, self_int: int) -> Fraction:
    """sigma/2 + chi/2 - [N].[N] in exact rational arithmetic."""
    return Fraction(int(sigma), 2) + Fraction(int(euler), 2) - int(self_int)
