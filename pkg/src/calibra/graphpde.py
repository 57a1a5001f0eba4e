"""Finite-difference residuals and solvers for the minimal graph equation and
the special Lagrangian gradient-graph equations.

Grids are uniform with spacing ``h`` and node i at x = i h. Boundary nodes
carry Dirichlet data; residuals are defined at interior nodes and stored in
a full-size array whose boundary entries are zero.

Sign conventions
----------------
``minimal_residual`` is -div(grad f / W), W = sqrt(1 + |grad f|^2), so its
linearisation at f = 0 is -Lap_h (positive operator). The SLag residuals use
the coordinate Laplacian: n = 2 gives F_xx + F_yy and n = 3 gives
(F_xx + F_yy + F_zz) - det Hess F. Each equation is written internally as
Lap_h f + Q(f) = forcing, which is the form the Picard iteration uses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .errors import NoConvergence, ShapeMismatch, ShapeTooSmall, UnsupportedDim

EQUATIONS = ("minimal", "slag2", "slag3")


@dataclass(frozen=True)
class GridField:
    """Values on a uniform grid; ``values`` has shape ``shape`` for scalars or
    ``(ncomp,) + shape`` for vector fields."""

    values: np.ndarray
    h: float
    ncomp: int = 0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.h <= 0:
            raise ValueError("spacing must be positive")
        if self.ncomp and v.shape[0] != self.ncomp:
            raise ShapeMismatch("leading axis must hold the components")
        if any(s < 3 for s in self.shape):
            raise ShapeTooSmall(f"grid shape {self.shape}: need >= 3 points per axis")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid values must be finite")

    @property
    def shape(self) -> tuple:
        return self.values.shape[1:] if self.ncomp else self.values.shape

    @property
    def dim(self) -> int:
        return len(self.shape)

    def coords(self) -> list:
        return np.meshgrid(*[np.arange(s) * self.h for s in self.shape], indexing="ij")

    def interior(self) -> np.ndarray:
        return self.values[(slice(None),) * bool(self.ncomp) + (slice(1, -1),) * self.dim]

    def with_values(self, values) -> "GridField":
        return GridField(values, self.h, self.ncomp)

    @classmethod
    def from_function(cls, fn, shape, h) -> "GridField":
        X = np.meshgrid(*[np.arange(s) * h for s in shape], indexing="ij")
        return cls(np.broadcast_to(fn(*X), tuple(shape)), h)


@dataclass(frozen=True)
class SolveReport:
    solution: GridField
    iterations: int
    residual_norm: float
    method: str
    history: list = field(default_factory=list)


def _interior_slices(d):
    return (slice(1, -1),) * d


def _shift(a, offset):
    """View of ``a`` at interior nodes shifted by ``offset`` (entries in -1..1)."""
    return a[tuple(slice(1 + o, a.shape[i] - 1 + o) for i, o in enumerate(offset))]


def _unit(d, a, s=1):
    e = [0] * d
    e[a] = s
    return tuple(e)


def _check(f: GridField, dims=(2, 3)):
    if f.ncomp:
        raise ShapeMismatch("expected a scalar field")
    if f.dim not in dims:
        raise UnsupportedDim(f"grid dimension {f.dim} not in {dims}")


# laplacian ------------------------------------------------------------------

def laplacian(f: GridField) -> GridField:
    """Standard (2d+1)-point Laplacian at interior nodes."""
    v = f.values
    d = f.dim
    out = np.zeros_like(v)
    c = _shift(v, (0,) * d)
    acc = -2.0 * d * c
    for a in range(d):
        acc = acc + _shift(v, _unit(d, a)) + _shift(v, _unit(d, a, -1))
    out[_interior_slices(d)] = acc / f.h ** 2
    return f.with_values(out)


# minimal graph -------------------------------------------------------------

def _face_gradients(v, h, a):
    """Gradient on faces normal to axis ``a`` with transverse-interior
    positions; faces are indexed by their lower node along ``a``."""
    d = v.ndim
    g = []
    trans = tuple(slice(None) if b == a else slice(1, -1) for b in range(d))
    lo = tuple(slice(0, -1) if b == a else slice(None) for b in range(d))
    hi = tuple(slice(1, None) if b == a else slice(None) for b in range(d))
    for b in range(d):
        if b == a:
            gb = (v[hi] - v[lo]) / h
        else:
            fw = tuple(slice(2, None) if c == b else slice(None) for c in range(d))
            bw = tuple(slice(0, -2) if c == b else slice(None) for c in range(d))
            cen = np.zeros(v.shape)
            inner = tuple(slice(1, -1) if c == b else slice(None) for c in range(d))
            cen[inner] = (v[fw] - v[bw]) / (2 * h)
            gb = 0.5 * (cen[lo] + cen[hi])
        g.append(gb[trans])
    return g


def minimal_fluxes(v, h):
    """Face fluxes grad f / W for each axis."""
    out = []
    for a in range(v.ndim):
        g = _face_gradients(v, h, a)
        W = np.sqrt(1.0 + sum(x * x for x in g))
        out.append((g, W))
    return out


def minimal_residual(f: GridField) -> GridField:
    """-div(grad f / sqrt(1 + |grad f|^2)) in conservative form."""
    _check(f)
    v, h, d = f.values, f.h, f.dim
    div = 0.0
    for a, (g, W) in enumerate(minimal_fluxes(v, h)):
        flux = g[a] / W
        hi = tuple(slice(1, None) if b == a else slice(None) for b in range(d))
        lo = tuple(slice(0, -1) if b == a else slice(None) for b in range(d))
        div = div + (flux[hi] - flux[lo]) / h
    out = np.zeros_like(v)
    out[_interior_slices(d)] = -div
    return f.with_values(out)


def boundary_flux(f: GridField) -> float:
    """Outward flux of grad f / W through the boundary faces, times h^{d-1}.

    sum(minimal_residual(f)) h^d equals minus this, by telescoping.
    """
    v, h, d = f.values, f.h, f.dim
    total = 0.0
    for a, (g, W) in enumerate(minimal_fluxes(v, h)):
        flux = g[a] / W
        first = tuple(0 if b == a else slice(None) for b in range(d))
        last = tuple(-1 if b == a else slice(None) for b in range(d))
        total += flux[last].sum() - flux[first].sum()
    return float(total * h ** (d - 1))


# slag ----------------------------------------------------------------------

def _hessian(v, h):
    """Interior Hessian H[a][b] by second differences and 4-point crosses."""
    d = v.ndim
    c = _shift(v, (0,) * d)
    H = [[None] * d for _ in range(d)]
    for a in range(d):
        H[a][a] = (_shift(v, _unit(d, a)) - 2 * c + _shift(v, _unit(d, a, -1))) / h ** 2
        for b in range(a + 1, d):
            pp = tuple(x + y for x, y in zip(_unit(d, a), _unit(d, b)))
            pm = tuple(x + y for x, y in zip(_unit(d, a), _unit(d, b, -1)))
            mp = tuple(x + y for x, y in zip(_unit(d, a, -1), _unit(d, b)))
            mm = tuple(x + y for x, y in zip(_unit(d, a, -1), _unit(d, b, -1)))
            H[a][b] = H[b][a] = (_shift(v, pp) - _shift(v, pm) - _shift(v, mp)
                                 + _shift(v, mm)) / (4 * h ** 2)
    return H


def _det3(H):
    return (H[0][0] * (H[1][1] * H[2][2] - H[1][2] * H[2][1])
            - H[0][1] * (H[1][0] * H[2][2] - H[1][2] * H[2][0])
            + H[0][2] * (H[1][0] * H[2][1] - H[1][1] * H[2][0]))


def slag_residual(F: GridField, n: int | None = None) -> GridField:
    """Im det_C(I + i Hess F) on interior nodes: F_xx + F_yy for n = 2 and
    trace(Hess F) - det(Hess F) for n = 3."""
    n = F.dim if n is None else n
    if n not in (2, 3):
        raise UnsupportedDim(f"SLag graph equation implemented for n = 2, 3, got {n}")
    _check(F)
    if F.dim != n:
        raise ShapeMismatch(f"n = {n} needs a {n}-dimensional grid")
    H = _hessian(F.values, F.h)
    tr = sum(H[a][a] for a in range(n))
    res = tr if n == 2 else tr - _det3(H)
    out = np.zeros_like(F.values)
    out[_interior_slices(n)] = res
    return F.with_values(out)


def residual(equation: str, f: GridField) -> GridField:
    """Residual in the form Lap f + Q(f) (minimal is negated to match)."""
    if equation == "minimal":
        return f.with_values(-minimal_residual(f).values)
    if equation == "slag2":
        return slag_residual(f, 2)
    if equation == "slag3":
        return slag_residual(f, 3)
    raise ValueError(f"unknown equation {equation!r}")


# jacobians -----------------------------------------------------------------

def _node_index(shape):
    return np.arange(int(np.prod(shape))).reshape(shape)


def _interior_mask(shape):
    m = np.zeros(shape, dtype=bool)
    m[_interior_slices(len(shape))] = True
    return m


def _assemble(shape, rows, cols, vals):
    N = int(np.prod(shape))
    A = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(N, N)).tocsr()
    keep = _interior_mask(shape).ravel()
    return A[keep][:, keep]


def _pointwise_jacobian(shape, stencil):
    """Jacobian of R(x) = sum_s w_s(x) f[x + o_s] style linearisations.

    ``stencil`` is a list of ``(offset, weights)`` with weights an array on the
    interior nodes.
    """
    d = len(shape)
    idx = _node_index(shape)
    rows, cols, vals = [], [], []
    r = _shift(idx, (0,) * d).ravel()
    for off, w in stencil:
        rows.append(r)
        cols.append(_shift(idx, off).ravel())
        vals.append(np.broadcast_to(w, _shift(idx, off).shape).ravel())
    return _assemble(shape, rows, cols, vals)


def _laplacian_stencil(d, h):
    st = [((0,) * d, -2.0 * d / h ** 2)]
    for a in range(d):
        st += [(_unit(d, a), 1.0 / h ** 2), (_unit(d, a, -1), 1.0 / h ** 2)]
    return st


def _hessian_stencils(d, h):
    """Stencils of each Hessian entry (a, b), a <= b."""
    out = {}
    for a in range(d):
        out[a, a] = [(_unit(d, a), 1 / h ** 2), ((0,) * d, -2 / h ** 2),
                     (_unit(d, a, -1), 1 / h ** 2)]
        for b in range(a + 1, d):
            out[a, b] = []
            for sa, sb in product((1, -1), repeat=2):
                off = tuple(x + y for x, y in zip(_unit(d, a, sa), _unit(d, b, sb)))
                out[a, b].append((off, sa * sb / (4 * h ** 2)))
    return out


def _minimal_jacobian(f: GridField):
    """Jacobian of div(grad f / W) (the negated minimal residual)."""
    v, h, d = f.values, f.h, f.dim
    shape = v.shape
    idx = _node_index(shape)
    rows, cols, vals = [], [], []
    for a, (g, W) in enumerate(minimal_fluxes(v, h)):
        # faces normal to a: lower node p; transverse positions interior
        face_sl = tuple(slice(0, s - 1) if b == a else slice(1, s - 1)
                        for b, s in enumerate(shape))
        p = idx[face_sl]
        M = [(1.0 / W if c == a else 0.0) - g[a] * g[c] / W ** 3 for c in range(d)]
        entries = [((0,) * d, -1.0 / h, a), (_unit(d, a), 1.0 / h, a)]
        for b in range(d):
            if b == a:
                continue
            for off_a in (0, 1):
                for sb in (1, -1):
                    off = tuple(x + y for x, y in zip(_unit(d, a, off_a), _unit(d, b, sb)))
                    entries.append((off, sb / (4 * h), b))
        strides = np.array([int(np.prod(shape[i + 1:])) for i in range(d)])
        pos_a = np.indices(p.shape)[a]          # index along a of the lower node
        na = shape[a]
        for off, coef, c in entries:
            q = p + int(np.dot(off, strides))
            dphi = M[c] * coef
            dphi = np.broadcast_to(dphi, p.shape)
            # the face is the "+" face of node p and the "-" face of p + e_a
            row_lo = pos_a >= 1
            rows.append(p[row_lo])
            cols.append(q[row_lo])
            vals.append(dphi[row_lo] / h)
            row_hi = pos_a + 1 <= na - 2
            rows.append((p + strides[a])[row_hi])
            cols.append(q[row_hi])
            vals.append(-dphi[row_hi] / h)
    return _assemble(shape, rows, cols, vals)


def jacobian(equation: str, f: GridField):
    """Sparse Jacobian of :func:`residual` with respect to interior values."""
    d, h = f.dim, f.h
    if equation == "minimal":
        return _minimal_jacobian(f)
    if equation == "slag2":
        return _pointwise_jacobian(f.shape, _laplacian_stencil(2, h))
    if equation == "slag3":
        H = _hessian(f.values, h)
        # cofactors: d det / d H_ab
        C = [[None] * 3 for _ in range(3)]
        for a in range(3):
            for b in range(3):
                i1, i2 = [i for i in range(3) if i != a]
                j1, j2 = [j for j in range(3) if j != b]
                C[a][b] = (-1) ** (a + b) * (H[i1][j1] * H[i2][j2] - H[i1][j2] * H[i2][j1])
        stencil = []
        for (a, b), st in _hessian_stencils(3, h).items():
            w = (1.0 - C[a][a]) if a == b else -2.0 * C[a][b]
            stencil += [(off, coef * w) for off, coef in st]
        return _pointwise_jacobian(f.shape, stencil)
    raise ValueError(f"unknown equation {equation!r}")


# solvers ---------------------------------------------------------------------

def _laplacian_matrix(shape, h):
    return _pointwise_jacobian(shape, _laplacian_stencil(len(shape), h))


def harmonic_extension(boundary: GridField) -> GridField:
    """Solve Lap_h f = 0 with the boundary values of ``boundary``."""
    return _poisson(boundary, np.zeros(boundary.shape))


def _poisson(boundary: GridField, rhs) -> GridField:
    """Lap_h f = rhs at interior nodes, f = boundary on the boundary."""
    v = np.array(boundary.values, dtype=float)
    v[_interior_slices(boundary.dim)] = 0.0
    base = laplacian(boundary.with_values(v)).values[_interior_slices(boundary.dim)]
    L = _laplacian_matrix(boundary.shape, boundary.h)
    b = np.asarray(rhs)[_interior_slices(boundary.dim)] - base
    v[_interior_slices(boundary.dim)] = spsolve(L.tocsc(), b.ravel()).reshape(b.shape)
    return boundary.with_values(v)


def _forcing(forcing, shape):
    if forcing is None:
        return np.zeros(shape)
    return np.asarray(forcing.values if isinstance(forcing, GridField) else forcing, float)


def _res_norm(equation, f, g):
    r = residual(equation, f).values - g
    return float(np.max(np.abs(r[_interior_slices(f.dim)]))), r


def _check_equation(equation, boundary):
    if equation not in EQUATIONS:
        raise ValueError(f"unknown equation {equation!r}")
    want = {"minimal": (2, 3), "slag2": (2,), "slag3": (3,)}[equation]
    _check(boundary, want)


def solve_newton(equation: str, boundary: GridField, forcing=None, tol: float = 1e-10,
                 max_iter: int = 50, initial: GridField | None = None) -> SolveReport:
    """Damped Newton iteration on the interior values.

    The initial guess is the discrete harmonic extension of the boundary
    data. Each step solves the sparse Jacobian system directly and halves
    the step until the residual max-norm decreases (at most 20 halvings).
    At least one step is always taken.
    """
    _check_equation(equation, boundary)
    g = _forcing(forcing, boundary.shape)
    f = initial if initial is not None else harmonic_extension(boundary)
    inner = _interior_slices(boundary.dim)
    norm, r = _res_norm(equation, f, g)
    history = [norm]
    for it in range(1, max_iter + 1):
        J = jacobian(equation, f)
        delta = spsolve(J.tocsc(), -r[inner].ravel()).reshape(r[inner].shape)
        lam = 1.0
        for _ in range(20):
            v = np.array(f.values)
            v[inner] += lam * delta
            trial = f.with_values(v)
            tnorm, tr = _res_norm(equation, trial, g)
            if tnorm < norm or tnorm < tol:
                break
            lam *= 0.5
        f, norm, r = trial, tnorm, tr
        history.append(norm)
        if norm < tol:
            return SolveReport(f, it, norm, "newton", history)
    raise NoConvergence(f"Newton stopped at residual {norm:.3g} after {max_iter} steps",
                        report=SolveReport(f, max_iter, norm, "newton", history))


def _periodic_pad(v):
    return np.pad(v, 1, mode="wrap")


def _periodic_residual(equation, v, h):
    pad = GridField(_periodic_pad(v), h)
    return residual(equation, pad).values[_interior_slices(v.ndim)]


def _periodic_poisson(rhs, h):
    """Mean-zero solution of Lap_h f = rhs - mean(rhs) on the torus."""
    d = rhs.ndim
    symbol = 0.0
    for a, n in enumerate(rhs.shape):
        k = np.arange(n)
        lam = (2 * np.cos(2 * np.pi * k / n) - 2) / h ** 2
        symbol = symbol + lam.reshape([-1 if b == a else 1 for b in range(d)])
    R = np.fft.fftn(rhs - rhs.mean())
    zero = (0,) * d
    symbol = np.array(symbol)
    symbol[zero] = 1.0
    out = R / symbol
    out[zero] = 0.0
    return np.real(np.fft.ifftn(out))


def solve_picard(equation: str, boundary: GridField, forcing=None, tol: float = 1e-11,
                 max_iter: int = 500, periodic: bool = False) -> SolveReport:
    """Fixed-point iteration f <- Lap_h^{-1}(forcing - Q(f)) where Q is the
    residual minus the discrete Laplacian.

    Converges only for small data. Divergence (growth of the update beyond
    1e6 or non-finite values) and exhausting ``max_iter`` raise
    NoConvergence. With ``periodic`` the grid is a torus: the right-hand side
    is projected to mean zero and the solution is normalised to mean zero,
    so ``boundary`` only supplies the grid shape and the starting guess.
    """
    _check_equation(equation, boundary)
    g = _forcing(forcing, boundary.shape)
    h = boundary.h
    inner = _interior_slices(boundary.dim)
    history = []
    if periodic:
        v = np.array(boundary.values, dtype=float)
        v -= v.mean()
        lap = lambda w: _periodic_residual("slag2", w, h)
        for it in range(1, max_iter + 1):
            Q = _periodic_residual(equation, v, h) - lap(v)
            new = _periodic_poisson(g - Q, h)
            step = float(np.max(np.abs(new - v)))
            history.append(step)
            v = new
            if not np.isfinite(step) or step > 1e6:
                break
            if step < tol:
                r = _periodic_residual(equation, v, h) - g
                r = r - r.mean()
                return SolveReport(boundary.with_values(v), it,
                                   float(np.max(np.abs(r))), "picard", history)
        raise NoConvergence(f"Picard did not converge (last update {history[-1]:.3g})",
                            report={"history": history})
    f = harmonic_extension(boundary)
    for it in range(1, max_iter + 1):
        Q = residual(equation, f).values - laplacian(f).values
        new = _poisson(boundary, g - Q)
        step = float(np.max(np.abs(new.values - f.values)))
        history.append(step)
        f = new
        if not np.isfinite(step) or step > 1e6:
            break
        if step < tol:
            norm, _ = _res_norm(equation, f, g)
            return SolveReport(f, it, norm, "picard", history)
    raise NoConvergence(f"Picard did not converge (last update {history[-1]:.3g})",
                        report={"history": history, "last": f})


# lagrangian graphs -----------------------------------------------------------

def lagrangian_check(f: GridField) -> float:
    """max |d f_j / d x_k - d f_k / d x_j| over interior nodes (central
    differences). Zero up to O(h^2) exactly when f is a gradient."""
    if f.ncomp != f.dim or f.dim not in (2, 3):
        raise ShapeMismatch(f"need {f.dim} components on a {f.dim}-grid, got {f.ncomp}")
    d, h = f.dim, f.h
    worst = 0.0
    for j in range(d):
        for k in range(j + 1, d):
            djk = (_shift(f.values[j], _unit(d, k)) - _shift(f.values[j], _unit(d, k, -1))) / (2 * h)
            dkj = (_shift(f.values[k], _unit(d, j)) - _shift(f.values[k], _unit(d, j, -1))) / (2 * h)
            worst = max(worst, float(np.max(np.abs(djk - dkj))))
    return worst


def grid_gradient(F: GridField) -> GridField:
    """Central-difference gradient (one-sided second order at the edges)."""
    comps = np.gradient(F.values, F.h, edge_order=2)
    if F.dim == 1:
        comps = [comps]
    return GridField(np.array(comps), F.h, F.dim)


# boundary presets --------------------------------------------------------------

def boundary_preset(name: str, n: int, dim: int = 2, amplitude: float = 1.0) -> GridField:
    """Grid with n points per axis on [0, 1]^dim holding boundary data.

    Names: ``zero``, ``affine``, ``harmonic-cubic`` (x^3 - 3 x y^2),
    ``harmonic-exp`` (e^x sin y), ``scherk`` (log(cos y' / cos x') with
    x' = x - 1/2, y' = y - 1/2) and ``wave`` (cos(2 pi x) cos(pi y)).
    Every preset is scaled by ``amplitude``.
    """
    h = 1.0 / (n - 1)
    shape = (n,) * dim
    fn = BOUNDARY_FUNCTIONS.get(name)
    if fn is None:
        raise ValueError(f"unknown boundary preset {name!r}")
    return GridField.from_function(lambda *X: amplitude * fn(*X), shape, h)


def _cubic(x, y, *rest):
    return x ** 3 - 3 * x * y ** 2


def _affine(*X):
    return 0.3 + sum((0.5 - 0.2 * i) * x for i, x in enumerate(X))


def _scherk(x, y, *rest):
    return np.log(np.cos(y - 0.5) / np.cos(x - 0.5))


def _wave(*X):
    return np.cos(2 * np.pi * X[0]) * np.cos(np.pi * X[1])


BOUNDARY_FUNCTIONS = {
    "zero": lambda *X: 0.0 * X[0],
    "affine": _affine,
    "harmonic-cubic": _cubic,
    "harmonic-exp": lambda x, y, *r: np.exp(x) * np.sin(y),
    "scherk": _scherk,
    "wave": _wave,
}
