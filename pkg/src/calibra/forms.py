"""Constant-coefficient exterior forms on R^n for 1 <= n <= 8.

A k-form is stored densely: one coefficient per strictly increasing
multi-index, in lexicographic order (at most 70 entries, n = 8, k = 4).
Public multi-indices are 1-based, as in ``dx_123``; internally positions are
0-based.

The metric is the Euclidean one and the orientation is dx_1 ^ ... ^ dx_n.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from math import comb

import numpy as np

from .errors import (
    AmbientMismatch,
    ArityMismatch,
    DegreeZero,
    IndexOutOfRange,
    NotOrthonormal,
    RankDeficient,
    RepeatedIndex,
)

ORTHO_TOL = 1e-12
RANK_TOL = 1e-10
MAX_DIM = 8


def permutation_sign(seq) -> int:
    """Parity of the permutation sorting ``seq`` (entries assumed distinct)."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@lru_cache(maxsize=None)
def multi_indices(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    """0-based strictly increasing k-tuples of range(n), lexicographic."""
    return tuple(itertools.combinations(range(n), k))


@lru_cache(maxsize=None)
def _position(n: int, k: int) -> dict:
    return {idx: p for p, idx in enumerate(multi_indices(n, k))}


@lru_cache(maxsize=None)
def _index_array(n: int, k: int) -> np.ndarray:
    arr = np.array(multi_indices(n, k), dtype=int)
    return arr.reshape(len(multi_indices(n, k)), k)


@lru_cache(maxsize=None)
def _wedge_table(n: int, k: int, l: int):
    pa, pb, pc, sg = [], [], [], []
    pos_c = _position(n, k + l)
    for i, I in enumerate(multi_indices(n, k)):
        for j, J in enumerate(multi_indices(n, l)):
            if set(I) & set(J):
                continue
            merged = I + J
            pa.append(i)
            pb.append(j)
            pc.append(pos_c[tuple(sorted(merged))])
            sg.append(permutation_sign(merged))
    return (np.array(pa, dtype=int), np.array(pb, dtype=int),
            np.array(pc, dtype=int), np.array(sg, dtype=float))


@lru_cache(maxsize=None)
def _hodge_table(n: int, k: int):
    pos_c = _position(n, n - k)
    target, sign = [], []
    for I in multi_indices(n, k):
        rest = tuple(i for i in range(n) if i not in I)
        target.append(pos_c[rest])
        sign.append(permutation_sign(I + rest))
    return np.array(target, dtype=int), np.array(sign, dtype=float)


@lru_cache(maxsize=None)
def _contract_table(n: int, k: int):
    pos_c = _position(n, k - 1)
    src, dst, comp, sg = [], [], [], []
    for p, I in enumerate(multi_indices(n, k)):
        for a, i in enumerate(I):
            src.append(p)
            dst.append(pos_c[I[:a] + I[a + 1:]])
            comp.append(i)
            sg.append(-1.0 if a % 2 else 1.0)
    return (np.array(src, dtype=int), np.array(dst, dtype=int),
            np.array(comp, dtype=int), np.array(sg, dtype=float))


def _check_ambient(n: int) -> None:
    if not 1 <= n <= MAX_DIM:
        raise IndexOutOfRange(f"ambient dimension {n} outside [1, {MAX_DIM}]")


class Form:
    """An immutable constant-coefficient k-form on R^n.

    Parameters
    ----------
    n : int
        Ambient dimension.
    k : int
        Degree.
    coeffs : array_like, optional
        Dense coefficients over :func:`multi_indices` ``(n, k)``. Zeros if
        omitted.
    """

    __slots__ = ("n", "k", "_c", "_tensor")

    def __init__(self, n: int, k: int, coeffs=None):
        _check_ambient(n)
        if not 0 <= k <= n:
            raise IndexOutOfRange(f"degree {k} outside [0, {n}]")
        size = comb(n, k)
        if coeffs is None:
            c = np.zeros(size)
        else:
            c = np.array(coeffs, dtype=float).reshape(-1)
            if c.size != size:
                raise ValueError(f"expected {size} coefficients, got {c.size}")
        c.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "_c", c)
        object.__setattr__(self, "_tensor", None)

    def __setattr__(self, name, value):
        raise AttributeError("Form is immutable")

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def ambient_dim(self) -> int:
        return self.n

    @property
    def degree(self) -> int:
        return self.k

    def terms(self, tol: float = 0.0) -> list[tuple[tuple[int, ...], float]]:
        """Nonzero terms as ``(1-based multi-index, coefficient)`` pairs."""
        return [(tuple(i + 1 for i in idx), float(c))
                for idx, c in zip(multi_indices(self.n, self.k), self._c)
                if abs(c) > tol]

    def coefficient(self, idx) -> float:
        """Coefficient of dx_idx for a 1-based index list, with sign for order."""
        sign, pos = _normalise_index(self.n, self.k, idx)
        return sign * float(self._c[pos]) if sign else 0.0

    # arithmetic ---------------------------------------------------------
    def _same_space(self, other: "Form") -> None:
        if not isinstance(other, Form):
            raise TypeError("expected a Form")
        if other.n != self.n:
            raise AmbientMismatch(f"ambient {self.n} vs {other.n}")
        if other.k != self.k:
            raise ValueError(f"degree {self.k} vs {other.k}")

    def __add__(self, other: "Form") -> "Form":
        self._same_space(other)
        return Form(self.n, self.k, self._c + other._c)

    def __sub__(self, other: "Form") -> "Form":
        self._same_space(other)
        return Form(self.n, self.k, self._c - other._c)

    def __neg__(self) -> "Form":
        return Form(self.n, self.k, -self._c)

    def __mul__(self, scalar) -> "Form":
        if isinstance(scalar, Form):
            return NotImplemented
        return Form(self.n, self.k, float(scalar) * self._c)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "Form":
        return Form(self.n, self.k, self._c / float(scalar))

    def __xor__(self, other: "Form") -> "Form":
        return wedge(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Form):
            return NotImplemented
        return (self.n == other.n and self.k == other.k
                and bool(np.array_equal(self._c, other._c)))

    __hash__ = None

    def allclose(self, other: "Form", atol: float = 1e-14) -> bool:
        self._same_space(other)
        return bool(np.max(np.abs(self._c - other._c), initial=0.0) <= atol)

    def max_abs_diff(self, other: "Form") -> float:
        self._same_space(other)
        return float(np.max(np.abs(self._c - other._c), initial=0.0))

    def inner(self, other: "Form") -> float:
        self._same_space(other)
        return float(self._c @ other._c)

    def norm(self) -> float:
        return float(np.linalg.norm(self._c))

    def __call__(self, *vectors) -> float:
        return evaluate(self, vectors)

    def tensor(self) -> np.ndarray:
        """The fully antisymmetric coefficient array of shape ``(n,)*k``.

        Normalised so that ``form(v1..vk) = T[i1..ik] v1[i1] ... vk[ik]``.
        """
        if self._tensor is None:
            t = np.zeros((self.n,) * self.k)
            perms = [(p, permutation_sign(p))
                     for p in itertools.permutations(range(self.k))]
            for idx, c in zip(multi_indices(self.n, self.k), self._c):
                if c == 0.0:
                    continue
                for p, s in perms:
                    t[tuple(idx[q] for q in p)] = s * c
            t.setflags(write=False)
            object.__setattr__(self, "_tensor", t)
        return self._tensor

    def as_matrix(self) -> np.ndarray:
        """Skew matrix ``M[i, j] = a(e_i, e_j)`` of a 2-form."""
        if self.k != 2:
            raise ArityMismatch("as_matrix needs a 2-form")
        return np.array(self.tensor())

    @classmethod
    def from_matrix(cls, m) -> "Form":
        m = np.asarray(m, dtype=float)
        n = m.shape[0]
        return cls(n, 2, [m[i, j] for i, j in multi_indices(n, 2)])

    def __repr__(self) -> str:
        body = " + ".join(f"{c:g}*dx_{''.join(map(str, idx))}"
                          for idx, c in self.terms()) or "0"
        return f"Form(n={self.n}, k={self.k}: {body})"


def _normalise_index(n: int, k: int, idx) -> tuple[int, int]:
    idx = [int(i) for i in idx]
    if len(idx) != k:
        raise ArityMismatch(f"index list {idx} has length {len(idx)}, expected {k}")
    for i in idx:
        if not 1 <= i <= n:
            raise IndexOutOfRange(f"index {i} outside [1, {n}]")
    if len(set(idx)) != len(idx):
        raise RepeatedIndex(f"repeated entry in {idx}")
    zero_based = [i - 1 for i in idx]
    return permutation_sign(zero_based), _position(n, k)[tuple(sorted(zero_based))]


def make_form(n: int, k: int, terms) -> Form:
    """Build a form from ``(index list, coefficient)`` pairs.

    Index lists are 1-based and may be in any order; the coefficient picks
    up the sign of the sorting permutation. Duplicate multi-indices add.

    >>> make_form(4, 2, [([2, 1], 1.0)]) == make_form(4, 2, [([1, 2], -1.0)])
    True
    """
    _check_ambient(n)
    if not 0 <= k <= n:
        raise IndexOutOfRange(f"degree {k} outside [0, {n}]")
    c = np.zeros(comb(n, k))
    for idx, value in terms:
        sign, pos = _normalise_index(n, k, idx)
        c[pos] += sign * float(value)
    return Form(n, k, c)


def dx(*idx: int, n: int) -> Form:
    """The unit decomposable form dx_{i1} ^ ... ^ dx_{ik} on R^n."""
    return make_form(n, len(idx), [(idx, 1.0)])


def constant(value: float, n: int) -> Form:
    return Form(n, 0, [value])


def volume_form(n: int) -> Form:
    return Form(n, n, [1.0])


def wedge(a: Form, b: Form) -> Form:
    """Exterior product. Returns the zero form of degree ``k+l`` (capped at n)
    when ``k + l > n``."""
    if a.n != b.n:
        raise AmbientMismatch(f"ambient {a.n} vs {b.n}")
    n, k, l = a.n, a.k, b.k
    if k + l > n:
        return Form(n, n)
    pa, pb, pc, sg = _wedge_table(n, k, l)
    out = np.zeros(comb(n, k + l))
    np.add.at(out, pc, sg * a.coeffs[pa] * b.coeffs[pb])
    return Form(n, k + l, out)


def wedge_all(forms) -> Form:
    forms = list(forms)
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def power(a: Form, m: int) -> Form:
    """``a ^ a ^ ... ^ a`` (m factors); the constant 1 when m == 0."""
    out = constant(1.0, a.n)
    for _ in range(m):
        out = wedge(out, a)
    return out


def hodge_star(a: Form) -> Form:
    """Euclidean Hodge star, characterised by a ^ *b = <a, b> vol."""
    target, sign = _hodge_table(a.n, a.k)
    out = np.zeros(comb(a.n, a.n - a.k))
    out[target] = sign * a.coeffs
    return Form(a.n, a.n - a.k, out)


def contract(v, a: Form) -> Form:
    """Interior product v -| a, a form of degree k-1."""
    v = np.asarray(v, dtype=float)
    if v.shape != (a.n,):
        raise AmbientMismatch(f"vector of shape {v.shape} against R^{a.n}")
    if a.k == 0:
        raise DegreeZero("cannot contract a 0-form")
    src, dst, comp, sg = _contract_table(a.n, a.k)
    out = np.zeros(comb(a.n, a.k - 1))
    np.add.at(out, dst, sg * v[comp] * a.coeffs[src])
    return Form(a.n, a.k - 1, out)


def one_form(v) -> Form:
    """The covector v^flat as a 1-form."""
    v = np.asarray(v, dtype=float)
    return Form(v.size, 1, v)


def evaluate(a: Form, vectors) -> np.ndarray | float:
    """Evaluate ``a`` on k vectors.

    ``vectors`` is a sequence of k vectors, or an array of shape
    ``(..., k, n)`` holding a batch of frames; batches return an array of
    values with shape ``(...)``.
    """
    V = np.asarray(vectors, dtype=float)
    if a.k == 0:
        if V.size:
            raise ArityMismatch("a 0-form takes no vectors")
        return float(a.coeffs[0])
    if V.ndim < 2 or V.shape[-2:] != (a.k, a.n):
        raise ArityMismatch(
            f"expected {a.k} vectors in R^{a.n}, got array of shape {V.shape}")
    idx = _index_array(a.n, a.k)
    nz = np.flatnonzero(a.coeffs)
    if nz.size == 0:
        return 0.0 if V.ndim == 2 else np.zeros(V.shape[:-2])
    # minors[..., I] = det(V[..., :, I])
    sub = V[..., idx[nz]]                    # (..., k, |I|, k)
    sub = np.moveaxis(sub, -2, -3)            # (..., |I|, k, k)
    minors = np.linalg.det(sub)
    vals = minors @ a.coeffs[nz]
    return float(vals) if V.ndim == 2 else vals


def pullback(a: Form, A) -> Form:
    """Pull ``a`` (on R^m) back along the linear map ``A : R^n -> R^m``.

    ``(A^* a)(v_1..v_k) = a(A v_1, ..., A v_k)``.
    """
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    if m != a.n:
        raise AmbientMismatch(f"map lands in R^{m}, form lives on R^{a.n}")
    if a.k == 0:
        return Form(n, 0, a.coeffs)
    idx = _index_array(n, a.k)
    frames = np.moveaxis(A[:, idx], 0, -1)     # (|I|, k, m)
    return Form(n, a.k, evaluate(a, frames))


def relabel(a: Form, mapping, n_target: int) -> Form:
    """Move a form to new coordinates by ``x_i -> x_{mapping[i]}`` (1-based).

    Sign changes from re-sorting are tracked explicitly, so this is the safe
    way to change coordinate conventions.
    """
    mapping = [int(m) for m in mapping]
    if len(mapping) != a.n:
        raise AmbientMismatch("mapping length must equal the source dimension")
    terms = [([mapping[i - 1] for i in idx], c) for idx, c in a.terms()]
    return make_form(n_target, a.k, terms)


class OrientedPlane:
    """An oriented k-plane in R^n given by an ordered orthonormal basis.

    The orientation is the order of the basis rows; ``-P`` reverses it.
    """

    __slots__ = ("basis",)

    def __init__(self, basis, check: bool = True):
        B = np.array(basis, dtype=float)
        if B.ndim != 2:
            raise ValueError("basis must be a 2-d array, one row per vector")
        if check:
            gram = B @ B.T
            err = np.max(np.abs(gram - np.eye(B.shape[0])), initial=0.0)
            if err > ORTHO_TOL:
                raise NotOrthonormal(f"basis fails orthonormality by {err:.3g}")
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    def __setattr__(self, name, value):
        raise AttributeError("OrientedPlane is immutable")

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[1]

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def projector(self) -> np.ndarray:
        return self.basis.T @ self.basis

    def __neg__(self) -> "OrientedPlane":
        B = np.array(self.basis)
        B[0] = -B[0]
        return OrientedPlane(B, check=False)

    def complement(self) -> "OrientedPlane":
        """An orthonormal basis of the orthogonal complement (orientation
        chosen so that (P, P^perp) is positively oriented in R^n)."""
        n, k = self.ambient_dim, self.dim
        q, _ = np.linalg.qr(np.vstack([self.basis, np.eye(n)]).T)
        comp = q[:, k:n].T.copy()
        full = np.vstack([self.basis, comp])
        if np.linalg.det(full) < 0:
            comp[-1] = -comp[-1]
        return OrientedPlane(comp, check=False)

    def transformed(self, R) -> "OrientedPlane":
        """Image under an orthogonal map R."""
        return OrientedPlane(self.basis @ np.asarray(R, dtype=float).T)

    def __repr__(self) -> str:
        return f"OrientedPlane(dim={self.dim}, ambient={self.ambient_dim})"


def orthonormalize(vectors) -> OrientedPlane:
    """Modified Gram-Schmidt. Keeps span and orientation.

    Raises RankDeficient when the smallest singular value of the input is at
    most ``RANK_TOL``.
    """
    V = np.array(vectors, dtype=float)
    if V.ndim != 2:
        raise ValueError("expected a list of vectors")
    s = np.linalg.svd(V, compute_uv=False)
    if s.size == 0 or s[-1] <= RANK_TOL:
        raise RankDeficient("input vectors are (numerically) dependent")
    if np.max(np.abs(V @ V.T - np.eye(len(V)))) <= ORTHO_TOL:
        return OrientedPlane(V, check=False)
    Q = V.copy()
    for i in range(len(Q)):
        for j in range(i):
            Q[i] -= (Q[i] @ Q[j]) * Q[j]
        Q[i] /= np.linalg.norm(Q[i])
    # second pass restores orthogonality lost to cancellation
    for i in range(len(Q)):
        for j in range(i):
            Q[i] -= (Q[i] @ Q[j]) * Q[j]
        Q[i] /= np.linalg.norm(Q[i])
    return OrientedPlane(Q)


def coordinate_plane(n: int, idx) -> OrientedPlane:
    """span{e_i : i in idx} (1-based), oriented by the given order."""
    E = np.eye(n)
    return OrientedPlane(E[[i - 1 for i in idx]])


def plane_value(a: Form, P: OrientedPlane) -> float:
    """``a`` evaluated on the oriented orthonormal basis of P."""
    return evaluate(a, P.basis)
