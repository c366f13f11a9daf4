"""Truncated multivariate Taylor arithmetic ("jets") up to third order.

A :class:`Jet` carries the value and the partial derivatives, up to a
requested order <= 3, of one scalar quantity at one or many evaluation
points.  Coefficient arrays are stored dense with any batch shape in the
leading axes::

    value  (...,)          f
    grad   (..., n)        d_i f
    hess   (..., n, n)     d_i d_j f          (symmetric)
    third  (..., n, n, n)  d_i d_j d_k f      (fully symmetric)

Arithmetic propagates derivatives exactly (Leibniz / Faa di Bruno through
order three), so chart expressions built from the operation table below
yield machine-precision curvature without any finite differencing.
Coefficient arrays follow numpy broadcasting, so constants may be held
unbatched while coordinates carry the full batch.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import EvaluationDomainError, SingularMetricError

__all__ = [
    "Jet",
    "const_jet",
    "coordinate_jets",
    "apply_univariate",
    "compose",
    "jet_matrix_inverse",
    "jet_matrix_det",
    "MAX_ORDER",
]

MAX_ORDER = 3


def _sym2(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def _sym3(a: np.ndarray) -> np.ndarray:
    # average over the six permutations of the last three axes
    perms = ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0))
    nd = a.ndim
    out = np.zeros_like(a)
    for p in perms:
        axes = tuple(range(nd - 3)) + tuple(nd - 3 + i for i in p)
        out += np.transpose(a, axes)
    return out / 6.0


def _sym21(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Symmetrized product of a symmetric 2-array and a 1-array:
    T_ijk = m_ij v_k + m_jk v_i + m_ik v_j."""
    t = np.einsum("...ij,...k->...ijk", m, v)
    t = t + np.einsum("...jk,...i->...ijk", m, v)
    t = t + np.einsum("...ik,...j->...ijk", m, v)
    return t


class Jet:
    """Scalar Taylor jet of order <= 3 in ``dim`` coordinate directions."""

    __slots__ = ("dim", "order", "coeffs")

    def __init__(self, dim: int, coeffs: Sequence[np.ndarray]):
        order = len(coeffs) - 1
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"jet order must be in [0, {MAX_ORDER}], got {order}")
        self.dim = int(dim)
        self.order = order
        self.coeffs = [np.asarray(c, dtype=float) for c in coeffs]
        for k, c in enumerate(self.coeffs):
            if c.ndim < k or c.shape[c.ndim - k:] != (self.dim,) * k:
                raise ValueError(
                    f"order-{k} coefficient has trailing shape "
                    f"{c.shape}, expected (..., {','.join([str(self.dim)] * k)})"
                )

    # -- basic accessors -------------------------------------------------

    @property
    def value(self) -> np.ndarray:
        return self.coeffs[0]

    @property
    def grad(self) -> np.ndarray:
        return self.coeffs[1]

    @property
    def hess(self) -> np.ndarray:
        return self.coeffs[2]

    @property
    def third(self) -> np.ndarray:
        return self.coeffs[3]

    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        return Jet(self.dim, self.coeffs[: order + 1])

    def partial(self, k: int) -> "Jet":
        """The jet of d_k(self); one order lower than self."""
        if self.order < 1:
            raise ValueError("cannot take a partial of an order-0 jet")
        out = [self.coeffs[m + 1][..., k] for m in range(self.order)]
        return Jet(self.dim, out)

    def copy(self) -> "Jet":
        return Jet(self.dim, [c.copy() for c in self.coeffs])

    def __repr__(self) -> str:  # pragma: no cover - debug helper
        return (f"Jet(dim={self.dim}, order={self.order}, "
                f"value_shape={self.value.shape})")

    # -- arithmetic ------------------------------------------------------

    def _match(self, other: "Jet") -> int:
        if self.dim != other.dim:
            raise ValueError("jet dimension mismatch")
        return min(self.order, other.order)

    def __add__(self, other):
        if isinstance(other, Jet):
            m = self._match(other)
            return Jet(self.dim, [self.coeffs[k] + other.coeffs[k]
                                  for k in range(m + 1)])
        out = [c.copy() for c in self.coeffs]
        out[0] = out[0] + other
        return Jet(self.dim, out)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.dim, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else -np.asarray(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.dim, [c * other for c in self.coeffs])
        m = self._match(other)
        a, b = self.coeffs, other.coeffs
        out = [a[0] * b[0]]
        if m >= 1:
            out.append(a[1] * b[0][..., None] + a[0][..., None] * b[1])
        if m >= 2:
            cross = np.einsum("...i,...j->...ij", a[1], b[1])
            out.append(a[2] * b[0][..., None, None]
                       + cross + np.swapaxes(cross, -1, -2)
                       + a[0][..., None, None] * b[2])
        if m >= 3:
            t = a[3] * b[0][..., None, None, None]
            t = t + _sym21(a[2], b[1]) + _sym21(b[2], a[1])
            t = t + a[0][..., None, None, None] * b[3]
            out.append(t)
        return Jet(self.dim, out)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        v = self.value
        if np.any(v == 0.0):
            raise EvaluationDomainError("jet reciprocal at a zero value")
        u = 1.0 / v
        return apply_univariate(self, (u, -u * u, 2.0 * u ** 3, -6.0 * u ** 4))

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        other = np.asarray(other, dtype=float)
        if np.any(other == 0.0):
            raise EvaluationDomainError("jet division by zero scalar")
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Jet):
            raise TypeError("jet ** jet is not supported; use exp/log")
        if float(p) == int(p) and 0 <= int(p) <= 4:
            n = int(p)
            if n == 0:
                return const_jet(np.ones_like(self.value), self.dim, self.order)
            out = self
            for _ in range(n - 1):
                out = out * self
            return out
        v = self.value
        if np.any(v <= 0.0):
            raise EvaluationDomainError(
                "fractional/negative power of a non-positive jet value")
        c0 = v ** p
        c1 = p * v ** (p - 1)
        c2 = p * (p - 1) * v ** (p - 2)
        c3 = p * (p - 1) * (p - 2) * v ** (p - 3)
        return apply_univariate(self, (c0, c1, c2, c3))

    # -- named analytic maps ----------------------------------------------

    def sqrt(self) -> "Jet":
        v = self.value
        if np.any(v <= 0.0):
            raise EvaluationDomainError("sqrt of a non-positive jet value")
        s = np.sqrt(v)
        return apply_univariate(
            self, (s, 0.5 / s, -0.25 / (s * v), 0.375 / (s * v * v)))

    def exp(self) -> "Jet":
        e = np.exp(self.value)
        return apply_univariate(self, (e, e, e, e))

    def log(self) -> "Jet":
        v = self.value
        if np.any(v <= 0.0):
            raise EvaluationDomainError("log of a non-positive jet value")
        u = 1.0 / v
        return apply_univariate(self, (np.log(v), u, -u * u, 2.0 * u ** 3))

    def sin(self) -> "Jet":
        s, c = np.sin(self.value), np.cos(self.value)
        return apply_univariate(self, (s, c, -s, -c))

    def cos(self) -> "Jet":
        s, c = np.sin(self.value), np.cos(self.value)
        return apply_univariate(self, (c, -s, -c, s))

    def sinh(self) -> "Jet":
        s, c = np.sinh(self.value), np.cosh(self.value)
        return apply_univariate(self, (s, c, s, c))

    def cosh(self) -> "Jet":
        s, c = np.sinh(self.value), np.cosh(self.value)
        return apply_univariate(self, (c, s, c, s))


def const_jet(value, dim: int, order: int) -> Jet:
    """A jet with the given value and vanishing derivatives."""
    value = np.asarray(value, dtype=float)
    coeffs = [value]
    for k in range(1, order + 1):
        coeffs.append(np.zeros(value.shape + (dim,) * k))
    return Jet(dim, coeffs)


def coordinate_jets(x: np.ndarray, order: int) -> list[Jet]:
    """Jets of the coordinate functions x^i at the points ``x`` (..., n).

    Gradients are stored unbatched (numpy broadcasting supplies the batch)."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    out = []
    for i in range(n):
        coeffs: list[np.ndarray] = [x[..., i]]
        if order >= 1:
            e = np.zeros(n)
            e[i] = 1.0
            coeffs.append(e)
        for k in range(2, order + 1):
            coeffs.append(np.zeros((n,) * k))
        out.append(Jet(n, coeffs))
    return out


def apply_univariate(f: Jet, derivs: Sequence[np.ndarray]) -> Jet:
    """Compose a univariate map phi with the jet f (chain rule to order 3).

    ``derivs`` are phi, phi', phi'', phi''' evaluated at f.value; entries
    beyond f.order are ignored.
    """
    m = f.order
    out = [np.asarray(derivs[0], dtype=float) + np.zeros_like(f.value)]
    if m >= 1:
        c1 = np.asarray(derivs[1], dtype=float)
        out.append(c1[..., None] * f.grad)
    if m >= 2:
        c2 = np.asarray(derivs[2], dtype=float)
        out.append(c1[..., None, None] * f.hess
                   + c2[..., None, None] * np.einsum("...i,...j->...ij",
                                                     f.grad, f.grad))
    if m >= 3:
        c3 = np.asarray(derivs[3], dtype=float)
        g = f.grad
        out.append(c1[..., None, None, None] * f.third
                   + c2[..., None, None, None] * _sym21(f.hess, g)
                   + c3[..., None, None, None]
                   * np.einsum("...i,...j,...k->...ijk", g, g, g))
    return Jet(f.dim, out)


def compose(outer: Jet, inner: Sequence[Jet]) -> Jet:
    """Multivariate chain rule: the jet of F(y(x)).

    ``outer`` is the jet of F in the y-coordinates (dim m) at y(x0);
    ``inner`` are the m jets of the component maps y^a(x) at x0 (dim n).
    The result is a jet in the x-coordinates, of order
    min(outer.order, min(inner orders)).
    """
    m = outer.dim
    if len(inner) != m:
        raise ValueError("compose: need one inner jet per outer coordinate")
    n = inner[0].dim
    order = min([outer.order] + [j.order for j in inner])

    # y-derivative stacks of the inner maps, batched over evaluation points
    shape = np.broadcast_shapes(*[j.value.shape for j in inner])
    J1 = None
    if order >= 1:
        J1 = np.stack([np.broadcast_to(j.grad, shape + (n,)) for j in inner],
                      axis=-2)                       # (..., m, n): d_i y^a
    if order >= 2:
        J2 = np.stack([np.broadcast_to(j.hess, shape + (n, n)) for j in inner],
                      axis=-3)                       # (..., m, n, n)
    if order >= 3:
        J3 = np.stack([np.broadcast_to(j.third, shape + (n, n, n))
                       for j in inner], axis=-4)     # (..., m, n, n, n)

    out = [np.broadcast_to(outer.value, shape).copy()]
    if order >= 1:
        Fa = outer.grad                              # (..., m)
        out.append(np.einsum("...a,...ai->...i", Fa, J1))
    if order >= 2:
        Fab = outer.hess
        h = np.einsum("...ab,...ai,...bj->...ij", Fab, J1, J1)
        h = h + np.einsum("...a,...aij->...ij", Fa, J2)
        out.append(h)
    if order >= 3:
        Fabc = outer.third
        t = np.einsum("...abc,...ai,...bj,...ck->...ijk", Fabc, J1, J1, J1)
        mixed = np.einsum("...ab,...aij,...bk->...ijk", Fab, J2, J1)
        t = t + mixed + np.moveaxis(mixed, -1, -3) + np.moveaxis(mixed, -1, -2)
        t = t + np.einsum("...a,...aijk->...ijk", Fa, J3)
        out.append(t)
    return Jet(n, out)


# -- jet linear algebra ---------------------------------------------------


def _gauss_eliminate(mat: list[list[Jet]]):
    """LU-style elimination without pivoting (valid for positive definite
    matrices).  Returns (inverse rows, det jet)."""
    n = len(mat)
    a = [[mat[i][j] for j in range(n)] for i in range(n)]
    dim, order = a[0][0].dim, a[0][0].order
    # identity augmentation
    ident = [[const_jet(1.0 if i == j else 0.0, dim, order) for j in range(n)]
             for i in range(n)]
    det: Jet | None = None
    for k in range(n):
        piv = a[k][k]
        if np.any(np.abs(piv.value) < 1e-300):
            raise SingularMetricError("vanishing pivot in jet matrix inverse")
        det = piv if det is None else det * piv
        inv_piv = piv.reciprocal()
        for j in range(n):
            a[k][j] = a[k][j] * inv_piv
            ident[k][j] = ident[k][j] * inv_piv
        for i in range(n):
            if i == k:
                continue
            f = a[i][k]
            for j in range(n):
                a[i][j] = a[i][j] - f * a[k][j]
                ident[i][j] = ident[i][j] - f * ident[k][j]
    return ident, det


def jet_matrix_inverse(mat: list[list[Jet]]) -> list[list[Jet]]:
    inv, _ = _gauss_eliminate(mat)
    return inv


def jet_matrix_det(mat: list[list[Jet]]) -> Jet:
    n = len(mat)
    if n == 1:
        return mat[0][0]
    if n == 2:
        return mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0]
    if n == 3:
        a, b, c = mat[0]
        d, e, f = mat[1]
        g, h, i = mat[2]
        return (a * (e * i - f * h) - b * (d * i - f * g)
                + c * (d * h - e * g))
    _, det = _gauss_eliminate(mat)
    return det
