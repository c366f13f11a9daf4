"""Exact multivariate polynomial helpers.

These power the ellipsoid variant of the constrained metric paths: with a
quadric defining function F the corrector is sought as v = F*s for a
polynomial s, which vanishes on the boundary exactly, and the linear
problem lap(F*s) = q is solved degree by degree on monomial coefficients.
All derivative bookkeeping stays exact (integer exponent shifts), so the
resulting velocity field lies in the kernel of the linearized scalar
curvature map up to float roundoff only.
"""

from __future__ import annotations

from itertools import combinations_with_replacement

import numpy as np

from .errors import PreconditionError
from .fields import PolynomialBasedField, ScalarField, Sym2Field

__all__ = ["Poly", "ellipsoid_defining_poly", "poly_scalar_field",
           "PolySym2Field", "normal_gauge_sym2", "ds_flat_poly",
           "solve_fischer", "flat_conformal_kernel_velocity"]


class Poly:
    """Polynomial in n variables as {exponent tuple: coefficient}."""

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: dict | None = None):
        self.dim = dim
        self.terms = {}
        for alpha, c in (terms or {}).items():
            if c != 0.0:
                self.terms[tuple(alpha)] = self.terms.get(tuple(alpha), 0.0) + c

    @classmethod
    def constant(cls, dim: int, c: float) -> "Poly":
        return cls(dim, {(0,) * dim: float(c)})

    @classmethod
    def coordinate(cls, dim: int, i: int) -> "Poly":
        alpha = [0] * dim
        alpha[i] = 1
        return cls(dim, {tuple(alpha): 1.0})

    def degree(self) -> int:
        return max((sum(a) for a in self.terms), default=0)

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.constant(self.dim, other)
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out.get(a, 0.0) + c
        return Poly(self.dim, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.dim, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, Poly)
                       else Poly.constant(self.dim, -other))

    def scale(self, c: float) -> "Poly":
        return Poly(self.dim, {a: c * v for a, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(float(other))
        out = {}
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                key = tuple(i + j for i, j in zip(a, b))
                out[key] = out.get(key, 0.0) + ca * cb
        return Poly(self.dim, out)

    __rmul__ = __mul__

    def partial(self, i: int) -> "Poly":
        out = {}
        for a, c in self.terms.items():
            if a[i] == 0:
                continue
            b = list(a)
            b[i] -= 1
            out[tuple(b)] = out.get(tuple(b), 0.0) + c * a[i]
        return Poly(self.dim, out)

    def partial_multi(self, alpha) -> "Poly":
        p = self
        for i in alpha:
            p = p.partial(i)
        return p

    def laplacian(self) -> "Poly":
        out = Poly(self.dim, {})
        for i in range(self.dim):
            out = out + self.partial(i).partial(i)
        return out

    def gradient(self) -> list:
        return [self.partial(i) for i in range(self.dim)]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for a, c in self.terms.items():
            term = np.full(x.shape[:-1], c)
            for i, p in enumerate(a):
                if p:
                    term = term * x[..., i] ** p
            out = out + term
        return out

    def sup_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)


def ellipsoid_defining_poly(semiaxes) -> Poly:
    """F = (x^2/a^2 + y^2/b^2 + z^2/c^2 - 1)/2; the boundary is {F = 0}."""
    dim = len(semiaxes)
    terms = {(0,) * dim: -0.5}
    for i, s in enumerate(semiaxes):
        alpha = [0] * dim
        alpha[i] = 2
        terms[tuple(alpha)] = 0.5 / float(s) ** 2
    return Poly(dim, terms)


def poly_scalar_field(p: Poly) -> ScalarField:
    return PolynomialBasedField(p.dim, lambda alpha, x: p.partial_multi(alpha)(x))


class PolySym2Field(Sym2Field):
    """Symmetric 2-tensor with exact polynomial components."""

    def __init__(self, comps: list):
        self.dim = len(comps)
        self.comps = comps
        self._fields = [[poly_scalar_field(comps[i][j])
                         for j in range(self.dim)] for i in range(self.dim)]

    def jet(self, x, order):
        return [[self._fields[i][j].jet(x, order) for j in range(self.dim)]
                for i in range(self.dim)]


def normal_gauge_sym2(F: Poly, ell: list, psi: Poly) -> list:
    """Components  h_ij = ell_i F_j + ell_j F_i + psi F_i F_j  (F_i = dF):
    tangentially zero on every level set of F."""
    dF = F.gradient()
    n = F.dim
    return [[ell[i] * dF[j] + ell[j] * dF[i] + psi * dF[i] * dF[j]
             for j in range(n)] for i in range(n)]


def ds_flat_poly(comps: list) -> Poly:
    """Linearized scalar curvature at the flat metric, exactly:
    DS(h) = -lap(tr h) + sum_ij d_i d_j h_ij."""
    n = len(comps)
    tr = Poly(n, {})
    for i in range(n):
        tr = tr + comps[i][i]
    out = -tr.laplacian()
    for i in range(n):
        for j in range(n):
            out = out + comps[i][j].partial(i).partial(j)
    return out


def _monomials(dim: int, degree: int) -> list:
    out = [(0,) * dim]
    for d in range(1, degree + 1):
        for combo in combinations_with_replacement(range(dim), d):
            alpha = [0] * dim
            for i in combo:
                alpha[i] += 1
            out.append(tuple(alpha))
    return out


def solve_fischer(F: Poly, q: Poly, extra_degree: int = 0,
                  tol: float = 1e-9) -> Poly:
    """Polynomial s with lap(F*s) = q, exact up to roundoff.

    The map s -> lap(F*s) sends degree-d polynomials to degree-d
    polynomials when F is quadratic; it is assembled on the monomial
    basis and solved by least squares, then certified by substitution.
    """
    if F.degree() != 2:
        raise PreconditionError("defining polynomial must be quadratic")
    d = q.degree() + extra_degree
    basis = _monomials(F.dim, d)
    col_index = {alpha: k for k, alpha in enumerate(basis)}
    rows = _monomials(F.dim, d)
    row_index = {alpha: k for k, alpha in enumerate(rows)}
    A = np.zeros((len(rows), len(basis)))
    for k, alpha in enumerate(basis):
        image = (F * Poly(F.dim, {alpha: 1.0})).laplacian()
        for beta, c in image.terms.items():
            if beta not in row_index:
                raise PreconditionError(
                    "lap(F*s) left the expected degree range")
            A[row_index[beta], k] = c
    b = np.zeros(len(rows))
    for beta, c in q.terms.items():
        if beta not in row_index:
            raise PreconditionError("source degree outside solve range")
        b[row_index[beta]] = c
    coeffs, *_ = np.linalg.lstsq(A, b, rcond=None)
    s = Poly(F.dim, {alpha: float(c) for alpha, c in zip(basis, coeffs)})
    resid = (F * s).laplacian() - q
    if resid.sup_coeff() > tol * max(1.0, q.sup_coeff()):
        raise PreconditionError(
            f"polynomial corrector solve failed (residual coefficient "
            f"{resid.sup_coeff():.2e}); raise extra_degree")
    return s


def flat_conformal_kernel_velocity(F: Poly, ell: list, psi: Poly) -> dict:
    """Exact M^lambda_gamma velocity data on a flat quadric domain:
    hhat tangentially zero, v = F*s with DS(4/(n-2) v delta + hhat) = 0.

    Returns {"hhat": components, "v": Poly, "h": components, "ds_sup":
    certified residual coefficient of DS(h)}.
    """
    n = F.dim
    hhat = normal_gauge_sym2(F, ell, psi)
    ds_hhat = ds_flat_poly(hhat)
    q = ds_hhat.scale((n - 2) / (4.0 * (n - 1)))
    s = solve_fischer(F, q)
    v = F * s
    c = 4.0 / (n - 2)
    h = [[hhat[i][j] + (v.scale(c) if i == j else Poly(n, {}))
          for j in range(n)] for i in range(n)]
    ds_h = ds_flat_poly(h)
    return {"hhat": hhat, "v": v, "h": h, "ds_sup": ds_h.sup_coeff()}
