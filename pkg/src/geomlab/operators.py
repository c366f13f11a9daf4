"""Linearizations of scalar and mean curvature, and pointwise residuals
of the structural identities built from them.

Operators (all with respect to a background metric g):

* DS(h)   = -Delta_g (tr_g h) + div_g div_g h - <h, Ric>_g
            (first variation of scalar curvature),
* DS*(w)  = -(Delta_g w) g + Hess_g w - w Ric
            (its formal L2 adjoint; kernel elements are static potentials),
* A'(0), DH(h): first variation of the shape operator / mean curvature of
  a boundary component along g + t h for deformations with vanishing
  tangential part on the boundary, evaluated in an adapted chart whose
  last coordinate is the unit normal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boundary import (BoundaryComponent, adapted_chart_jets, boundary_bundle,
                       pullback_sym2_jets)
from .errors import PreconditionError
from .fields import ScalarField, Sym2Field, VectorField
from .geometry import (ChartMetric, DivergenceField, EinsteinInnerField,
                       EinsteinLambdaField, GNormSquaredField,
                       ScalarCurvatureField, christoffel_jets,
                       curvature_bundle, lie_metric, lie_sym2, ricci_jets,
                       sym2_inner, sym2_norm2, vector_calc)
from .jets import jet_matrix_inverse

__all__ = [
    "ds", "ds_star", "trace_ds_star", "static_residual",
    "conformal_killing_residual", "ShapeVariation",
    "shape_operator_variation", "dh",
    "kernel_identity_residuals", "kernel_identity_general_residuals",
    "conformal_inner_identity_residual",
    "transport_identity_residual", "normal_killing_mean_curvature_residual",
]


# ---------------------------------------------------------------------------
# DS and its adjoint


def ds(g: ChartMetric, h: Sym2Field, x: np.ndarray) -> np.ndarray:
    """DS(h) = -Delta (tr h) + div div h - <h, Ric> at the points x."""
    n = g.dim
    x = np.asarray(x, dtype=float)
    mj = g.jets(x, 3)
    batch = np.shape(mj.det.value)
    H = h.jet(x, 2)
    ric, _ = ricci_jets(mj)

    # trace as an order-2 jet
    tr = None
    for i in range(n):
        for j in range(n):
            t = mj.ginv[i][j].truncate(2) * H[i][j]
            tr = t if tr is None else tr + t

    gam_val = mj.gamma_values()
    ginv_val = mj.ginv_values()
    lap_tr = np.einsum(
        "...ij,...ij->...", ginv_val,
        np.broadcast_to(tr.hess, batch + (n, n))
        - np.einsum("...kij,...k->...ij", gam_val,
                    np.broadcast_to(tr.grad, batch + (n,))))

    # omega_j = (div h)_j as order-1 jets
    omega = []
    for j in range(n):
        acc = None
        for i in range(n):
            for k in range(n):
                cov = H[i][j].partial(k)
                for m in range(n):
                    cov = cov - mj.gamma[m][k][i].truncate(1) * \
                        H[m][j].truncate(1)
                    cov = cov - mj.gamma[m][k][j].truncate(1) * \
                        H[i][m].truncate(1)
                t = mj.ginv[i][k].truncate(1) * cov
                acc = t if acc is None else acc + t
        omega.append(acc)

    divdiv = np.zeros(batch)
    for j in range(n):
        for l in range(n):
            v = omega[j].grad[..., l]
            for m in range(n):
                v = v - mj.gamma[m][l][j].value * omega[m].value
            divdiv = divdiv + ginv_val[..., j, l] * np.broadcast_to(v, batch)

    ric_val = np.zeros(batch + (n, n))
    h_val = np.zeros(batch + (n, n))
    for i in range(n):
        for j in range(n):
            ric_val[..., i, j] = np.broadcast_to(ric[i][j].value, batch)
            h_val[..., i, j] = np.broadcast_to(H[i][j].value, batch)
    inner = sym2_inner(ginv_val, h_val, ric_val)
    return -lap_tr + divdiv - inner


def ds_star(g: ChartMetric, w: ScalarField, x: np.ndarray) -> np.ndarray:
    """DS*(w) = -(Delta w) g + Hess w - w Ric at the points x."""
    n = g.dim
    x = np.asarray(x, dtype=float)
    mj = g.jets(x, 2)
    batch = np.shape(mj.det.value)
    wj = w.jet(x, 2)
    ric, _ = ricci_jets(mj)

    gam_val = mj.gamma_values()
    g_val = mj.g_values()
    ginv_val = mj.ginv_values()
    hess = (np.broadcast_to(wj.hess, batch + (n, n))
            - np.einsum("...kij,...k->...ij", gam_val,
                        np.broadcast_to(wj.grad, batch + (n,))))
    lap = np.einsum("...ij,...ij->...", ginv_val, hess)
    ric_val = np.zeros(batch + (n, n))
    for i in range(n):
        for j in range(n):
            ric_val[..., i, j] = np.broadcast_to(ric[i][j].value, batch)
    wv = np.broadcast_to(wj.value, batch)
    return (-lap[..., None, None] * g_val + hess
            - wv[..., None, None] * ric_val)


def trace_ds_star(g: ChartMetric, w: ScalarField, x: np.ndarray) -> np.ndarray:
    mj = g.jets(x, 0)
    out = ds_star(g, w, x)
    return np.einsum("...ij,...ij->...", mj.ginv_values(), out)


def static_residual(g: ChartMetric, w: ScalarField, x: np.ndarray) -> float:
    """sup_x |DS*(w)|_g; ~0 certifies w as a static potential."""
    mj = g.jets(x, 0)
    v = ds_star(g, w, x)
    return float(np.sqrt(np.max(np.maximum(
        sym2_norm2(mj.ginv_values(), v), 0.0))))


def conformal_killing_residual(g: ChartMetric, X: VectorField,
                               x: np.ndarray) -> float:
    """sup_x |sym(nabla eta) - (div X / n) g|_g."""
    n = g.dim
    vc = vector_calc(g, X, x)
    gv = g.values(x)
    mjinv = np.linalg.inv(gv)
    dev = vc.beta - (vc.divergence / n)[..., None, None] * gv
    return float(np.sqrt(np.max(np.maximum(sym2_norm2(mjinv, dev), 0.0))))


# ---------------------------------------------------------------------------
# shape-operator variation in the adapted chart


@dataclass
class ShapeVariation:
    """First variation data of the boundary geometry along g + t h."""

    u: np.ndarray
    a_prime: np.ndarray        # A'(0)_{ab} (B, n-1, n-1), tangential indices
    dh_values: np.ndarray      # DH(h) = tr_gamma A'(0) per node
    h_nn: np.ndarray           # normal-normal component of h on the boundary
    tangential_sup: float      # sup |h restricted to the tangent space|


def shape_operator_variation(g: ChartMetric, comp: BoundaryComponent,
                             u: np.ndarray, h: Sym2Field,
                             bb=None, require_tangential_zero: bool = True,
                             tangential_tol: float = 1e-9) -> ShapeVariation:
    """A'(0) along g + t h for boundary deformations with h|_{T Sigma} = 0.

    Computed in the adapted chart Phi(u, s) = x(u) + s nu(u):

        A'_{ab} = -1/2 (h_{nb;a} + h_{an;b} - h_{ab;n}) + 1/2 A_{ab} h_{nn},

    all covariant derivatives taken in the pulled-back background metric.
    """
    n = g.dim
    u = np.atleast_2d(np.asarray(u, dtype=float))
    if bb is None:
        bb = boundary_bundle(g, comp, u, with_intrinsic=False)

    phi = adapted_chart_jets(g, comp, u)
    gt = pullback_sym2_jets(g.field, phi, 1)
    ht = pullback_sym2_jets(h, phi, 1)
    gtinv = jet_matrix_inverse(gt)
    gam = christoffel_jets(gt, gtinv)   # value-level jets (order 0)

    B = u.shape[0]
    hval = np.zeros((B, n, n))
    for i in range(n):
        for j in range(n):
            hval[:, i, j] = np.broadcast_to(ht[i][j].value, (B,))
    tang_sup = float(np.max(np.abs(hval[:, : n - 1, : n - 1])))
    scale = max(1.0, float(np.max(np.abs(hval))))
    if require_tangential_zero and tang_sup > tangential_tol * scale:
        raise PreconditionError(
            "shape-operator variation formula needs h|_{T Sigma} = 0; "
            f"tangential sup {tang_sup:.3e}")

    # covariant derivative values h_{ij;k}
    cov = np.zeros((B, n, n, n))  # (B, i, j, k)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                v = ht[i][j].grad[..., k]
                for m in range(n):
                    v = v - gam[m][k][i].value * ht[m][j].value
                    v = v - gam[m][k][j].value * ht[i][m].value
                cov[:, i, j, k] = np.broadcast_to(v, (B,))

    nn = n - 1
    h_nn = hval[:, nn, nn]
    a_prime = np.zeros((B, nn, nn))
    for a in range(nn):
        for b in range(nn):
            a_prime[:, a, b] = (-0.5 * (cov[:, nn, b, a] + cov[:, a, nn, b]
                                        - cov[:, a, b, nn])
                                + 0.5 * bb.shape[:, a, b] * h_nn)
    dh_vals = np.einsum("...ab,...ab->...", bb.gamma_inv, a_prime)
    return ShapeVariation(u=u, a_prime=a_prime, dh_values=dh_vals,
                          h_nn=h_nn, tangential_sup=tang_sup)


def dh(g: ChartMetric, comp: BoundaryComponent, u: np.ndarray,
       h: Sym2Field, bb=None) -> np.ndarray:
    """DH(h) per boundary node (h tangentially zero on the component)."""
    return shape_operator_variation(g, comp, u, h, bb=bb).dh_values


# ---------------------------------------------------------------------------
# structural identity residuals (pointwise)


def kernel_identity_residuals(g: ChartMetric, lam: float, X: VectorField,
                              x: np.ndarray) -> dict:
    """For a conformal Killing X on a background with space-form scalar
    curvature normalization lam: residuals of

      (i)  tr_g DS*(div X) = 0
      (ii) DS*(div X) = -n/(n-2) [ L_X G + (n-2)/n (div X) G ]

    returned as sup norms over the points x."""
    n = g.dim
    x = np.asarray(x, dtype=float)
    w = DivergenceField(g, X)
    out = ds_star(g, w, x)
    mj = g.jets(x, 0)
    ginv = mj.ginv_values()
    tr = np.einsum("...ij,...ij->...", ginv, out)

    Gf = EinsteinLambdaField(g, lam)
    b = curvature_bundle(g, x)
    Gv = b.einstein_lambda(lam)
    lie_G = lie_sym2(Gf, X, x)
    f = vector_calc(g, X, x).divergence
    rhs = -(n / (n - 2.0)) * (lie_G + ((n - 2.0) / n) * f[..., None, None] * Gv)
    resid2 = out - rhs
    return {
        "trace": float(np.max(np.abs(tr))),
        "tensor": float(np.sqrt(np.max(np.maximum(
            sym2_norm2(ginv, resid2), 0.0)))),
        "ds_star_sup": float(np.sqrt(np.max(np.maximum(
            sym2_norm2(ginv, out), 0.0)))),
    }


def kernel_identity_general_residuals(g: ChartMetric, lam: float,
                                      X: VectorField, x: np.ndarray) -> dict:
    """The two conformal-Killing identities without the space-form
    normalization of the scalar curvature.  With f = div X and v = f/n,

      (i)  tr_g DS*(f) = (n/2) X(S)
      (ii) L_X G + (n-2)/n f G = -(n-2)/n DS*(f) + 1/n tr_g(DS*(f)) g
             - [ (n-2)/2 v (S - lam n(n-1)) + X(S)/2 ] g.

    The bracketed correction vanishes identically when S == lam n(n-1),
    where both statements reduce pointwise to kernel_identity_residuals';
    its sup norm is returned alongside the residuals."""
    n = g.dim
    x = np.asarray(x, dtype=float)
    w = DivergenceField(g, X)
    dsw = ds_star(g, w, x)
    mj = g.jets(x, 0)
    ginv = mj.ginv_values()
    g_val = mj.g_values()
    tr_dsw = np.einsum("...ij,...ij->...", ginv, dsw)
    batch = np.shape(tr_dsw)

    sj = ScalarCurvatureField(g).jet(x, 1)
    s_val = np.broadcast_to(sj.value, batch)
    xs = np.einsum("...i,...i->...", X.values(x),
                   np.broadcast_to(sj.grad, batch + (n,)))
    f = vector_calc(g, X, x).divergence
    v = f / n

    Gf = EinsteinLambdaField(g, lam)
    b = curvature_bundle(g, x)
    Gv = b.einstein_lambda(lam)
    lie_G = lie_sym2(Gf, X, x)
    corr = 0.5 * (n - 2.0) * v * (s_val - lam * n * (n - 1.0)) + 0.5 * xs
    rhs = (-((n - 2.0) / n) * dsw
           + ((tr_dsw / n - corr))[..., None, None] * g_val)
    resid2 = lie_G + ((n - 2.0) / n) * f[..., None, None] * Gv - rhs
    return {
        "trace": float(np.max(np.abs(tr_dsw - 0.5 * n * xs))),
        "tensor": float(np.sqrt(np.max(np.maximum(
            sym2_norm2(ginv, resid2), 0.0)))),
        "correction_sup": float(np.max(np.abs(corr))),
    }


def conformal_inner_identity_residual(g: ChartMetric, lam: float,
                                      X: VectorField, h: Sym2Field,
                                      x: np.ndarray) -> float:
    """Residual of
      <L_X G, h> = -<G, L_X h> + (4/n) (div X) <G, h> + X<G, h>
    (requires only that X be conformal Killing)."""
    n = g.dim
    x = np.asarray(x, dtype=float)
    b = curvature_bundle(g, x)
    Gv = b.einstein_lambda(lam)
    Gf = EinsteinLambdaField(g, lam)
    hv = h.values(x)
    lie_G = lie_sym2(Gf, X, x)
    lie_h = lie_sym2(h, X, x)
    f = vector_calc(g, X, x).divergence
    inner_Gh_jet = EinsteinInnerField(g, lam, h).jet(x, 1)
    Xv = X.values(x)
    x_of_inner = np.einsum("...k,...k->...",
                           np.broadcast_to(inner_Gh_jet.grad,
                                           Xv.shape), Xv)
    lhs = sym2_inner(b.ginv, lie_G, hv)
    rhs = (-sym2_inner(b.ginv, Gv, lie_h)
           + (4.0 / n) * f * np.broadcast_to(inner_Gh_jet.value, f.shape)
           + x_of_inner)
    return float(np.max(np.abs(lhs - rhs)))


def transport_identity_residual(g: ChartMetric, lam: float, X: VectorField,
                                x: np.ndarray) -> float:
    """Residual of (1/2) X(|G|^2) + (div X) |G|^2 = 0, which holds when
    div X lies in the kernel of DS*."""
    x = np.asarray(x, dtype=float)
    j = GNormSquaredField(g, lam).jet(x, 1)
    Xv = X.values(x)
    xg = np.einsum("...k,...k->...", np.broadcast_to(j.grad, Xv.shape), Xv)
    f = vector_calc(g, X, x).divergence
    return float(np.max(np.abs(0.5 * xg + f * np.broadcast_to(j.value, f.shape))))


def normal_killing_mean_curvature_residual(g: ChartMetric,
                                           comp: BoundaryComponent,
                                           u: np.ndarray, X: VectorField):
    """For a nonvanishing conformal Killing X normal to the component:
    the component must be umbilic with H = (n-1)/n (div X) / <X, nu>.

    Returns (umbilicity defect, sup |H - predicted|, sup tangential part
    of X) for hypothesis auditing."""
    n = g.dim
    bb = boundary_bundle(g, comp, u, with_intrinsic=False)
    Xv = X.values(bb.x)
    xdotnu = np.einsum("...i,...i->...", bb.nu_cov, Xv)
    # tangential part: X - <X,nu> nu
    tang = Xv - xdotnu[..., None] * bb.nu
    tang_norm = np.sqrt(np.maximum(
        np.einsum("...ij,...i,...j->...", bb.ambient_g, tang, tang), 0.0))
    f = vector_calc(g, X, bb.x).divergence
    predicted = ((n - 1.0) / n) * f / xdotnu
    from .boundary import umbilicity_defect
    return (umbilicity_defect(bb),
            float(np.max(np.abs(bb.mean_curvature - predicted))),
            float(np.max(tang_norm)))
