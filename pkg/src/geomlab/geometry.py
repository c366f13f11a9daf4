"""Chart metrics and exact curvature via jet arithmetic.

Conventions (fixed once, verified by the test suite):

* Riemann:   R^l_ijk = d_j Gamma^l_ik - d_k Gamma^l_ij
                       + Gamma^l_jm Gamma^m_ik - Gamma^l_km Gamma^m_ij
* Ricci:     Ric_ik = R^j_ijk;  scalar S = g^ik Ric_ik.
  With these signs the unit round sphere has S = n(n-1) > 0.
* Covariant derivative of a covector: eta_{i;j} = d_j eta_i - Gamma^k_ji eta_k.
* All 2-tensors are stored fully covariant.

The modified Einstein tensor used throughout is

    G_lam = Ric - 1/2 [S - lam (n-1)(n-2)] g,

whose g-trace is -(n-2)/2 [S - lam n(n-1)]; it vanishes exactly when the
scalar curvature is the space-form value lam n(n-1), and G_lam is
divergence free for every lam by the contracted differential Bianchi
identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import SingularMetricError
from .fields import ScalarField, Sym2Field, VectorField
from .jets import Jet, jet_matrix_det, jet_matrix_inverse

__all__ = [
    "ChartMetric", "MetricJets", "CurvatureBundle",
    "metric_jets", "christoffel_jets", "ricci_jets", "curvature_bundle",
    "RicciField", "EinsteinLambdaField", "ScalarCurvatureField",
    "GNormSquaredField", "DivergenceField", "EinsteinInnerField",
    "VectorCalcBundle", "vector_calc", "lie_metric", "lie_sym2",
    "covariant_hessian", "laplacian", "divergence_sym2",
    "sym2_inner", "sym2_norm2", "sym2_trace", "lower_vector",
    "einstein_normalization",
]


def einstein_normalization(n: int, lam: float) -> float:
    """The constant kappa with G_lam = Ric - (S - kappa)/2 * g."""
    return lam * (n - 1) * (n - 2)


class ChartMetric:
    """A Riemannian metric presented by its covariant components on one
    coordinate chart."""

    def __init__(self, dim: int, field: Sym2Field, name: str = ""):
        self.dim = dim
        self.field = field
        self.name = name

    def jets(self, x: np.ndarray, order: int) -> "MetricJets":
        return metric_jets(self, x, order)

    def values(self, x: np.ndarray) -> np.ndarray:
        return self.field.values(x)

    def check_positive_definite(self, x: np.ndarray, tol: float = 1e-12):
        g = self.values(x)
        ev = np.linalg.eigvalsh(g)
        if np.min(ev) <= tol:
            raise SingularMetricError(
                f"metric '{self.name}' not positive definite: "
                f"min eigenvalue {np.min(ev):.3e}")
        return float(np.min(ev))


@dataclass
class MetricJets:
    """Jets of g, g^{-1}, det g and Christoffel symbols at a batch of
    points.  Christoffel jets carry one order less than the metric jets."""

    dim: int
    order: int
    g: list                 # [i][j] -> Jet
    ginv: list               # [i][j] -> Jet
    det: Jet
    gamma: list              # [k][i][j] -> Jet, order-1

    def gamma_values(self) -> np.ndarray:
        n = self.dim
        batch = np.shape(self.det.value)
        out = np.zeros(batch + (n, n, n))
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    out[..., k, i, j] = np.broadcast_to(
                        self.gamma[k][i][j].value, batch)
        return out

    def g_values(self) -> np.ndarray:
        return _mat_values(self.g, self.dim, np.shape(self.det.value))

    def ginv_values(self) -> np.ndarray:
        return _mat_values(self.ginv, self.dim, np.shape(self.det.value))


def _mat_values(m, n, batch) -> np.ndarray:
    out = np.zeros(batch + (n, n))
    for i in range(n):
        for j in range(n):
            out[..., i, j] = np.broadcast_to(m[i][j].value, batch)
    return out


def metric_jets(g: ChartMetric, x: np.ndarray, order: int) -> MetricJets:
    n = g.dim
    G = g.field.jet(x, order)
    Ginv = jet_matrix_inverse(G)
    det = jet_matrix_det(G)
    if np.any(det.value <= 0.0):
        raise SingularMetricError(
            f"metric '{g.name}': non-positive determinant encountered")
    gamma = christoffel_jets(G, Ginv) if order >= 1 else None
    return MetricJets(n, order, G, Ginv, det, gamma)


def christoffel_jets(G, Ginv) -> list:
    """Gamma^k_ij as jets one order below the metric jets."""
    n = len(G)
    dG = [[[G[i][j].partial(k) for j in range(n)] for i in range(n)]
          for k in range(n)]  # dG[k][i][j] = d_k g_ij
    m1 = G[0][0].order - 1
    gamma = [[[None] * n for _ in range(n)] for _ in range(n)]
    for k in range(n):
        for i in range(n):
            for j in range(i, n):
                acc = None
                for l in range(n):
                    term = Ginv[k][l].truncate(m1) * (
                        dG[i][l][j] + dG[j][i][l] - dG[l][i][j])
                    acc = term if acc is None else acc + term
                acc = acc * 0.5
                gamma[k][i][j] = acc
                gamma[k][j][i] = acc
    return gamma


def ricci_jets(mj: MetricJets):
    """(Ricci jets matrix, scalar-curvature jet); two orders below the
    metric jets."""
    n = mj.dim
    m2 = mj.order - 2
    if m2 < 0:
        raise ValueError("need metric jets of order >= 2 for curvature")
    gam = mj.gamma
    # contracted symbol C_m = Gamma^j_{jm}
    C = []
    for m in range(n):
        acc = None
        for j in range(n):
            acc = gam[j][j][m] if acc is None else acc + gam[j][j][m]
        C.append(acc)
    ric = [[None] * n for _ in range(n)]
    for i in range(n):
        for k in range(i, n):
            acc = None
            for j in range(n):
                t = gam[j][i][k].partial(j)
                acc = t if acc is None else acc + t
            acc = acc - C[i].partial(k)
            for m in range(n):
                acc = acc + C[m].truncate(m2) * gam[m][i][k].truncate(m2)
            for j in range(n):
                for m in range(n):
                    acc = acc - (gam[j][k][m].truncate(m2)
                                 * gam[m][i][j].truncate(m2))
            ric[i][k] = acc
            ric[k][i] = acc
    S = None
    for i in range(n):
        for k in range(n):
            t = mj.ginv[i][k].truncate(m2) * ric[i][k]
            S = t if S is None else S + t
    return ric, S


def einstein_lambda_jets(mj: MetricJets, lam: float):
    """G_lam = Ric - (S - kappa)/2 g as jets (metric order - 2)."""
    n = mj.dim
    ric, S = ricci_jets(mj)
    kappa = einstein_normalization(n, lam)
    half = (S - kappa) * 0.5
    out = [[ric[i][j] - half * mj.g[i][j].truncate(S.order)
            for j in range(n)] for i in range(n)]
    return out, ric, S


@dataclass
class CurvatureBundle:
    """Pointwise curvature data at a batch of chart points."""

    x: np.ndarray
    dim: int
    g: np.ndarray           # (..., n, n)
    ginv: np.ndarray
    det_g: np.ndarray
    sqrt_det_g: np.ndarray
    gamma: np.ndarray       # (..., k, i, j) = Gamma^k_ij
    riem: np.ndarray        # covariant R_ijkl
    ric: np.ndarray
    scal: np.ndarray

    def einstein_lambda(self, lam: float) -> np.ndarray:
        kappa = einstein_normalization(self.dim, lam)
        return self.ric - 0.5 * (self.scal - kappa)[..., None, None] * self.g

    def trace_einstein_lambda(self, lam: float) -> np.ndarray:
        n = self.dim
        return -0.5 * (n - 2) * (self.scal - lam * n * (n - 1))


def curvature_bundle(g: ChartMetric, x: np.ndarray) -> CurvatureBundle:
    """Values of Gamma, Riemann, Ricci, scalar curvature at points x."""
    x = np.asarray(x, dtype=float)
    n = g.dim
    mj = metric_jets(g, x, 2)
    batch = np.shape(mj.det.value)

    gam = np.zeros(batch + (n, n, n))
    dgam = np.zeros(batch + (n, n, n, n))  # (..., m, k, i, j) = d_m Gamma^k_ij
    for k in range(n):
        for i in range(n):
            for j in range(n):
                jet = mj.gamma[k][i][j]
                gam[..., k, i, j] = np.broadcast_to(jet.value, batch)
                dgam[..., :, k, i, j] = np.broadcast_to(jet.grad, batch + (n,))

    quad = np.einsum("...ljm,...mik->...lijk", gam, gam)
    riem_up = (np.einsum("...jlik->...lijk", dgam)
               - np.einsum("...klij->...lijk", dgam)
               + quad - np.swapaxes(quad, -1, -2))
    gv = mj.g_values()
    ginv = mj.ginv_values()
    riem = np.einsum("...im,...mjkl->...ijkl", gv, riem_up)
    ric = np.einsum("...jijk->...ik", riem_up)
    scal = np.einsum("...ik,...ik->...", ginv, ric)
    det = np.broadcast_to(mj.det.value, batch).copy()
    return CurvatureBundle(x=x, dim=n, g=gv, ginv=ginv, det_g=det,
                           sqrt_det_g=np.sqrt(det), gamma=gam,
                           riem=riem, ric=ric, scal=scal)


# ---------------------------------------------------------------------------
# curvature-derived fields (support jets of order <= 1)


class RicciField(Sym2Field):
    def __init__(self, metric: ChartMetric):
        self.dim = metric.dim
        self.metric = metric

    def jet(self, x, order):
        mj = self.metric.jets(x, order + 2)
        ric, _ = ricci_jets(mj)
        return ric


class EinsteinLambdaField(Sym2Field):
    """G_lam = Ric - (S - lam(n-1)(n-2))/2 g as a tensor field."""

    def __init__(self, metric: ChartMetric, lam: float):
        self.dim = metric.dim
        self.metric = metric
        self.lam = lam

    def jet(self, x, order):
        mj = self.metric.jets(x, order + 2)
        out, _, _ = einstein_lambda_jets(mj, self.lam)
        return out


class ScalarCurvatureField(ScalarField):
    def __init__(self, metric: ChartMetric):
        self.dim = metric.dim
        self.metric = metric

    def jet(self, x, order):
        mj = self.metric.jets(x, order + 2)
        _, S = ricci_jets(mj)
        return S


class GNormSquaredField(ScalarField):
    """|G_lam|_g^2 as a scalar field (jets of order <= 1)."""

    def __init__(self, metric: ChartMetric, lam: float):
        self.dim = metric.dim
        self.metric = metric
        self.lam = lam

    def jet(self, x, order):
        n = self.dim
        mj = self.metric.jets(x, order + 2)
        G, _, _ = einstein_lambda_jets(mj, self.lam)
        m = G[0][0].order
        acc = None
        for i in range(n):
            for k in range(n):
                for j in range(n):
                    for l in range(n):
                        t = (mj.ginv[i][k].truncate(m) * mj.ginv[j][l].truncate(m)
                             * G[i][j] * G[k][l])
                        acc = t if acc is None else acc + t
        return acc


class EinsteinInnerField(ScalarField):
    """<G_lam, h>_g as a scalar field for a given symmetric h."""

    def __init__(self, metric: ChartMetric, lam: float, h: Sym2Field):
        self.dim = metric.dim
        self.metric = metric
        self.lam = lam
        self.h = h

    def jet(self, x, order):
        n = self.dim
        mj = self.metric.jets(x, order + 2)
        G, _, _ = einstein_lambda_jets(mj, self.lam)
        m = G[0][0].order
        H = self.h.jet(x, min(order, m))
        acc = None
        for i in range(n):
            for k in range(n):
                for j in range(n):
                    for l in range(n):
                        t = (mj.ginv[i][k].truncate(m) * mj.ginv[j][l].truncate(m)
                             * G[i][j] * H[k][l].truncate(m))
                        acc = t if acc is None else acc + t
        return acc


class DivergenceField(ScalarField):
    """div_g X = g^{ij} eta_{i;j} as a scalar field (jets of order <= 2)."""

    def __init__(self, metric: ChartMetric, X: VectorField):
        self.dim = metric.dim
        self.metric = metric
        self.X = X

    def jet(self, x, order):
        if order > 2:
            raise ValueError("divergence jets available up to order 2 only")
        n = self.dim
        mj = self.metric.jets(x, order + 1)
        Xj = self.X.jet(x, order + 1)
        eta = [None] * n
        for i in range(n):
            acc = None
            for j in range(n):
                t = mj.g[i][j] * Xj[j]
                acc = t if acc is None else acc + t
            eta[i] = acc
        acc = None
        for i in range(n):
            for j in range(n):
                cov = eta[i].partial(j)
                for k in range(n):
                    cov = cov - mj.gamma[k][j][i].truncate(order) * \
                        eta[k].truncate(order)
                t = mj.ginv[i][j].truncate(order) * cov
                acc = t if acc is None else acc + t
        return acc


# ---------------------------------------------------------------------------
# pointwise vector calculus


@dataclass
class VectorCalcBundle:
    """eta_i, eta_{i;j}, deformation tensor and the divergence of X,
    computed both from the covariant derivative and from the flux form."""

    eta: np.ndarray            # (..., n) covariant components
    nabla_eta: np.ndarray      # (..., i, j) = eta_{i;j}
    beta: np.ndarray           # symmetrized covariant derivative
    divergence: np.ndarray     # g^{ij} eta_{i;j}
    divergence_flux: np.ndarray  # det^{-1/2} d_i (det^{1/2} X^i)


def vector_calc(g: ChartMetric, X: VectorField, x: np.ndarray) -> VectorCalcBundle:
    n = g.dim
    mj = g.jets(x, 1)
    Xj = X.jet(x, 1)
    batch = np.shape(mj.det.value)

    eta_jets = []
    for i in range(n):
        acc = None
        for j in range(n):
            t = mj.g[i][j] * Xj[j]
            acc = t if acc is None else acc + t
        eta_jets.append(acc)

    gam = mj.gamma
    eta = np.zeros(batch + (n,))
    nab = np.zeros(batch + (n, n))
    for i in range(n):
        eta[..., i] = np.broadcast_to(eta_jets[i].value, batch)
    for i in range(n):
        for j in range(n):
            v = eta_jets[i].grad[..., j]
            for k in range(n):
                v = v - gam[k][j][i].value * eta_jets[k].value
            nab[..., i, j] = np.broadcast_to(v, batch)
    beta = 0.5 * (nab + np.swapaxes(nab, -1, -2))
    ginv = mj.ginv_values()
    div = np.einsum("...ij,...ij->...", ginv, nab)

    sq = mj.det.sqrt()
    acc = None
    for i in range(n):
        t = (sq * Xj[i]).partial(i)
        acc = t if acc is None else acc + t
    div_flux = np.broadcast_to(acc.value, batch) / sq.value
    return VectorCalcBundle(eta=eta, nabla_eta=nab, beta=beta,
                            divergence=div, divergence_flux=div_flux)


def lie_metric(g: ChartMetric, X: VectorField, x: np.ndarray) -> np.ndarray:
    """(L_X g)_ij = eta_{i;j} + eta_{j;i}."""
    vc = vector_calc(g, X, x)
    return 2.0 * vc.beta


def lie_sym2(T: Sym2Field, X: VectorField, x: np.ndarray) -> np.ndarray:
    """Coordinate Lie derivative of a covariant 2-tensor field:
    (L_X T)_ij = X^k d_k T_ij + T_kj d_i X^k + T_ik d_j X^k."""
    n = T.dim
    Tj = T.jet(x, 1)
    Xj = X.jet(x, 1)
    batch = np.broadcast_shapes(*[np.shape(Tj[i][j].value)
                                  for i in range(n) for j in range(n)],
                                *[np.shape(c.value) for c in Xj])
    out = np.zeros(batch + (n, n))
    Xv = [np.broadcast_to(c.value, batch) for c in Xj]
    dX = [np.broadcast_to(c.grad, batch + (n,)) for c in Xj]
    for i in range(n):
        for j in range(n):
            acc = np.zeros(batch)
            for k in range(n):
                acc = acc + Xv[k] * np.broadcast_to(Tj[i][j].grad[..., k], batch)
                acc = acc + np.broadcast_to(Tj[k][j].value, batch) * dX[k][..., i]
                acc = acc + np.broadcast_to(Tj[i][k].value, batch) * dX[k][..., j]
            out[..., i, j] = acc
    return out


def covariant_hessian(g: ChartMetric, f: ScalarField, x: np.ndarray) -> np.ndarray:
    n = g.dim
    mj = g.jets(x, 1)
    fj = f.jet(x, 2)
    batch = np.shape(mj.det.value)
    out = np.zeros(batch + (n, n))
    for i in range(n):
        for j in range(n):
            v = fj.hess[..., i, j]
            for k in range(n):
                v = v - mj.gamma[k][i][j].value * fj.grad[..., k]
            out[..., i, j] = np.broadcast_to(v, batch)
    return out


def laplacian(g: ChartMetric, f: ScalarField, x: np.ndarray) -> np.ndarray:
    mj = g.jets(x, 1)
    hess = covariant_hessian(g, f, x)
    return np.einsum("...ij,...ij->...", mj.ginv_values(), hess)


def divergence_sym2(g: ChartMetric, T: Sym2Field, x: np.ndarray) -> np.ndarray:
    """(div T)_j = g^{ik} T_{ij;k} at the points x."""
    n = g.dim
    mj = g.jets(x, 1)
    Tj = T.jet(x, 1)
    batch = np.shape(mj.det.value)
    gamv = mj.gamma_values()
    Tv = np.zeros(batch + (n, n))
    dT = np.zeros(batch + (n, n, n))   # (..., k, i, j) = d_k T_ij
    for i in range(n):
        for j in range(n):
            Tv[..., i, j] = np.broadcast_to(Tj[i][j].value, batch)
            dT[..., :, i, j] = np.broadcast_to(Tj[i][j].grad, batch + (n,))
    covT = (dT
            - np.einsum("...mki,...mj->...kij", gamv, Tv)
            - np.einsum("...mkj,...im->...kij", gamv, Tv))
    return np.einsum("...ik,...kij->...j", mj.ginv_values(), covT)


# ---------------------------------------------------------------------------
# small tensor-algebra helpers on plain value arrays


def sym2_inner(ginv: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("...ik,...jl,...ij,...kl->...", ginv, ginv, a, b)


def sym2_norm2(ginv: np.ndarray, a: np.ndarray) -> np.ndarray:
    return sym2_inner(ginv, a, a)


def sym2_trace(ginv: np.ndarray, a: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...ij->...", ginv, a)


def lower_vector(gv: np.ndarray, X: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...j->...i", gv, X)
