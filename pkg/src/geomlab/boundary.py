"""Boundary components as radial graphs, and their extrinsic geometry.

A boundary component is the set {x = c + rho(omega) * omega} over unit
directions omega, parametrized by hyperspherical angles
u = (theta_1 .. theta_{n-2}, phi).  Its defining function is
F(x) = |x - c| - rho((x-c)/|x-c|), so the unit normal is the normalized
metric gradient of F, oriented outward with respect to the enclosed
domain.

Second fundamental form convention:  A(T_a, T_b) = <nabla_{T_a} nu, T_b>
with nu the outward unit normal; the unit round sphere in flat space has
A = gamma and mean curvature H = n-1 > 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import SingularBoundaryError
from .fields import Sym2Field
from .jets import Jet, compose, const_jet, coordinate_jets
from .geometry import ChartMetric, curvature_bundle, metric_jets

__all__ = [
    "BoundaryComponent", "DomainSpec", "constant_rho", "ellipsoid_rho",
    "sphere_component", "ellipsoid_component", "ball_domain",
    "annulus_domain", "ellipsoid_domain",
    "direction_jets", "chart_map_jets", "BoundaryBundle", "boundary_bundle",
    "umbilicity_defect", "InducedMetricField", "induced_metric",
    "adapted_chart_jets", "normal_jets",
]


@dataclass
class BoundaryComponent:
    """One closed boundary component given as a radial graph."""

    label: str
    dim: int
    rho: Callable[[list[Jet]], Jet]   # jets of omega -> jet of rho
    center: np.ndarray
    orientation: int = +1             # +1: domain is inside (outward normal
    #                                   points away from center); -1: domain
    #                                   is outside (inner wall of an annulus)

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        if self.orientation not in (+1, -1):
            raise ValueError("orientation must be +1 or -1")


@dataclass
class DomainSpec:
    """A compact domain between an inner and an outer radial graph
    (inner may be absent: topological ball)."""

    dim: int
    outer: BoundaryComponent
    inner: Optional[BoundaryComponent] = None
    label: str = ""

    def components(self) -> list[BoundaryComponent]:
        return [self.outer] if self.inner is None else [self.outer, self.inner]


def constant_rho(radius: float) -> Callable:
    def rho(om: list[Jet]) -> Jet:
        shape = np.shape(om[0].value)
        return const_jet(np.full(shape, float(radius)), om[0].dim, om[0].order)
    return rho


def ellipsoid_rho(semiaxes) -> Callable:
    semiaxes = np.asarray(semiaxes, dtype=float)

    def rho(om: list[Jet]) -> Jet:
        acc = None
        for i, a in enumerate(semiaxes):
            t = om[i] * om[i] * (1.0 / a ** 2)
            acc = t if acc is None else acc + t
        return acc ** (-0.5)
    return rho


def sphere_component(label, dim, radius, center=None, orientation=+1):
    c = np.zeros(dim) if center is None else center
    return BoundaryComponent(label, dim, constant_rho(radius), c, orientation)


def ellipsoid_component(label, dim, semiaxes, center=None, orientation=+1):
    c = np.zeros(dim) if center is None else center
    return BoundaryComponent(label, dim, ellipsoid_rho(semiaxes), c, orientation)


def ball_domain(dim, radius, center=None, label="ball") -> DomainSpec:
    return DomainSpec(dim, sphere_component("outer", dim, radius, center), None,
                      label)


def annulus_domain(dim, r_inner, r_outer, center=None, label="annulus"):
    return DomainSpec(
        dim,
        sphere_component("outer", dim, r_outer, center, +1),
        sphere_component("inner", dim, r_inner, center, -1),
        label)


def ellipsoid_domain(dim, semiaxes, label="ellipsoid") -> DomainSpec:
    return DomainSpec(dim, ellipsoid_component("outer", dim, semiaxes), None,
                      label)


# ---------------------------------------------------------------------------
# hyperspherical parametrization


def direction_jets(u_jets: list[Jet], dim: int) -> list[Jet]:
    """Unit direction omega(u) in R^dim from dim-1 angle jets:
    omega_1 = cos t1, omega_2 = sin t1 cos t2, ...,
    omega_n = sin t1 ... sin t_{n-2} sin phi."""
    if len(u_jets) != dim - 1:
        raise ValueError("need dim-1 angles")
    out = []
    prefix = None  # running product of sines
    for k in range(dim - 1):
        ck = u_jets[k].cos()
        omega = ck if prefix is None else prefix * ck
        out.append(omega)
        sk = u_jets[k].sin()
        prefix = sk if prefix is None else prefix * sk
    out.append(prefix)
    return out


def chart_map_jets(comp: BoundaryComponent, u: np.ndarray, order: int) -> list[Jet]:
    """Jets (in the angle coordinates) of the embedding x(u) = c + rho*omega."""
    u = np.asarray(u, dtype=float)
    uj = coordinate_jets(u, order)
    om = direction_jets(uj, comp.dim)
    rho = comp.rho(om)
    return [rho * om[i] + comp.center[i] for i in range(comp.dim)]


def angular_measure(u: np.ndarray, dim: int) -> np.ndarray:
    """prod_k sin^{dim-1-k}(theta_k) for the coordinate measure on S^{dim-1}."""
    u = np.asarray(u, dtype=float)
    out = np.ones(u.shape[:-1])
    for k in range(dim - 2):
        out = out * np.sin(u[..., k]) ** (dim - 2 - k)
    return out


# ---------------------------------------------------------------------------
# normals and the boundary bundle


def defining_function_jet(comp: BoundaryComponent, xs: list[Jet]) -> Jet:
    """F = |x - c| - rho((x-c)/|x-c|) as a jet in the ambient chart."""
    n = comp.dim
    d = [xs[i] - comp.center[i] for i in range(n)]
    acc = None
    for i in range(n):
        t = d[i] * d[i]
        acc = t if acc is None else acc + t
    r = acc.sqrt()
    rinv = r.reciprocal()
    om = [d[i] * rinv for i in range(n)]
    return r - comp.rho(om)


def normal_jets(g: ChartMetric, comp: BoundaryComponent, x: np.ndarray,
                order: int = 1) -> list[Jet]:
    """Jets of the outward unit normal nu^i = sgn * g^{ij} F_j / |dF|_g,
    valid in a neighborhood of the component."""
    n = g.dim
    xs = coordinate_jets(np.asarray(x, dtype=float), order + 1)
    F = defining_function_jet(comp, xs)
    mj = g.jets(x, order)
    dF = [F.partial(i) for i in range(n)]
    grad = []
    for i in range(n):
        acc = None
        for j in range(n):
            t = mj.ginv[i][j] * dF[j]
            acc = t if acc is None else acc + t
        grad.append(acc)
    norm2 = None
    for j in range(n):
        t = grad[j] * dF[j]
        norm2 = t if norm2 is None else norm2 + t
    if np.any(norm2.value <= 0.0):
        raise SingularBoundaryError(
            f"vanishing gradient of defining function on '{comp.label}'")
    scale = norm2 ** (-0.5) * float(comp.orientation)
    return [grad[i] * scale for i in range(n)]


@dataclass
class BoundaryBundle:
    """Pointwise extrinsic/intrinsic data at boundary nodes."""

    comp: BoundaryComponent
    u: np.ndarray            # (B, n-1) angles
    x: np.ndarray            # (B, n) ambient points
    tangents: np.ndarray     # (B, n-1, n): T_a^i = d_a x^i
    gamma: np.ndarray        # induced metric (B, n-1, n-1)
    gamma_inv: np.ndarray
    sqrt_det_gamma: np.ndarray
    nu: np.ndarray           # outward unit normal, contravariant (B, n)
    nu_cov: np.ndarray       # g_ij nu^j
    shape: np.ndarray        # A_ab (B, n-1, n-1)
    shape_asym: float        # max pre-symmetrization asymmetry (diagnostic)
    mean_curvature: np.ndarray      # H = tr_gamma A
    shape_traceless: np.ndarray     # A - H/(n-1) gamma
    h2: np.ndarray           # second symmetric invariant 1/2 (H^2 - |A|^2)
    principal: np.ndarray    # kappa_1 <= ... (B, n-1)
    ambient_g: np.ndarray    # g_ij at x
    ambient_ginv: np.ndarray
    scal: np.ndarray         # ambient scalar curvature at x
    ric_nu_nu: np.ndarray    # Ric(nu, nu)
    sigma_scal: Optional[np.ndarray] = None   # intrinsic scalar curvature
    gauss_residual: Optional[np.ndarray] = None


def boundary_bundle(g: ChartMetric, comp: BoundaryComponent, u: np.ndarray,
                    with_intrinsic: bool = True) -> BoundaryBundle:
    n = g.dim
    u = np.atleast_2d(np.asarray(u, dtype=float))
    B = u.shape[0]

    xj = chart_map_jets(comp, u, 1)
    x = np.stack([np.broadcast_to(c.value, (B,)) for c in xj], axis=-1)
    T = np.stack([np.broadcast_to(c.grad, (B, n - 1)) for c in xj], axis=-1)
    # T[b, a, i] = d_a x^i

    amb = curvature_bundle(g, x)
    gv, ginv = amb.g, amb.ginv

    gamma = np.einsum("...ai,...bj,...ij->...ab", T, T, gv)
    det_gamma = np.linalg.det(gamma)
    if np.any(det_gamma <= 0.0):
        raise SingularBoundaryError(
            f"degenerate induced metric on '{comp.label}'")
    gamma_inv = np.linalg.inv(gamma)

    nuj = normal_jets(g, comp, x, order=1)
    nu = np.stack([np.broadcast_to(c.value, (B,)) for c in nuj], axis=-1)
    dnu = np.stack([np.broadcast_to(c.grad, (B, n)) for c in nuj], axis=-2)
    # dnu[b, i, k] = d_k nu^i

    # A_ab = g_ij T_a^k (d_k nu^i + Gamma^i_{km} nu^m) T_b^j
    covd_nu = dnu + np.einsum("...ikm,...m->...ik", amb.gamma, nu)
    A = np.einsum("...ij,...ak,...ik,...bj->...ab", gv, T, covd_nu, T)
    asym = float(np.max(np.abs(A - np.swapaxes(A, -1, -2))))
    A = 0.5 * (A + np.swapaxes(A, -1, -2))

    H = np.einsum("...ab,...ab->...", gamma_inv, A)
    Aring = A - H[..., None, None] * gamma / (n - 1)
    normA2 = np.einsum("...ac,...bd,...ab,...cd->...", gamma_inv, gamma_inv,
                       A, A)
    h2 = 0.5 * (H ** 2 - normA2)

    # principal curvatures: eigenvalues of gamma^{-1} A via Cholesky whitening
    L = np.linalg.cholesky(gamma)
    Ltmp = np.linalg.solve(L, A)
    Atil = np.swapaxes(np.linalg.solve(L, np.swapaxes(Ltmp, -1, -2)), -1, -2)
    kappa = np.linalg.eigvalsh(0.5 * (Atil + np.swapaxes(Atil, -1, -2)))

    ric_nn = np.einsum("...ij,...i,...j->...", amb.ric, nu, nu)

    bb = BoundaryBundle(
        comp=comp, u=u, x=x, tangents=T, gamma=gamma, gamma_inv=gamma_inv,
        sqrt_det_gamma=np.sqrt(det_gamma), nu=nu,
        nu_cov=np.einsum("...ij,...j->...i", gv, nu),
        shape=A, shape_asym=asym, mean_curvature=H, shape_traceless=Aring,
        h2=h2, principal=kappa, ambient_g=gv, ambient_ginv=ginv,
        scal=amb.scal, ric_nu_nu=ric_nn)

    if with_intrinsic and n >= 3:
        sig = ChartMetric(n - 1, InducedMetricField(g, comp),
                          f"induced-{comp.label}")
        sb = curvature_bundle(sig, u)
        bb.sigma_scal = sb.scal
        bb.gauss_residual = sb.scal - (bb.scal - 2.0 * ric_nn + 2.0 * h2)
    return bb


def umbilicity_defect(bb: BoundaryBundle) -> float:
    """sup |A - H/(n-1) gamma|_gamma over the given nodes."""
    n2 = np.einsum("...ac,...bd,...ab,...cd->...", bb.gamma_inv, bb.gamma_inv,
                   bb.shape_traceless, bb.shape_traceless)
    return float(np.sqrt(np.max(np.maximum(n2, 0.0))))


class InducedMetricField(Sym2Field):
    """Pullback of the ambient metric to a boundary component, as a field
    on the angle chart; gives the intrinsic geometry of the component."""

    def __init__(self, g: ChartMetric, comp: BoundaryComponent):
        self.dim = comp.dim - 1
        self.g = g
        self.comp = comp

    def jet(self, u, order):
        n = self.comp.dim
        xj = chart_map_jets(self.comp, u, order + 1)
        x = np.stack([np.broadcast_to(c.value, np.shape(xj[0].value))
                      for c in xj], axis=-1)
        gj = self.g.field.jet(x, order)        # jets in ambient coords at x(u)
        dx = [[xj[i].partial(a) for a in range(n - 1)] for i in range(n)]
        out = [[None] * (n - 1) for _ in range(n - 1)]
        for a in range(n - 1):
            for b in range(a, n - 1):
                acc = None
                for i in range(n):
                    for j in range(n):
                        gij_u = compose(gj[i][j], xj)
                        t = gij_u * dx[i][a] * dx[j][b]
                        acc = t if acc is None else acc + t
                out[a][b] = acc
                out[b][a] = acc
        return out


def induced_metric(g: ChartMetric, comp: BoundaryComponent) -> ChartMetric:
    return ChartMetric(comp.dim - 1, InducedMetricField(g, comp),
                       f"induced-{comp.label}")


# ---------------------------------------------------------------------------
# adapted (tubular) chart along a boundary component


def adapted_chart_jets(g: ChartMetric, comp: BoundaryComponent,
                       u: np.ndarray) -> list[Jet]:
    """Jets of Phi^i(u, s) = x^i(u) + s nu^i(u) at s = 0, to second order
    in the n variables (u_1..u_{n-1}, s).

    The pullback of g under Phi gives a chart in which the last coordinate
    direction is the outward unit normal at s=0 (g~^{nn} = 1 there), the
    standard setup for comparing shape-operator formulas index by index.
    """
    n = comp.dim
    u = np.atleast_2d(np.asarray(u, dtype=float))
    B = u.shape[0]

    xj = chart_map_jets(comp, u, 2)
    x = np.stack([np.broadcast_to(c.value, (B,)) for c in xj], axis=-1)
    nu_x = normal_jets(g, comp, x, order=1)      # jets in ambient coords
    nu_u = [compose(nu_x[i], [c.truncate(1) for c in xj]) for i in range(n)]

    out = []
    for i in range(n):
        val = np.broadcast_to(xj[i].value, (B,)).copy()
        grad = np.zeros((B, n))
        grad[:, : n - 1] = np.broadcast_to(xj[i].grad, (B, n - 1))
        grad[:, n - 1] = np.broadcast_to(nu_u[i].value, (B,))
        hess = np.zeros((B, n, n))
        hess[:, : n - 1, : n - 1] = np.broadcast_to(xj[i].hess, (B, n - 1, n - 1))
        dnu = np.broadcast_to(nu_u[i].grad, (B, n - 1))
        hess[:, : n - 1, n - 1] = dnu
        hess[:, n - 1, : n - 1] = dnu
        out.append(Jet(n, [val, grad, hess]))
    return out


def pullback_sym2_jets(T: Sym2Field, phi: list[Jet], order: int):
    """Jets of the pullback (Phi^* T)_{kl} = T_ij(Phi) d_k Phi^i d_l Phi^j."""
    n = len(phi)
    B = np.shape(phi[0].value)
    x = np.stack([np.broadcast_to(c.value, B) for c in phi], axis=-1)
    Tj = T.jet(x, order)
    dphi = [[phi[i].partial(k).truncate(order) for k in range(n)]
            for i in range(n)]
    out = [[None] * n for _ in range(n)]
    for k in range(n):
        for l in range(k, n):
            acc = None
            for i in range(n):
                for j in range(n):
                    t = compose(Tj[i][j], phi) * dphi[i][k] * dphi[j][l]
                    acc = t if acc is None else acc + t
            out[k][l] = acc
            out[l][k] = acc
    return out
