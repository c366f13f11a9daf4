"""Built-in model geometries: chart metric + domain + certified extras.

Every model is shipped with the symmetry data the checks rely on --
conformal Killing fields, known kernel elements of DS* ("static
potentials"), the space-form normalization lam -- and each instance
re-certifies those declarations numerically at build time, raising
ModelRejectedError if anything fails.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from .boundary import (DomainSpec, annulus_domain, ball_domain,
                       ellipsoid_domain)
from .errors import ConfigError, ModelRejectedError
from .fields import (ConstantScalarField, ExprScalarField, ExprVectorField,
                     EuclideanSym2Field, ScalarField, Sym2Field, Univariate,
                     UnivariateCallable, UnivariateFromExpr, VectorField,
                     conformal_flat_metric_field, polynomial_profile,
                     position_field, profile_of_jet, radial_vector_field,
                     radius_jet)
from .geometry import ChartMetric, curvature_bundle, vector_calc
from .jets import const_jet, coordinate_jets
from .operators import conformal_killing_residual, static_residual
from .quadrature import sample_interior

__all__ = ["Model", "make_model", "model_names", "MODEL_BUILDERS",
           "certify_model", "warped_christoffel_residuals",
           "warped_deformation_residuals", "warp_candidate_profiles",
           "classify_conformal_candidates"]


@dataclass
class Model:
    name: str
    dim: int
    lam: float
    metric: ChartMetric
    domain: DomainSpec
    cks: dict                      # name -> VectorField (conformal Killing)
    statics: dict                  # name -> ScalarField (kernel of DS*)
    lapse_name: Optional[str]      # distinguished positive static potential
    satisfies_a1: bool             # S identically lam n(n-1)
    einstein: bool                 # G_lam identically zero
    mass_expected: Optional[float] = None
    conformal_radial_factor: Optional[Univariate] = None  # g = w(r)^2 delta
    warp_profile: Optional[Univariate] = None
    extra_charts: dict = dc_field(default_factory=dict)
    params: dict = dc_field(default_factory=dict)

    @property
    def primary_ck(self) -> VectorField:
        return self.cks[self.params.get("primary_ck", "dilation")]

    def lapse(self) -> Optional[ScalarField]:
        return None if self.lapse_name is None else self.statics[self.lapse_name]


# ---------------------------------------------------------------------------
# shared scalar-expression helpers


def _r2(xs):
    acc = None
    for c in xs:
        t = c * c
        acc = t if acc is None else acc + t
    return acc


def _rotation_field(dim, axis=2):
    i, j = [k for k in range(3) if k != axis][:2]

    def fn(xs):
        out = [xs[k] * 0.0 for k in range(dim)]
        out[i] = -xs[j]
        out[j] = xs[i]
        return out
    return ExprVectorField(dim, fn)


def _unit_profile():
    return UnivariateCallable(lambda r: np.ones_like(r),
                              lambda r: np.zeros_like(r),
                              lambda r: np.zeros_like(r),
                              lambda r: np.zeros_like(r))


# ---------------------------------------------------------------------------
# flat family


def _flat_statics(dim):
    out = {"one": ConstantScalarField(dim, 1.0)}
    for i in range(dim):
        out[f"coord-{i}"] = ExprScalarField(dim, lambda xs, i=i: xs[i] * 1.0)
    return out


def _build_flat_ball(dim=3, radius=1.0, **_):
    g = ChartMetric(dim, EuclideanSym2Field(dim), "flat")
    return Model(
        name="flat-ball", dim=dim, lam=0.0, metric=g,
        domain=ball_domain(dim, radius),
        cks={"dilation": position_field(dim), "rotation-z": _rotation_field(dim)},
        statics=_flat_statics(dim), lapse_name="one",
        satisfies_a1=True, einstein=True, mass_expected=0.0,
        conformal_radial_factor=_unit_profile(),
        params={"radius": radius})


def _build_flat_annulus(dim=3, r_inner=0.5, r_outer=1.0, **_):
    g = ChartMetric(dim, EuclideanSym2Field(dim), "flat")
    return Model(
        name="flat-annulus", dim=dim, lam=0.0, metric=g,
        domain=annulus_domain(dim, r_inner, r_outer),
        cks={"dilation": position_field(dim), "rotation-z": _rotation_field(dim)},
        statics=_flat_statics(dim), lapse_name="one",
        satisfies_a1=True, einstein=True, mass_expected=0.0,
        conformal_radial_factor=_unit_profile(),
        params={"r_inner": r_inner, "r_outer": r_outer})


def _build_flat_ellipsoid(dim=3, semiaxes=(1.5, 1.0, 1.0), **_):
    g = ChartMetric(dim, EuclideanSym2Field(dim), "flat")
    return Model(
        name="flat-ellipsoid", dim=dim, lam=0.0, metric=g,
        domain=ellipsoid_domain(dim, semiaxes),
        cks={"dilation": position_field(dim)},
        statics=_flat_statics(dim), lapse_name="one",
        satisfies_a1=True, einstein=True,
        params={"semiaxes": tuple(semiaxes)})


# ---------------------------------------------------------------------------
# conformally flat space forms


def _build_sphere_cap(dim=3, geodesic_radius=0.5, **_):
    # round metric of curvature +1 in the stereographic chart; the chart
    # ball of radius tan(rho/2) is the geodesic ball of radius rho
    def factor(xs):
        return 2.0 / (1.0 + _r2(xs))

    g = ChartMetric(dim, conformal_flat_metric_field(dim, factor, 2.0),
                    "round-sphere")
    chart_radius = float(np.tan(geodesic_radius / 2.0))
    statics = {
        "height": ExprScalarField(
            dim, lambda xs: (1.0 - _r2(xs)) / (1.0 + _r2(xs))),
    }
    for i in range(dim):
        statics[f"ambient-{i}"] = ExprScalarField(
            dim, lambda xs, i=i: 2.0 * xs[i] / (1.0 + _r2(xs)))
    w = UnivariateFromExpr(lambda r: 2.0 * (1.0 + r * r).reciprocal())
    return Model(
        name="sphere-cap", dim=dim, lam=1.0, metric=g,
        domain=ball_domain(dim, chart_radius),
        cks={"dilation": position_field(dim), "rotation-z": _rotation_field(dim)},
        statics=statics, lapse_name="height",
        satisfies_a1=True, einstein=True,
        conformal_radial_factor=w,
        params={"geodesic_radius": geodesic_radius,
                "chart_radius": chart_radius})


def _build_hyperbolic_ball(dim=3, chart_radius=0.5, **_):
    def factor(xs):
        return 2.0 / (1.0 - _r2(xs))

    g = ChartMetric(dim, conformal_flat_metric_field(dim, factor, 2.0),
                    "hyperbolic")
    statics = {
        "height": ExprScalarField(
            dim, lambda xs: (1.0 + _r2(xs)) / (1.0 - _r2(xs))),
    }
    for i in range(dim):
        statics[f"ambient-{i}"] = ExprScalarField(
            dim, lambda xs, i=i: 2.0 * xs[i] / (1.0 - _r2(xs)))
    w = UnivariateFromExpr(lambda r: 2.0 * (1.0 - r * r).reciprocal())
    return Model(
        name="hyperbolic-ball", dim=dim, lam=-1.0, metric=g,
        domain=ball_domain(dim, chart_radius),
        cks={"dilation": position_field(dim), "rotation-z": _rotation_field(dim)},
        statics=statics, lapse_name="height",
        satisfies_a1=True, einstein=True,
        conformal_radial_factor=w,
        params={"chart_radius": chart_radius})


def _build_schwarzschild(dim=3, mass=1.0, r_inner=2.0, r_outer=10.0, **_):
    m = float(mass)

    def factor(xs, m=m):
        return 1.0 + 0.5 * m / _r2(xs).sqrt()

    g = ChartMetric(dim, conformal_flat_metric_field(dim, factor, 4.0),
                    "schwarzschild")
    statics = {
        "lapse": ExprScalarField(dim, lambda xs: (
            (1.0 - 0.5 * m / _r2(xs).sqrt())
            / (1.0 + 0.5 * m / _r2(xs).sqrt()))),
    }
    w = UnivariateFromExpr(
        lambda r, m=m: (1.0 + (0.5 * m) * r.reciprocal()) ** 2)
    return Model(
        name="schwarzschild-annulus", dim=dim, lam=0.0, metric=g,
        domain=annulus_domain(dim, r_inner, r_outer),
        cks={"dilation": position_field(dim), "rotation-z": _rotation_field(dim)},
        statics=statics, lapse_name="lapse",
        satisfies_a1=True, einstein=False, mass_expected=m,
        conformal_radial_factor=w,
        params={"mass": m, "r_inner": r_inner, "r_outer": r_outer})


# ---------------------------------------------------------------------------
# warped products  dr^2 + f(r)^2 * (round metric on the sphere)


class WarpedSym2Field(Sym2Field):
    """Chart components of dr^2 + f(r)^2 g_round on the punctured chart:
    g_ij = (f/r)^2 delta_ij + (1 - (f/r)^2) x_i x_j / r^2."""

    def __init__(self, dim: int, profile: Univariate):
        self.dim = dim
        self.profile = profile

    def jet(self, x, order):
        n = self.dim
        xs = coordinate_jets(np.asarray(x, dtype=float), order)
        r = radius_jet(xs)
        f = profile_of_jet(self.profile, r)
        rinv = r.reciprocal()
        w = (f * rinv) ** 2
        q = (1.0 - w) * rinv * rinv
        out = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                t = q * xs[i] * xs[j]
                if i == j:
                    t = t + w
                out[i][j] = t
                out[j][i] = t
        return out


class ProductChartSym2Field(Sym2Field):
    """Secondary chart for the same warped geometry: coordinates
    (y_1, ..., y_{n-1}, r) with y stereographic on the unit sphere;
    g = f(r)^2 * 4/(1+|y|^2)^2 dy^2 + dr^2."""

    def __init__(self, dim: int, profile: Univariate):
        self.dim = dim
        self.profile = profile

    def jet(self, x, order):
        n = self.dim
        xs = coordinate_jets(np.asarray(x, dtype=float), order)
        r = xs[n - 1]
        f = profile_of_jet(self.profile, r)
        y2 = None
        for a in range(n - 1):
            t = xs[a] * xs[a]
            y2 = t if y2 is None else y2 + t
        conf = (2.0 * (1.0 + y2).reciprocal()) ** 2
        diag = f * f * conf
        zero = const_jet(np.zeros_like(diag.value), n, order)
        one = const_jet(np.ones_like(diag.value), n, order)
        out = [[zero for _ in range(n)] for _ in range(n)]
        for a in range(n - 1):
            out[a][a] = diag
        out[n - 1][n - 1] = one
        return out


def _sine_profile():
    return UnivariateCallable(np.sin, np.cos,
                              lambda r: -np.sin(r), lambda r: -np.cos(r))


def _cos_profile():
    return UnivariateCallable(np.cos, lambda r: -np.sin(r),
                              lambda r: -np.cos(r), np.sin)


def _build_warped(dim=3, profile="quartic", r_inner=0.8, r_outer=1.6, **_):
    if profile == "quartic":
        f = polynomial_profile([1.0, 0.0, 0.25])
        lam, a1, einstein = 0.0, False, False
        statics = {}
        lapse_name = None
    elif profile == "sine":
        f = _sine_profile()
        lam, a1, einstein = 1.0, True, True
        statics = {"height": ExprScalarField(
            dim, lambda xs: _cos_of_radius(xs))}
        lapse_name = "height"
    else:
        raise ConfigError(f"unknown warped profile '{profile}'")

    g = ChartMetric(dim, WarpedSym2Field(dim, f), f"warped-{profile}")
    product = ChartMetric(dim, ProductChartSym2Field(dim, f),
                          f"warped-{profile}-product")
    name = "warped" if profile == "quartic" else "warped-sine"
    return Model(
        name=name, dim=dim, lam=lam, metric=g,
        domain=annulus_domain(dim, r_inner, r_outer),
        cks={"warp": radial_vector_field(dim, f),
             "rotation-z": _rotation_field(dim)},
        statics=statics, lapse_name=lapse_name,
        satisfies_a1=a1, einstein=einstein,
        warp_profile=f,
        extra_charts={"product": product},
        params={"profile": profile, "r_inner": r_inner, "r_outer": r_outer,
                "primary_ck": "warp"})


def _cos_of_radius(xs):
    acc = None
    for c in xs:
        t = c * c
        acc = t if acc is None else acc + t
    return acc.sqrt().cos()


# ---------------------------------------------------------------------------
# warped-product closed tables and classification


def _warp_sample_points(model: Model, k: int, rng) -> np.ndarray:
    a = model.params["r_inner"]
    b = model.params["r_outer"]
    y = rng.uniform(-1.2, 1.2, size=(k, model.dim - 1))
    r = rng.uniform(a + 0.05 * (b - a), b - 0.05 * (b - a), size=(k, 1))
    return np.concatenate([y, r], axis=-1)


def warped_christoffel_residuals(model: Model, k: int = 25,
                                 seed: int = 99) -> dict:
    """General-engine Christoffel symbols on the product chart vs the
    closed table of a warped product dr^2 + f(r)^2 g_round:

      Gamma^r_ab = -f f' gbar_ab,  Gamma^a_rb = (f'/f) delta_ab,
      Gamma^r_ra = Gamma^r_rr = Gamma^a_rr = 0,
      Gamma^a_bc = the round-sphere symbols.
    """
    if model.warp_profile is None:
        raise ConfigError(f"model '{model.name}' is not a warped product")
    n = model.dim
    rng = np.random.default_rng(seed)
    x = _warp_sample_points(model, k, rng)
    y, r = x[:, : n - 1], x[:, n - 1]
    f, fp = model.warp_profile.derivs(r, 1)

    chart = model.extra_charts["product"]
    mj = chart.jets(x, 1)
    gam = mj.gamma_values()

    y2 = np.sum(y * y, axis=-1)
    gbar = (4.0 / (1.0 + y2) ** 2)[:, None, None] * np.eye(n - 1)

    nr = n - 1
    res = {}
    res["radial"] = float(np.max(np.abs(
        gam[:, nr, :nr, :nr] + (f * fp)[:, None, None] * gbar)))
    mixed = gam[:, :nr, nr, :nr]
    res["mixed"] = float(np.max(np.abs(
        mixed - (fp / f)[:, None, None] * np.eye(nr))))
    res["vanishing"] = float(max(
        np.max(np.abs(gam[:, nr, nr, :])),
        np.max(np.abs(gam[:, :nr, nr, nr]))))
    # sphere block against the (n-1)-dimensional engine on the round chart
    base = ChartMetric(nr, conformal_flat_metric_field(
        nr, lambda ys: 2.0 * (1.0 + _r2(ys)).reciprocal(), 2.0), "round")
    bj = base.jets(y, 1)
    res["sphere-block"] = float(np.max(np.abs(
        gam[:, :nr, :nr, :nr] - bj.gamma_values())))
    return res


def warped_deformation_residuals(model: Model, phi: Univariate, k: int = 25,
                                 seed: int = 7) -> dict:
    """Covariant-derivative table of X = phi(r) d_r on the product chart:
    eta_{a;b} = (f'/f) phi g_ab, eta_{r;r} = phi', mixed components 0."""
    if model.warp_profile is None:
        raise ConfigError(f"model '{model.name}' is not a warped product")
    n = model.dim
    rng = np.random.default_rng(seed)
    x = _warp_sample_points(model, k, rng)
    r = x[:, n - 1]
    f, fp = model.warp_profile.derivs(r, 1)
    pv, pd = phi.derivs(r, 1)

    chart = model.extra_charts["product"]
    X = ExprVectorField(n, lambda xs: [xs[0] * 0.0] * (n - 1)
                        + [profile_of_jet(phi, xs[n - 1])])
    vc = vector_calc(chart, X, x)
    gv = chart.values(x)
    nr = n - 1
    res = {
        "tangential": float(np.max(np.abs(
            vc.nabla_eta[:, :nr, :nr]
            - ((fp / f) * pv)[:, None, None] * gv[:, :nr, :nr]))),
        "radial": float(np.max(np.abs(vc.nabla_eta[:, nr, nr] - pd))),
        "mixed": float(max(np.max(np.abs(vc.nabla_eta[:, nr, :nr])),
                           np.max(np.abs(vc.nabla_eta[:, :nr, nr])))),
    }
    return res


def warp_candidate_profiles(model: Model) -> dict:
    """The five test profiles phi for 'is phi d_r conformal Killing':
    exactly the multiples of f qualify."""
    f = model.warp_profile

    def of(fn):
        return UnivariateFromExpr(lambda rj: fn(profile_of_jet(f, rj)))

    return {
        "f": of(lambda fj: fj * 1.0),
        "2f": of(lambda fj: fj * 2.0),
        "f+1": of(lambda fj: fj + 1.0),
        "f^2": of(lambda fj: fj * fj),
        "1": _unit_profile(),
    }


def classify_conformal_candidates(model: Model, candidates: dict | None = None,
                                  tol: float = 1e-8, k: int = 30,
                                  seed: int = 31) -> dict:
    """Which phi(r) d_r are conformal Killing for the model metric?
    Returns name -> (residual, accepted)."""
    if candidates is None:
        candidates = warp_candidate_profiles(model)
    rng = np.random.default_rng(seed)
    x = sample_interior(model.domain, k, rng)
    out = {}
    for nm, prof in candidates.items():
        X = radial_vector_field(model.dim, prof)
        res = conformal_killing_residual(model.metric, X, x)
        out[nm] = (res, bool(res <= tol))
    return out


# ---------------------------------------------------------------------------
# registry and build-time certification


MODEL_BUILDERS: dict[str, Callable[..., Model]] = {
    "flat-ball": _build_flat_ball,
    "flat-annulus": _build_flat_annulus,
    "flat-ellipsoid": _build_flat_ellipsoid,
    "sphere-cap": _build_sphere_cap,
    "hyperbolic-ball": _build_hyperbolic_ball,
    "schwarzschild-annulus": _build_schwarzschild,
    "warped": lambda **kw: _build_warped(profile=kw.pop("profile", "quartic"),
                                         **kw),
    "warped-sine": lambda **kw: _build_warped(
        profile="sine", r_inner=kw.pop("r_inner", 0.6),
        r_outer=kw.pop("r_outer", 1.4), **kw),
}


def model_names() -> list[str]:
    return sorted(MODEL_BUILDERS)


def make_model(name: str, check: bool = True, seed: int = 1234,
               **params) -> Model:
    if name not in MODEL_BUILDERS:
        raise ConfigError(
            f"unknown model '{name}'; available: {', '.join(model_names())}")
    model = MODEL_BUILDERS[name](**params)
    if check:
        certify_model(model, seed=seed)
    return model


def certify_model(model: Model, seed: int = 1234, k: int = 40):
    """Numerical self-check of every declared property."""
    rng = np.random.default_rng(seed)
    x = sample_interior(model.domain, k, rng)
    model.metric.check_positive_definite(x)

    n, lam = model.dim, model.lam
    b = curvature_bundle(model.metric, x)
    if model.satisfies_a1:
        gap = float(np.max(np.abs(b.scal - lam * n * (n - 1))))
        if gap > 1e-9:
            raise ModelRejectedError(
                f"{model.name}: scalar curvature is not the declared "
                f"space-form value (gap {gap:.2e})")
    if model.einstein:
        gap = float(np.max(np.abs(b.einstein_lambda(lam))))
        if gap > 1e-9:
            raise ModelRejectedError(
                f"{model.name}: declared Einstein but G_lam sup is {gap:.2e}")

    for nm, X in model.cks.items():
        res = conformal_killing_residual(model.metric, X, x)
        if res > 1e-9:
            raise ModelRejectedError(
                f"{model.name}: field '{nm}' fails the conformal Killing "
                f"check (residual {res:.2e})")
    for nm, w in model.statics.items():
        res = static_residual(model.metric, w, x)
        if res > 1e-8:
            raise ModelRejectedError(
                f"{model.name}: potential '{nm}' fails the kernel check "
                f"(residual {res:.2e})")
    lapse = model.lapse()
    if lapse is not None:
        low = float(np.min(lapse(x)))
        if low <= 0.0:
            raise ModelRejectedError(
                f"{model.name}: designated lapse '{model.lapse_name}' is not "
                f"positive on the interior (min {low:.2e})")
    return True
