"""Radial collocation solver: manufactured solutions, engine-validated
coefficient reductions, and exact spectral gaps."""

import numpy as np
import pytest

from geomlab.bvp import (ChebyshevProfile, chebyshev_lobatto, constraint_gap,
                         radial_laplacian_coefficients,
                         scalar_curvature_profile, solve_conformal_constraint,
                         solve_linear_bvp)
from geomlab.errors import ConfigError, ModelRejectedError
from geomlab.fields import BumpProfile, radial_scalar_field, window_profile
from geomlab.geometry import curvature_bundle, laplacian
from geomlab.models import make_model

RADIAL_MODELS = ["flat-ball", "flat-annulus", "sphere-cap", "hyperbolic-ball",
                 "schwarzschild-annulus", "warped", "warped-sine"]


def test_differentiation_matrix():
    x, D = chebyshev_lobatto(48, 0.3, 2.1)
    assert abs(x[0] - 0.3) < 1e-14 and abs(x[-1] - 2.1) < 1e-14
    assert np.max(np.abs(D @ np.sin(x) - np.cos(x))) < 1e-10
    assert np.max(np.abs(D @ (x ** 3) - 3 * x ** 2)) < 1e-10


def test_chebyshev_profile_derivatives():
    x, _ = chebyshev_lobatto(64, 0.0, 2.0)
    import numpy.polynomial.chebyshev as cheb
    t = (2 * x - 2.0) / 2.0
    coeffs, *_ = np.linalg.lstsq(cheb.chebvander(t, 64), np.sin(x), rcond=None)
    prof = ChebyshevProfile(coeffs, 0.0, 2.0)
    u = np.linspace(0.05, 1.95, 40)
    v, d1, d2, d3 = prof.derivs(u, 3)
    assert np.max(np.abs(v - np.sin(u))) < 1e-12
    assert np.max(np.abs(d1 - np.cos(u))) < 1e-10
    assert np.max(np.abs(d2 + np.sin(u))) < 1e-8
    assert np.max(np.abs(d3 + np.cos(u))) < 1e-6


def test_manufactured_dirichlet_solution():
    a, b = 1.0, 2.0
    om = np.pi / (b - a)

    def v_exact(r):
        return np.sin(om * (r - a))

    def rhs(r):
        # (1+r^2) v'' + r v' + cos(r) v  for the manufactured v
        return ((1 + r ** 2) * (-om ** 2) * np.sin(om * (r - a))
                + r * om * np.cos(om * (r - a))
                + np.cos(r) * np.sin(om * (r - a)))

    sol = solve_linear_bvp(lambda r: 1 + r ** 2, lambda r: r, np.cos, rhs,
                           (a, b))
    assert sol.residual < 1e-8
    u = np.linspace(a, b, 37)
    assert np.max(np.abs(sol(u) - v_exact(u))) < 1e-10
    _, d1, d2, d3 = sol.profile.derivs(u, 3)
    assert np.max(np.abs(d1 - om * np.cos(om * (u - a)))) < 1e-9
    assert np.max(np.abs(d2 + om ** 2 * np.sin(om * (u - a)))) < 1e-8
    assert np.max(np.abs(d3 + om ** 3 * np.cos(om * (u - a)))) < 1e-6


def test_manufactured_ball_regularity():
    # flat radial Laplacian, even solution v = (1-r^2)^2 on the unit ball
    def rhs(r):
        return 20.0 * r ** 2 - 12.0

    sol = solve_linear_bvp(lambda r: np.ones_like(r), lambda r: 2.0 / r,
                           lambda r: np.zeros_like(r), rhs, (0.0, 1.0),
                           left=("neumann", 0.0), right=("dirichlet", 0.0),
                           num=80)
    u = np.linspace(0.0, 1.0, 41)
    assert np.max(np.abs(sol(u) - (1 - u ** 2) ** 2)) < 1e-10
    assert abs(sol.profile.derivs(np.array([0.0]), 1)[1][0]) < 1e-10


def test_singular_operator_rejected():
    # v'' + v on [0, pi] with Dirichlet ends has 0 in its spectrum
    with pytest.raises(ModelRejectedError):
        solve_linear_bvp(lambda r: np.ones_like(r),
                         lambda r: np.zeros_like(r),
                         lambda r: np.ones_like(r),
                         lambda r: np.ones_like(r), (0.0, np.pi), num=100)


@pytest.mark.parametrize("name", ["sphere-cap", "hyperbolic-ball",
                                  "schwarzschild-annulus", "warped",
                                  "warped-sine"])
def test_radial_laplacian_reduction_vs_engine(name):
    """a(r) phi'' + b(r) phi' must equal the chart Laplacian of the radial
    field phi(|x|) computed by the jet engine."""
    model = make_model(name)
    a_fn, b_fn = radial_laplacian_coefficients(model)
    prof = window_profile(0.0, 3.0)
    phi = radial_scalar_field(model.dim, prof)
    if "r_inner" in model.params:
        r = np.linspace(model.params["r_inner"] * 1.05,
                        model.params["r_outer"] * 0.95, 9)
    else:
        rmax = model.params.get("radius", model.params.get("chart_radius"))
        r = np.linspace(0.15 * rmax, 0.9 * rmax, 9)
    x = np.zeros((r.size, model.dim))
    x[:, 0] = 0.6 * r
    x[:, 1] = 0.8 * r
    engine = laplacian(model.metric, phi, x)
    _, d1, d2 = prof.derivs(r, 2)
    closed = np.asarray(a_fn(r)) * d2 + np.asarray(b_fn(r)) * d1
    assert np.max(np.abs(engine - closed)) < 1e-8, name


def test_scalar_profile_matches_engine():
    for name in ("warped", "schwarzschild-annulus", "sphere-cap"):
        model = make_model(name)
        s_fn = scalar_curvature_profile(model)
        r = np.linspace(model.params.get("r_inner", 0.05) + 0.05,
                        model.params.get("r_outer",
                                         model.params.get("chart_radius", 1.0))
                        - 0.02, 7)
        x = np.zeros((r.size, 3))
        x[:, 0] = r
        engine = curvature_bundle(model.metric, x).scal
        assert np.max(np.abs(np.asarray(s_fn(r)) - engine)) < 1e-9, name


def test_constraint_gap_values():
    # flat annulus [0.5, 1]: eigenvalues of -2*lap on radial functions are
    # 2 (k pi / (b-a))^2 after the substitution u = r v, so the gap is 8 pi^2
    gap = constraint_gap(make_model("flat-annulus"))
    assert abs(gap - 8 * np.pi ** 2) < 1e-6 * gap
    # flat ball radius 1 (even radial functions): gap is 2 pi^2
    gap = constraint_gap(make_model("flat-ball"))
    assert abs(gap - 2 * np.pi ** 2) < 1e-6 * gap


@pytest.mark.parametrize("name", RADIAL_MODELS)
def test_conformal_constraint_solve(name):
    model = make_model(name)
    gap = constraint_gap(model)
    assert gap > 1e-6, name

    if "r_inner" in model.params:
        lo, hi = model.params["r_inner"], model.params["r_outer"]
    else:
        hi = model.params.get("radius", model.params.get("chart_radius"))
        lo = 0.0
    s0, s1 = lo + 0.2 * (hi - lo), hi - 0.1 * (hi - lo)
    rhs_prof = window_profile(s0, s1, power=4)
    sol = solve_conformal_constraint(model, lambda r: rhs_prof.derivs(r, 0)[0],
                                     breakpoints=(s0, s1))
    assert sol.residual < 1e-7, (name, sol.residual)
    ends = np.array([hi]) if lo == 0.0 else np.array([lo, hi])
    assert np.max(np.abs(sol(ends))) < 1e-10
    if lo == 0.0:
        assert abs(sol.profile.derivs(np.array([0.0]), 1)[1][0]) < 1e-9
    # solutions should not be identically zero for a nontrivial source
    assert np.max(np.abs(sol.values)) > 1e-6


def test_non_radial_model_rejected():
    with pytest.raises(ConfigError):
        radial_laplacian_coefficients(make_model("flat-ellipsoid"))


def test_piecewise_matches_single_piece():
    # analytic data: splitting the interval must not change the solution
    a, b = 1.0, 2.0

    def rhs(r):
        return np.sin(3.0 * r)

    one = solve_linear_bvp(lambda r: 1 + r, lambda r: np.cos(r),
                           lambda r: r, rhs, (a, b))
    two = solve_linear_bvp(lambda r: 1 + r, lambda r: np.cos(r),
                           lambda r: r, rhs, (a, b),
                           breakpoints=(1.3, 1.7))
    u = np.linspace(a, b, 57)
    assert np.max(np.abs(one(u) - two(u))) < 1e-10
    for m in (1, 2, 3):
        t1 = one.profile.derivs(u, m)[m]
        t2 = two.profile.derivs(u, m)[m]
        assert np.max(np.abs(t1 - t2)) < 10.0 ** (m - 9), m


def test_piecewise_seam_continuity():
    model = make_model("schwarzschild-annulus")
    lo, hi = 2.0, 10.0
    s0, s1 = 3.5, 8.0
    prof = window_profile(s0, s1, power=4)
    sol = solve_conformal_constraint(model, lambda r: prof.derivs(r, 0)[0],
                                     breakpoints=(s0, s1))
    eps = 1e-9
    for seam in (s0, s1):
        lo_tab = sol.profile.derivs(np.array([seam - eps]), 1)
        hi_tab = sol.profile.derivs(np.array([seam + eps]), 1)
        assert abs(lo_tab[0][0] - hi_tab[0][0]) < 5e-9
        assert abs(lo_tab[1][0] - hi_tab[1][0]) < 1e-7
