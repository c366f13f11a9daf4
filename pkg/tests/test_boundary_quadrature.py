"""Boundary bundles and quadrature vs classical closed forms."""

import numpy as np
import pytest

from geomlab.boundary import (adapted_chart_jets, annulus_domain, ball_domain,
                              boundary_bundle, ellipsoid_domain,
                              pullback_sym2_jets, umbilicity_defect)
from geomlab.fields import ExprVectorField, EuclideanSym2Field
from geomlab.geometry import ChartMetric, vector_calc
from geomlab.quadrature import (boundary_rule, integrate_boundary,
                                integrate_volume, sample_interior,
                                volume_rule)

from test_geometry import (hyperbolic_metric, schwarzschild_metric,
                           sphere_metric)


def flat_metric(n=3):
    return ChartMetric(n, EuclideanSym2Field(n), "flat")


def test_flat_ball_volume_and_area():
    g = flat_metric()
    dom = ball_domain(3, 1.0)
    rule = volume_rule(dom, 24, 32)
    vol = integrate_volume(g, lambda x: np.ones(x.shape[0]), rule)
    assert vol == pytest.approx(4.0 * np.pi / 3.0, rel=1e-12)
    area = integrate_boundary(g, boundary_rule(dom.outer, 32),
                              lambda bb: np.ones(bb.x.shape[0]))
    assert area == pytest.approx(4.0 * np.pi, rel=1e-12)


def test_flat_annulus_volume_and_inner_orientation():
    g = flat_metric()
    dom = annulus_domain(3, 0.5, 1.0)
    vol = integrate_volume(g, lambda x: np.ones(x.shape[0]),
                           volume_rule(dom, 24, 32))
    assert vol == pytest.approx(4.0 * np.pi / 3.0 * (1.0 - 0.125), rel=1e-12)

    u = boundary_rule(dom.inner, 12).u
    bb = boundary_bundle(g, dom.inner, u)
    # outward normal of the domain points toward the center on the inner wall
    r_hat = bb.x / np.linalg.norm(bb.x, axis=-1, keepdims=True)
    assert np.max(np.abs(bb.nu + r_hat)) <= 1e-12
    assert np.max(np.abs(bb.mean_curvature + 2.0 / 0.5)) <= 1e-11
    assert np.max(np.abs(bb.principal + 2.0)) <= 1e-11


def test_unit_sphere_shape_operator():
    g = flat_metric()
    dom = ball_domain(3, 1.0)
    bb = boundary_bundle(g, dom.outer, boundary_rule(dom.outer, 16).u)
    assert np.max(np.abs(bb.shape - bb.gamma)) <= 1e-12
    assert np.max(np.abs(bb.mean_curvature - 2.0)) <= 1e-12
    assert np.max(np.abs(bb.principal - 1.0)) <= 1e-12
    assert np.max(np.abs(bb.h2 - 1.0)) <= 1e-12
    assert umbilicity_defect(bb) <= 1e-12
    assert np.max(np.abs(bb.sigma_scal - 2.0)) <= 1e-10
    assert np.max(np.abs(bb.gauss_residual)) <= 1e-10
    assert bb.shape_asym <= 1e-11


def test_ellipsoid_against_prolate_closed_forms():
    g = flat_metric()
    axes = (1.5, 1.0, 1.0)
    dom = ellipsoid_domain(3, axes)
    vol = integrate_volume(g, lambda x: np.ones(x.shape[0]),
                           volume_rule(dom, 24, 40))
    assert vol == pytest.approx(4.0 * np.pi / 3.0 * np.prod(axes), rel=1e-11)

    a, b = 1.5, 1.0  # prolate spheroid, semi-major a
    e = np.sqrt(1.0 - b * b / (a * a))
    area_closed = 2.0 * np.pi * b * b * (1.0 + (a / (b * e)) * np.arcsin(e))
    area = integrate_boundary(g, boundary_rule(dom.outer, 40),
                              lambda bb: np.ones(bb.x.shape[0]))
    assert area == pytest.approx(area_closed, rel=1e-10)

    bb = boundary_bundle(g, dom.outer, boundary_rule(dom.outer, 16).u)
    assert umbilicity_defect(bb) > 0.05          # genuinely non-umbilic
    assert np.max(np.abs(bb.gauss_residual)) <= 1e-9
    # points actually lie on the ellipsoid
    q = (bb.x[:, 0] / 1.5) ** 2 + bb.x[:, 1] ** 2 + bb.x[:, 2] ** 2
    assert np.max(np.abs(q - 1.0)) <= 1e-13


def test_geodesic_spheres_in_space_forms():
    # round sphere: geodesic sphere of radius rho has H = 2 cot(rho),
    # area 4 pi sin^2(rho); chart radius is tan(rho/2)
    rho = 0.5
    g = sphere_metric()
    dom = ball_domain(3, np.tan(rho / 2.0))
    bb = boundary_bundle(g, dom.outer, boundary_rule(dom.outer, 16).u)
    assert np.max(np.abs(bb.mean_curvature - 2.0 / np.tan(rho))) <= 1e-10
    assert umbilicity_defect(bb) <= 1e-11
    area = integrate_boundary(g, boundary_rule(dom.outer, 32),
                              lambda bb: np.ones(bb.x.shape[0]))
    assert area == pytest.approx(4.0 * np.pi * np.sin(rho) ** 2, rel=1e-12)

    # hyperbolic: chart radius 0.5 <-> geodesic radius 2 artanh(0.5)
    rho_h = 2.0 * np.arctanh(0.5)
    gh = hyperbolic_metric()
    domh = ball_domain(3, 0.5)
    bbh = boundary_bundle(gh, domh.outer, boundary_rule(domh.outer, 16).u)
    assert np.max(np.abs(bbh.mean_curvature - 2.0 / np.tanh(rho_h))) <= 1e-10
    areah = integrate_boundary(gh, boundary_rule(domh.outer, 32),
                               lambda bb: np.ones(bb.x.shape[0]))
    assert areah == pytest.approx(4.0 * np.pi * np.sinh(rho_h) ** 2, rel=1e-12)
    volh = integrate_volume(gh, lambda x: np.ones(x.shape[0]),
                            volume_rule(domh, 24, 32))
    assert volh == pytest.approx(np.pi * (np.sinh(2 * rho_h) - 2 * rho_h),
                                 rel=1e-11)


def test_schwarzschild_sphere_closed_forms():
    m = 1.0
    g = schwarzschild_metric(m)
    for b in (2.0, 10.0):
        dom = ball_domain(3, b)
        bb = boundary_bundle(g, dom.outer, boundary_rule(dom.outer, 12).u,
                             with_intrinsic=False)
        u = 1.0 + 0.5 * m / b
        H_closed = (2.0 / b) * (1.0 - 0.5 * m / b) / u ** 3
        assert np.max(np.abs(bb.mean_curvature - H_closed)) <= 1e-11
        area = integrate_boundary(g, boundary_rule(dom.outer, 24),
                                  lambda bb: np.ones(bb.x.shape[0]))
        assert area == pytest.approx(4.0 * np.pi * b * b * u ** 4, rel=1e-12)


def poly_vector_field():
    return ExprVectorField(3, lambda xs: [
        xs[0] * xs[1] + xs[2],
        xs[1] * xs[1] - 0.5 * xs[0],
        xs[2] * xs[0] * xs[1] + 0.2 * xs[1]])


@pytest.mark.parametrize("gmaker,dom,tol", [
    (flat_metric, ball_domain(3, 1.0), 1e-10),
    (flat_metric, annulus_domain(3, 0.5, 1.0), 1e-10),
    (sphere_metric, ball_domain(3, 0.4), 1e-7),
    (schwarzschild_metric, annulus_domain(3, 2.0, 4.0), 1e-7),
])
def test_divergence_theorem(gmaker, dom, tol):
    g = gmaker()
    X = poly_vector_field()
    lhs = integrate_volume(g, lambda x: vector_calc(g, X, x).divergence,
                           volume_rule(dom, 32, 48))
    rhs = 0.0
    for comp in dom.components():
        rhs += integrate_boundary(
            g, boundary_rule(comp, 48),
            lambda bb: np.einsum("...ij,...i,...j->...", bb.ambient_g,
                                 X.values(bb.x), bb.nu))
    scale = max(1.0, abs(lhs))
    assert abs(lhs - rhs) <= tol * scale


def test_dimension_four_sanity():
    g = flat_metric(4)
    dom = ball_domain(4, 1.0)
    vol = integrate_volume(g, lambda x: np.ones(x.shape[0]),
                           volume_rule(dom, 12, 16))
    assert vol == pytest.approx(np.pi ** 2 / 2.0, rel=1e-10)
    rule = boundary_rule(dom.outer, 16)
    area = integrate_boundary(g, rule, lambda bb: np.ones(bb.x.shape[0]))
    assert area == pytest.approx(2.0 * np.pi ** 2, rel=1e-10)
    bb = boundary_bundle(g, dom.outer, rule.u[::7], with_intrinsic=True)
    assert np.max(np.abs(bb.mean_curvature - 3.0)) <= 1e-11
    # polar-coordinate conditioning near theta ~ 0 costs a couple digits
    assert np.max(np.abs(bb.sigma_scal - 6.0)) <= 2e-8


def test_sample_interior_in_domain():
    rng = np.random.default_rng(5)
    dom = annulus_domain(3, 0.5, 1.0)
    pts = sample_interior(dom, 200, rng)
    r = np.linalg.norm(pts, axis=-1)
    assert np.all(r > 0.5) and np.all(r < 1.0)


def test_adapted_chart_pullback_structure():
    # pulled-back metric has g~_{nn} = 1 and g~_{a n} = 0 at s = 0, and
    # -Gamma~^n_{ab} reproduces the shape operator (both to high accuracy)
    for gmaker, dom in [(flat_metric, ellipsoid_domain(3, (1.5, 1.0, 1.0))),
                        (sphere_metric, ball_domain(3, 0.3)),
                        (schwarzschild_metric, annulus_domain(3, 2.0, 4.0))]:
        g = gmaker()
        comp = dom.outer
        u = boundary_rule(comp, 8).u
        phi = adapted_chart_jets(g, comp, u)
        gt = pullback_sym2_jets(g.field, phi, 1)
        n = 3
        # structure at s=0
        assert np.max(np.abs(gt[n - 1][n - 1].value - 1.0)) <= 1e-11
        for a in range(n - 1):
            assert np.max(np.abs(gt[a][n - 1].value)) <= 1e-11
        # Christoffel cross-check of the shape operator
        from geomlab.jets import jet_matrix_inverse
        from geomlab.geometry import christoffel_jets
        ginv_t = jet_matrix_inverse(gt)
        gam = christoffel_jets(gt, ginv_t)
        bb = boundary_bundle(g, comp, u, with_intrinsic=False)
        for a in range(n - 1):
            for b in range(a, n - 1):
                want = bb.shape[:, a, b]
                got = -gam[n - 1][a][b].value
                assert np.max(np.abs(got - want)) <= 1e-9
