"""Exact polynomial calculus and the quadric-domain corrector solve."""

import numpy as np
import pytest

from geomlab.errors import PreconditionError
from geomlab.models import make_model
from geomlab.operators import ds
from geomlab.polynomials import (Poly, PolySym2Field, ds_flat_poly,
                                 ellipsoid_defining_poly,
                                 flat_conformal_kernel_velocity,
                                 normal_gauge_sym2, poly_scalar_field,
                                 solve_fischer)
from geomlab.boundary import chart_map_jets
from geomlab.quadrature import boundary_rule, sample_interior


def test_poly_arithmetic_and_calculus():
    x = Poly.coordinate(3, 0)
    y = Poly.coordinate(3, 1)
    z = Poly.coordinate(3, 2)
    p = x * x * y + z.scale(2.0) - 1.0
    pts = np.array([[1.0, 2.0, 3.0], [-0.5, 0.3, 1.1]])
    want = pts[:, 0] ** 2 * pts[:, 1] + 2 * pts[:, 2] - 1.0
    assert np.max(np.abs(p(pts) - want)) < 1e-14
    # d/dx (x^2 y) = 2xy ; lap(x^2 y) = 2y
    assert np.max(np.abs(p.partial(0)(pts) - 2 * pts[:, 0] * pts[:, 1])) < 1e-14
    assert np.max(np.abs(p.laplacian()(pts) - 2 * pts[:, 1])) < 1e-14
    assert p.degree() == 3


def test_poly_field_jets_match_direct_evaluation():
    p = (Poly.coordinate(3, 0) * Poly.coordinate(3, 1)
         + Poly.coordinate(3, 2) * Poly.coordinate(3, 2) * Poly.coordinate(3, 2))
    f = poly_scalar_field(p)
    x = np.array([[0.3, -0.7, 1.2], [1.0, 0.5, -0.4]])
    jet = f.jet(x, 3)
    assert np.max(np.abs(jet.value - p(x))) < 1e-14
    assert np.max(np.abs(jet.grad[:, 2] - 3 * x[:, 2] ** 2)) < 1e-14
    assert np.max(np.abs(jet.hess[:, 0, 1] - 1.0)) < 1e-14
    assert np.max(np.abs(jet.third[:, 2, 2, 2] - 6.0)) < 1e-14


def test_ds_flat_poly_matches_engine():
    """Exact polynomial DS against the general jet-engine route."""
    rng = np.random.default_rng(42)
    model = make_model("flat-ellipsoid")
    F = ellipsoid_defining_poly(model.params["semiaxes"])
    ell = [Poly.constant(3, 0.4), Poly.coordinate(3, 0),
           Poly.constant(3, -0.2) + Poly.coordinate(3, 2)]
    psi = Poly.constant(3, 0.3)
    comps = normal_gauge_sym2(F, ell, psi)
    hfield = PolySym2Field(comps)
    x = sample_interior(model.domain, 20, rng)
    engine = ds(model.metric, hfield, x)
    exact = ds_flat_poly(comps)(x)
    assert np.max(np.abs(engine - exact)) < 1e-9


def test_solve_fischer_manufactured():
    F = ellipsoid_defining_poly((1.5, 1.0, 1.0))
    # manufacture: pick s*, set q = lap(F s*), recover s = s*
    s_star = (Poly.constant(3, 0.7) + Poly.coordinate(3, 0)
              + Poly.coordinate(3, 1) * Poly.coordinate(3, 2))
    q = (F * s_star).laplacian()
    s = solve_fischer(F, q)
    diff = s - s_star
    assert diff.sup_coeff() < 1e-11


def test_solve_fischer_rejects_nonquadric():
    F = Poly.coordinate(3, 0)  # linear, not a quadric
    with pytest.raises(PreconditionError):
        solve_fischer(F, Poly.constant(3, 1.0))


def test_flat_kernel_velocity():
    """The assembled velocity h = (4/(n-2)) v delta + hhat must be an exact
    kernel element of DS with tangentially-zero boundary values."""
    model = make_model("flat-ellipsoid")
    axes = model.params["semiaxes"]
    F = ellipsoid_defining_poly(axes)
    ell = [Poly.coordinate(3, 1), Poly.constant(3, 0.5),
           Poly.coordinate(3, 0) * Poly.coordinate(3, 0)]
    psi = Poly.constant(3, -0.4) + Poly.coordinate(3, 0)
    out = flat_conformal_kernel_velocity(F, ell, psi)
    assert out["ds_sup"] < 1e-10

    # v vanishes on the boundary (it has F as an exact factor)
    comp = model.domain.outer
    rule = boundary_rule(comp, 12)
    xj = chart_map_jets(comp, rule.u, 0)
    bx = np.stack([c.value for c in xj], axis=-1)
    assert np.max(np.abs(out["v"](bx))) < 1e-12

    # tangential part of h vanishes on the boundary: h(T, T') = 0 for
    # T, T' orthogonal to dF
    hvals = np.zeros((bx.shape[0], 3, 3))
    for i in range(3):
        for j in range(3):
            hvals[:, i, j] = out["h"][i][j](bx)
    grad = np.stack([F.partial(i)(bx) for i in range(3)], axis=-1)
    nrm = grad / np.linalg.norm(grad, axis=-1, keepdims=True)
    # build two tangent vectors per point
    seed = np.where(np.abs(nrm[:, [0]]) < 0.9,
                    np.array([[1.0, 0.0, 0.0]]), np.array([[0.0, 1.0, 0.0]]))
    t1 = np.cross(nrm, seed)
    t1 /= np.linalg.norm(t1, axis=-1, keepdims=True)
    t2 = np.cross(nrm, t1)
    for ta in (t1, t2):
        for tb in (t1, t2):
            v = np.einsum("ki,kij,kj->k", ta, hvals, tb)
            assert np.max(np.abs(v)) < 1e-12

    # h(nu, nu) does not vanish identically (nontrivial normal bump)
    hnn = np.einsum("ki,kij,kj->k", nrm, hvals, nrm)
    assert np.max(np.abs(hnn)) > 1e-3
