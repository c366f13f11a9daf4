"""Jet arithmetic against hand-frozen values and finite differences."""

import numpy as np
import pytest

from geomlab.errors import EvaluationDomainError
from geomlab.jets import (Jet, apply_univariate, compose, const_jet,
                          coordinate_jets, jet_matrix_det,
                          jet_matrix_inverse)

from oracles import fd_gradient, fd_hessian, fd_third


def expr_jet(fn, x, order):
    return fn(coordinate_jets(np.asarray(x, dtype=float), order))


def test_square_of_coordinate_frozen():
    # f = (x0)^2 at x = (2, 0, 1): value 4, grad (4,0,0), hess diag(2,0,0)
    xs = coordinate_jets(np.array([2.0, 0.0, 1.0]), 3)
    f = xs[0] * xs[0]
    assert f.value == pytest.approx(4.0, abs=0)
    assert np.allclose(f.grad, [4.0, 0.0, 0.0], atol=0)
    H = np.zeros((3, 3))
    H[0, 0] = 2.0
    assert np.allclose(f.hess, H, atol=0)
    assert np.allclose(f.third, 0.0, atol=0)


def test_inverse_one_plus_r2_frozen():
    # f = 1/(1+|x|^2) at 0: value 1, grad 0, hess -2*I, third 0
    xs = coordinate_jets(np.zeros(3), 3)
    r2 = xs[0] * xs[0] + xs[1] * xs[1] + xs[2] * xs[2]
    f = 1.0 / (1.0 + r2)
    assert f.value == pytest.approx(1.0)
    assert np.allclose(f.grad, 0.0, atol=1e-15)
    assert np.allclose(f.hess, -2.0 * np.eye(3), atol=1e-14)
    assert np.allclose(f.third, 0.0, atol=1e-14)


def _sample_expressions():
    """(name, jet expression, plain numpy twin) triples on R^3."""

    def e1_jet(x):
        return (x[0] * x[1] * x[2] + (x[0] * x[0] + 1.0).sqrt()
                - (x[1] * x[2]).sin())

    def e1_np(x):
        return x[0] * x[1] * x[2] + np.sqrt(x[0] ** 2 + 1.0) - np.sin(x[1] * x[2])

    def e2_jet(x):
        r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
        return (1.0 + 0.25 * r2).log() * x[0].cos() + (0.3 * r2).exp()

    def e2_np(x):
        r2 = x[0] ** 2 + x[1] ** 2 + x[2] ** 2
        return np.log(1.0 + 0.25 * r2) * np.cos(x[0]) + np.exp(0.3 * r2)

    def e3_jet(x):
        return (x[0].sinh() + x[1] * x[1]) / (2.0 + x[2].cosh()) \
            + (x[0] * x[0] + x[1] * x[1] + 0.5) ** 1.5

    def e3_np(x):
        return (np.sinh(x[0]) + x[1] ** 2) / (2.0 + np.cosh(x[2])) \
            + (x[0] ** 2 + x[1] ** 2 + 0.5) ** 1.5

    return [("poly-sqrt-sin", e1_jet, e1_np),
            ("log-cos-exp", e2_jet, e2_np),
            ("quotient-pow", e3_jet, e3_np)]


@pytest.mark.parametrize("name,jf,nf", _sample_expressions())
def test_jets_match_finite_differences(name, jf, nf):
    rng = np.random.default_rng(42)
    for _ in range(4):
        x = rng.uniform(-0.8, 0.8, size=3)
        j = expr_jet(jf, x, 3)

        def scalar(y, nf=nf):
            return float(nf(y))

        assert j.value == pytest.approx(scalar(x), rel=1e-13)
        g, ge = fd_gradient(scalar, x)
        assert np.max(np.abs(j.grad - g)) <= max(10 * ge, 1e-6)
        H, He = fd_hessian(scalar, x)
        assert np.max(np.abs(j.hess - H)) <= max(10 * He, 1e-6)
        T, Te = fd_third(scalar, x)
        assert np.max(np.abs(j.third - T)) <= max(10 * Te, 1e-6)
        # symmetry of stored coefficients
        assert np.allclose(j.hess, j.hess.T, atol=1e-12)
        assert np.allclose(j.third, np.transpose(j.third, (2, 1, 0)), atol=1e-12)


def test_partial_drops_order_consistently():
    # partial_k of the jet of f equals the jet of d_k f
    x = np.array([0.3, -0.2, 0.7])

    def f(xs):
        return (xs[0] * xs[1]).exp() + xs[2] * xs[2] * xs[0]

    j3 = expr_jet(f, x, 3)
    p0 = j3.partial(0)

    def df0(xs):  # analytic d/dx0
        return xs[1] * (xs[0] * xs[1]).exp() + xs[2] * xs[2]

    q = expr_jet(df0, x, 2)
    assert p0.value == pytest.approx(q.value, rel=1e-13)
    assert np.allclose(p0.grad, q.grad, atol=1e-13)
    assert np.allclose(p0.hess, q.hess, atol=1e-13)


def test_batched_matches_pointwise():
    rng = np.random.default_rng(7)
    pts = rng.uniform(-0.5, 0.5, size=(11, 3))

    def f(xs):
        return (xs[0] * xs[2]).cos() + (1.0 + xs[1] * xs[1]).sqrt()

    jb = expr_jet(f, pts, 3)
    for k in range(pts.shape[0]):
        js = expr_jet(f, pts[k], 3)
        assert np.allclose(jb.value[k], js.value, atol=0)
        assert np.allclose(jb.grad[k], js.grad, atol=0)
        assert np.allclose(jb.hess[k], js.hess, atol=0)
        assert np.allclose(jb.third[k], js.third, atol=0)


def test_compose_against_direct_expression():
    # F(y0, y1) = y0^2 * y1 with y0 = sin x0, y1 = x0 * x1
    x = np.array([[0.4, -0.3, 0.2], [1.1, 0.5, -0.7]])
    xs = coordinate_jets(x, 3)
    inner = [xs[0].sin(), xs[0] * xs[1]]
    y0 = np.stack([inner[0].value, inner[1].value], axis=-1)
    ys = coordinate_jets(y0, 3)
    outer = ys[0] * ys[0] * ys[1]
    composed = compose(outer, inner)
    direct = xs[0].sin() * xs[0].sin() * (xs[0] * xs[1])
    for k in range(4):
        assert np.allclose(composed.coeffs[k], direct.coeffs[k], atol=1e-12), k


def test_apply_univariate_matches_methods():
    xs = coordinate_jets(np.array([0.2, 0.1, -0.4]), 3)
    f = xs[0] + xs[1] * xs[2]
    v = f.value
    via_table = apply_univariate(
        f, (np.exp(v), np.exp(v), np.exp(v), np.exp(v)))
    via_method = f.exp()
    for k in range(4):
        assert np.allclose(via_table.coeffs[k], via_method.coeffs[k], atol=0)


def test_matrix_inverse_and_det():
    rng = np.random.default_rng(3)
    pts = rng.uniform(-0.4, 0.4, size=(6, 3))
    xs = coordinate_jets(pts, 3)
    one = const_jet(np.ones(6), 3, 3)
    # symmetric positive definite jet matrix
    m = [[2.0 + xs[0] * xs[0], xs[0] * xs[1], 0.1 * xs[2]],
         [xs[0] * xs[1], 3.0 + xs[1].sin() * xs[1].sin(), 0.2 * one],
         [0.1 * xs[2], 0.2 * one, 1.5 + xs[2] * xs[2]]]
    inv = jet_matrix_inverse(m)
    # M * inv(M) = identity as jets
    for i in range(3):
        for j in range(3):
            acc = None
            for k in range(3):
                term = m[i][k] * inv[k][j]
                acc = term if acc is None else acc + term
            want = 1.0 if i == j else 0.0
            assert np.allclose(acc.value, want, atol=1e-12)
            for order in range(1, 4):
                assert np.allclose(acc.coeffs[order], 0.0, atol=1e-11)
    # determinant value against numpy
    npmat = np.zeros((6, 3, 3))
    for i in range(3):
        for j in range(3):
            npmat[:, i, j] = np.broadcast_to(m[i][j].value, (6,))
    det = jet_matrix_det(m)
    assert np.allclose(det.value, np.linalg.det(npmat), rtol=1e-12)

    # determinant gradient against finite differences, via scalarized eval
    def det_at(y):
        ys = coordinate_jets(y, 0)
        onep = const_jet(1.0, 3, 0)
        mm = [[2.0 + ys[0] * ys[0], ys[0] * ys[1], 0.1 * ys[2]],
              [ys[0] * ys[1], 3.0 + ys[1].sin() * ys[1].sin(), 0.2 * onep],
              [0.1 * ys[2], 0.2 * onep, 1.5 + ys[2] * ys[2]]]
        vals = np.array([[mm[i][j].value for j in range(3)] for i in range(3)])
        return float(np.linalg.det(vals))

    g, ge = fd_gradient(det_at, pts[0])
    assert np.max(np.abs(det.grad[0] - g)) <= max(10 * ge, 1e-7)


def test_domain_errors():
    xs = coordinate_jets(np.array([0.0, 1.0, 2.0]), 2)
    with pytest.raises(EvaluationDomainError):
        (xs[0] - 0.0).reciprocal()
    with pytest.raises(EvaluationDomainError):
        (xs[0] - 1.0).sqrt()
    with pytest.raises(EvaluationDomainError):
        (xs[0] - 5.0).log()


def test_truncation_rules():
    xs = coordinate_jets(np.array([0.5, 0.5, 0.5]), 3)
    low = expr_jet(lambda s: s[0] * s[1], np.array([0.5, 0.5, 0.5]), 1)
    out = xs[0].sin() * low
    assert out.order == 1
    c = const_jet(2.5, 3, 3)
    assert (c + xs[0]).order == 3
