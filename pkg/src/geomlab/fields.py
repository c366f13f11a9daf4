"""Scalar, vector and symmetric 2-tensor fields on a coordinate chart.

A field is anything that can produce jets of its components at a batch of
chart points.  Components of vector fields are contravariant (X^i);
2-tensor fields are stored fully covariant (h_ij); indices are raised on
demand with the metric.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .jets import Jet, compose, const_jet, coordinate_jets, apply_univariate

__all__ = [
    "ScalarField", "VectorField", "Sym2Field",
    "ExprScalarField", "ExprVectorField", "ExprSym2Field",
    "ConstantScalarField", "ScaledScalarField", "PolynomialBasedField",
    "Univariate", "UnivariateCallable", "UnivariateFromExpr", "PolyProfile",
    "polynomial_profile", "window_profile", "radial_scalar_field",
    "radial_vector_field", "position_field",
    "euclidean_metric_field", "conformal_flat_metric_field",
    "ScaledSym2Field", "SumSym2Field", "RadialSym2Field",
    "TrigSym2Field", "TrigScalarField", "TrigVectorField", "radius_jet",
]


# ---------------------------------------------------------------------------
# base protocols


class ScalarField:
    """f: chart -> R, evaluated as jets."""

    dim: int

    def jet(self, x: np.ndarray, order: int) -> Jet:
        raise NotImplementedError

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.jet(x, 0).value


class VectorField:
    """X = X^i d_i, contravariant components as jets."""

    dim: int

    def jet(self, x: np.ndarray, order: int) -> list[Jet]:
        raise NotImplementedError

    def values(self, x: np.ndarray) -> np.ndarray:
        js = self.jet(x, 0)
        return np.stack([np.broadcast_to(j.value, np.asarray(x).shape[:-1])
                         for j in js], axis=-1)


class Sym2Field:
    """Covariant symmetric 2-tensor field; jets of the n*n components."""

    dim: int

    def jet(self, x: np.ndarray, order: int) -> list[list[Jet]]:
        raise NotImplementedError

    def values(self, x: np.ndarray) -> np.ndarray:
        js = self.jet(x, 0)
        n = self.dim
        batch = np.asarray(x).shape[:-1]
        out = np.zeros(batch + (n, n))
        for i in range(n):
            for j in range(n):
                out[..., i, j] = np.broadcast_to(js[i][j].value, batch)
        return out


# ---------------------------------------------------------------------------
# expression-backed fields


class ExprScalarField(ScalarField):
    def __init__(self, dim: int, fn: Callable[[list[Jet]], Jet]):
        self.dim = dim
        self._fn = fn

    def jet(self, x, order):
        return self._fn(coordinate_jets(np.asarray(x, dtype=float), order))


class ConstantScalarField(ScalarField):
    def __init__(self, dim: int, value: float):
        self.dim = dim
        self.c = float(value)

    def jet(self, x, order):
        batch = np.asarray(x).shape[:-1]
        return const_jet(np.full(batch, self.c), self.dim, order)


class ScaledScalarField(ScalarField):
    def __init__(self, c: float, base: ScalarField):
        self.dim = base.dim
        self.c = float(c)
        self.base = base

    def jet(self, x, order):
        return self.base.jet(x, order) * self.c


class ExprVectorField(VectorField):
    def __init__(self, dim: int, fn: Callable[[list[Jet]], list[Jet]]):
        self.dim = dim
        self._fn = fn

    def jet(self, x, order):
        return self._fn(coordinate_jets(np.asarray(x, dtype=float), order))


class ExprSym2Field(Sym2Field):
    def __init__(self, dim: int, fn: Callable[[list[Jet]], list[list[Jet]]]):
        self.dim = dim
        self._fn = fn

    def jet(self, x, order):
        return self._fn(coordinate_jets(np.asarray(x, dtype=float), order))


# ---------------------------------------------------------------------------
# univariate profiles and radial fields


class Univariate:
    """A smooth function of one variable with derivatives through order 3."""

    def derivs(self, u: np.ndarray, order: int) -> list[np.ndarray]:
        raise NotImplementedError

    def __call__(self, u):
        return self.derivs(np.asarray(u, dtype=float), 0)[0]


class PolyProfile(Univariate):
    """Univariate polynomial profile; derivatives are exact."""

    def __init__(self, poly: np.polynomial.Polynomial):
        self.poly = poly
        self._derivs = [poly]
        for _ in range(3):
            self._derivs.append(self._derivs[-1].deriv(1))

    def derivs(self, u, order):
        u = np.asarray(u, dtype=float)
        return [p(u) for p in self._derivs[: order + 1]]


def polynomial_profile(coeffs) -> PolyProfile:
    """Profile sum_k coeffs[k] r^k."""
    return PolyProfile(np.polynomial.Polynomial(coeffs))


class WindowProfile(Univariate):
    """amplitude * ((r-a)(b-r))^power on [a, b], zero outside: compactly
    supported with power-1 continuous derivatives at the seams.

    Derivatives are evaluated from the factored form (r-a), (b-r) rather
    than by expanding the polynomial: the expanded monomial coefficients
    grow like (2/(b-a))^(2*power), and on narrow windows their cancellation
    noise would swamp the true second derivative."""

    def __init__(self, a: float, b: float, power: int = 2,
                 amplitude: float = 1.0):
        self.a, self.b = float(a), float(b)
        self.power = int(power)
        peak = ((b - a) / 2.0) ** (2 * power)
        self.scale = float(amplitude) / peak

    def derivs(self, u, order):
        u = np.asarray(u, dtype=float)
        inside = (u >= self.a) & (u <= self.b)
        f = (u - self.a) * (self.b - u)
        fp = (self.b - u) - (u - self.a)

        p = self.power

        def falling(k):
            out = 1.0
            for j in range(k):
                out *= p - j
            return out

        def piece(k):
            # falling(k) * f^(p-k); the prefactor is exactly zero whenever
            # the exponent would go negative, so skip the power entirely
            fac = falling(k)
            return fac * f ** (p - k) if fac != 0.0 else np.zeros_like(f)

        table = [f ** p]
        if order >= 1:
            table.append(piece(1) * fp)
        if order >= 2:
            table.append(piece(2) * fp ** 2 - 2.0 * piece(1))
        if order >= 3:
            table.append(piece(3) * fp ** 3 - 6.0 * piece(2) * fp)
        if order >= 4:
            table.append(piece(4) * fp ** 4 - 12.0 * piece(3) * fp ** 2
                         + 12.0 * piece(2))
        return [np.where(inside, self.scale * t, 0.0) for t in table]


def window_profile(a: float, b: float, power: int = 2,
                   amplitude: float = 1.0) -> WindowProfile:
    return WindowProfile(a, b, power, amplitude)


class BumpProfile(Univariate):
    """Compactly supported bump: amplitude * exp(s - s*q/((r-a)(b-r))) on
    (a, b) with q = ((b-a)/2)^2, identically zero (with all derivatives)
    outside. Smooth everywhere, so spectral methods still converge fast."""

    def __init__(self, a: float, b: float, sharpness: float = 1.0,
                 amplitude: float = 1.0):
        if not b > a:
            raise ValueError("empty support window")
        self.a, self.b = float(a), float(b)
        self.s = float(sharpness)
        self.amplitude = float(amplitude)

    def derivs(self, u, order):
        u = np.asarray(u, dtype=float)
        inside = (u > self.a) & (u < self.b)
        mid = 0.5 * (self.a + self.b)
        safe = np.where(inside, u, mid)
        rj = coordinate_jets(safe[..., None], order)[0]
        q = 0.25 * (self.b - self.a) ** 2
        p = (rj - self.a) * (self.b - rj)
        ex = ((1.0 - q * p.reciprocal()) * self.s).exp() * self.amplitude
        table = [ex.value]
        if order >= 1:
            table.append(ex.grad[..., 0])
        if order >= 2:
            table.append(ex.hess[..., 0, 0])
        if order >= 3:
            table.append(ex.third[..., 0, 0, 0])
        return [np.where(inside, t, 0.0) for t in table]


class UnivariateFromExpr(Univariate):
    """Profile defined by a jet expression of one variable; derivatives
    come from jet arithmetic, so they cannot drift out of sync."""

    def __init__(self, fn: Callable[[Jet], Jet]):
        self.fn = fn

    def derivs(self, u, order):
        u = np.asarray(u, dtype=float)
        rj = coordinate_jets(u[..., None], order)[0]
        out = self.fn(rj)
        table = [out.value]
        if order >= 1:
            table.append(out.grad[..., 0])
        if order >= 2:
            table.append(out.hess[..., 0, 0])
        if order >= 3:
            table.append(out.third[..., 0, 0, 0])
        return table


class UnivariateCallable(Univariate):
    def __init__(self, *fns: Callable[[np.ndarray], np.ndarray]):
        if not 1 <= len(fns) <= 4:
            raise ValueError("need 1..4 derivative callables")
        self.fns = fns

    def derivs(self, u, order):
        u = np.asarray(u, dtype=float)
        if order >= len(self.fns):
            raise ValueError(
                f"profile provides derivatives up to order {len(self.fns)-1}, "
                f"requested {order}")
        return [np.asarray(f(u), dtype=float) + np.zeros_like(u)
                for f in self.fns[: order + 1]]


def radius_jet(xs: list[Jet], center: Sequence[float] | None = None) -> Jet:
    """Jet of |x - c|; invalid at the center point itself."""
    n = len(xs)
    acc = None
    for i in range(n):
        d = xs[i] - (0.0 if center is None else float(center[i]))
        term = d * d
        acc = term if acc is None else acc + term
    return acc.sqrt()


def profile_of_jet(profile: Univariate, u: Jet) -> Jet:
    table = profile.derivs(u.value, min(u.order, 3))
    while len(table) < 4:
        table.append(np.zeros_like(u.value))
    return apply_univariate(u, table)


class _RadialScalar(ScalarField):
    def __init__(self, dim, profile: Univariate, center=None):
        self.dim = dim
        self.profile = profile
        self.center = center

    def jet(self, x, order):
        xs = coordinate_jets(np.asarray(x, dtype=float), order)
        return profile_of_jet(self.profile, radius_jet(xs, self.center))


def radial_scalar_field(dim: int, profile: Univariate, center=None) -> ScalarField:
    """f(x) = profile(|x - center|)."""
    return _RadialScalar(dim, profile, center)


class _RadialVector(VectorField):
    """X = phi(r) d_r written in chart components phi(r)/r * (x - c)^i."""

    def __init__(self, dim, profile: Univariate, center=None):
        self.dim = dim
        self.profile = profile
        self.center = center

    def jet(self, x, order):
        xs = coordinate_jets(np.asarray(x, dtype=float), order)
        r = radius_jet(xs, self.center)
        w = profile_of_jet(self.profile, r) / r
        out = []
        for i in range(self.dim):
            d = xs[i] - (0.0 if self.center is None else float(self.center[i]))
            out.append(w * d)
        return out


def radial_vector_field(dim: int, profile: Univariate, center=None) -> VectorField:
    return _RadialVector(dim, profile, center)


def position_field(dim: int, center=None) -> VectorField:
    """The dilation field sum_i (x - c)^i d_i  (= r d_r)."""

    def fn(xs):
        if center is None:
            return list(xs)
        return [xs[i] - float(center[i]) for i in range(dim)]

    return ExprVectorField(dim, fn)


# ---------------------------------------------------------------------------
# metric-shaped fields


class EuclideanSym2Field(Sym2Field):
    def __init__(self, dim: int):
        self.dim = dim

    def jet(self, x, order):
        batch = np.asarray(x).shape[:-1]
        one = const_jet(np.ones(batch), self.dim, order)
        zero = const_jet(np.zeros(batch), self.dim, order)
        return [[one if i == j else zero for j in range(self.dim)]
                for i in range(self.dim)]


def euclidean_metric_field(dim: int) -> Sym2Field:
    return EuclideanSym2Field(dim)


class ConformalFlatSym2Field(Sym2Field):
    """w(x)^power * delta_ij with w given as a jet expression."""

    def __init__(self, dim: int, factor_fn: Callable[[list[Jet]], Jet],
                 power: float = 1.0):
        self.dim = dim
        self.factor_fn = factor_fn
        self.power = power

    def factor_jet(self, x, order) -> Jet:
        xs = coordinate_jets(np.asarray(x, dtype=float), order)
        w = self.factor_fn(xs)
        if self.power != 1.0:
            w = w ** self.power
        return w

    def jet(self, x, order):
        w = self.factor_jet(x, order)
        zero = const_jet(np.zeros_like(w.value), self.dim, order)
        return [[w if i == j else zero for j in range(self.dim)]
                for i in range(self.dim)]


def conformal_flat_metric_field(dim: int, factor_fn, power=1.0) -> Sym2Field:
    return ConformalFlatSym2Field(dim, factor_fn, power)


class ScaledSym2Field(Sym2Field):
    """(scalar field or constant) * base."""

    def __init__(self, scale, base: Sym2Field):
        self.dim = base.dim
        self.scale = scale
        self.base = base

    def jet(self, x, order):
        js = self.base.jet(x, order)
        if isinstance(self.scale, ScalarField):
            s = self.scale.jet(x, order)
        else:
            s = float(self.scale)
        return [[js[i][j] * s for j in range(self.dim)] for i in range(self.dim)]


class SumSym2Field(Sym2Field):
    def __init__(self, *terms: Sym2Field):
        self.dim = terms[0].dim
        self.terms = terms

    def jet(self, x, order):
        parts = [t.jet(x, order) for t in self.terms]
        n = self.dim
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = parts[0][i][j]
                for p in parts[1:]:
                    acc = acc + p[i][j]
                row.append(acc)
            out.append(row)
        return out


class RadialSym2Field(Sym2Field):
    """chi1(r) * delta + chi2(r) * dr (x) dr, with dr_i = (x-c)_i / r.

    The standard radially symmetric perturbation family; chi2 may be None.
    """

    def __init__(self, dim, chi1: Univariate | None, chi2: Univariate | None,
                 center=None):
        self.dim = dim
        self.chi1 = chi1
        self.chi2 = chi2
        self.center = center

    def jet(self, x, order):
        xs = coordinate_jets(np.asarray(x, dtype=float), order)
        n = self.dim
        r = radius_jet(xs, self.center)
        zero = const_jet(np.zeros_like(r.value), n, order)
        out = [[zero for _ in range(n)] for _ in range(n)]
        if self.chi1 is not None:
            c1 = profile_of_jet(self.chi1, r)
            for i in range(n):
                out[i][i] = out[i][i] + c1
        if self.chi2 is not None:
            c2 = profile_of_jet(self.chi2, r)
            rinv = r.reciprocal()
            d = [(xs[i] - (0.0 if self.center is None else float(self.center[i])))
                 * rinv for i in range(n)]
            for i in range(n):
                for j in range(i, n):
                    t = c2 * d[i] * d[j]
                    out[i][j] = out[i][j] + t
                    if j != i:
                        out[j][i] = out[j][i] + t
        return out


class TrigSym2Field(Sym2Field):
    """Seeded random symmetric tensor with low-order trigonometric
    polynomial entries; smooth and cheap to differentiate."""

    def __init__(self, dim: int, seed: int, n_modes: int = 3,
                 amplitude: float = 1.0, kmax: int = 2):
        self.dim = dim
        rng = np.random.default_rng(seed)
        self.amplitude = float(amplitude)
        self.modes = []  # per (i,j): list of (coeff, kvec, phase)
        for i in range(dim):
            for j in range(i, dim):
                entry = []
                for _ in range(n_modes):
                    coeff = rng.uniform(-1.0, 1.0)
                    kvec = rng.integers(-kmax, kmax + 1, size=dim)
                    phase = rng.uniform(0.0, 2.0 * np.pi)
                    entry.append((coeff, kvec.astype(float), phase))
                self.modes.append(((i, j), entry))

    def jet(self, x, order):
        xs = coordinate_jets(np.asarray(x, dtype=float), order)
        n = self.dim
        batch = np.asarray(x).shape[:-1]
        zero = const_jet(np.zeros(batch), n, order)
        out = [[zero for _ in range(n)] for _ in range(n)]
        for (i, j), entry in self.modes:
            acc = None
            for coeff, kvec, phase in entry:
                arg = const_jet(np.full(batch, phase), n, order)
                for m in range(n):
                    if kvec[m] != 0.0:
                        arg = arg + xs[m] * kvec[m]
                term = arg.cos() * (coeff * self.amplitude)
                acc = term if acc is None else acc + term
            out[i][j] = acc
            if j != i:
                out[j][i] = acc
        return out


def _trig_modes(rng, dim, n_modes, kmax):
    out = []
    for _ in range(n_modes):
        coeff = rng.uniform(-1.0, 1.0)
        kvec = rng.integers(-kmax, kmax + 1, size=dim).astype(float)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        out.append((coeff, kvec, phase))
    return out


def _trig_eval(modes, xs, amplitude, batch, dim, order):
    acc = None
    for coeff, kvec, phase in modes:
        arg = const_jet(np.full(batch, phase), dim, order)
        for m in range(dim):
            if kvec[m] != 0.0:
                arg = arg + xs[m] * kvec[m]
        term = arg.cos() * (coeff * amplitude)
        acc = term if acc is None else acc + term
    return const_jet(np.zeros(batch), dim, order) if acc is None else acc


class TrigScalarField(ScalarField):
    """Seeded random trigonometric-polynomial scalar field."""

    def __init__(self, dim: int, seed: int, n_modes: int = 3,
                 amplitude: float = 1.0, kmax: int = 2):
        self.dim = dim
        self.amplitude = float(amplitude)
        self.modes = _trig_modes(np.random.default_rng(seed), dim,
                                 n_modes, kmax)

    def jet(self, x, order):
        x = np.asarray(x, dtype=float)
        xs = coordinate_jets(x, order)
        return _trig_eval(self.modes, xs, self.amplitude,
                          x.shape[:-1], self.dim, order)


class TrigVectorField(VectorField):
    """Seeded random vector field with trigonometric-polynomial
    components; smooth everywhere, generically not Killing of anything."""

    def __init__(self, dim: int, seed: int, n_modes: int = 3,
                 amplitude: float = 1.0, kmax: int = 2):
        self.dim = dim
        self.amplitude = float(amplitude)
        rng = np.random.default_rng(seed)
        self.component_modes = [_trig_modes(rng, dim, n_modes, kmax)
                                for _ in range(dim)]

    def jet(self, x, order):
        x = np.asarray(x, dtype=float)
        xs = coordinate_jets(x, order)
        batch = x.shape[:-1]
        return [_trig_eval(modes, xs, self.amplitude, batch, self.dim, order)
                for modes in self.component_modes]


class PolynomialBasedField(ScalarField):
    """Scalar field whose jets come from a table of partial-derivative
    evaluators: deriv_eval(alpha_tuple, x) -> values.  Used by the exact
    polynomial machinery."""

    def __init__(self, dim: int, deriv_eval: Callable):
        self.dim = dim
        self._de = deriv_eval

    def jet(self, x, order):
        x = np.asarray(x, dtype=float)
        n = self.dim
        batch = x.shape[:-1]
        coeffs = [np.asarray(self._de((), x), dtype=float) + np.zeros(batch)]
        if order >= 1:
            g = np.zeros(batch + (n,))
            for i in range(n):
                g[..., i] = self._de((i,), x)
            coeffs.append(g)
        if order >= 2:
            h = np.zeros(batch + (n, n))
            for i in range(n):
                for j in range(i, n):
                    h[..., i, j] = self._de((i, j), x)
                    h[..., j, i] = h[..., i, j]
            coeffs.append(h)
        if order >= 3:
            t = np.zeros(batch + (n, n, n))
            for i in range(n):
                for j in range(i, n):
                    for k in range(j, n):
                        v = self._de((i, j, k), x)
                        for p in {(i, j, k), (i, k, j), (j, i, k),
                                  (j, k, i), (k, i, j), (k, j, i)}:
                            t[(...,) + p] = v
            coeffs.append(t)
        return Jet(n, coeffs)
