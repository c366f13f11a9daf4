"""Tensor-product Gauss-Legendre rules on radial-graph domains.

Volume rules use the map x = c + r(t,u) * omega(u) with r blending the
inner and outer graphs; the coordinate Jacobian of that map is exactly
(rho_out - rho_in) r^{n-1} prod_k sin^{n-1-k}(theta_k), so the only
metric-dependent factor left to the integrand is sqrt(det g).  Boundary
rules carry plain product weights in the angles; sqrt(det gamma) supplies
both the surface measure and the angular one.

Integral values use plain (pairwise) numpy summation; error estimates
come from re-evaluating on a rule with 1.5x the orders.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from .boundary import (BoundaryComponent, DomainSpec, angular_measure,
                       boundary_bundle, chart_map_jets)
from .geometry import ChartMetric

__all__ = [
    "VolumeRule", "BoundaryRule", "volume_rule", "boundary_rule",
    "integrate_volume", "integrate_boundary", "volume_integral_with_error",
    "boundary_integral_with_error", "sample_interior", "chunked_scalar",
    "DEFAULT_RADIAL_ORDER", "DEFAULT_ANGULAR_ORDER",
]

DEFAULT_RADIAL_ORDER = 32
DEFAULT_ANGULAR_ORDER = 48


def _gl(k: int, a: float, b: float):
    z, w = leggauss(int(k))
    return 0.5 * (b - a) * z + 0.5 * (a + b), 0.5 * (b - a) * w


def _angle_grid(dim: int, n_ang: int):
    """Nodes/weights for the angle box [0,pi]^{dim-2} x [0,2pi]."""
    axes = []
    for _ in range(dim - 2):
        axes.append(_gl(n_ang, 0.0, np.pi))
    axes.append(_gl(n_ang, 0.0, 2.0 * np.pi))
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    u = np.stack([gg.reshape(-1) for gg in grids], axis=-1)
    w = None
    wgrids = np.meshgrid(*[a[1] for a in axes], indexing="ij")
    for wg in wgrids:
        w = wg.reshape(-1) if w is None else w * wg.reshape(-1)
    return u, w


@dataclass
class VolumeRule:
    domain: DomainSpec
    x: np.ndarray        # (N, n)
    w: np.ndarray        # (N,) coordinate weights incl. Jacobian
    n_radial: int
    n_angular: int

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.w, values))


@dataclass
class BoundaryRule:
    comp: BoundaryComponent
    u: np.ndarray        # (M, n-1) angles
    w: np.ndarray        # (M,) product GL weights (no measure factor)
    n_angular: int

    def integrate(self, values_times_sqrtdetgamma: np.ndarray) -> float:
        return float(np.dot(self.w, values_times_sqrtdetgamma))


def _rho_values(comp: BoundaryComponent, u: np.ndarray) -> np.ndarray:
    xj = chart_map_jets(comp, u, 0)
    x = np.stack([np.broadcast_to(c.value, u.shape[:-1]) for c in xj], axis=-1)
    return np.linalg.norm(x - comp.center, axis=-1)


def volume_rule(domain: DomainSpec, n_radial: int = DEFAULT_RADIAL_ORDER,
                n_angular: int = DEFAULT_ANGULAR_ORDER) -> VolumeRule:
    n = domain.dim
    u, wu = _angle_grid(n, n_angular)
    t, wt = _gl(n_radial, 0.0, 1.0)

    r_out = _rho_values(domain.outer, u)
    r_in = (np.zeros_like(r_out) if domain.inner is None
            else _rho_values(domain.inner, u))
    if domain.inner is not None and np.any(r_in >= r_out):
        raise ValueError("inner graph must lie strictly inside the outer one")

    meas = angular_measure(u, n) * wu
    om = _omega_values(u, n)

    # broadcast radial x angular
    r = r_in[None, :] + t[:, None] * (r_out - r_in)[None, :]
    w = (wt[:, None] * meas[None, :] * (r_out - r_in)[None, :]
         * r ** (n - 1))
    c = domain.outer.center
    x = c[None, None, :] + r[..., None] * om[None, :, :]
    return VolumeRule(domain, x.reshape(-1, n), w.reshape(-1),
                      n_radial, n_angular)


def _omega_values(u: np.ndarray, dim: int) -> np.ndarray:
    out = np.zeros(u.shape[:-1] + (dim,))
    prefix = np.ones(u.shape[:-1])
    for k in range(dim - 1):
        out[..., k] = prefix * np.cos(u[..., k])
        prefix = prefix * np.sin(u[..., k])
    out[..., dim - 1] = prefix
    return out


def boundary_rule(comp: BoundaryComponent,
                  n_angular: int = DEFAULT_ANGULAR_ORDER) -> BoundaryRule:
    u, wu = _angle_grid(comp.dim, n_angular)
    return BoundaryRule(comp, u, wu, n_angular)


def integrate_volume(g: ChartMetric, values_fn: Callable[[np.ndarray], np.ndarray],
                     rule: VolumeRule, chunk: int = 8192) -> float:
    """integral over the domain of values_fn * dV_g."""
    total = 0.0
    for sl in _chunks(rule.x.shape[0], chunk):
        x = rule.x[sl]
        mj = g.jets(x, 0)
        vals = values_fn(x) * np.sqrt(np.broadcast_to(mj.det.value, (x.shape[0],)))
        total += float(np.dot(rule.w[sl], vals))
    return total


def integrate_boundary(g: ChartMetric, rule: BoundaryRule,
                       values_fn: Callable[["object"], np.ndarray],
                       bb=None) -> float:
    """integral over the component of values_fn(bundle) * dA_gamma.

    values_fn receives the BoundaryBundle at the rule's nodes."""
    if bb is None:
        bb = boundary_bundle(g, rule.comp, rule.u, with_intrinsic=False)
    vals = values_fn(bb)
    return rule.integrate(vals * bb.sqrt_det_gamma)


def _scaled_orders(n_radial, n_angular, factor=1.5):
    return (int(np.ceil(n_radial * factor)), int(np.ceil(n_angular * factor)))


def volume_integral_with_error(g, values_fn, domain, n_radial, n_angular):
    base = integrate_volume(g, values_fn, volume_rule(domain, n_radial, n_angular))
    nr, na = _scaled_orders(n_radial, n_angular)
    fine = integrate_volume(g, values_fn, volume_rule(domain, nr, na))
    return fine, abs(fine - base)


def boundary_integral_with_error(g, comp, values_fn, n_angular):
    base = integrate_boundary(g, boundary_rule(comp, n_angular), values_fn)
    _, na = _scaled_orders(0, n_angular)
    fine = integrate_boundary(g, boundary_rule(comp, na), values_fn)
    return fine, abs(fine - base)


def _chunks(total: int, chunk: int):
    for start in range(0, total, chunk):
        yield slice(start, min(start + chunk, total))


def chunked_scalar(fn: Callable[[np.ndarray], np.ndarray], x: np.ndarray,
                   chunk: int = 8192) -> np.ndarray:
    """Evaluate a batch scalar function in memory-bounded chunks."""
    out = np.empty(x.shape[0])
    for sl in _chunks(x.shape[0], chunk):
        out[sl] = fn(x[sl])
    return out


def sample_interior(domain: DomainSpec, k: int, rng: np.random.Generator,
                    margin: float = 0.05) -> np.ndarray:
    """k random points strictly inside the domain (not uniform in volume;
    meant for pointwise identity checks)."""
    n = domain.dim
    u = np.zeros((k, n - 1))
    for a in range(n - 2):
        u[:, a] = rng.uniform(0.15, np.pi - 0.15, size=k)
    u[:, n - 2] = rng.uniform(0.0, 2.0 * np.pi, size=k)
    r_out = _rho_values(domain.outer, u)
    r_in = (np.zeros(k) if domain.inner is None else
            _rho_values(domain.inner, u))
    t = rng.uniform(margin, 1.0 - margin, size=k)
    r = r_in + t * (r_out - r_in)
    if domain.inner is None:
        r = np.maximum(r, margin * r_out)
    om = _omega_values(u, n)
    return domain.outer.center[None, :] + r[:, None] * om
