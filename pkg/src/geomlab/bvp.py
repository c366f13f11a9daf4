"""Radial two-point boundary value solver (Chebyshev collocation).

Used to build the conformal corrector v for constrained metric paths:
v solves  (n-1) lap v + S v = rhs  with v = 0 on the boundary spheres,
so that h = (4/(n-2)) v g + hhat lies in the kernel of the linearized
scalar curvature map.

The interval can be split at user-supplied breakpoints (typically the
seams of a compactly supported source, where the right-hand side is only
finitely differentiable); each piece then sees an analytic problem and
keeps spectral convergence. Solutions are re-expressed as per-piece
Chebyshev series truncated at their coefficient noise plateau, so the
derivatives (needed through third order by the jet engine) come from
term-by-term differentiation of a clean series instead of repeated
application of an ill-conditioned differentiation matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import numpy.polynomial.chebyshev as cheb
import scipy.linalg

from .errors import ConfigError, ModelRejectedError
from .fields import Univariate
from .models import Model

__all__ = ["chebyshev_lobatto", "ChebyshevProfile", "PiecewiseProfile",
           "RadialSolution", "solve_linear_bvp",
           "radial_laplacian_coefficients", "scalar_curvature_profile",
           "constraint_gap", "solve_conformal_constraint"]


def chebyshev_lobatto(num: int, a: float, b: float):
    """num+1 Chebyshev extreme points on [a, b] (ascending) and the
    collocation differentiation matrix acting on values at those points."""
    if num < 2:
        raise ConfigError("need at least 3 collocation nodes")
    k = np.arange(num + 1)
    t = np.cos(np.pi * k / num)            # 1 ... -1
    c = np.where((k == 0) | (k == num), 2.0, 1.0) * (-1.0) ** k
    dt = t[:, None] - t[None, :] + np.eye(num + 1)
    D = (c[:, None] / c[None, :]) / dt
    D -= np.diag(D.sum(axis=1))
    x = a + 0.5 * (b - a) * (1.0 - t)      # ascending: x[0]=a, x[-1]=b
    return x, D * (-2.0 / (b - a))


class ChebyshevProfile(Univariate):
    """Univariate backed by a Chebyshev series on [a, b]; derivatives are
    computed by differentiating the series."""

    def __init__(self, coeffs: np.ndarray, a: float, b: float):
        self.a, self.b = float(a), float(b)
        self._series = [np.asarray(coeffs, dtype=float)]
        scale = 2.0 / (self.b - self.a)
        for _ in range(4):
            self._series.append(cheb.chebder(self._series[-1]) * scale)

    def _map(self, u):
        return (2.0 * np.asarray(u, dtype=float) - (self.a + self.b)) \
            / (self.b - self.a)

    def derivs(self, u, order: int):
        t = self._map(u)
        return [cheb.chebval(t, self._series[m]) for m in range(order + 1)]


class PiecewiseProfile(Univariate):
    """Univariate glued from per-interval profiles (contiguous, ascending).
    Points outside the overall interval evaluate through the end pieces."""

    def __init__(self, pieces: Sequence[ChebyshevProfile]):
        self.pieces = list(pieces)
        self.breaks = np.array([p.a for p in self.pieces[1:]])

    def derivs(self, u, order: int):
        u = np.asarray(u, dtype=float)
        idx = np.searchsorted(self.breaks, u, side="right")
        out = [np.zeros_like(u) for _ in range(order + 1)]
        for q, piece in enumerate(self.pieces):
            mask = idx == q
            if not np.any(mask):
                continue
            table = piece.derivs(u[mask], order)
            for m in range(order + 1):
                out[m][mask] = table[m]
        return out


@dataclass
class RadialSolution:
    profile: Univariate
    nodes: np.ndarray
    values: np.ndarray
    residual: float          # sup |ODE residual| at off-node midpoints
    gap: float               # spectral gap of the homogeneous operator

    def __call__(self, u):
        return self.profile.derivs(u, 0)[0]


def _bc_row(size: int, D: np.ndarray, offset: int, local_idx: int,
            kind: str) -> np.ndarray:
    row = np.zeros(size)
    if kind == "dirichlet":
        row[offset + local_idx] = 1.0
    elif kind == "neumann":
        row[offset: offset + D.shape[0]] = D[local_idx]
    else:
        raise ConfigError(f"unknown boundary condition '{kind}'")
    return row


def _piece_layout(interval, breakpoints, num):
    r0, r1 = float(interval[0]), float(interval[1])
    if not r1 > r0:
        raise ConfigError("empty radial interval")
    cuts = sorted(float(s) for s in breakpoints if r0 < float(s) < r1)
    ends = [r0] + cuts + [r1]
    total = r1 - r0
    # The floor of 64 nodes only applies to pieces of healthy width.  On a
    # very short piece the Chebyshev differentiation matrix scales like
    # (n^2 / length)^2 in the second derivative, so keeping 64 nodes there
    # amplifies roundoff past any useful residual tolerance; short pieces
    # are also the ones that need the fewest nodes, since the data on them
    # is smooth and nearly polynomial.  Scale the floor down with width.
    nums = []
    for a, b in zip(ends[:-1], ends[1:]):
        frac = (b - a) / total
        floor = 64 if frac >= 0.15 else max(12, int(round(64 * frac / 0.15)))
        nums.append(max(floor, int(round(num * frac))))
    return ends, nums


def solve_linear_bvp(a_fn: Callable, b_fn: Callable, c_fn: Callable,
                     rhs_fn: Callable, interval, left=("dirichlet", 0.0),
                     right=("dirichlet", 0.0), num: int = 400,
                     gap_tol: float = 1e-6,
                     breakpoints: Sequence[float] = ()) -> RadialSolution:
    """Solve a(r) v'' + b(r) v' + c(r) v = rhs(r) on [r0, r1] by collocation.

    `left`/`right` are (kind, value) with kind in {dirichlet, neumann}.
    On a ball the left condition at r=0 should be ("neumann", 0.0): radial
    restrictions of smooth functions are even in r, and the coefficient
    row at the center is dropped in favour of that regularity condition.
    `breakpoints` split the interval where the data loses smoothness;
    value and first derivative are matched across each seam. Raises
    ModelRejectedError when the homogeneous operator is close to singular
    (the constrained path would not be well defined).
    """
    ends, nums = _piece_layout(interval, breakpoints, num)
    grids = [chebyshev_lobatto(nq, a, b)
             for nq, a, b in zip(nums, ends[:-1], ends[1:])]
    offsets = np.concatenate([[0], np.cumsum([nq + 1 for nq in nums])])
    size = int(offsets[-1])

    L = np.zeros((size, size))
    rhs = np.zeros(size)
    constraint_rows = []
    for q, (x, D) in enumerate(grids):
        off = int(offsets[q])
        nq = nums[q]
        D2 = D @ D
        xi = x[1:-1]
        rows = slice(off + 1, off + nq)
        L[rows, off: off + nq + 1] = (
            np.asarray(a_fn(xi))[:, None] * D2[1:-1]
            + np.asarray(b_fn(xi))[:, None] * D[1:-1])
        L[np.arange(off + 1, off + nq),
          np.arange(off + 1, off + nq)] += np.asarray(c_fn(xi))
        rhs[rows] = rhs_fn(xi)

    first = int(offsets[0])
    last = int(offsets[-1]) - 1
    L[first] = _bc_row(size, grids[0][1], first, 0, left[0])
    rhs[first] = left[1]
    constraint_rows.append(first)
    L[last] = _bc_row(size, grids[-1][1], int(offsets[-2]), nums[-1],
                      right[0])
    rhs[last] = right[1]
    constraint_rows.append(last)

    # interface rows: continuity of v and v' across each seam, written into
    # the duplicated end/start node rows of the adjacent pieces
    for q in range(len(grids) - 1):
        off_l, off_r = int(offsets[q]), int(offsets[q + 1])
        i_end = off_l + nums[q]
        row = np.zeros(size)
        row[i_end] = 1.0
        row[off_r] = -1.0
        L[i_end] = row
        rhs[i_end] = 0.0
        row = np.zeros(size)
        row[off_l: off_l + nums[q] + 1] = grids[q][1][nums[q]]
        row[off_r: off_r + nums[q + 1] + 1] -= grids[q + 1][1][0]
        L[off_r] = row
        rhs[off_r] = 0.0
        constraint_rows.extend([i_end, off_r])

    gap = _spectral_gap(L, constraint_rows)
    if gap < gap_tol:
        raise ModelRejectedError(
            f"radial constraint operator is near-singular "
            f"(spectral gap {gap:.2e} < {gap_tol:.0e})")

    v = np.linalg.solve(L, rhs)

    pieces = []
    residual = 0.0
    for q, (x, D) in enumerate(grids):
        off = int(offsets[q])
        vq = v[off: off + nums[q] + 1]
        coeffs = _values_to_series(x, vq, x[0], x[-1])
        piece = ChebyshevProfile(coeffs, x[0], x[-1])
        pieces.append(piece)
        mids = 0.5 * (x[:-1] + x[1:])
        vm, dvm, ddvm = piece.derivs(mids, 2)
        am, bm, cm = (np.asarray(a_fn(mids)), np.asarray(b_fn(mids)),
                      np.asarray(c_fn(mids)))
        res = am * ddvm + bm * dvm + cm * vm - np.asarray(rhs_fn(mids))
        # scale by the local operator magnitude: near a singular endpoint
        # (the 1/r drift at a ball center) the raw defect is pure roundoff
        # amplified by the coefficient blowup, not a convergence failure
        wgt = np.maximum(1.0, np.maximum(np.abs(am),
                                         np.maximum(np.abs(bm), np.abs(cm))))
        residual = max(residual, float(np.max(np.abs(res) / wgt)))

    profile = pieces[0] if len(pieces) == 1 else PiecewiseProfile(pieces)
    nodes = np.concatenate([g[0] for g in grids])
    return RadialSolution(profile=profile, nodes=nodes, values=v,
                          residual=residual, gap=gap)


def _values_to_series(x, v, r0, r1) -> np.ndarray:
    t = (2.0 * x - (r0 + r1)) / (r1 - r0)
    deg = len(x) - 1
    # Chebyshev-Vandermonde at the extreme points is near-orthogonal, so a
    # plain least-squares fit reproduces the interpolant to roundoff
    coeffs, *_ = np.linalg.lstsq(cheb.chebvander(t, deg), v, rcond=None)
    return _chop_noise_tail(coeffs)


def _chop_noise_tail(coeffs: np.ndarray) -> np.ndarray:
    """Truncate a Chebyshev series where its decay hits the solver noise
    plateau; keeping the roundoff tail would poison the differentiated
    series (error grows like k^2 per derivative order)."""
    ac = np.abs(coeffs)
    m0 = float(ac.max())
    if m0 == 0.0:
        return coeffs[:1]
    tail = np.maximum.accumulate(ac[::-1])[::-1]   # tail[k] = max_{j>=k}
    noise = tail[int(0.9 * len(ac))]
    floor = max(20.0 * noise, 1e-13 * m0)
    keep = np.nonzero(tail > floor)[0]
    if keep.size in (0, len(ac)):
        return coeffs
    return coeffs[: int(keep[-1]) + 3]


def _spectral_gap(L: np.ndarray, constraint_rows) -> float:
    """Smallest |eigenvalue| of the operator rows, boundary/interface rows
    imposed as constraints (generalized problem, singular mass matrix)."""
    M = np.eye(L.shape[0])
    for idx in constraint_rows:
        M[idx, idx] = 0.0
    vals = scipy.linalg.eigvals(L, M)
    finite = vals[np.isfinite(vals)]
    if finite.size == 0:
        return 0.0
    return float(np.min(np.abs(finite)))


# ---------------------------------------------------------------------------
# model-specific radial reductions


def radial_laplacian_coefficients(model: Model):
    """(a_fn, b_fn) with  lap v = a(r) v'' + b(r) v'  for radial v."""
    n = model.dim
    w = model.conformal_radial_factor
    if w is not None:
        def a_fn(r):
            return 1.0 / w.derivs(r, 0)[0] ** 2

        def b_fn(r):
            wv, wp = w.derivs(r, 1)
            return ((n - 1) / r + (n - 2) * wp / wv) / wv ** 2
        return a_fn, b_fn
    f = model.warp_profile
    if f is not None:
        def a_fn(r):
            return np.ones_like(np.asarray(r, dtype=float))

        def b_fn(r):
            fv, fp = f.derivs(r, 1)
            return (n - 1) * fp / fv
        return a_fn, b_fn
    raise ConfigError(
        f"model '{model.name}' has no radial reduction of the Laplacian")


def scalar_curvature_profile(model: Model) -> Callable:
    """S as a function of the chart radius."""
    n = model.dim
    if model.satisfies_a1:
        s0 = model.lam * n * (n - 1)
        return lambda r: np.full_like(np.asarray(r, dtype=float), s0)
    f = model.warp_profile
    if f is not None:
        def s_fn(r):
            fv, fp, fpp = f.derivs(r, 2)
            return (-2.0 * (n - 1) * fpp / fv
                    + (n - 1) * (n - 2) * (1.0 - fp ** 2) / fv ** 2)
        return s_fn
    w = model.conformal_radial_factor
    if w is not None:
        from .geometry import curvature_bundle

        def s_fn(r):
            rr = np.atleast_1d(np.asarray(r, dtype=float))
            x = np.zeros((rr.size, n))
            x[:, 0] = rr
            out = curvature_bundle(model.metric, x).scal
            return out if np.ndim(r) else out[0]
        return s_fn
    raise ConfigError(
        f"model '{model.name}' has no radial scalar-curvature profile")


def _model_interval_and_bc(model: Model):
    if "r_inner" in model.params:
        iv = (model.params["r_inner"], model.params["r_outer"])
        return iv, ("dirichlet", 0.0), ("dirichlet", 0.0)
    if "radius" in model.params:
        return (0.0, model.params["radius"]), ("neumann", 0.0), \
            ("dirichlet", 0.0)
    if "chart_radius" in model.params:
        return (0.0, model.params["chart_radius"]), ("neumann", 0.0), \
            ("dirichlet", 0.0)
    raise ConfigError(
        f"model '{model.name}' does not describe a radial domain")


def constraint_gap(model: Model, num: int = 400) -> float:
    """Spectral gap of v -> (n-1) lap v + S v with the model's radial
    boundary conditions (diagnostic; the solver rejects gaps < 1e-6)."""
    n = model.dim
    a_fn, b_fn = radial_laplacian_coefficients(model)
    s_fn = scalar_curvature_profile(model)
    iv, left, right = _model_interval_and_bc(model)
    x, D = chebyshev_lobatto(num, *iv)
    D2 = D @ D
    xi = x[1:-1]
    L = np.zeros((num + 1, num + 1))
    L[1:-1] = ((n - 1) * np.asarray(a_fn(xi))[:, None] * D2[1:-1]
               + (n - 1) * np.asarray(b_fn(xi))[:, None] * D[1:-1])
    L[np.arange(1, num), np.arange(1, num)] += np.asarray(s_fn(xi))
    L[0] = _bc_row(num + 1, D, 0, 0, left[0])
    L[-1] = _bc_row(num + 1, D, 0, num, right[0])
    return _spectral_gap(L, [0, num])


def solve_conformal_constraint(model: Model, rhs_fn: Callable,
                               num: int = 400,
                               breakpoints: Sequence[float] = ()
                               ) -> RadialSolution:
    """Solve (n-1) lap v + S v = rhs(r), v = 0 on the boundary spheres
    (plus even regularity at the center for ball domains)."""
    n = model.dim
    a_fn, b_fn = radial_laplacian_coefficients(model)
    s_fn = scalar_curvature_profile(model)
    # ball domains: the 1/r in the drift coefficient is only evaluated at
    # interior nodes; the row at r=0 itself carries the regularity condition
    iv, left, right = _model_interval_and_bc(model)
    return solve_linear_bvp(
        lambda r: (n - 1) * np.asarray(a_fn(r)),
        lambda r: (n - 1) * np.asarray(b_fn(r)),
        s_fn, rhs_fn, iv, left=left, right=right, num=num,
        breakpoints=breakpoints)
