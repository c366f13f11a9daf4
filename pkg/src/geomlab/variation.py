"""Metric paths and first-variation machinery.

A ``MetricPath`` is a one-parameter family g(t) with g(0) = g0 and a
recorded velocity h = g'(0).  Four classes are supported:

* ``unconstrained``      -- g(t) = g0 + t h, any h;
* ``csc``                -- scalar curvature preserved to first order
                            (DS(h) = 0);
* ``csc-boundary-metric``-- additionally the induced boundary metric is
                            frozen (h tangential to the boundary is 0);
* ``csc-boundary-fixed`` -- h vanishes on the boundary entirely.

Constrained paths are built from a raw radial perturbation
hhat = chi1(r) g0 + chi2(r) dr (x) dr by solving the radial ODE
(n-1) lap v + S v = (n-2)/4 * DS(hhat) with v = 0 on the boundary and
setting h = 4/(n-2) v g0 + hhat, realized by the conformal family
g(t) = (1 + t v)^{4/(n-2)} (g0 + t hhat).  The constraint is enforced
to FIRST order only: every verified statement is a derivative at t = 0
and therefore depends only on h, so the nonlinear correction would buy
nothing.  Restricting hhat to the radial family keeps the corrector
problem an ODE (no mesh stack) while still exercising all the
first-variation formulas, which accept any admissible h.

Finite-difference derivatives of functionals along paths use a fixed
central-difference schedule with Richardson extrapolation in h^2; the
error bar comes from the extrapolation tableau.  ``CriticalityCheck``
packages an FD/analytic comparison with the tolerance policy
|fd - analytic| <= max(3 * fd_error, 1e-7 * max(1, |analytic|)).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.stats

from .boundary import DomainSpec, boundary_bundle
from .bvp import _model_interval_and_bc, solve_conformal_constraint
from .errors import ConfigError, PreconditionError
from .fields import (ExprScalarField, RadialSym2Field, ScalarField,
                     ScaledScalarField, ScaledSym2Field, SumSym2Field,
                     Sym2Field, TrigSym2Field, Univariate, VectorField,
                     profile_of_jet, radial_scalar_field, radius_jet,
                     window_profile)
from .functionals import _phi_values, functional_E2, functional_F
from .geometry import (ChartMetric, DivergenceField, curvature_bundle,
                       sym2_inner, vector_calc)
from .models import Model
from .operators import (conformal_killing_residual, ds, ds_star,
                        shape_operator_variation)
from .quadrature import (DEFAULT_ANGULAR_ORDER, boundary_rule,
                         integrate_boundary, integrate_volume,
                         sample_interior, volume_rule)

__all__ = [
    "PATH_UNCONSTRAINED", "PATH_CSC", "PATH_CSC_GAMMA", "PATH_CSC_ZERO",
    "PATH_CLASSES", "MetricPath", "CriticalityCheck",
    "make_linear_path", "random_trig_velocity", "solve_radial_bvp",
    "radial_perturbation", "make_constrained_path",
    "fd_path_derivative", "path_invariant_report",
    "analytic_dF_interior", "analytic_dF_boundary", "analytic_dE",
    "functional_F_evaluator", "functional_E2_evaluator",
    "boundary_q_datum", "divergence_sign_statistics",
]

PATH_UNCONSTRAINED = "unconstrained"
PATH_CSC = "csc"
PATH_CSC_GAMMA = "csc-boundary-metric"
PATH_CSC_ZERO = "csc-boundary-fixed"
PATH_CLASSES = (PATH_UNCONSTRAINED, PATH_CSC, PATH_CSC_GAMMA, PATH_CSC_ZERO)

FD_STEPS = (1e-2, 5e-3, 2.5e-3)


# ---------------------------------------------------------------------------
# paths


@dataclass
class MetricPath:
    base: ChartMetric
    velocity: Sym2Field                 # h = g'(0)
    path_class: str
    evaluate: Callable[[float], ChartMetric]
    label: str = ""
    hhat: Optional[Sym2Field] = None    # raw perturbation (constrained)
    corrector: Optional[Univariate] = None   # radial v, v = 0 on boundary
    t_max: float = 0.02

    def __post_init__(self):
        if self.path_class not in PATH_CLASSES:
            raise ConfigError(f"unknown path class '{self.path_class}'")

    def metric_at(self, t: float) -> ChartMetric:
        t = float(t)
        if t == 0.0:
            return self.base
        if abs(t) > self.t_max * (1.0 + 1e-12):
            raise PreconditionError(
                f"path '{self.label}' only certified for |t| <= "
                f"{self.t_max:g} (asked for {t:g})")
        return self.evaluate(t)


def _relative_size(g0: ChartMetric, h: Sym2Field, pts: np.ndarray) -> float:
    """max over pts of the largest |generalized eigenvalue| of h vs g0."""
    gv = g0.values(pts)
    hv = h.values(pts)
    worst = 0.0
    for k in range(pts.shape[0]):
        vals = scipy.linalg.eigvalsh(hv[k], gv[k])
        worst = max(worst, float(np.max(np.abs(vals))))
    return worst


def _scan_points(domain: DomainSpec, k: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    pts = [sample_interior(domain, k, rng)]
    for comp in domain.components():
        u = boundary_rule(comp, 6).u
        from .boundary import chart_map_jets
        xj = chart_map_jets(comp, u, 0)
        pts.append(np.stack([np.broadcast_to(c.value, (u.shape[0],))
                             for c in xj], axis=-1))
    return np.concatenate(pts, axis=0)


def make_linear_path(g0: ChartMetric, h: Sym2Field, domain: DomainSpec,
                     path_class: str = PATH_UNCONSTRAINED,
                     t_max: float = 0.02, label: str = "linear",
                     k: int = 30, seed: int = 0) -> MetricPath:
    """g(t) = g0 + t h after a positive-definiteness scan on interior
    and boundary samples.  A constrained class tag is accepted when the
    velocity satisfies that class's boundary trace condition (the
    scalar-curvature side is the caller's responsibility, e.g. an exact
    polynomial kernel element; the invariant report audits it)."""
    pts = _scan_points(domain, k, seed)
    mu = _relative_size(g0, h, pts)
    if t_max * mu >= 0.9:
        raise PreconditionError(
            f"g0 + t*h loses positive definiteness within |t| <= {t_max:g} "
            f"(relative size {mu:.3g})")
    if path_class in (PATH_CSC_GAMMA, PATH_CSC_ZERO):
        _check_class_preconditions(g0, domain, h, path_class)

    def evaluate(t):
        return ChartMetric(g0.dim,
                           SumSym2Field(g0.field, ScaledSym2Field(t, h)),
                           f"{g0.name}+t*h")

    return MetricPath(base=g0, velocity=h, path_class=path_class,
                      evaluate=evaluate, label=label, t_max=t_max)


def random_trig_velocity(g0: ChartMetric, domain: DomainSpec, seed: int,
                         amplitude: float = 0.4, t_max: float = 0.02,
                         target: float = 0.4, kmax: int = 2,
                         k: int = 30) -> Sym2Field:
    """Seeded trigonometric-polynomial h, rescaled so that g0 + t h
    keeps a comfortable definiteness margin on the step schedule."""
    h = TrigSym2Field(g0.dim, seed=seed, amplitude=amplitude, kmax=kmax)
    pts = _scan_points(domain, k, seed)
    mu = _relative_size(g0, h, pts)
    if t_max * mu > target:
        h = ScaledSym2Field(target / (t_max * mu), h)
    return h


# ---------------------------------------------------------------------------
# constrained paths


def solve_radial_bvp(model: Model, rhs_fn: Callable, num: int = 400,
                     breakpoints: Sequence[float] = (),
                     residual_tol: float = 1e-7):
    """Radial corrector solve (n-1) lap v + S v = rhs, v(boundary) = 0,
    with the residual guarantee enforced: a solve that cannot certify
    residual <= residual_tol raises instead of returning quietly."""
    sol = solve_conformal_constraint(model, rhs_fn, num=num,
                                     breakpoints=breakpoints)
    if sol.residual > residual_tol:
        raise PreconditionError(
            f"radial corrector residual {sol.residual:.2e} exceeds "
            f"{residual_tol:.0e}; pass the perturbation's seam radii as "
            f"breakpoints")
    return sol


def radial_perturbation(model: Model, path_class: str, seed: int,
                        amplitude: float = 0.5):
    """Raw radial perturbation hhat = chi1(r) g0 + chi2(r) dr (x) dr
    with window profiles whose knots respect the path class:

    * csc-boundary-fixed: both windows compactly supported in the open
      interval, so hhat (with all derivatives through order 3) vanishes
      at the boundary;
    * csc-boundary-metric: chi1 interior (tangential part vanishes at
      the boundary), chi2 allowed to touch the outer wall with nonzero
      value (normal-normal component survives there);
    * csc: both windows may touch the outer wall.

    Returns (hhat, seams) with `seams` the knot radii to hand to the
    corrector solver as breakpoints."""
    if path_class not in (PATH_CSC, PATH_CSC_GAMMA, PATH_CSC_ZERO):
        raise ConfigError(f"radial_perturbation: unsupported class "
                          f"'{path_class}'")
    (a, b), _, _ = _model_interval_and_bc(model)
    L = b - a
    rng = np.random.default_rng(seed)
    amp1 = amplitude * rng.uniform(0.4, 1.0)
    amp2 = amplitude * rng.uniform(0.4, 1.0)

    def interior_window(amp):
        w0 = a + L * rng.uniform(0.1, 0.3)
        w1 = w0 + L * rng.uniform(0.3, 0.5)
        w1 = min(w1, b - 0.08 * L)
        return window_profile(w0, w1, power=4, amplitude=amp), (w0, w1)

    def touching_window(amp):
        # support [c, b], peak value `amp` exactly at the outer wall
        c = b - L * rng.uniform(0.35, 0.6)
        return window_profile(c, 2.0 * b - c, power=4, amplitude=amp), (c,)

    def separated(maker, amp, taken, tries=64):
        # redraw until every new knot clears the existing ones by a
        # healthy margin, so the corrector never sees sliver pieces
        for _ in range(tries):
            chi, knots = maker(amp)
            if all(abs(s - t) >= 0.05 * L for s in knots for t in taken):
                return chi, knots
        raise PreconditionError(
            "radial_perturbation: could not separate window knots")

    seams: list[float] = []
    if path_class == PATH_CSC_ZERO:
        chi1, k1 = interior_window(amp1)
        chi2, k2 = separated(interior_window, amp2, k1)
    elif path_class == PATH_CSC_GAMMA:
        chi1, k1 = interior_window(amp1)
        chi2, k2 = separated(touching_window, amp2, k1)
    else:
        chi1, k1 = touching_window(amp1)
        chi2, k2 = separated(interior_window, amp2, k1)
    seams.extend(k1)
    seams.extend(k2)

    n = model.dim
    hhat = SumSym2Field(
        ScaledSym2Field(radial_scalar_field(n, chi1), model.metric.field),
        RadialSym2Field(n, None, chi2))
    seams = tuple(sorted(s for s in set(seams) if a < s < b))
    return hhat, seams


def _boundary_nodes(g0: ChartMetric, domain: DomainSpec, n_angular: int = 10):
    for comp in domain.components():
        u = boundary_rule(comp, n_angular).u
        yield comp, boundary_bundle(g0, comp, u, with_intrinsic=False)


def _check_class_preconditions(g0, domain, hhat, path_class, tol=1e-10):
    for comp, bb in _boundary_nodes(g0, domain):
        hv = hhat.values(bb.x)
        if path_class == PATH_CSC_ZERO:
            sup = float(np.max(np.abs(hv)))
            if sup > tol:
                raise PreconditionError(
                    f"boundary-fixed path needs hhat = 0 on the boundary "
                    f"(sup {sup:.2e} on '{comp.label}')")
        elif path_class == PATH_CSC_GAMMA:
            tang = np.einsum("...ai,...bj,...ij->...ab",
                             bb.tangents, bb.tangents, hv)
            sup = float(np.max(np.abs(tang)))
            if sup > tol:
                raise PreconditionError(
                    f"boundary-metric path needs tangential hhat = 0 "
                    f"(sup {sup:.2e} on '{comp.label}')")


def _radial_axis(dim: int) -> np.ndarray:
    d = np.zeros(dim)
    d[0], d[1] = 0.6, 0.8
    return d


def _check_radial_symmetry(g0, hhat, interval, dim, seed, k=12, tol=1e-7):
    # narrow window profiles drive |DS(hhat)| to O(1e3); the audit is a
    # yes/no question (a non-radial hhat misses by O(scale)), so the
    # tolerance tracks the data size
    a, b = interval
    rs = np.linspace(a + 0.07 * (b - a), b - 0.07 * (b - a), k)
    d0 = _radial_axis(dim)
    Q = scipy.stats.special_ortho_group.rvs(dim, random_state=seed)
    v0 = ds(g0, hhat, rs[:, None] * d0)
    v1 = ds(g0, hhat, rs[:, None] * (Q @ d0))
    scale = max(1.0, float(np.max(np.abs(v0))))
    sup = float(np.max(np.abs(v0 - v1)))
    if sup > tol * scale:
        raise PreconditionError(
            f"DS(hhat) is not radially symmetric (rotation residual "
            f"{sup:.2e}); the radial corrector ODE does not apply")


def make_constrained_path(model: Model, hhat: Sym2Field, path_class: str,
                          seams: Sequence[float] = (), num: int = 400,
                          t_max: float = 0.02, label: str = "",
                          seed: int = 0) -> MetricPath:
    """First-order constrained path from a raw radial perturbation.

    Solves the radial corrector problem for v, sets
    h = 4/(n-2) v g0 + hhat and evaluates the family
    g(t) = (1 + t v)^{4/(n-2)} (g0 + t hhat).  Class preconditions on
    hhat are measured at boundary nodes, and the radial symmetry of
    DS(hhat) is audited by comparing two rays before reducing to the
    ODE."""
    n = model.dim
    g0 = model.metric
    domain = model.domain
    if path_class not in (PATH_CSC, PATH_CSC_GAMMA, PATH_CSC_ZERO):
        raise ConfigError(f"make_constrained_path: '{path_class}' is not a "
                          f"constrained class")
    _check_class_preconditions(g0, domain, hhat, path_class)
    interval, _, _ = _model_interval_and_bc(model)
    _check_radial_symmetry(g0, hhat, interval, n, seed=seed + 17)

    d0 = _radial_axis(n)
    scale = 0.25 * (n - 2.0)

    def rhs_fn(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        return scale * ds(g0, hhat, r[:, None] * d0)

    sol = solve_radial_bvp(model, rhs_fn, num=num, breakpoints=seams)
    v = sol.profile

    vmax = float(np.max(np.abs(sol.values)))
    if t_max * vmax >= 0.5:
        raise PreconditionError(
            f"conformal factor 1 + t*v degenerates within |t| <= {t_max:g} "
            f"(max |v| = {vmax:.3g})")
    pts = _scan_points(domain, 30, seed)
    mu = _relative_size(g0, hhat, pts)
    if t_max * mu >= 0.9:
        raise PreconditionError(
            f"g0 + t*hhat loses positive definiteness within "
            f"|t| <= {t_max:g} (relative size {mu:.3g})")

    p = 4.0 / (n - 2.0)
    vel = SumSym2Field(
        ScaledSym2Field(ScaledScalarField(p, radial_scalar_field(n, v)),
                        g0.field),
        hhat)

    def evaluate(t):
        def factor(xs):
            return (profile_of_jet(v, radius_jet(xs)) * t + 1.0) ** p

        fld = ScaledSym2Field(
            ExprScalarField(n, factor),
            SumSym2Field(g0.field, ScaledSym2Field(t, hhat)))
        return ChartMetric(n, fld, f"{model.name}|{path_class}")

    return MetricPath(base=g0, velocity=vel, path_class=path_class,
                      evaluate=evaluate, label=label or f"{path_class}#{seed}",
                      hhat=hhat, corrector=v, t_max=t_max)


# ---------------------------------------------------------------------------
# finite-difference derivative along a path


def fd_path_derivative(phi: Callable[[ChartMetric], float], path: MetricPath,
                       steps: Sequence[float] = FD_STEPS) -> dict:
    """Central differences at the step schedule, extrapolated in h^2
    (Neville tableau); the error bar is read off the tableau."""
    steps = tuple(float(s) for s in steps)
    if len(steps) < 2 or any(b >= a for a, b in zip(steps, steps[1:])):
        raise ConfigError("fd steps must be strictly decreasing")
    slopes = []
    for s in steps:
        fp = float(phi(path.metric_at(s)))
        fm = float(phi(path.metric_at(-s)))
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise PreconditionError(
                f"functional returned a non-finite value at t = ±{s:g}")
        slopes.append((fp - fm) / (2.0 * s))

    # Neville in h^2
    T = [list(slopes)]
    m = len(steps)
    for j in range(1, m):
        row = []
        for i in range(m - j):
            ratio = (steps[i] / steps[i + j]) ** 2
            val = T[j - 1][i + 1] + (T[j - 1][i + 1] - T[j - 1][i]) / (ratio - 1.0)
            row.append(val)
        T.append(row)
    best = T[-1][0]
    prev = T[-2][-1]
    err = max(abs(best - prev), 1e-14 * (1.0 + abs(best)))
    if m >= 3:
        err = max(err, 0.25 * abs(T[-2][-1] - T[-2][-2]))
    return {"derivative": float(best), "error": float(err),
            "samples": [float(s) for s in slopes]}


def functional_F_evaluator(domain: DomainSpec, X: VectorField, lam: float,
                           n_angular: int = DEFAULT_ANGULAR_ORDER):
    return lambda g: functional_F(g, domain, X, lam, n_angular)


def functional_E2_evaluator(domain: DomainSpec, phi,
                            n_angular: int = DEFAULT_ANGULAR_ORDER):
    return lambda g: functional_E2(g, domain, phi, n_angular)


# ---------------------------------------------------------------------------
# path invariants


def path_invariant_report(path: MetricPath, domain: DomainSpec,
                          k: int = 25, seed: int = 5) -> dict:
    """Measured residuals of the MetricPath contract.

    * the evaluator returns the base metric exactly at t = 0;
    * (g(t) - g0)/t converges to the velocity at first order in t
      (difference quotients at t = 1e-2, 1e-3);
    * class residuals: sup |DS(h)| on interior samples for constrained
      classes, tangential / full boundary traces as appropriate."""
    g0 = path.base
    rng = np.random.default_rng(seed)
    pts = sample_interior(domain, k, rng)
    out: dict = {"path_class": path.path_class, "label": path.label}

    out["initial_exact"] = path.metric_at(0.0) is g0

    hv = path.velocity.values(pts)
    errs = []
    for t in (1e-2, 1e-3):
        gt = path.metric_at(t).values(pts)
        errs.append(float(np.max(np.abs((gt - g0.values(pts)) / t - hv))))
    out["velocity_quotient_errors"] = tuple(errs)
    out["velocity_limit_ok"] = errs[1] <= max(0.2 * errs[0], 1e-11)

    ok = out["initial_exact"] and out["velocity_limit_ok"]
    if path.path_class != PATH_UNCONSTRAINED:
        ds_sup = float(np.max(np.abs(ds(g0, path.velocity, pts))))
        out["ds_sup"] = ds_sup
        ok = ok and ds_sup <= 1e-6
    if path.path_class in (PATH_CSC_GAMMA, PATH_CSC_ZERO):
        worst_tan = 0.0
        worst_full = 0.0
        for comp, bb in _boundary_nodes(g0, domain):
            hb = path.velocity.values(bb.x)
            tang = np.einsum("...ai,...bj,...ij->...ab",
                             bb.tangents, bb.tangents, hb)
            worst_tan = max(worst_tan, float(np.max(np.abs(tang))))
            worst_full = max(worst_full, float(np.max(np.abs(hb))))
        out["tangential_sup"] = worst_tan
        ok = ok and worst_tan <= 1e-10
        if path.path_class == PATH_CSC_ZERO:
            out["boundary_sup"] = worst_full
            ok = ok and worst_full <= 1e-10
    out["passed"] = bool(ok)
    return out


# ---------------------------------------------------------------------------
# analytic first-variation formulas


def analytic_dF_interior(g0: ChartMetric, X: VectorField, h: Sym2Field,
                         domain: DomainSpec, lam: float,
                         n_radial: int = 24, n_angular: int = 32,
                         ck_tol: float = 1e-8, seed: int = 2) -> float:
    """dF/dt at t=0 for an arbitrary velocity h:

        (n-2)/(2n) * Int_Omega [ <DS*(div X), h> - (div X) DS(h) ] dV
        + 1/2 * Int_Sigma <G, h> <X, nu> dgamma

    Requires X conformal Killing for g0 (checked on interior samples)."""
    n = g0.dim
    rng = np.random.default_rng(seed)
    samples = sample_interior(domain, 20, rng)
    ck = conformal_killing_residual(g0, X, samples)
    if ck > ck_tol:
        raise PreconditionError(
            f"X is not conformal Killing (residual {ck:.2e} > {ck_tol:.0e})")

    w = DivergenceField(g0, X)

    def interior(x):
        b = curvature_bundle(g0, x)
        hv = h.values(x)
        term1 = sym2_inner(b.ginv, ds_star(g0, w, x), hv)
        f = vector_calc(g0, X, x).divergence
        term2 = f * ds(g0, h, x)
        return (n - 2.0) / (2.0 * n) * (term1 - term2)

    total = integrate_volume(g0, interior, volume_rule(domain, n_radial,
                                                       n_angular))

    for comp in domain.components():
        rule = boundary_rule(comp, n_angular)

        def boundary(bb):
            b = curvature_bundle(g0, bb.x)
            Gv = b.einstein_lambda(lam)
            inner = sym2_inner(bb.ambient_ginv, Gv, h.values(bb.x))
            xdotnu = np.einsum("...i,...i->...", bb.nu_cov, X.values(bb.x))
            return 0.5 * inner * xdotnu

        total += integrate_boundary(g0, rule, boundary)
    return float(total)


def analytic_dF_boundary(g0: ChartMetric, X: VectorField, h: Sym2Field,
                         domain: DomainSpec, lam: float,
                         n_angular: int = 32) -> float:
    """dF/dt at t=0 for h vanishing tangentially on the boundary:

        Int_Sigma [ (n-2)/n (div X) DH(h) + 1/2 <G, h> <X, nu> ] dgamma

    (the tangential precondition is enforced by the mean-curvature
    linearization)."""
    n = g0.dim
    total = 0.0
    for comp in domain.components():
        rule = boundary_rule(comp, n_angular)
        bb = boundary_bundle(g0, comp, rule.u, with_intrinsic=False)
        sv = shape_operator_variation(g0, comp, rule.u, h, bb=bb)
        f = vector_calc(g0, X, bb.x).divergence
        b = curvature_bundle(g0, bb.x)
        Gv = b.einstein_lambda(lam)
        inner = sym2_inner(bb.ambient_ginv, Gv, h.values(bb.x))
        xdotnu = np.einsum("...i,...i->...", bb.nu_cov, X.values(bb.x))
        vals = ((n - 2.0) / n * f * sv.dh_values + 0.5 * inner * xdotnu)
        total += rule.integrate(vals * bb.sqrt_det_gamma)
    return float(total)


def analytic_dE(g0: ChartMetric, phi, path: MetricPath, domain: DomainSpec,
                n_angular: int = 32) -> float:
    """dE_phi/dt at t=0 along a boundary-metric-preserving path:

        Int_Sigma phi [ (n-2)/(n-1) H H'(0) - <A'(0), traceless A> ]

    with A'(0) from the shape-operator linearization.

    The formula needs the path to hold the tangential boundary metric
    fixed.  Constructed csc-boundary-metric and csc-boundary-fixed paths
    do so exactly; an unconstrained path qualifies when its velocity has
    vanishing tangential trace (a linear path then fixes gamma exactly,
    the trace restriction being linear in the metric)."""
    n = g0.dim
    h = path.velocity
    if path.path_class not in (PATH_CSC_GAMMA, PATH_CSC_ZERO):
        if path.path_class != PATH_UNCONSTRAINED:
            raise PreconditionError(
                f"dE formula needs a boundary-metric-preserving path, got "
                f"'{path.path_class}'")
        _check_class_preconditions(g0, domain, h, PATH_CSC_GAMMA)
    total = 0.0
    for comp in domain.components():
        rule = boundary_rule(comp, n_angular)
        bb = boundary_bundle(g0, comp, rule.u, with_intrinsic=False)
        sv = shape_operator_variation(g0, comp, rule.u, h, bb=bb)
        inner = np.einsum("...ac,...bd,...ab,...cd->...",
                          bb.gamma_inv, bb.gamma_inv,
                          sv.a_prime, bb.shape_traceless)
        vals = _phi_values(phi, bb.x) * (
            (n - 2.0) / (n - 1.0) * bb.mean_curvature * sv.dh_values - inner)
        total += rule.integrate(vals * bb.sqrt_det_gamma)
    return float(total)


# ---------------------------------------------------------------------------
# criticality records and hypothesis audits


@dataclass
class CriticalityCheck:
    """FD/analytic comparison for one functional along one path, with
    the boundary datum Q = <X, nu> G that controls whether criticality
    can extend to paths with free normal components."""

    functional: str
    path_label: str
    path_class: str
    fd: float
    fd_error: float
    analytic: float = 0.0
    q_nu_sup: Optional[float] = None
    floor_scale: float = 1e-7

    @property
    def deviation(self) -> float:
        return abs(self.fd - self.analytic)

    @property
    def tolerance(self) -> float:
        return max(3.0 * self.fd_error,
                   self.floor_scale * max(1.0, abs(self.analytic)))

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance

    def exceeds_noise(self, factor: float = 10.0) -> bool:
        """For negative controls: the measured derivative stands clear
        of its own error bar."""
        return abs(self.fd) >= factor * self.fd_error


def boundary_q_datum(g0: ChartMetric, X: VectorField, domain: DomainSpec,
                     lam: float, n_angular: int = 12) -> dict:
    """sup over boundary nodes of |Q(nu, .)| and |Q(nu, nu)| for
    Q = <X, nu> G; a zero first value is the eigenvector condition that
    criticality over free-normal-component paths forces."""
    q_nu = 0.0
    q_nn = 0.0
    for comp, bb in _boundary_nodes(g0, domain, n_angular):
        Gv = curvature_bundle(g0, bb.x).einstein_lambda(lam)
        xdotnu = np.einsum("...i,...i->...", bb.nu_cov, X.values(bb.x))
        qrow = xdotnu[..., None] * np.einsum("...ij,...i->...j", Gv, bb.nu)
        norm2 = np.einsum("...i,...ij,...j->...", qrow, bb.ambient_ginv, qrow)
        q_nu = max(q_nu, float(np.sqrt(np.max(np.maximum(norm2, 0.0)))))
        qnn = xdotnu * np.einsum("...ij,...i,...j->...", Gv, bb.nu, bb.nu)
        q_nn = max(q_nn, float(np.max(np.abs(qnn))))
    return {"q_nu_sup": q_nu, "q_nu_nu_sup": q_nn}


def divergence_sign_statistics(g0: ChartMetric, X: VectorField,
                               pts: np.ndarray,
                               u: Optional[ScalarField] = None) -> dict:
    """Pointwise statistics of div X - X(u) on the sample set (default
    u = 0).  Sign constancy on a dense set is a hypothesis of the
    rigidity statements; density itself is not numerically decidable,
    so only sample statistics are reported."""
    f = vector_calc(g0, X, pts).divergence
    if u is not None:
        ju = u.jet(pts, 1)
        f = f - np.einsum("...i,...i->...",
                          np.broadcast_to(ju.grad, X.values(pts).shape),
                          X.values(pts))
    return {
        "min": float(np.min(f)),
        "max": float(np.max(f)),
        "fraction_positive": float(np.mean(f > 0.0)),
    }
