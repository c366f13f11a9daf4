"""Shared finite-difference oracles used by the test suite.

Everything here is deliberately independent of the package internals:
plain central differences on plain callables, with Richardson refinement
and a crude error estimate, so that analytic derivative code can be
checked against something that cannot share its bugs.
"""

from __future__ import annotations

from typing import Callable

import numpy as np


def richardson_pair(coarse: float, fine: float, order: int = 2):
    """One Richardson step for a sequence with error ~ h^order where the
    fine value used step h/2.  Returns (extrapolated, error_estimate)."""
    k = 2.0 ** order
    extrap = (k * fine - coarse) / (k - 1.0)
    return extrap, abs(fine - coarse)


def fd_gradient(f: Callable[[np.ndarray], float], x: np.ndarray,
                h: float = 1e-3) -> tuple[np.ndarray, float]:
    """Central-difference gradient with one Richardson refinement."""
    x = np.asarray(x, dtype=float)
    n = x.size

    def grad_at(step):
        g = np.zeros(n)
        for i in range(n):
            e = np.zeros(n)
            e[i] = step
            g[i] = (f(x + e) - f(x - e)) / (2.0 * step)
        return g

    g1, g2 = grad_at(h), grad_at(h / 2.0)
    out = (4.0 * g2 - g1) / 3.0
    return out, float(np.max(np.abs(g2 - g1)))


def fd_hessian(f: Callable[[np.ndarray], float], x: np.ndarray,
               h: float = 1e-3) -> tuple[np.ndarray, float]:
    """Central-difference Hessian (4-point cross stencil) with one
    Richardson refinement."""
    x = np.asarray(x, dtype=float)
    n = x.size

    def hess_at(step):
        H = np.zeros((n, n))
        for i in range(n):
            ei = np.zeros(n)
            ei[i] = step
            H[i, i] = (f(x + ei) - 2.0 * f(x) + f(x - ei)) / step ** 2
            for j in range(i + 1, n):
                ej = np.zeros(n)
                ej[j] = step
                H[i, j] = (f(x + ei + ej) - f(x + ei - ej)
                           - f(x - ei + ej) + f(x - ei - ej)) / (4.0 * step ** 2)
                H[j, i] = H[i, j]
        return H

    H1, H2 = hess_at(h), hess_at(h / 2.0)
    out = (4.0 * H2 - H1) / 3.0
    return out, float(np.max(np.abs(H2 - H1)))


def fd_third(f: Callable[[np.ndarray], float], x: np.ndarray,
             h: float = 5e-3) -> tuple[np.ndarray, float]:
    """Third derivative array d_i d_j d_k f by central differencing the
    FD Hessian in direction k."""
    x = np.asarray(x, dtype=float)
    n = x.size

    def third_at(step):
        T = np.zeros((n, n, n))
        for k in range(n):
            ek = np.zeros(n)
            ek[k] = step
            Hp, _ = fd_hessian(f, x + ek, step)
            Hm, _ = fd_hessian(f, x - ek, step)
            T[..., k] = (Hp - Hm) / (2.0 * step)
        return T

    T1, T2 = third_at(h), third_at(h / 2.0)
    out = (4.0 * T2 - T1) / 3.0
    return out, float(np.max(np.abs(T2 - T1)))


def fd_derivative(f: Callable[[float], float], t0: float = 0.0,
                  h: float = 1e-2, levels: int = 3) -> tuple[float, float]:
    """d/dt f at t0 by central differences over a halving step schedule
    with a full Richardson tableau.  Returns (derivative, error_estimate).
    """
    d = []
    for k in range(levels):
        s = h / 2.0 ** k
        d.append((f(t0 + s) - f(t0 - s)) / (2.0 * s))
    # Richardson tableau for even powers of h
    tab = [d]
    for m in range(1, levels):
        prev = tab[-1]
        fac = 4.0 ** m
        tab.append([(fac * prev[i + 1] - prev[i]) / (fac - 1.0)
                    for i in range(len(prev) - 1)])
    best = tab[-1][0]
    if levels >= 2:
        err = abs(tab[-1][0] - tab[-2][-1]) + 1e-15 * (1.0 + abs(best))
    else:
        err = abs(best) * 1e-2
    return best, err
