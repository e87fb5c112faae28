"""Closed-form compromise solutions for the min-max model.

Under interval uncertainty the worst case of any solution is
``(1+lam) * nominal_cost``, so the weighted integral over sizes factors and
the nominal minimizer is already the compromise optimum.  Under ellipsoidal
uncertainty the worst case is ``c^T x + lam * ||C^T x||_2`` and integrating
reduces the problem to a single robust counterpart at the weight centroid
``lam' = m1 / m0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .model import WeightFunction, solution_key
from .problems import Instance, enumerate_solutions, solve_nominal


@dataclass(frozen=True)
class EllipsoidReduction:
    """Weight centroid and moments backing the single-size reduction."""

    lambda_prime: float
    m0: float
    m1: float


def compromise_interval_minmax(instance: Instance, w: WeightFunction
                               ) -> tuple[np.ndarray, float]:
    """Compromise min-max solution for interval uncertainty.

    Returns the nominal minimizer and the exact weighted integral of its
    worst case, ``(m0 + m1) * nominal_value``.
    """
    dom = w.domain
    if dom.hi > 1.0 + 1e-12:
        raise DomainError("interval uncertainty requires sizes within [0, 1]")
    x_hat, v_hat = solve_nominal(instance, instance.nominal)
    m0, m1 = w.moments(dom.lo, dom.hi)
    return x_hat, (m0 + m1) * v_hat


def ellipsoid_worst_case(x: np.ndarray, nominal: np.ndarray, C: np.ndarray,
                         lam: float) -> float:
    """Worst-case cost of x over the ellipsoid of size lam."""
    if lam < 0:
        raise DomainError("ellipsoid size must be non-negative")
    C = np.asarray(C, dtype=np.float64)
    xf = np.asarray(x, dtype=np.float64)
    if C.shape[0] != xf.shape[0]:
        raise DomainError("ellipsoid matrix rows must match the ground set")
    return float(nominal @ xf + lam * np.linalg.norm(C.T @ xf))


def compromise_ellipsoid_minmax(instance: Instance, C: np.ndarray,
                                w: WeightFunction, limit: int = 10**6
                                ) -> tuple[np.ndarray, float, EllipsoidReduction]:
    """Compromise min-max solution for ellipsoidal uncertainty.

    Minimizes ``m0 * c^T x + m1 * ||C^T x||_2`` (the exact weighted integral
    of the worst case) by enumeration: the reduction is the contribution
    here, not a scalable conic solver, so desk-scale exhaustion is the
    deliberate choice.  Ties keep the first solution in enumeration order.
    """
    dom = w.domain
    m0, m1 = w.moments(dom.lo, dom.hi)
    if m0 <= 0:
        raise DomainError("weight function must carry positive mass")
    reduction = EllipsoidReduction(lambda_prime=m1 / m0, m0=m0, m1=m1)
    C = np.asarray(C, dtype=np.float64)
    best_x = None
    best_val = np.inf
    for x in enumerate_solutions(instance, limit=limit):
        val = m0 * float(instance.nominal @ x.astype(np.float64)) \
            + m1 * float(np.linalg.norm(C.T @ x.astype(np.float64)))
        if val < best_val:
            best_val = val
            best_x = x
    return best_x, best_val, reduction
