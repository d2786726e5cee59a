"""Iwasawa projections of the deformed groups and their small-scale limits.

The two maps send a symmetric part v to the diagonal part and the rotation
part of the triangular decomposition of mat_exp(t v), normalized so that the
diagonal map satisfies the exact scaling law
``iw_a(v, t) = iw_a(t v, 1) / t``. As t shrinks, the diagonal map tends to the
plain diagonal projection and the rotation map tends to the identity; the
limit values are returned directly at t = 0.
"""

from __future__ import annotations

import numpy as np

from .matgroup import iwasawa_decompose, mat_exp, p_basis, proj_a
from .reporting import ConvergenceReport, convergence_report


def _a_of(w):
    """Diagonal part of the triangular decomposition of mat_exp(w)."""
    return iwasawa_decompose(mat_exp(np.asarray(w, dtype=np.float64))).log_a


def iw_a(v, t):
    """Diagonal projection of the scale-t decomposition of the flat element v.

    Implemented exactly through the scaling law as iw_a(t v, 1) / t; at t = 0
    returns the proven limit proj_a(v).
    """
    if t < 0:
        raise ValueError("iw_a requires t >= 0")
    v = np.asarray(v, dtype=np.float64)
    if t == 0:
        return proj_a(v)
    return _a_of(t * v) / t


def iw_k(v, t):
    """Rotation factor of the scale-t decomposition of the flat element v.

    At t = 0 returns the identity (the proven limit).
    """
    if t < 0:
        raise ValueError("iw_k requires t >= 0")
    v = np.asarray(v, dtype=np.float64)
    n = v.shape[-1]
    if t == 0:
        return np.broadcast_to(np.eye(n), v.shape).copy()
    return iwasawa_decompose(mat_exp(t * v)).kappa


def iw_a_sl2(v):
    """Closed form of the t = 1 diagonal projection for 2x2 flat parts:
    half the log of (cosh 2q + (x/q) sinh 2q), with x the diagonal coefficient,
    y the off-diagonal one, q = sqrt(x^2 + y^2). Oracle for the decomposition.
    """
    v = np.asarray(v, dtype=np.float64)
    x = v[..., 0, 0]
    y = v[..., 0, 1]
    q = np.hypot(x, y)
    safe = np.where(q > 0, q, 1.0)
    val = 0.5 * np.log(np.cosh(2.0 * q) + (x / safe) * np.sinh(2.0 * q))
    val = np.where(q > 0, val, 0.0)
    return val[..., None, None] * np.array([[1.0, 0.0], [0.0, -1.0]])


def iw_limit_report(v_grid, t_ladder, derivative_step=1e-3) -> ConvergenceReport:
    """Sup-norm distance of the two projections from their limits over a grid.

    Metrics: 'aPart' for the diagonal map against proj_a, 'kPart' for the
    rotation map against the identity, plus first-derivative gaps by central
    differences ('aPartDeriv'). Orders are fitted per metric.
    """
    v_grid = np.asarray(v_grid, dtype=np.float64)
    if v_grid.size == 0:
        raise ValueError("iw_limit_report requires a non-empty grid")
    t_ladder = list(t_ladder)
    if len(t_ladder) == 0 or any(
        t2 >= t1 for t1, t2 in zip(t_ladder, t_ladder[1:])
    ):
        raise ValueError("iw_limit_report requires a strictly decreasing ladder")
    n = v_grid.shape[-1]
    basis = p_basis(n)
    limit_a = proj_a(v_grid)
    eye = np.eye(n)
    a_errs, k_errs, d_errs = [], [], []
    for t in t_ladder:
        gap_a = iw_a(v_grid, t) - limit_a
        gap_k = iw_k(v_grid, t) - eye
        a_errs.append(float(np.abs(gap_a).max()))
        k_errs.append(float(np.abs(gap_k).max()))
        worst = 0.0
        for direction in basis:
            plus = iw_a(v_grid + derivative_step * direction, t)
            minus = iw_a(v_grid - derivative_step * direction, t)
            fd = (plus - minus) / (2.0 * derivative_step)
            worst = max(worst, float(np.abs(fd - proj_a(direction)).max()))
        d_errs.append(worst)
    return convergence_report(
        t_ladder,
        {"aPart": a_errs, "kPart": k_errs, "aPartDeriv": d_errs},
    )
