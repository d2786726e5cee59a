"""Minimal principal series in the compact (circle) picture.

Carrier vectors are finite Fourier series on the rotation circle with a
central parity (see circlefn). The scale-t operator evaluates, at each
circle node, the exponent <-i*lambda - t*rho, logA/t> of the diagonal
Iwasawa factor of g^{-1} R(theta) and translates by the rotation factor;
the scale-0 (motion group) operator is a plane-wave phase times a left
translation. Sample-then-retransform with explicit node counts: the
scale-t operator does not preserve bandwidth, so aliasing is controlled by
the caller's quadrature budget, never assumed away.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circlefn import (
    PARITY_SIGN,
    PARITY_TRIVIAL,
    CircleFunction,
    from_samples,
    l2_distance,
    mode_function,
    sup_distance,
    uniform_nodes,
)
from .deformation import DeformedElement, deformed_element, phi_t, phi_t_inv
from .iwasawa_limits import iw_a, iw_k
from .matgroup import (
    adjoint,
    iwasawa_decompose,
    pair_covector,
    proj_a,
    rho_covector,
    rotation,
    rotation_angle,
    unimodular_inverse,
    wave_covector,
)
from .reporting import ConvergenceReport, convergence_report

_RHO = rho_covector(2)

_MIN_EXTRA_NODES = 32


@dataclass(frozen=True)
class MackeyParameter:
    """Flat-limit parameter: radial frequency chi and integer weight mu.

    mu labels the character of the two-element center through its parity;
    the parameter is regular when chi is nonzero.
    """

    chi: float
    mu: int = 0

    @property
    def regular(self):
        return self.chi != 0

    @property
    def parity(self):
        return PARITY_TRIVIAL if self.mu % 2 == 0 else PARITY_SIGN


def _node_budget(f: CircleFunction, quad_nodes):
    need = 4 * f.bandwidth + _MIN_EXTRA_NODES
    if quad_nodes is None:
        return max(need, 64)
    if quad_nodes < need:
        raise ValueError(
            f"need at least {need} quadrature nodes for bandwidth {f.bandwidth}"
        )
    return int(quad_nodes)


def ps_op(a: DeformedElement, ell, f: CircleFunction, quad_nodes=None):
    """Principal-series action of the scale-t element a on f.

    ell is the real frequency along the diagonal direction. Evaluates
    exp(<-i*ell_cov - t*rho, logA>/t) f(new_angle) at uniform circle nodes,
    where (kappa, logA) is the Iwasawa data of phi_t(a)^{-1} R(theta), then
    re-expands in Fourier modes.
    """
    if a.t == 0:
        raise ValueError("scale 0 has no principal-series form: use mg_op")
    count = _node_budget(f, quad_nodes)
    theta = uniform_nodes(count)
    moved = unimodular_inverse(phi_t(a)) @ rotation(theta)
    data = iwasawa_decompose(moved)
    lam = wave_covector(ell)
    exponent = (
        -1j * pair_covector(lam, data.log_a) / a.t
        - pair_covector(_RHO, data.log_a)
    )
    values = np.exp(exponent) * f(rotation_angle(data.kappa))
    return from_samples(values)


def mg_op(k, v, m: MackeyParameter, f: CircleFunction, quad_nodes=None):
    """Motion-group action of (k, v) on f at the flat parameter m.

    Pointwise phase e^{i <chi, Ad(u^{-1}) v>} followed by left translation
    by k; exactly unitary, evaluated to quadrature accuracy.
    """
    if f.parity is not None and f.parity != m.parity:
        raise ValueError(
            f"circle function parity {f.parity} does not match weight {m.mu}"
        )
    count = _node_budget(f, quad_nodes)
    theta = uniform_nodes(count)
    v = np.asarray(v, dtype=np.float64)
    chi = wave_covector(m.chi)
    back = adjoint(rotation(-theta), v)
    phase = np.exp(1j * pair_covector(chi, proj_a(back)))
    values = phase * f(theta - rotation_angle(k))
    return from_samples(values)


def renorm_check(g, chi, t, basis_modes=(0, 2, -2), quad_nodes=None):
    """Residual of the scale-change identity on a list of basis modes.

    Pulling g back to scale t and acting with frequency chi must agree with
    pulling back to scale 1 and acting with frequency chi/t. Returns a dict
    with the per-mode distances and their maximum.
    """
    if t <= 0:
        raise ValueError("renorm_check requires t > 0")
    g = np.asarray(g, dtype=np.float64)
    per_mode = {}
    for mode in basis_modes:
        f = mode_function(mode)
        lhs = ps_op(phi_t_inv(g, t), chi, f, quad_nodes)
        rhs = ps_op(phi_t_inv(g, 1.0), chi / t, f, quad_nodes)
        per_mode[int(mode)] = l2_distance(lhs, rhs)
    return {"residual": max(per_mode.values()), "perMode": per_mode}


def motion_limit_report(k, v, m: MackeyParameter, f: CircleFunction,
                        t_ladder, quad_nodes=None):
    """Distances between the scale-t action and its flat limit along a ladder.

    Per scale, both the coefficient-space and the sup-norm distance between
    ps_op((k, v, t), chi, f) and mg_op(k, v, m, f); fitted decay order per
    metric.
    """
    k = np.asarray(k, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    limit = mg_op(k, v, m, f, quad_nodes)
    l2_errors = []
    sup_errors = []
    for t in t_ladder:
        moved = ps_op(deformed_element(k, v, float(t)), m.chi, f, quad_nodes)
        l2_errors.append(l2_distance(moved, limit))
        sup_errors.append(sup_distance(moved, limit))
    return convergence_report(
        list(t_ladder), {"l2": l2_errors, "sup": sup_errors}
    )


def limit_error_split(k, v, m: MackeyParameter, f: CircleFunction, t,
                      quad_nodes=64):
    """Split the scale-t vs flat-limit gap into phase and translation parts.

    At each circle node u = R(theta), with w = -Ad(u^{-1}) v, the scale-t
    value factors through the vector Iwasawa maps:

        value_t(u) = exp(<-i*chi - t*rho, a_vec>) f(angle(k^{-1} u kappa_w)),
        a_vec = iw_a(w, t),  kappa_w = iw_k(w, t),

    and the flat value is exp(i <chi, proj(Ad(u^{-1})v)>) f(angle(k^{-1}u)).
    Returns per-node arrays: the total gap, the phase-factor gap, the
    weighted translation gap, the direct (full Iwasawa) values for the
    rearrangement identity, and the two vector-limit gaps that bound the
    parts.
    """
    if t <= 0:
        raise ValueError("limit_error_split requires t > 0")
    k = np.asarray(k, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    theta = uniform_nodes(int(quad_nodes))
    u = rotation(theta)
    w = -adjoint(rotation(-theta), v)
    a_vec = iw_a(w, t)
    kappa_w = iw_k(w, t)
    chi = wave_covector(m.chi)

    exponent = -1j * pair_covector(chi, a_vec) - t * pair_covector(_RHO, a_vec)
    factor_t = np.exp(exponent)
    factor_0 = np.exp(1j * pair_covector(chi, proj_a(-w)))

    base_angle = theta - rotation_angle(k)
    shifted_angle = base_angle + rotation_angle(kappa_w)
    value_t = factor_t * f(shifted_angle)
    value_0 = factor_0 * f(base_angle)

    element = deformed_element(k, v, float(t))
    moved = unimodular_inverse(phi_t(element)) @ u
    data = iwasawa_decompose(moved)
    direct_exponent = (
        -1j * pair_covector(chi, data.log_a) / t
        - pair_covector(_RHO, data.log_a)
    )
    value_direct = np.exp(direct_exponent) * f(rotation_angle(data.kappa))

    eye = np.eye(2)
    return {
        "total": np.abs(value_t - value_0),
        "phase_part": np.abs(factor_t - factor_0) * np.abs(f(shifted_angle)),
        "translation_part": np.abs(f(shifted_angle) - f(base_angle)),
        "value_t": value_t,
        "value_direct": value_direct,
        "a_gap": np.linalg.norm(
            np.diagonal(a_vec - proj_a(w), axis1=-2, axis2=-1), axis=-1
        ),
        "kappa_gap": np.linalg.norm(
            (kappa_w - eye).reshape(kappa_w.shape[:-2] + (4,)), axis=-1
        ),
    }


__all__ = [
    "CircleFunction",
    "MackeyParameter",
    "from_samples",
    "l2_distance",
    "limit_error_split",
    "mg_op",
    "mode_function",
    "motion_limit_report",
    "ps_op",
    "renorm_check",
    "sup_distance",
    "uniform_nodes",
]
