"""Fine-type sections of the frequency-zero odd principal series.

The sign-parity circle space contains each odd rotation weight once; a fine
type is one of the weights +-1. The section attached to a circle point b
and a scale t is built from the equivariant chain value

    gamma(b, x, t) = e^{-<t*rho, a_t-vector(w)>} mu(kappa_t-vector(w))^{-1}
                     mu(b)^{-1} v,   w = -Ad(b^{-1}) x,

whose scale-0 limit is the constant mu(b)^{-1} v. Integrating against a
sign-parity circle function gives the transform into section fields; the
group acts by the cocycle mu(k_delta) F(v_delta) (positive character power:
the bundle built from mu^{-1}-values twists oppositely to the weighted
holomorphic model, and this power is the one that makes the transform
equivariant). The scale-0 limit map sends a circle function to the constant
equal to its Fourier coefficient at the fine weight, which drives the
rank-1/rank-0 structure of the outcome.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circlefn import (
    PARITY_SIGN,
    CircleFunction,
    mode_function,
    uniform_nodes,
)
from .deformation import (
    DeformedElement,
    action_t,
    deformed_element,
    inverse_t,
    phi_t,
)
from .fields import (
    Field,
    GridSpec,
    sup_distance,
    sup_distance_to_constant,
    zoom_field,
)
from .matgroup import (
    adjoint,
    cartan_decompose,
    iwasawa_decompose,
    make_rng,
    mat_exp,
    pair_covector,
    rho_covector,
    rotation,
    rotation_angle,
    sample_p,
    unimodular_inverse,
)
from .reporting import convergence_report

_RHO = rho_covector(2)

DEFAULT_GRID = GridSpec(extent=1.5, resolution=65)


@dataclass(frozen=True)
class FineKTypeData:
    """Odd rotation weight with its distinguished unit fiber vector."""

    mu_weight: int = 1
    v: complex = 1.0 + 0.0j

    def __post_init__(self):
        if self.mu_weight % 2 == 0:
            raise ValueError("fine K-type weight must be odd")

    @property
    def sigma(self):
        return PARITY_SIGN


def gamma_bar(g, d: FineKTypeData):
    """Chain value on group matrices: e^{-<rho, logA>} mu(kappa)^{-1} v."""
    data = iwasawa_decompose(np.asarray(g, dtype=np.float64))
    log_modulus = -pair_covector(_RHO, data.log_a)
    return np.exp(
        log_modulus - 1j * d.mu_weight * rotation_angle(data.kappa)
    ) * d.v


def gamma_section(b_angle, x, t, d: FineKTypeData):
    """Section value at symmetric part(s) x for circle point b and scale t.

    Evaluated through the scaling identity: the scale-t vector Iwasawa data
    of w is read off the plain decomposition of exp(t w), which keeps the
    exponent <t*rho, .> finite and exact down to t = 0, where the value is
    the constant mu(b)^{-1} v.
    """
    if t < 0:
        raise ValueError("gamma_section requires t >= 0")
    x = np.asarray(x, dtype=np.float64)
    w = -adjoint(rotation(-np.asarray(b_angle, dtype=np.float64)), x)
    mu_b = np.exp(-1j * d.mu_weight * np.asarray(b_angle)) * d.v
    if t == 0:
        return mu_b * np.ones(w.shape[:-2], dtype=complex)
    data = iwasawa_decompose(mat_exp(float(t) * w))
    log_modulus = -pair_covector(_RHO, data.log_a)
    k_angle = rotation_angle(data.kappa)
    return np.exp(log_modulus - 1j * d.mu_weight * k_angle) * mu_b


def _parity_gate(phi: CircleFunction):
    if phi.parity != PARITY_SIGN:
        raise ValueError("the transform requires a sign-parity circle function")


def T_transform(phi: CircleFunction, t, d: FineKTypeData,
                grid: GridSpec | None = None, quad_nodes=None):
    """Section field integrating gamma against the circle function.

    Uniform-node quadrature with at least 4*bandwidth + 32 nodes; the
    integrand's invariance under the half-turn is checked at runtime, so
    integrating over the whole circle realizes the quotient-circle integral.
    """
    _parity_gate(phi)
    need = 4 * phi.bandwidth + 32
    if quad_nodes is None:
        quad_nodes = need
    if quad_nodes < need:
        raise ValueError(f"T_transform needs at least {need} quadrature nodes")
    theta = uniform_nodes(int(quad_nodes))
    weights = phi(theta) / float(quad_nodes)

    center = np.exp(-1j * d.mu_weight * theta) * phi(theta)
    flipped = np.exp(-1j * d.mu_weight * (theta + np.pi)) * phi(theta + np.pi)
    drift = float(np.abs(center - flipped).max())
    if drift > 1e-10:
        raise ValueError(f"integrand not half-turn invariant (drift {drift:.3g})")

    t = float(t)

    def evaluator(points):
        points = np.asarray(points, dtype=np.float64)
        acc = np.zeros(points.shape[:-2], dtype=complex)
        for angle, weight in zip(theta, weights):
            acc = acc + weight * gamma_section(angle, points, t, d)
        return acc

    out = Field(evaluator=evaluator, weight=d.mu_weight)
    if grid is not None:
        out = out.sample_on(grid)
    return out


def qs_rep(a: DeformedElement, f: Field, d: FineKTypeData):
    """Scale-t group action on transform sections (positive cocycle power)."""
    inv = inverse_t(a)
    mu = d.mu_weight
    if a.t == 0:
        fixed = np.exp(1j * mu * rotation_angle(inv.k))

        def evaluator(points):
            values, mask = f.evaluate(action_t(inv, points))
            return fixed * values, mask

    else:
        back = unimodular_inverse(phi_t(a))
        t = a.t

        def evaluator(points):
            points = np.asarray(points, dtype=np.float64)
            group = back @ mat_exp(t * points)
            k_delta, x_delta = cartan_decompose(group)
            values, mask = f.evaluate(x_delta / t)
            return np.exp(1j * mu * rotation_angle(k_delta)) * values, mask

    return Field(evaluator=evaluator, weight=f.weight)


def qs_limit_value(phi: CircleFunction, d: FineKTypeData, quad_nodes=None):
    """Scale-0 limit constant: the Fourier coefficient at the fine weight.

    Computed by quadrature of mu(b)^{-1} phi(b) over the circle, which the
    tests compare with the coefficient read directly from phi.
    """
    _parity_gate(phi)
    if quad_nodes is None:
        quad_nodes = 4 * phi.bandwidth + 32
    theta = uniform_nodes(int(quad_nodes))
    values = np.exp(-1j * d.mu_weight * theta) * phi(theta)
    return complex(values.mean() * d.v)


def qs_limit_matrix(mode, d: FineKTypeData, samples=6, points=None,
                    seed=20260815, quad_nodes=None):
    """Matrix of scale-0 section values over random inputs in one mode line.

    Rows: sampled circle functions proportional to e^{i mode theta}; columns:
    values of their scale-0 transform at fixed symmetric-part points. The
    singular values of this matrix measure the rank of the limit map on the
    mode's isotypic line (1 at the fine weight, 0 elsewhere).
    """
    rng = make_rng(seed)
    if points is None:
        points = sample_p(rng, 8, scale=1.2)
    rows = []
    for _ in range(int(samples)):
        amp = complex(rng.normal(), rng.normal())
        phi = mode_function(int(mode), amplitude=amp)
        field = T_transform(phi, 0.0, d, quad_nodes=quad_nodes)
        values, _ = field.evaluate(points)
        rows.append(values.ravel())
    return np.stack(rows, axis=0)


def qs_contract_report(phi: CircleFunction, k, v, t_ladder, d: FineKTypeData,
                       grid: GridSpec | None = None, mask_radius=1.5,
                       quad_nodes=None):
    """Contraction of transform sections onto the fine-weight constant.

    Per scale t: the sup distance between the zoomed scale-1 section and the
    scale-t section (an exact identity up to rounding), and between the
    acted section and the constant limit mu(k)^{-1} times the scale-0 value.
    """
    grid = grid if grid is not None else DEFAULT_GRID
    k = np.asarray(k, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    points = grid.points()[grid.disk_mask(mask_radius)]
    base = T_transform(phi, 1.0, d, quad_nodes=quad_nodes)
    limit = qs_limit_value(phi, d, quad_nodes)
    target = np.exp(-1j * d.mu_weight * rotation_angle(k)) * limit
    section_errors = []
    operator_errors = []
    for t in t_ladder:
        t = float(t)
        section = T_transform(phi, t, d, quad_nodes=quad_nodes)
        section_errors.append(
            sup_distance(zoom_field(base, t), section, points)
        )
        moved = qs_rep(deformed_element(k, v, t), section, d)
        operator_errors.append(
            sup_distance_to_constant(moved, points, target)
        )
    return convergence_report(
        list(t_ladder),
        {"section": section_errors, "operator": operator_errors},
    )


__all__ = [
    "DEFAULT_GRID",
    "FineKTypeData",
    "T_transform",
    "gamma_bar",
    "gamma_section",
    "qs_contract_report",
    "qs_limit_matrix",
    "qs_limit_value",
    "qs_rep",
]
