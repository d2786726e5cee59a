"""Weight-m holomorphic series realized as weighted sections over the plane.

The symmetric-part plane maps onto the unit disk through the polar chart
(matrix exponential, then the fractional-linear action on the upper half
plane, then the Cayley map). Sections live on the plane as complex fields;
the j-th basis section is c(x)^j (1-|c(x)|^2)^{m/2}, the group acts by the
line-bundle cocycle mu(k_delta)^{-1} f(v_delta) read off the chart-level
factorization delta = a^{-1} . (I, x), and membership in the model is
monitored by a finite-difference weighted d-bar residual.

Frozen conventions, pinned by equivariance fits in the test suite:
the chart rotates with weight -2 (c(Ad(R(theta)) x) = e^{-2 i theta} c(x))
and the fiber character has weight +m (mu(R(theta)) = e^{i m theta}), so the
j-th basis section spans the rotation-isotypic line of weight m + 2j.
"""

from __future__ import annotations

import numpy as np

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
    field_from_evaluator,
    sup_distance_to_constant,
    zoom_field,
)
from .matgroup import (
    cartan_decompose,
    mat_exp,
    p_from_coords,
    p_norm,
    rotation_angle,
    unimodular_inverse,
)
from .reporting import convergence_report
from .waves import isotypic_project

SectionField = Field

# Rotation weight of the chart: c(Ad(R(theta)) x) = e^{i * this * theta} c(x).
CHART_ROTATION_WEIGHT = -2

DEFAULT_GRID = GridSpec(extent=2.0, resolution=257)


def basis_rotation_weight(j, m):
    """Rotation weight of the j-th basis section: m - chart weight times j."""
    return int(m) - CHART_ROTATION_WEIGHT * int(j)


def chart(x):
    """Disk coordinate of symmetric part(s) x, batched over leading axes.

    Matrix exponential, fractional-linear action on i in the upper half
    plane, then the Cayley map z -> (z - i)/(z + i). Sends 0 to 0 and the
    diagonal ray r*diag(1,-1) to tanh(r) on the real axis.
    """
    x = np.asarray(x, dtype=np.float64)
    g = mat_exp(x)
    z = (g[..., 0, 0] * 1j + g[..., 0, 1]) / (g[..., 1, 0] * 1j + g[..., 1, 1])
    return (z - 1j) / (z + 1j)


def chart_inverse(w):
    """Symmetric part mapping to the disk point(s) w under chart."""
    w = np.asarray(w, dtype=complex)
    mag = np.abs(w)
    if np.any(mag >= 1.0):
        raise ValueError("chart_inverse requires points inside the unit disk")
    r = np.arctanh(mag)
    alpha = -np.angle(w)
    coords = np.stack(
        [np.sqrt(2.0) * r * np.cos(alpha), np.sqrt(2.0) * r * np.sin(alpha)],
        axis=-1,
    )
    return p_from_coords(coords)


def volume_density(x):
    """Density of the scale-1 invariant volume against frame coordinates.

    Equals 2 (1-T^2)^{-2} T T' / rho with T = tanh(rho/sqrt2) and rho the
    trace-form norm of x; value 1 at the origin, matching the metric whose
    value at the basepoint is the trace form.
    """
    rho = p_norm(np.asarray(x, dtype=np.float64))
    arg = rho / np.sqrt(2.0)
    t_val = np.tanh(arg)
    t_prime = (1.0 / np.sqrt(2.0)) / np.cosh(arg) ** 2
    ratio = np.where(rho > 1e-12, t_val / np.where(rho > 1e-12, rho, 1.0),
                     1.0 / np.sqrt(2.0))
    return 2.0 * ratio * t_prime / (1.0 - t_val**2) ** 2


def ds_basis(j, m=2, grid: GridSpec | None = None):
    """The j-th basis section c^j (1-|c|^2)^{m/2} as a weight-m field."""
    j = int(j)
    m = int(m)
    if m < 2:
        raise ValueError("ds_basis requires weight m >= 2")
    if j < 0:
        raise ValueError("ds_basis requires index j >= 0")

    def evaluator(points):
        w = chart(points)
        return w**j * (1.0 - np.abs(w) ** 2) ** (m / 2.0)

    out = field_from_evaluator(evaluator, weight=m)
    if grid is not None:
        out = out.sample_on(grid)
    return out


def section_combination(coeffs, m=2, grid: GridSpec | None = None):
    """Finite combination sum_j coeffs[j] * basis_j as a weight-m field."""
    coeffs = [complex(c) for c in coeffs]
    m = int(m)

    def evaluator(points):
        w = chart(points)
        envelope = (1.0 - np.abs(w) ** 2) ** (m / 2.0)
        acc = np.zeros(w.shape, dtype=complex)
        power = np.ones(w.shape, dtype=complex)
        for c in coeffs:
            acc = acc + c * power
            power = power * w
        return acc * envelope

    out = field_from_evaluator(evaluator, weight=m)
    if grid is not None:
        out = out.sample_on(grid)
    return out


def _weight_of(f: Field, m):
    if m is None:
        m = f.weight
    if m is None:
        raise ValueError("section weight m is required (field carries none)")
    if f.weight is not None and int(m) != int(f.weight):
        raise ValueError(f"weight mismatch: field {f.weight}, argument {m}")
    return int(m)


def ds_rep(a: DeformedElement, f: Field, m=None):
    """Scale-t group action on weight-m sections.

    Factor a^{-1} . (I, x) = (k_delta, v_delta) in the chart of the scale-t
    group and return x -> mu(k_delta)^{-1} f(v_delta) with the weight-m
    character mu(R(theta)) = e^{i m theta}. Exact homomorphism; on rotations
    it reduces to mu(k) f(Ad(k^{-1}) x).
    """
    m = _weight_of(f, m)
    inv = inverse_t(a)
    if a.t == 0:
        fixed = np.exp(-1j * m * rotation_angle(inv.k))

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
            return np.exp(-1j * m * rotation_angle(k_delta)) * values, mask

    return Field(evaluator=evaluator, weight=m)


def ds_annihilate(f: Field, m=None, grid: GridSpec | None = None, h=1e-3):
    """Weighted d-bar residual of f as a field sampled on a grid.

    Divides out the weight envelope, differentiates in frame coordinates
    with central differences, converts to the antiholomorphic disk
    derivative through the chart Jacobian (same stencil), and multiplies
    the envelope back. Vanishes to O(h^2) exactly on the holomorphic model.
    Sampled-only fields use their own lattice with the grid spacing as the
    step and return the residual on the one-ring-trimmed grid; points whose
    evaluation was flagged come back as nan.
    """
    m = _weight_of(f, m)
    half = m / 2.0
    if f.sampled_only:
        src = f.grid
        pts = src.points()
        values = f.samples
        w = chart(pts)
        gtil = values * (1.0 - np.abs(w) ** 2) ** (-half)
        step = src.spacing
        inner = slice(1, -1)
        d1 = (gtil[inner, 2:] - gtil[inner, :-2]) / (2.0 * step)
        d2 = (gtil[2:, inner] - gtil[:-2, inner]) / (2.0 * step)
        c1 = (w[inner, 2:] - w[inner, :-2]) / (2.0 * step)
        c2 = (w[2:, inner] - w[:-2, inner]) / (2.0 * step)
        w_mid = w[inner, inner]
        out_grid = GridSpec(extent=src.extent - step,
                            resolution=src.resolution - 2)
    else:
        out_grid = grid if grid is not None else DEFAULT_GRID
        gx, gy = out_grid.mesh()
        coords = np.stack([gx, gy], axis=-1)

        def weighted(shift):
            pts = p_from_coords(coords + shift)
            values, mask = f.evaluate(pts)
            w = chart(pts)
            gtil = values * (1.0 - np.abs(w) ** 2) ** (-half)
            return np.where(mask, gtil, np.nan), w

        g_e, w_e = weighted(np.array([h, 0.0]))
        g_w, w_w = weighted(np.array([-h, 0.0]))
        g_n, w_n = weighted(np.array([0.0, h]))
        g_s, w_s = weighted(np.array([0.0, -h]))
        d1 = (g_e - g_w) / (2.0 * h)
        d2 = (g_n - g_s) / (2.0 * h)
        c1 = (w_e - w_w) / (2.0 * h)
        c2 = (w_n - w_s) / (2.0 * h)
        w_mid = chart(p_from_coords(coords))

    denom = c1 * np.conj(c2) - c2 * np.conj(c1)
    dbar = (c1 * d2 - c2 * d1) / denom
    residual = (1.0 - np.abs(w_mid) ** 2) ** half * dbar
    return Field(grid=out_grid, samples=residual, weight=None)


def ds_contract_report(coeffs, k, v, t_ladder, m=2,
                       grid: GridSpec | None = None, mask_radius=1.5):
    """Contraction of a basis combination onto its lowest-weight constant.

    Per scale t: the sup distance of the zoomed section from the constant
    coeffs[0], and of the transported-and-acted section from the constant
    mu(k) coeffs[0], both over the grid nodes inside the given radius.
    """
    grid = grid if grid is not None else DEFAULT_GRID
    k = np.asarray(k, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    m = int(m)
    f = section_combination(coeffs, m)
    base = complex(coeffs[0]) if len(coeffs) else 0.0j
    target = np.exp(1j * m * rotation_angle(k)) * base
    points = grid.points()[grid.disk_mask(mask_radius)]
    vector_errors = []
    operator_errors = []
    for t in t_ladder:
        f_t = zoom_field(f, float(t))
        vector_errors.append(sup_distance_to_constant(f_t, points, base))
        moved = ds_rep(deformed_element(k, v, float(t)), f_t, m)
        operator_errors.append(sup_distance_to_constant(moved, points, target))
    return convergence_report(
        list(t_ladder), {"vector": vector_errors, "operator": operator_errors}
    )


def ds_lowest_vanishing(f: Field, modes, m=None, quad_nodes=None):
    """Origin values of the rotation-isotypic projections of f.

    For sections in the span of the basis, every mode other than the fiber
    weight m vanishes at the origin and the mode-m value equals f(0).
    Returns {mode: complex value}.
    """
    m = _weight_of(f, m)
    origin = np.zeros((1, 2, 2))
    out = {}
    for mode in modes:
        projected = isotypic_project(f, int(mode), quad_nodes,
                                     character_weight=m)
        values, _ = projected.evaluate(origin)
        out[int(mode)] = complex(values[0])
    return out


__all__ = [
    "CHART_ROTATION_WEIGHT",
    "DEFAULT_GRID",
    "SectionField",
    "basis_rotation_weight",
    "chart",
    "chart_inverse",
    "ds_annihilate",
    "ds_basis",
    "ds_contract_report",
    "ds_lowest_vanishing",
    "ds_rep",
    "section_combination",
    "volume_density",
]
