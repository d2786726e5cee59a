"""The deformation family of groups on a fixed rotation-times-symmetric chart.

For scale t > 0 the chart point (k, v) names the matrix mat_exp(t v) k, and the
deformed product is the matrix product read back through the chart; at t = 0
the same chart carries the rigid-motion product (k1 k2, v1 + Ad(k1) v2).
t = 0 is a first-class branch everywhere, never a numerical limit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matgroup import (
    AlgebraVector,
    adjoint,
    bracket,
    cartan_decompose,
    coords_from_p,
    form_B,
    mat_exp,
    p_basis,
    p_from_coords,
    rotation,
    spd_log,
    split_kp,
)


@dataclass(frozen=True)
class DeformedElement:
    """Chart point (k, v, t): rotation part, symmetric part, scale."""

    k: np.ndarray
    v: np.ndarray
    t: float


def deformed_element(k, v, t):
    """Validated DeformedElement: k orthogonal, v symmetric traceless, t >= 0."""
    k = np.asarray(k, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    n = k.shape[-1]
    if float(np.abs(k @ np.swapaxes(k, -1, -2) - np.eye(n)).max()) > 1e-10:
        raise ValueError("deformed_element requires an orthogonal rotation part")
    if float(np.abs(v - np.swapaxes(v, -1, -2)).max()) > 1e-12:
        raise ValueError("deformed_element requires a symmetric flat part")
    if float(np.abs(np.trace(v, axis1=-2, axis2=-1)).max()) > 1e-12:
        raise ValueError("deformed_element requires a traceless flat part")
    if t < 0:
        raise ValueError("deformed_element requires t >= 0")
    return DeformedElement(k=k, v=v, t=float(t))


def identity_element(t, n=2):
    return DeformedElement(k=np.eye(n), v=np.zeros((n, n)), t=float(t))


def phi_t(e: DeformedElement):
    """Chart-to-matrix isomorphism mat_exp(t v) k; undefined at t = 0."""
    if e.t == 0:
        raise ValueError("phi_t is not defined at t = 0 (motion-group chart)")
    return mat_exp(e.t * e.v) @ e.k


def phi_t_inv(g, t):
    """Matrix-to-chart inverse of phi_t via the polar-type decomposition."""
    if t <= 0:
        raise ValueError("phi_t_inv requires t > 0")
    k, x = cartan_decompose(g)
    return DeformedElement(k=k, v=x / t, t=float(t))


def product_t(a: DeformedElement, b: DeformedElement):
    """Deformed product; at t = 0 the rigid-motion law, else through the chart."""
    if a.t != b.t:
        raise ValueError(f"product_t requires matching scales, got {a.t} and {b.t}")
    if a.t == 0:
        return DeformedElement(
            k=a.k @ b.k, v=a.v + adjoint(a.k, b.v), t=0.0
        )
    return phi_t_inv(phi_t(a) @ phi_t(b), a.t)


def inverse_t(a: DeformedElement):
    """Group inverse, exact in the chart at every scale: (k^T, -Ad(k^T) v)."""
    kt = np.swapaxes(a.k, -1, -2)
    return DeformedElement(k=kt, v=-adjoint(kt, a.v), t=a.t)


def act_matrix(g, x):
    """Transitive action of a unit-determinant matrix on symmetric parts:
    the symmetric logarithm of g exp(2x) g^T, halved."""
    g = np.asarray(g, dtype=np.float64)
    return 0.5 * spd_log(g @ mat_exp(2.0 * np.asarray(x)) @ np.swapaxes(g, -1, -2))


def action_t(a: DeformedElement, x):
    """Deformed transitive action on the symmetric part.

    For t > 0 this is the closed form (1/t) act_matrix(phi_t(a), t x); at t = 0
    the rigid motion v + Ad(k) x. Batched over x.
    """
    x = np.asarray(x, dtype=np.float64)
    if a.t == 0:
        return a.v + adjoint(a.k, x)
    return act_matrix(phi_t(a), a.t * x) / a.t


def zoom(x, t):
    """Rescaling x / t of the symmetric part; t > 0."""
    if t <= 0:
        raise ValueError("zoom requires t > 0")
    return np.asarray(x, dtype=np.float64) / t


def bracket_t(x, y, t):
    """Deformed bracket: [k,k] and [k,p] unchanged, [p,p] scaled by t^2.

    At t = 0 this is the motion-algebra bracket (flat part abelian).
    """
    typed = isinstance(x, AlgebraVector) or isinstance(y, AlgebraVector)
    xk, xp = (x.k_part, x.p_part) if isinstance(x, AlgebraVector) else split_kp(x)
    yk, yp = (y.k_part, y.p_part) if isinstance(y, AlgebraVector) else split_kp(y)
    out = (
        bracket(xk, yk)
        + bracket(xk, yp)
        + bracket(xp, yk)
        + (t * t) * bracket(xp, yp)
    )
    if typed:
        k_part, p_part = split_kp(out)
        return AlgebraVector(k_part=k_part, p_part=p_part)
    return out


def metric_t(x, xi, zeta, t, h=1e-4):
    """Invariant metric of the deformed action, by finite differences.

    The map y -> action_t of the inverse of the flat element at x transports x
    to the origin; the metric is form_B of the transported directions. At t = 0
    the metric is form_B at every base point (flat rigid-motion geometry).
    """
    if h <= 0:
        raise ValueError("metric_t requires a positive step")
    if t == 0:
        return float(form_B(xi, zeta))
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    move = DeformedElement(k=np.eye(n), v=-x, t=float(t))

    def transported(direction):
        plus = action_t(move, x + h * direction)
        minus = action_t(move, x - h * direction)
        return (plus - minus) / (2.0 * h)

    return float(form_B(transported(np.asarray(xi)), transported(np.asarray(zeta))))


# ---------------------------------------------------------------------------
# Coadjoint orbits (each scale pairs the dual through its own invariant form,
# so the action on split functionals is the conjugated adjoint below)


def motion_coadjoint(k, v, z: AlgebraVector):
    """Flat-limit coadjoint law on split functionals.

    The identification of the dual carried by the deformed family (each
    member paired through its own invariant form) degenerates, as the scale
    vanishes, to (z_k, z_p) -> (Ad(k) z_k, Ad(k) z_p + [v, Ad(k) z_k]); the
    orbit of a rotation-axis functional is then the flat disc swept by the
    bracket term, the degenerate case of the paraboloid-type surfaces at
    small positive scale.
    """
    zk = adjoint(k, z.k_part)
    zp = adjoint(k, z.p_part)
    return AlgebraVector(k_part=zk, p_part=zp + bracket(v, zk))


def _alg_scale(z: AlgebraVector, t):
    return AlgebraVector(k_part=z.k_part, p_part=t * z.p_part)


def deformed_coadjoint(gamma: DeformedElement, z: AlgebraVector):
    """Coadjoint action of a deformed-group element on a split functional.

    At positive scale this is the fixed-group adjoint conjugated by the
    p-part rescaling, so a rotation-axis functional sweeps a hyperboloid
    sheet that flattens toward the fixed plane as the scale shrinks; at
    scale zero it continues into the flat-limit law.
    """
    if gamma.t == 0:
        return motion_coadjoint(gamma.k, gamma.v, z)
    g = phi_t(gamma)
    moved = adjoint(g, _alg_scale(z, gamma.t).mat)
    k_part, p_part = split_kp(moved)
    return _alg_scale(AlgebraVector(k_part=k_part, p_part=p_part), 1.0 / gamma.t)


def _fractional(values):
    return values - np.floor(values)


def orbit_sweep_parameters(samples):
    """Deterministic low-discrepancy (angle, radius, direction) triples."""
    idx = np.arange(samples, dtype=np.float64)
    golden = (np.sqrt(5.0) - 1.0) / 2.0
    theta = 2.0 * np.pi * _fractional(idx * golden)
    radius = 1.5 * np.sqrt(_fractional(idx * np.sqrt(2.0)))
    psi = 2.0 * np.pi * _fractional(idx * np.sqrt(3.0))
    return theta, radius, psi


def coadjoint_orbit_t(z: AlgebraVector, t, samples):
    """Deterministic sweep of the coadjoint orbit through z at scale t.

    Group parameters run over a low-discrepancy sequence of rotation angles and
    flat displacements (the first sample is the identity, returning z itself).
    """
    if samples < 1:
        raise ValueError("coadjoint_orbit_t requires samples >= 1")
    theta, radius, psi = orbit_sweep_parameters(samples)
    out = []
    for i in range(samples):
        v = p_from_coords(radius[i] * np.array([np.cos(psi[i]), np.sin(psi[i])]))
        gamma = DeformedElement(k=rotation(theta[i]), v=v, t=float(t))
        out.append(deformed_coadjoint(gamma, z))
    return out


def plane_rotate_quarter(x):
    """Quarter-turn of a symmetric part within its orthonormal coordinate plane."""
    a = coords_from_p(np.asarray(x, dtype=np.float64))
    return p_from_coords(np.stack([-a[..., 1], a[..., 0]], axis=-1))


def sinh_stretch(x):
    """Radial stretch r -> sinh(r) of a symmetric part (form_B radius),
    composed with a quarter turn; emitted as figure data only."""
    x = np.asarray(x, dtype=np.float64)
    r = np.sqrt(np.maximum(form_B(x, x), 0.0))
    factor = np.where(r > 1e-12, np.sinh(r) / np.where(r > 1e-12, r, 1.0), 1.0)
    return factor[..., None, None] * plane_rotate_quarter(x)


def p_basis_frame(n=2):
    """Convenience re-export of the orthonormal symmetric-part frame."""
    return p_basis(n)
