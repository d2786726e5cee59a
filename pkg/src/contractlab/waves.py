"""Curved plane waves, their flat limits, circle superpositions, and the
function-space representations they span.

The wave with parameters (ell, b, t) has value
``exp(<i*lambda + t*rho, a_t(Ad(b) v)>)`` at the flat point v, where a_t is
the scale-t diagonal Iwasawa projection. Evaluation uses the exact scaling
law a_t(w) = a_1(t w)/t in the rearranged form

    avec = a_1(Ad(b)(t v));  value = exp(rho(avec) + i * lambda(avec) / t),

which makes the rescaling identity "zoom by t of the scale-1 wave equals the
scale-t wave with parameter t*lambda" hold bit-for-bit at binary scales. At
t = 0 the wave is the flat plane wave exp(i lambda(diag part of Ad(b) v)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circlefn import CircleFunction, uniform_nodes
from .deformation import DeformedElement, action_t, inverse_t
from .fields import Field, GridSpec, field_from_evaluator, zoom_field
from .iwasawa_limits import _a_of
from .matgroup import (
    adjoint,
    pair_covector,
    proj_a,
    rho_covector,
    rotation,
    wave_covector,
)

ScalarField = Field

_RHO2 = rho_covector(2)


@dataclass(frozen=True)
class WaveSpec:
    """Wave parameters: frequency ell along the diagonal direction, source
    angle b on the rotation circle (mod the center), scale t >= 0."""

    ell: float
    b_angle: float
    t: float

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("WaveSpec requires t >= 0")


def wave_eval(spec: WaveSpec, v):
    """Wave value at flat point(s) v; batched over leading axes of v."""
    v = np.asarray(v, dtype=np.float64)
    b = rotation(spec.b_angle)
    lam = wave_covector(spec.ell)
    if spec.t == 0:
        avec = proj_a(adjoint(b, v))
        return np.exp(1j * pair_covector(lam, avec))
    scaled = adjoint(b, spec.t * v)
    avec = _a_of(scaled)
    phase = pair_covector(lam, avec) / spec.t
    log_modulus = pair_covector(_RHO2, avec)
    return np.exp(log_modulus + 1j * phase)


def wave_field(spec: WaveSpec):
    """The wave as a closed-form Field."""
    return field_from_evaluator(lambda pts: wave_eval(spec, pts))


def plane_wave_field(ell, b_angle):
    """Flat limit wave as a Field (scale-0 branch)."""
    return wave_field(WaveSpec(ell=ell, b_angle=b_angle, t=0.0))


def quasi_regular(a: DeformedElement, f: Field):
    """Pullback representation x -> f(a^{-1} . x) along the deformed action."""
    inv = inverse_t(a)

    def evaluator(points):
        moved = action_t(inv, np.asarray(points, dtype=np.float64))
        return f.evaluate(moved)

    return Field(evaluator=evaluator, weight=f.weight)


def poisson(F: CircleFunction, ell, t, grid: GridSpec | None = None,
            quad_nodes=None):
    """Superposition of waves against a circle function.

    Trapezoid quadrature on uniform nodes (spectrally exact against the
    band-limited factor); node count defaults to 2*bandwidth + 16. Returns a
    closed-form Field, sampled on the grid when one is given.
    """
    if quad_nodes is None:
        quad_nodes = 2 * F.bandwidth + 16
    theta = uniform_nodes(quad_nodes)
    weights = F(theta) / quad_nodes

    def evaluator(points):
        points = np.asarray(points, dtype=np.float64)
        acc = np.zeros(points.shape[:-2], dtype=complex)
        for angle, w in zip(theta, weights):
            acc = acc + w * wave_eval(WaveSpec(ell=ell, b_angle=angle, t=t), points)
        return acc

    out = field_from_evaluator(evaluator)
    if grid is not None:
        out = out.sample_on(grid)
    return out


def isotypic_project(f: Field, mode, quad_nodes=None, character_weight=0):
    """Projection onto the rotation-isotypic component of the given mode.

    Averages e^{-i mode theta} times the (optionally character-weighted)
    rotation action of f over the circle; idempotent and commuting with
    zoom_field. quad_nodes must be at least 4|mode| + 8.
    """
    mode = int(mode)
    if quad_nodes is None:
        quad_nodes = 4 * abs(mode) + 8
    if quad_nodes < 4 * abs(mode) + 8:
        raise ValueError("isotypic_project requires quad_nodes >= 4|mode| + 8")
    theta = uniform_nodes(quad_nodes)
    factors = np.exp(1j * (character_weight - mode) * theta) / quad_nodes
    back = rotation(-theta)

    def evaluator(points):
        points = np.asarray(points, dtype=np.float64)
        acc = np.zeros(points.shape[:-2], dtype=complex)
        ok = np.ones(points.shape[:-2], dtype=bool)
        for j in range(quad_nodes):
            moved = adjoint(back[j], points)
            values, mask = f.evaluate(moved)
            acc = acc + factors[j] * values
            ok = ok & mask
        return acc, ok

    return Field(evaluator=evaluator, weight=f.weight)


def wave_figure_data(ell, t_list, extent=1.5, resolution=256):
    """Grid datasets of the wave family at source angle 0.

    One entry per scale: dict with the scale, the axes, the complex values,
    and the envelope metadata used by the CSV/JSON writers.
    """
    if resolution < 2:
        raise ValueError("wave_figure_data requires resolution >= 2")
    grid = GridSpec(extent=float(extent), resolution=int(resolution))
    pts = grid.points()
    frames = []
    for t in t_list:
        values = wave_eval(WaveSpec(ell=float(ell), b_angle=0.0, t=float(t)), pts)
        frames.append(
            {
                "t": float(t),
                "xs": grid.axis,
                "ys": grid.axis,
                "values": values,
                "envelope": {
                    "lambda": float(ell),
                    "t": float(t),
                    "range": float(extent),
                    "resolution": int(resolution),
                },
            }
        )
    return frames


def recover_circle_weights(field: Field, ell, t, bandwidth, sample_points,
                           quad_nodes=None):
    """Least-squares circle function F' with field ~ poisson(F', ell, t).

    Returns (circle_function, relative_residual); used to check that the
    pullback representation preserves wave superposition spaces.
    """
    modes = list(range(-bandwidth, bandwidth + 1))
    if quad_nodes is None:
        quad_nodes = 2 * bandwidth + 16
    theta = uniform_nodes(quad_nodes)
    sample_points = np.asarray(sample_points, dtype=np.float64)
    basis = np.stack(
        [
            wave_eval(WaveSpec(ell=ell, b_angle=a, t=t), sample_points).ravel()
            for a in theta
        ],
        axis=1,
    ) / quad_nodes
    mode_matrix = np.exp(1j * np.outer(theta, modes))
    design = basis @ mode_matrix
    target, _ = field.evaluate(sample_points)
    target = target.ravel()
    coeff, *_ = np.linalg.lstsq(design, target, rcond=None)
    residual = float(np.linalg.norm(design @ coeff - target))
    scale = float(np.linalg.norm(target))
    rel = residual / scale if scale > 0 else residual
    recovered = CircleFunction(
        parity=None, coeffs={m: c for m, c in zip(modes, coeff)}
    )
    return recovered, rel


__all__ = [
    "ScalarField",
    "WaveSpec",
    "isotypic_project",
    "plane_wave_field",
    "poisson",
    "quasi_regular",
    "recover_circle_weights",
    "wave_eval",
    "wave_field",
    "wave_figure_data",
    "zoom_field",
]
