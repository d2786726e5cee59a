"""Complex-valued fields on the plane of symmetric parts.

A Field is backed by a closed-form evaluator, by grid samples, or both. Grid
coordinates are coefficients in the orthonormal symmetric-part frame (see
matgroup.p_basis), so the point (a1, a2) names the matrix
a1*diag(1,-1)/sqrt2 + a2*offdiag/sqrt2. Sampled-only fields interpolate
bilinearly and flag points outside the sampled square; flagged values are
excluded from norms by every consumer in this package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matgroup import coords_from_p, p_from_coords


@dataclass(frozen=True)
class GridSpec:
    """Uniform square grid [-extent, extent]^2 in frame coordinates."""

    extent: float
    resolution: int

    def __post_init__(self):
        if self.extent <= 0:
            raise ValueError("GridSpec requires a positive extent")
        if self.resolution < 2:
            raise ValueError("GridSpec requires resolution >= 2")

    @property
    def axis(self):
        return np.linspace(-self.extent, self.extent, self.resolution)

    @property
    def spacing(self):
        return 2.0 * self.extent / (self.resolution - 1)

    def mesh(self):
        return np.meshgrid(self.axis, self.axis)

    def points(self):
        """Symmetric-part matrices at the grid nodes, shape (res, res, 2, 2)."""
        gx, gy = self.mesh()
        return p_from_coords(np.stack([gx, gy], axis=-1))

    def disk_mask(self, radius):
        gx, gy = self.mesh()
        return gx * gx + gy * gy <= radius * radius


class Field:
    """Complex field over symmetric parts with optional grid backing."""

    def __init__(self, evaluator=None, grid: GridSpec | None = None,
                 samples=None, weight=None):
        if evaluator is None and samples is None:
            raise ValueError("Field requires an evaluator or samples")
        if samples is not None and grid is None:
            raise ValueError("sampled Field requires a GridSpec")
        self.evaluator = evaluator
        self.grid = grid
        self.samples = None if samples is None else np.asarray(samples, dtype=complex)
        self.weight = weight

    @property
    def sampled_only(self):
        return self.evaluator is None

    def evaluate(self, points):
        """Values plus validity mask at symmetric-part points (..., 2, 2).

        Evaluators may return plain values or a (values, mask) pair; masks
        mark points whose value had to be read outside sampled data.
        """
        points = np.asarray(points, dtype=np.float64)
        if self.evaluator is not None:
            out = self.evaluator(points)
            if isinstance(out, tuple):
                values, mask = out
                return np.asarray(values, dtype=complex), np.asarray(mask, bool)
            values = np.asarray(out, dtype=complex)
            return values, np.ones(values.shape, dtype=bool)
        return self._interpolate(points)

    def _interpolate(self, points):
        coords = coords_from_p(points)
        a1, a2 = coords[..., 0], coords[..., 1]
        extent, res = self.grid.extent, self.grid.resolution
        step = self.grid.spacing
        mask = (np.abs(a1) <= extent) & (np.abs(a2) <= extent)
        fx = np.clip((a1 + extent) / step, 0, res - 1)
        fy = np.clip((a2 + extent) / step, 0, res - 1)
        ix = np.minimum(fx.astype(int), res - 2)
        iy = np.minimum(fy.astype(int), res - 2)
        wx = fx - ix
        wy = fy - iy
        s = self.samples
        values = (
            s[iy, ix] * (1 - wx) * (1 - wy)
            + s[iy, ix + 1] * wx * (1 - wy)
            + s[iy + 1, ix] * (1 - wx) * wy
            + s[iy + 1, ix + 1] * wx * wy
        )
        return values, mask

    def sample_on(self, grid: GridSpec):
        """Field with samples materialized on the given grid (evaluator kept)."""
        values, _ = self.evaluate(grid.points())
        return Field(evaluator=self.evaluator, grid=grid, samples=values,
                     weight=self.weight)


def field_from_evaluator(fn, weight=None):
    return Field(evaluator=fn, weight=weight)


def field_from_samples(grid, values, weight=None):
    return Field(grid=grid, samples=values, weight=weight)


def constant_field(value, weight=None):
    value = complex(value)

    def evaluator(points):
        return np.full(np.asarray(points).shape[:-2], value, dtype=complex)

    return Field(evaluator=evaluator, weight=weight)


def zoom_field(f: Field, t):
    """Rescaled field x -> f(t x).

    Closed-form fields compose evaluators; sampled-only fields resample on the
    same node set, which requires t <= 1 so the read stays inside the grid.
    """
    if t <= 0:
        raise ValueError("zoom_field requires t > 0")
    if f.sampled_only:
        if t > 1.0:
            raise ValueError(
                "zoom_field beyond scale 1 would read outside the sampled grid"
            )
        pts = f.grid.points()
        values, _ = f.evaluate(float(t) * pts)
        return Field(grid=f.grid, samples=values, weight=f.weight)

    def evaluator(points):
        return f.evaluate(float(t) * np.asarray(points, dtype=np.float64))

    return Field(evaluator=evaluator, weight=f.weight)


def field_values(f: Field, points):
    values, mask = f.evaluate(points)
    return values


def sup_distance(f: Field, g: Field, points):
    """Max absolute gap over the points where both fields are valid."""
    fv, fm = f.evaluate(points)
    gv, gm = g.evaluate(points)
    mask = fm & gm
    if not mask.any():
        raise ValueError("sup_distance has no commonly valid points")
    return float(np.abs(fv - gv)[mask].max())


def sup_distance_to_constant(f: Field, points, value):
    fv, fm = f.evaluate(points)
    if not fm.any():
        raise ValueError("sup_distance_to_constant has no valid points")
    return float(np.abs(fv - complex(value))[fm].max())
