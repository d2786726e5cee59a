"""Finite Fourier series on the rotation circle with a parity constraint.

Carrier vectors for the circle-picture operators: a function f on SO(2) that
transforms under the two-element center by a character must have all-even
modes (trivial character) or all-odd modes (sign character), because central
equivariance forces f(theta + pi) = +-f(theta). Mixed spectra are allowed as
raw data with parity None.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PARITY_TRIVIAL = "trivial"
PARITY_SIGN = "sign"

_SIGNIFICANT = 1e-14


def _mode_parity_ok(mode, parity):
    if parity == PARITY_TRIVIAL:
        return mode % 2 == 0
    if parity == PARITY_SIGN:
        return mode % 2 == 1
    return True


@dataclass(frozen=True)
class CircleFunction:
    """Finite Fourier series sum_m coeffs[m] e^{i m theta} with parity."""

    parity: str | None
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.parity not in (PARITY_TRIVIAL, PARITY_SIGN, None):
            raise ValueError(f"unknown parity {self.parity!r}")
        clean = {}
        for mode, amp in self.coeffs.items():
            mode = int(mode)
            amp = complex(amp)
            if not _mode_parity_ok(mode, self.parity):
                raise ValueError(
                    f"mode {mode} violates the {self.parity} parity constraint"
                )
            if amp != 0:
                clean[mode] = amp
        object.__setattr__(self, "coeffs", clean)

    @property
    def bandwidth(self):
        return max((abs(m) for m in self.coeffs), default=0)

    @property
    def modes(self):
        return sorted(self.coeffs)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        out = np.zeros(theta.shape, dtype=complex)
        for mode, amp in self.coeffs.items():
            out = out + amp * np.exp(1j * mode * theta)
        return out

    def l2_norm(self):
        """Norm for the normalized circle measure: sqrt of sum |c_m|^2."""
        return float(np.sqrt(sum(abs(a) ** 2 for a in self.coeffs.values())))

    def plus(self, other):
        merged = dict(self.coeffs)
        for mode, amp in other.coeffs.items():
            merged[mode] = merged.get(mode, 0.0) + amp
        parity = self.parity if self.parity == other.parity else None
        return CircleFunction(parity=parity, coeffs=merged)

    def scaled(self, factor):
        return CircleFunction(
            parity=self.parity,
            coeffs={m: factor * a for m, a in self.coeffs.items()},
        )


def mode_function(mode, parity=None, amplitude=1.0):
    """Single-mode circle function e^{i mode theta}; parity inferred if None."""
    if parity is None:
        parity = PARITY_TRIVIAL if mode % 2 == 0 else PARITY_SIGN
    return CircleFunction(parity=parity, coeffs={mode: amplitude})


def uniform_nodes(count):
    """count equally spaced angles on [0, 2 pi)."""
    if count < 1:
        raise ValueError("uniform_nodes requires count >= 1")
    return np.arange(count) * (2.0 * np.pi / count)


def from_samples(values, tol_factor=_SIGNIFICANT):
    """Circle function recovered from values on uniform_nodes(len(values)).

    Keeps every mode whose amplitude clears the relative threshold, with no
    parity filtering: a parity violation in the data survives into the result
    (whose parity is then inferred as trivial, sign, or None for mixed), so
    parity-preservation checks stay meaningful.
    """
    values = np.asarray(values, dtype=complex)
    count = values.shape[0]
    spectrum = np.fft.fft(values) / count
    top = float(np.abs(spectrum).max())
    threshold = tol_factor * max(top, 1.0)
    coeffs = {}
    for bin_index, amp in enumerate(spectrum):
        if abs(amp) <= threshold:
            continue
        mode = bin_index if bin_index <= count // 2 else bin_index - count
        coeffs[mode] = complex(amp)
    parities = {m % 2 for m in coeffs}
    if parities <= {0}:
        parity = PARITY_TRIVIAL
    elif parities == {1}:
        parity = PARITY_SIGN
    else:
        parity = None
    return CircleFunction(parity=parity, coeffs=coeffs)


def l2_distance(f: CircleFunction, g: CircleFunction):
    """Norm of f - g for the normalized circle measure."""
    modes = set(f.coeffs) | set(g.coeffs)
    return float(
        np.sqrt(sum(abs(f.coeffs.get(m, 0.0) - g.coeffs.get(m, 0.0)) ** 2
                    for m in modes))
    )


def sup_distance(f: CircleFunction, g: CircleFunction, nodes=512):
    theta = uniform_nodes(nodes)
    return float(np.abs(f(theta) - g(theta)).max())
