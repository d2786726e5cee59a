"""Convergence reports, order fitting, and deterministic serialization.

All experiment output funnels through this module so the CSV/JSON byte layout
is fixed in exactly one place: '.' decimals, '\\n' newlines, repr floats,
sorted JSON keys. Degenerate error vectors (everything at rounding level)
report an infinite fitted order, serialized by the JSON writer as the literal
``Infinity``.
"""

from __future__ import annotations

import json
import subprocess
from dataclasses import dataclass, field

import numpy as np

from . import __version__

ERROR_FLOOR_FACTOR = 10.0


def fit_order(t_values, errors):
    """Least-squares slope of log(error) against log(t).

    Points below 10x machine epsilon are treated as exact zeros and ignored;
    if fewer than two points survive, the order is reported as infinity (the
    errors are at rounding level for every scale).
    """
    t_values = np.asarray(t_values, dtype=np.float64)
    errors = np.asarray(errors, dtype=np.float64)
    if t_values.shape != errors.shape or t_values.size < 3:
        raise ValueError("fit_order requires at least 3 matching points")
    if np.any(t_values <= 0) or np.any(errors < 0):
        raise ValueError("fit_order requires positive scales and non-negative errors")
    floor = ERROR_FLOOR_FACTOR * np.finfo(np.float64).eps
    keep = errors > floor
    if np.count_nonzero(keep) < 2:
        return float("inf")
    logs_t = np.log(t_values[keep])
    logs_e = np.log(errors[keep])
    slope = np.polyfit(logs_t, logs_e, 1)[0]
    return float(slope)


@dataclass
class ConvergenceReport:
    """Scale ladder, per-metric error curves, fitted orders, and a verdict."""

    t_values: list
    errors: dict
    fitted_order: dict
    passed: bool
    gates: dict = field(default_factory=dict)
    min_orders: dict = field(default_factory=dict)

    def failing_metrics(self):
        """Metrics that break their final-error or minimum-order gate."""
        bad = []
        for metric, tol in self.gates.items():
            if float(self.errors[metric][-1]) > tol:
                bad.append(metric)
        for metric, floor in self.min_orders.items():
            if float(self.fitted_order[metric]) < floor:
                bad.append(metric)
        return sorted(set(bad))

    def to_json_dict(self, experiment, params, seed):
        return {
            "experiment": experiment,
            "params": params,
            "tValues": list(map(float, self.t_values)),
            "errors": {k: list(map(float, v)) for k, v in self.errors.items()},
            "fittedOrder": {k: float(v) for k, v in self.fitted_order.items()},
            "passed": bool(self.passed),
            "gates": {k: float(v) for k, v in self.gates.items()},
            "minOrders": {k: float(v) for k, v in self.min_orders.items()},
            "seed": seed,
            "buildStamp": build_stamp(),
        }


def convergence_report(t_values, errors, gates=None, min_orders=None,
                       extra_pass=True):
    """Assemble a ConvergenceReport, fitting one order per metric.

    Each metric's final error is gated against its tolerance in ``gates``
    and its fitted order against the floor in ``min_orders`` (when given).
    """
    fitted = {}
    gates = dict(gates or {})
    min_orders = dict(min_orders or {})
    for metric, curve in errors.items():
        fitted[metric] = fit_order(t_values, curve)
    report = ConvergenceReport(
        t_values=list(t_values),
        errors={k: list(v) for k, v in errors.items()},
        fitted_order=fitted,
        passed=bool(extra_pass),
        gates=gates,
        min_orders=min_orders,
    )
    report.passed = bool(extra_pass) and not report.failing_metrics()
    return report


def build_stamp():
    """Package version plus the short source revision when available."""
    try:
        rev = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            capture_output=True,
            text=True,
            timeout=5,
            check=True,
        ).stdout.strip()
    except Exception:
        rev = "unknown"
    return f"contractlab {__version__} ({rev})"


def write_json(path, payload):
    """Deterministic JSON: sorted keys, two-space indent, trailing newline.

    Non-finite floats use the json module literals (Infinity, NaN); the only
    one reports produce is Infinity, for degenerate fitted orders.
    """
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text + "\n")
    return text


def write_grid_csv(path, xs, ys, values):
    """Grid CSV with header x,y,re,im; repr floats; row-major over y then x."""
    values = np.asarray(values)
    lines = ["x,y,re,im"]
    for iy, y in enumerate(ys):
        for ix, x in enumerate(xs):
            z = complex(values[iy, ix])
            lines.append(f"{x!r},{y!r},{z.real!r},{z.imag!r}")
    text = "\n".join(lines) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
    return text


def write_rows_csv(path, header, rows):
    """Generic CSV with repr floats for float cells, plain str otherwise."""
    def cell(value):
        if isinstance(value, (float, np.floating)):
            return repr(float(value))
        return str(value)

    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell(c) for c in row))
    text = "\n".join(lines) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
    return text
