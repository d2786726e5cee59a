"""contractctl: run named experiments, gate tolerances, emit reports.

`contractctl run <experiment> [--flag ...] [--config path.toml] [--out dir]`

Experiments fan out over a thread pool (capped by CONTRACTCTL_THREADS) when
several are named at once; each writes its own directory under --out with a
JSON report, delimited data, and a rendered PNG. Identical configuration,
seed included, produces byte-identical CSV/JSON. Exit 0 when every gate
passes, 1 when a gate fails (the failing metric is named), 2 on usage or
configuration errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import figures
from .circlefn import mode_function
from .compact_picture import MackeyParameter, motion_limit_report
from .deformation import (
    coadjoint_orbit_t,
    deformed_element,
    metric_t,
    product_t,
    action_t,
)
from .discrete_series import ds_contract_report
from .fields import GridSpec
from .iwasawa_limits import iw_limit_report
from .matgroup import (
    GEN_ROT,
    algebra_vector,
    coords_from_p,
    form_B,
    make_rng,
    p_from_coords,
    p_norm,
    rotation,
    sample_p,
    sample_rotation,
)
from .quasisplit_fine import FineKTypeData, qs_contract_report
from .reporting import (
    build_stamp,
    convergence_report,
    write_grid_csv,
    write_json,
    write_rows_csv,
)
from .waves import WaveSpec, wave_eval, wave_figure_data

DEFAULT_SEED = 20260815

_LADDER_FINE = [2.0**-k for k in range(1, 9)]
_LADDER_UNIT = [2.0**-k for k in range(0, 7)]

REPORT_EXPERIMENTS = (
    "group-law",
    "action",
    "metric-scaling",
    "iwasawa",
    "waves",
    "principal",
    "discrete",
    "quasisplit",
)
FIGURE_EXPERIMENTS = ("figure-orbit", "figure-wave", "figure-wave-sequence")
EXPERIMENTS = REPORT_EXPERIMENTS + FIGURE_EXPERIMENTS

# Per-experiment defaults; TOML config overrides these, flags override TOML.
DEFAULTS = {
    "group-law": {
        "t": _LADDER_FINE,
        "samples": 200,
        "normBound": 2.0,
        "tolerance": {"sl2": 0.05, "sl3": 0.05},
        "minOrder": {},
    },
    "action": {
        "t": _LADDER_FINE,
        "samples": 200,
        "normBound": 2.0,
        "pointBound": 1.5,
        "tolerance": {"sl2": 0.05, "sl3": 0.05},
        "minOrder": {},
    },
    "metric-scaling": {
        "t": [0.5, 0.25, 0.125],
        "samples": 50,
        "step": 1e-4,
        "tolerance": {"identity": 1e-5, "origin": 1e-6},
        "minOrder": {},
    },
    "iwasawa": {
        "t": _LADDER_FINE,
        "range": 1.5,
        "resolution": 17,
        "derivativeStep": 1e-3,
        "tolerance": {},
        "minOrder": {"aPart": 0.9, "kPart": 0.9, "aPartDeriv": 0.9},
    },
    "waves": {
        "t": _LADDER_UNIT,
        "lambda": 30.0,
        "bAngle": 0.0,
        "range": 1.5,
        "resolution": 65,
        "tolerance": {"zoomIdentity": 1e-13},
        "minOrder": {},
    },
    "principal": {
        "t": _LADDER_UNIT,
        "chi": 1.0,
        "mu": 0,
        "mode": None,
        "kAngle": 0.7,
        "v": [0.4, 0.3],
        "quadNodes": 64,
        "tolerance": {},
        "minOrder": {},
    },
    "discrete": {
        "t": _LADDER_UNIT,
        "weight": 2,
        "coeffs": [1.0, 0.5, 0.25],
        "kAngle": 0.7,
        "v": [0.3, 0.2],
        "range": 2.0,
        "resolution": 129,
        "maskRadius": 1.5,
        "tolerance": {"operator": 0.02},
        "minOrder": {},
    },
    "quasisplit": {
        "t": _LADDER_UNIT,
        "mu": 1,
        "kAngle": 0.7,
        "v": [0.3, 0.2],
        "range": 1.5,
        "resolution": 33,
        "maskRadius": 1.5,
        "quadNodes": None,
        "tolerance": {"section": 1e-10},
        "minOrder": {},
    },
    "figure-orbit": {
        "t": [1.0, 0.5, 0.25, 0.0],
        "kappa": 1.0,
        "samples": 200,
    },
    "figure-wave": {
        "t": [1.0],
        "lambda": 30.0,
        "range": 1.5,
        "resolution": 256,
    },
    "figure-wave-sequence": {
        "t": [1.0, 0.5, 0.25, 0.125],
        "lambda": 30.0,
        "range": 1.5,
        "resolution": 256,
    },
}

# Flag destinations that override a same-named config key when present.
_FLAG_KEYS = (
    ("t", "t"),
    ("samples", "samples"),
    ("lam", "lambda"),
    ("chi", "chi"),
    ("mu", "mu"),
    ("weight", "weight"),
    ("range", "range"),
    ("resolution", "resolution"),
    ("quad_nodes", "quadNodes"),
)


class UsageError(Exception):
    pass


def _parse_pairs(items, what):
    out = {}
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"{what} expects metric=value, got {item!r}")
        metric, _, raw = item.partition("=")
        try:
            out[metric.strip()] = float(raw)
        except ValueError as exc:
            raise UsageError(f"bad {what} value in {item!r}") from exc
    return out


def _chart_gap(a, b):
    frame_gap = np.sqrt(np.sum((a.k - b.k) ** 2, axis=(-2, -1)))
    return frame_gap + p_norm(a.v - b.v)


def _run_group_law(params, seed, outdir):
    t_values = params["t"]
    errors = {}
    for label, n in (("sl2", 2), ("sl3", 3)):
        rng = make_rng(seed)
        count = int(params["samples"])
        k1 = sample_rotation(rng, count, n)
        v1 = sample_p(rng, count, n, params["normBound"])
        k2 = sample_rotation(rng, count, n)
        v2 = sample_p(rng, count, n, params["normBound"])
        base = product_t(
            deformed_element(k1, v1, 0.0), deformed_element(k2, v2, 0.0)
        )
        curve = []
        for t in t_values:
            prod = product_t(
                deformed_element(k1, v1, float(t)),
                deformed_element(k2, v2, float(t)),
            )
            curve.append(float(_chart_gap(prod, base).max()))
        errors[label] = curve
    return convergence_report(
        t_values, errors, gates=params["tolerance"],
        min_orders=params["minOrder"],
    )


def _run_action(params, seed, outdir):
    t_values = params["t"]
    errors = {}
    for label, n in (("sl2", 2), ("sl3", 3)):
        rng = make_rng(seed)
        count = int(params["samples"])
        k = sample_rotation(rng, count, n)
        v = sample_p(rng, count, n, params["normBound"])
        x = sample_p(rng, count, n, params["pointBound"])
        base = action_t(deformed_element(k, v, 0.0), x)
        curve = []
        for t in t_values:
            moved = action_t(deformed_element(k, v, float(t)), x)
            curve.append(float(p_norm(moved - base).max()))
        errors[label] = curve
    return convergence_report(
        t_values, errors, gates=params["tolerance"],
        min_orders=params["minOrder"],
    )


def _run_metric_scaling(params, seed, outdir):
    rng = make_rng(seed)
    count = int(params["samples"])
    h = float(params["step"])
    points = sample_p(rng, count, 2, 1.2)
    xi = sample_p(rng, count, 2, 1.0)
    zeta = sample_p(rng, count, 2, 1.0)
    zero = np.zeros((2, 2))
    identity_errors = []
    origin_errors = []
    for t in params["t"]:
        t = float(t)
        worst = 0.0
        for i in range(count):
            lhs = metric_t(points[i], xi[i], zeta[i], t, h)
            rhs = metric_t(t * points[i], xi[i], zeta[i], 1.0, h)
            worst = max(worst, abs(lhs - rhs))
        identity_errors.append(worst)
        worst0 = 0.0
        for i in range(min(count, 8)):
            got = metric_t(zero, xi[i], zeta[i], t, h)
            worst0 = max(worst0, abs(got - float(form_B(xi[i], zeta[i]))))
        origin_errors.append(worst0)
    return convergence_report(
        params["t"],
        {"identity": identity_errors, "origin": origin_errors},
        gates=params["tolerance"],
        min_orders=params["minOrder"],
    )


def _run_iwasawa(params, seed, outdir):
    grid = GridSpec(float(params["range"]), int(params["resolution"]))
    v_grid = grid.points().reshape(-1, 2, 2)
    report = iw_limit_report(
        v_grid, params["t"], derivative_step=float(params["derivativeStep"])
    )
    return convergence_report(
        report.t_values, report.errors, gates=params["tolerance"],
        min_orders=params["minOrder"],
    )


def _run_waves(params, seed, outdir):
    lam = float(params["lambda"])
    b_angle = float(params["bAngle"])
    grid = GridSpec(float(params["range"]), int(params["resolution"]))
    pts = grid.points()
    flat = wave_eval(WaveSpec(ell=lam, b_angle=b_angle, t=0.0), pts)
    plane_errors = []
    zoom_errors = []
    for t in params["t"]:
        t = float(t)
        curved = wave_eval(WaveSpec(ell=lam, b_angle=b_angle, t=t), pts)
        plane_errors.append(float(np.abs(curved - flat).max()))
        lhs = wave_eval(WaveSpec(ell=lam, b_angle=b_angle, t=1.0), t * pts)
        rhs = wave_eval(WaveSpec(ell=t * lam, b_angle=b_angle, t=t), pts)
        zoom_errors.append(float(np.abs(lhs - rhs).max()))
    return convergence_report(
        params["t"],
        {"planeWaveSup": plane_errors, "zoomIdentity": zoom_errors},
        gates=params["tolerance"],
        min_orders=params["minOrder"],
    )


def _run_principal(params, seed, outdir):
    mu = int(params["mu"])
    mode = params["mode"]
    mode = mu if mode is None else int(mode)
    m = MackeyParameter(chi=float(params["chi"]), mu=mu)
    f = mode_function(mode)
    report = motion_limit_report(
        rotation(float(params["kAngle"])),
        p_from_coords(np.asarray(params["v"], dtype=np.float64)),
        m,
        f,
        params["t"],
        quad_nodes=params["quadNodes"],
    )
    return convergence_report(
        report.t_values, report.errors, gates=params["tolerance"],
        min_orders=params["minOrder"],
    )


def _run_discrete(params, seed, outdir):
    grid = GridSpec(float(params["range"]), int(params["resolution"]))
    report = ds_contract_report(
        [complex(c) for c in params["coeffs"]],
        rotation(float(params["kAngle"])),
        p_from_coords(np.asarray(params["v"], dtype=np.float64)),
        params["t"],
        m=int(params["weight"]),
        grid=grid,
        mask_radius=float(params["maskRadius"]),
    )
    return convergence_report(
        report.t_values, report.errors, gates=params["tolerance"],
        min_orders=params["minOrder"],
    )


def _run_quasisplit(params, seed, outdir):
    mu = int(params["mu"])
    phi = mode_function(mu).plus(mode_function(mu + 2).scaled(0.5))
    grid = GridSpec(float(params["range"]), int(params["resolution"]))
    quad = params["quadNodes"]
    report = qs_contract_report(
        phi,
        rotation(float(params["kAngle"])),
        p_from_coords(np.asarray(params["v"], dtype=np.float64)),
        params["t"],
        FineKTypeData(mu_weight=mu),
        grid=grid,
        mask_radius=float(params["maskRadius"]),
        quad_nodes=None if quad is None else int(quad),
    )
    return convergence_report(
        report.t_values, report.errors, gates=params["tolerance"],
        min_orders=params["minOrder"],
    )


_REPORT_RUNNERS = {
    "group-law": _run_group_law,
    "action": _run_action,
    "metric-scaling": _run_metric_scaling,
    "iwasawa": _run_iwasawa,
    "waves": _run_waves,
    "principal": _run_principal,
    "discrete": _run_discrete,
    "quasisplit": _run_quasisplit,
}


def _metric_names(name, params):
    if name in ("group-law", "action"):
        return {"sl2", "sl3"}
    if name == "metric-scaling":
        return {"identity", "origin"}
    if name == "iwasawa":
        return {"aPart", "kPart", "aPartDeriv"}
    if name == "waves":
        return {"planeWaveSup", "zoomIdentity"}
    if name == "principal":
        return {"l2", "sup"}
    if name == "discrete":
        return {"vector", "operator"}
    if name == "quasisplit":
        return {"section", "operator"}
    return set()


def _json_params(params):
    out = {}
    for key, value in params.items():
        if key in ("t", "tolerance", "minOrder"):
            continue
        if isinstance(value, np.ndarray):
            value = value.tolist()
        if isinstance(value, (list, tuple)):
            value = [complex(v).real if isinstance(v, complex) else v
                     for v in value]
            value = list(value)
        out[key] = value
    return out


def _run_report_experiment(name, params, seed, outdir):
    report = _REPORT_RUNNERS[name](params, seed, outdir)
    payload = report.to_json_dict(name, _json_params(params), seed)
    if name == "principal":
        payload["l2Errors"] = payload["errors"]["l2"]
        payload["supErrors"] = payload["errors"]["sup"]
    write_json(outdir / "report.json", payload)
    metrics = sorted(report.errors)
    rows = []
    for i, t in enumerate(report.t_values):
        rows.append([float(t)] + [float(report.errors[m][i]) for m in metrics])
    write_rows_csv(outdir / "errors.csv", ["t"] + metrics, rows)
    figure_jobs = [
        (outdir / "decay.png",
         lambda path, rep=report, title=name: figures.save_decay_png(
             path, rep, title))
    ]
    return report.passed, report.failing_metrics(), figure_jobs


def _run_figure_orbit(params, seed, outdir):
    z = algebra_vector(float(params["kappa"]) * GEN_ROT)
    frames = []
    rows = []
    for t in params["t"]:
        orbit = coadjoint_orbit_t(z, float(t), int(params["samples"]))
        pts = np.array(
            [[o.k_part[1, 0], *np.asarray(coords_from_p(o.p_part))]
             for o in orbit]
        )
        frames.append({"t": float(t), "points": pts})
        for i, row in enumerate(pts):
            rows.append([float(t), i, float(row[0]), float(row[1]),
                         float(row[2])])
    write_rows_csv(outdir / "orbit.csv", ["t", "index", "k", "a1", "a2"], rows)
    write_json(
        outdir / "orbit.json",
        {
            "experiment": "figure-orbit",
            "params": _json_params(params),
            "tValues": [float(t) for t in params["t"]],
            "seed": seed,
            "buildStamp": build_stamp(),
        },
    )
    jobs = [(outdir / "orbit.png",
             lambda path, fr=frames: figures.save_orbit_png(path, fr))]
    return True, [], jobs


def _run_figure_wave(params, seed, outdir):
    frames = wave_figure_data(
        float(params["lambda"]),
        [float(params["t"][0])],
        extent=float(params["range"]),
        resolution=int(params["resolution"]),
    )
    frame = frames[0]
    write_grid_csv(outdir / "wave.csv", frame["xs"], frame["ys"],
                   frame["values"])
    write_json(outdir / "wave.json", frame["envelope"])
    jobs = [(outdir / "wave.png",
             lambda path, fr=frame: figures.save_wave_png(path, fr))]
    return True, [], jobs


def _run_figure_wave_sequence(params, seed, outdir):
    frames = wave_figure_data(
        float(params["lambda"]),
        [float(t) for t in params["t"]],
        extent=float(params["range"]),
        resolution=int(params["resolution"]),
    )
    for i, frame in enumerate(frames):
        write_grid_csv(outdir / f"frame_{i}.csv", frame["xs"], frame["ys"],
                       frame["values"])
    write_json(
        outdir / "sequence.json",
        {
            "experiment": "figure-wave-sequence",
            "frames": [frame["envelope"] for frame in frames],
            "params": _json_params(params),
            "seed": seed,
            "buildStamp": build_stamp(),
        },
    )
    jobs = [(outdir / "sequence.png",
             lambda path, fr=frames: figures.save_wave_sequence_png(path, fr))]
    return True, [], jobs


_FIGURE_RUNNERS = {
    "figure-orbit": _run_figure_orbit,
    "figure-wave": _run_figure_wave,
    "figure-wave-sequence": _run_figure_wave_sequence,
}


def _load_config(path):
    if path is None:
        return {}
    with open(path, "rb") as handle:
        return tomllib.load(handle)


def _merge_params(name, config, args):
    params = {k: (dict(v) if isinstance(v, dict) else
                  (list(v) if isinstance(v, list) else v))
              for k, v in DEFAULTS[name].items()}
    # Top-level config scalars apply to every experiment; tables per name win.
    for source in (config, config.get(name, {})):
        for key, value in source.items():
            if isinstance(value, dict) and key not in ("tolerance", "minOrder"):
                continue
            if key not in params and source is config:
                continue
            if key in ("tolerance", "minOrder"):
                params.setdefault(key, {})
                params[key] = {**params[key], **value}
            else:
                params[key] = value
    for dest, key in _FLAG_KEYS:
        value = getattr(args, dest, None)
        if value is not None and key in params:
            params[key] = value
    tolerance_flags = _parse_pairs(args.tolerance, "--tolerance")
    min_order_flags = _parse_pairs(args.min_order, "--min-order")
    if name in REPORT_EXPERIMENTS:
        known = _metric_names(name, params)
        for metric in list(tolerance_flags) + list(min_order_flags):
            if metric not in known:
                raise UsageError(
                    f"metric {metric!r} is not reported by {name} "
                    f"(known: {', '.join(sorted(known))})"
                )
        params["tolerance"] = {**params["tolerance"], **tolerance_flags}
        params["minOrder"] = {**params["minOrder"], **min_order_flags}
    _validate_ladder(name, params["t"])
    return params


def _validate_ladder(name, ladder):
    values = [float(t) for t in ladder]
    if not values:
        raise UsageError(f"{name}: empty t list")
    if name in REPORT_EXPERIMENTS:
        if len(values) < 3:
            raise UsageError(
                f"{name}: need at least 3 t values to fit a decay order"
            )
        if any(t <= 0 or t > 1 for t in values):
            raise UsageError(f"{name}: t values must lie in (0, 1]")
        if any(b >= a for a, b in zip(values, values[1:])):
            raise UsageError(f"{name}: t values must be strictly decreasing")
    elif any(t < 0 for t in values):
        raise UsageError(f"{name}: t values must be non-negative")


def _worker_cap(count):
    raw = os.environ.get("CONTRACTCTL_THREADS", "")
    try:
        cap = int(raw) if raw else count
    except ValueError:
        raise UsageError(f"CONTRACTCTL_THREADS must be an integer, got {raw!r}")
    return max(1, min(cap, count))


def _comma_floats(text):
    return [float(chunk) for chunk in text.split(",") if chunk.strip()]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="contractctl",
        description="experiment harness for the contraction-family library",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one or more experiments")
    run.add_argument("experiment",
                     help="experiment name (comma-separate to fan out)")
    run.add_argument("--config", type=Path, default=None,
                     help="TOML config; flags override it")
    run.add_argument("--out", type=Path, default=Path("out"),
                     help="output directory (default: out)")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--t", type=_comma_floats, default=None,
                     metavar="T1,T2,...")
    run.add_argument("--samples", type=int, default=None)
    run.add_argument("--lambda", dest="lam", type=float, default=None)
    run.add_argument("--chi", type=float, default=None)
    run.add_argument("--mu", type=int, default=None)
    run.add_argument("--weight", type=int, default=None)
    run.add_argument("--range", type=float, default=None)
    run.add_argument("--resolution", type=int, default=None)
    run.add_argument("--quad-nodes", type=int, default=None)
    run.add_argument("--tolerance", action="append", metavar="METRIC=VALUE",
                     help="final-error gate override (repeatable)")
    run.add_argument("--min-order", action="append", metavar="METRIC=VALUE",
                     help="fitted-order gate override (repeatable)")
    return parser


def _execute(name, params, seed, outdir):
    outdir.mkdir(parents=True, exist_ok=True)
    if name in _FIGURE_RUNNERS:
        return _FIGURE_RUNNERS[name](params, seed, outdir)
    return _run_report_experiment(name, params, seed, outdir)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command != "run":  # pragma: no cover - argparse enforces this
        parser.print_usage(sys.stderr)
        return 2
    names = [s.strip() for s in args.experiment.split(",") if s.strip()]
    if not names:
        print("contractctl: no experiment named", file=sys.stderr)
        return 2
    for name in names:
        if name not in EXPERIMENTS:
            print(
                f"contractctl: unknown experiment {name!r}; choose from "
                + ", ".join(EXPERIMENTS),
                file=sys.stderr,
            )
            return 2
    try:
        config = _load_config(args.config)
        seed = args.seed
        if seed is None:
            seed = int(config.get("seed", DEFAULT_SEED))
        plans = [(name, _merge_params(name, config, args)) for name in names]
        cap = _worker_cap(len(names))
    except UsageError as exc:
        print(f"contractctl: {exc}", file=sys.stderr)
        return 2
    except (OSError, tomllib.TOMLDecodeError) as exc:
        print(f"contractctl: cannot read config: {exc}", file=sys.stderr)
        return 2

    results = {}

    def job(plan):
        name, params = plan
        return name, _execute(name, params, seed, args.out / name)

    if cap == 1 or len(plans) == 1:
        for plan in plans:
            name, outcome = job(plan)
            results[name] = outcome
    else:
        with ThreadPoolExecutor(max_workers=cap) as pool:
            for name, outcome in pool.map(job, plans):
                results[name] = outcome

    # Matplotlib rendering is not thread-safe; draw after the pool is done.
    for name in names:
        for path, render in results[name][2]:
            render(path)

    failed = False
    for name in names:
        passed, failing, _ = results[name]
        if passed:
            print(f"ok {name}")
        else:
            failed = True
            print(f"FAIL {name}: metric(s) {', '.join(failing)} out of gate")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
