"""Command-line runner: solve, verify, oracle, and variation workflows.

One JSON config drives everything.  Schema (dotted names appear in error
messages):

    p, q            exponents
    grid_N          number of angular nodes (even, >= 16)
    quadrature      {"M_r": radial panels, "N_u": direction nodes}
    flow            {"dt0", "dt_min", "max_steps", "eps_stationary",
                     "record_every"} (all optional)
    f               {"kind": "constant"|"fourier", "c0": real,
                     "even_harmonics": [[k, c_k], ...]}
    init            {"kind": "disk"|"ellipse"|"fourier", ...params}
    outputs         {"series_path": ..., "summary_path": ...}
    tau             optional; verify uses it instead of re-deriving 1/theta
    g               optional perturbation for variation, same shape as f
    oracle          {"cell_size": ...} for the Cartesian reference integral
    variation       {"t_step": ...}

Exit codes: 0 success, 1 bad config or input, 2 no convergence within
max_steps, 3 step-size underflow, 4 convexity violation in a variation
probe.  Solve writes the series CSV and a JSON summary; the summary's
certificate (theta, tau, residual) is recomputed from the stored support
values through the general quadrature path, the same helper verify uses,
so a verify of a solve's output reproduces the solve's reported residual
exactly.

All file output is deterministic: floats are serialized with repr (the
shortest round-trip form), and rows follow the recording order.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

import numpy as np

from . import flow_engine
from .diagnostics import (
    CSV_COLUMNS,
    conservation_report,
    first_variation_check,
    lemma41_check,
    ma_residual,
    monotonicity_report,
)
from .errors import (
    ChordflowError,
    ConfigError,
    ConvexityViolation,
    NonConvergence,
    ShapeMismatch,
    StepSizeUnderflow,
    UnsupportedExponent,
)
from .flow_engine import FlowConfig, ProblemSpec
from .gaussian_chord import (
    ChordParams,
    chord_integral,
    chord_integral_oracle,
    gaussian_volume,
    v_tilde_field,
)
from .support_geometry import (
    AngleGrid,
    SupportFunction,
    compute_geometry,
    disk,
    ellipse,
    even_fourier_values,
    fourier_body,
)


def _get(mapping, key, path, default=None, required=False):
    if not isinstance(mapping, dict):
        raise ConfigError(f"{path} must be an object")
    if key not in mapping:
        if required:
            raise ConfigError(f"missing required field {path}.{key}")
        return default
    return mapping[key]


def _as_float(value, path):
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path} must be a number, got {value!r}") from None


def _as_int(value, path):
    try:
        iv = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{path} must be an integer, got {value!r}") from None
    if iv != value:
        raise ConfigError(f"{path} must be an integer, got {value!r}")
    return iv


def _harmonic_pairs(raw, path):
    pairs = []
    for idx, item in enumerate(raw or []):
        try:
            k, c = item
        except (TypeError, ValueError):
            raise ConfigError(
                f"{path}[{idx}] must be a [k, c_k] pair, got {item!r}"
            ) from None
        pairs.append((_as_int(k, f"{path}[{idx}].k"), _as_float(c, f"{path}[{idx}].c")))
    return pairs


def _density_values(grid: AngleGrid, section: dict, path: str) -> np.ndarray:
    kind = _get(section, "kind", path, required=True)
    c0 = _as_float(_get(section, "c0", path, default=1.0), f"{path}.c0")
    if kind == "constant":
        harmonics = []
    elif kind == "fourier":
        harmonics = _harmonic_pairs(_get(section, "even_harmonics", path), f"{path}.even_harmonics")
    else:
        raise ConfigError(f"{path}.kind must be 'constant' or 'fourier', got {kind!r}")
    values = even_fourier_values(grid, c0, harmonics)
    if np.any(values <= 0.0):
        raise ConfigError(f"{path} must be strictly positive on the grid")
    return values


def _init_body(grid: AngleGrid, section: dict) -> SupportFunction:
    kind = _get(section, "kind", "init", required=True)
    try:
        if kind == "disk":
            return disk(_as_float(_get(section, "radius", "init", required=True), "init.radius"), grid)
        if kind == "ellipse":
            return ellipse(
                _as_float(_get(section, "a", "init", required=True), "init.a"),
                _as_float(_get(section, "b", "init", required=True), "init.b"),
                grid,
            )
        if kind == "fourier":
            c0 = _as_float(_get(section, "c0", "init", default=1.0), "init.c0")
            pairs = _harmonic_pairs(_get(section, "even_harmonics", "init"), "init.even_harmonics")
            return fourier_body({k: c for k, c in pairs}, c0=c0, grid=grid)
    except ConfigError:
        raise
    except ChordflowError as exc:
        raise ConfigError(f"init does not define a valid body: {exc}") from exc
    raise ConfigError(f"init.kind must be 'disk', 'ellipse' or 'fourier', got {kind!r}")


class RunSetup:
    """Everything a workflow needs, decoded and validated from one config."""

    def __init__(self, raw: dict):
        if not isinstance(raw, dict):
            raise ConfigError("top-level config must be a JSON object")
        self.p = _as_float(_get(raw, "p", "config", required=True), "p")
        self.q = _as_float(_get(raw, "q", "config", required=True), "q")
        n = _as_int(_get(raw, "grid_N", "config", default=256), "grid_N")
        try:
            self.grid = AngleGrid(n)
        except ChordflowError as exc:
            raise ConfigError(f"grid_N: {exc}") from exc
        quad = _get(raw, "quadrature", "config", default={})
        radial = _as_int(_get(quad, "M_r", "quadrature", default=64), "quadrature.M_r")
        directions = _as_int(_get(quad, "N_u", "quadrature", default=256), "quadrature.N_u")
        flow_raw = _get(raw, "flow", "config", default={})
        try:
            self.flow_config = FlowConfig(
                dt0=_as_float(_get(flow_raw, "dt0", "flow", default=1e-3), "flow.dt0"),
                dt_min=_as_float(_get(flow_raw, "dt_min", "flow", default=1e-9), "flow.dt_min"),
                max_steps=_as_int(_get(flow_raw, "max_steps", "flow", default=200_000), "flow.max_steps"),
                eps_stationary=_as_float(
                    _get(flow_raw, "eps_stationary", "flow", default=1e-5), "flow.eps_stationary"
                ),
                record_every=_as_int(_get(flow_raw, "record_every", "flow", default=500), "flow.record_every"),
                radial_nodes=radial,
                direction_nodes=directions,
            )
        except ValueError as exc:
            raise ConfigError(f"flow: {exc}") from exc
        self.f = _density_values(self.grid, _get(raw, "f", "config", required=True), "f")
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                self.problem = ProblemSpec(p=self.p, q=self.q, f=self.f)
                self.params = ChordParams(
                    q=self.q, radial_nodes=radial, direction_nodes=directions
                )
        except (ValueError, ChordflowError) as exc:
            raise ConfigError(str(exc)) from exc
        if self.q <= 2.0:
            warnings.warn(
                f"q <= 2: outside the proven curvature-estimate range (q={self.q})",
                RuntimeWarning,
                stacklevel=2,
            )
        self.init = _init_body(self.grid, _get(raw, "init", "config", required=True))
        outputs = _get(raw, "outputs", "config", default={})
        self.series_path = _get(outputs, "series_path", "outputs")
        self.summary_path = _get(outputs, "summary_path", "outputs")
        tau = _get(raw, "tau", "config")
        self.tau = None if tau is None else _as_float(tau, "tau")
        g_raw = _get(raw, "g", "config")
        self.g = None if g_raw is None else _density_values(self.grid, g_raw, "g")
        oracle = _get(raw, "oracle", "config", default={})
        self.cell_size = _as_float(_get(oracle, "cell_size", "oracle", default=0.02), "oracle.cell_size")
        variation = _get(raw, "variation", "config", default={})
        self.t_step = _as_float(_get(variation, "t_step", "variation", default=1e-4), "variation.t_step")


def load_config(path: str) -> RunSetup:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: line {exc.lineno}: {exc.msg}") from exc
    return RunSetup(raw)


def _certificate(setup: RunSetup, sf: SupportFunction, tau: float | None = None):
    """theta, tau and the residual sup norm through the general quadrature.

    Shared by solve and verify so their reported numbers agree bitwise on
    identical support values.
    """
    vfield = v_tilde_field(sf, setup.params)
    th = flow_engine.theta(setup.problem, sf, vfield)
    if tau is None:
        tau = 1.0 / th
    _, sup = ma_residual(setup.problem, sf, tau, params=setup.params, vfield=vfield)
    return th, tau, sup


def _write_series(path: str, series) -> None:
    lines = [",".join(CSV_COLUMNS)]
    for r in series:
        lines.append(
            ",".join(
                (
                    str(r.step),
                    repr(r.t),
                    repr(r.dt),
                    repr(r.theta),
                    repr(r.I_gamma_q),
                    repr(r.Phi),
                    repr(r.residual_sup),
                    repr(r.h_min),
                    repr(r.h_max),
                    repr(r.K_min),
                    repr(r.K_max),
                )
            )
        )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(payload, fh, indent=2, default=float)
        fh.write("\n")


def cmd_solve(setup: RunSetup) -> int:
    converged = True
    code = 0
    try:
        state, series = flow_engine.run(setup.problem, setup.flow_config, setup.init)
    except NonConvergence as exc:
        converged, code, state, series = False, 2, exc.state, exc.series
    except StepSizeUnderflow as exc:
        converged, code, state, series = False, 3, exc.state, exc.series
        print(f"step size underflow: {exc}", file=sys.stderr)
    if setup.series_path:
        _write_series(setup.series_path, series)
    th, tau, residual_sup = _certificate(setup, state.h)
    summary = {
        "converged": converged,
        "steps": state.step,
        "final_theta": th,
        "tau": tau,
        "residual_sup": residual_sup,
        "conservation_drift": conservation_report(series),
        "max_phi_increment": monotonicity_report(series),
        "h_final": [float(v) for v in state.h.h],
    }
    if setup.summary_path:
        _write_json(setup.summary_path, summary)
    else:
        json.dump(summary, sys.stdout, indent=2, default=float)
        print()
    return code


def _load_h_file(setup: RunSetup, path: str) -> SupportFunction:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read h-file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"h-file {path} is not valid JSON: {exc.msg}") from exc
    if isinstance(raw, dict) and "h_final" in raw:
        raw = raw["h_final"]
    values = np.asarray(raw, dtype=float)
    if values.ndim != 1 or values.size != setup.grid.n:
        raise ShapeMismatch(
            f"h-file holds {values.shape} values, grid_N is {setup.grid.n}"
        )
    return SupportFunction(setup.grid, values)


def cmd_verify(setup: RunSetup, h_path: str) -> int:
    sf = _load_h_file(setup, h_path)
    th, tau, residual_sup = _certificate(setup, sf, tau=setup.tau)
    lem = lemma41_check(sf)
    geo = compute_geometry(sf)
    report = {
        "theta": th,
        "tau": tau,
        "residual_sup": residual_sup,
        "lemma41": {
            "max_gap": lem.max_gap,
            "min_gap": lem.min_gap,
            "support_slack": lem.support_slack,
            "radial_slack": lem.radial_slack,
        },
        "bounds": {
            "h_min": float(sf.h.min()),
            "h_max": float(sf.h.max()),
            "rho_min": float(geo.rho.min()),
            "rho_max": float(geo.rho.max()),
            "K_min": float(geo.curvature.min()),
            "K_max": float(geo.curvature.max()),
            "grad_max": float(np.max(np.abs(geo.dh))),
        },
    }
    if setup.summary_path:
        _write_json(setup.summary_path, report)
    else:
        json.dump(report, sys.stdout, indent=2, default=float)
        print()
    return 0


def cmd_oracle(setup: RunSetup) -> int:
    sf = setup.init
    polar = chord_integral(sf, setup.params)
    report = {
        "I_polar": polar,
        "I_oracle": None,
        "rel_diff": None,
        "gaussian_volume": gaussian_volume(sf),
        "cell_size": setup.cell_size,
    }
    try:
        oracle = chord_integral_oracle(sf, setup.q, setup.cell_size)
        report["I_oracle"] = oracle
        report["rel_diff"] = abs(polar - oracle) / abs(oracle)
    except UnsupportedExponent as exc:
        print(f"oracle skipped: {exc}", file=sys.stderr)
    if setup.q == 3.0:
        gv = report["gaussian_volume"]
        report["q3_identity_rel_err"] = abs(polar - gv * gv) / (gv * gv)
    if setup.summary_path:
        _write_json(setup.summary_path, report)
    else:
        json.dump(report, sys.stdout, indent=2, default=float)
        print()
    return 0


def _variation_bodies(setup: RunSetup):
    grid = setup.grid
    return [
        ("init", setup.init),
        ("disk_0.5", disk(0.5, grid)),
        ("disk_1", disk(1.0, grid)),
        ("disk_2", disk(2.0, grid)),
        ("ellipse_2_1", ellipse(2.0, 1.0, grid)),
        ("fourier_0.1", fourier_body([0.1], 1.0, grid)),
    ]


def cmd_variation(setup: RunSetup) -> int:
    rows = []
    for name, body in _variation_bodies(setup):
        g = body.h.copy() if setup.g is None else setup.g
        res = first_variation_check(
            body, g, setup.p, setup.q, t_step=setup.t_step, params=setup.params
        )
        rows.append(
            {
                "body": name,
                "p": setup.p,
                "q": setup.q,
                "fd_derivative": res.fd_derivative,
                "measure_integral": res.measure_integral,
                "ratio": res.ratio,
            }
        )
    report = {"t_step": setup.t_step, "rows": rows}
    if setup.summary_path:
        _write_json(setup.summary_path, report)
    else:
        json.dump(report, sys.stdout, indent=2, default=float)
        print()
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chordflow",
        description="Evolve an origin-symmetric convex body to a solution of the "
        "planar Gaussian chord Minkowski problem, and verify stored solutions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("solve", "run the curvature flow to stationarity and write series + summary"),
        ("verify", "certificate and structural checks for a stored support function"),
        ("oracle", "compare the polar chord integral against the Cartesian oracle"),
        ("variation", "finite-difference first-variation survey"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="path to the JSON run config")
        if name == "verify":
            p.add_argument("--h-file", required=False, help="JSON array of support values")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        setup = load_config(args.config)
        if args.command == "solve":
            return cmd_solve(setup)
        if args.command == "verify":
            if not getattr(args, "h_file", None):
                raise ConfigError("verify requires --h-file")
            return cmd_verify(setup, args.h_file)
        if args.command == "oracle":
            return cmd_oracle(setup)
        return cmd_variation(setup)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ConvexityViolation as exc:
        t = getattr(exc, "t", None)
        where = f" at t={t}" if t is not None else ""
        print(f"convexity violation{where}: {exc}", file=sys.stderr)
        return 4
    except NonConvergence as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return 2
    except StepSizeUnderflow as exc:
        print(f"step size underflow: {exc}", file=sys.stderr)
        return 3
    except ChordflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
