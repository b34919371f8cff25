"""Normalized curvature-driven evolution of an origin-symmetric convex body.

The support function moves by

    dh/dt = -theta(t) h^p K f / V + h

where K is the Gauss curvature, V the Gaussian chord potential on the
boundary, f the prescribed even density, and theta(t) the scalar that makes
the Gaussian chord integral invariant in time.  Stationary points satisfy
the normalized Monge-Ampere equation tau V h^(1-p) (h'' + h) = f with
tau = 1/theta.

Time stepping is explicit Euler with an adaptive step: a trial step that
breaks positivity or strict convexity is retried at half the step size, and
the step may regrow geometrically afterwards.  The regrowth ceiling ratchets
down at every rejection; without the ratchet the step size climbs back into
the unstable range and the run thrashes between growth and rejection.

theta and the potential field are always evaluated from the current h (no
lagging), since the conservation argument needs the normalization to be
self-consistent.  For q = 3 the potential on the boundary collapses to a
product of a Gaussian factor and the Gaussian volume of the body, which
turns a quadratic-cost field evaluation into a linear one; every
verification quantity is still computed through the general quadrature.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .diagnostics import DiagnosticsRecord
from .errors import (
    ConvexityViolation,
    DegenerateDenominator,
    InvalidShape,
    NonConvergence,
    ShapeMismatch,
    StepSizeUnderflow,
)
from .gaussian_chord import ChordParams, chord_integral, gaussian_volume, v_tilde_field
from .support_geometry import (
    SupportFunction,
    eval_derivatives,
    evenize,
    is_even,
    radial_function,
    validate_body,
)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ProblemSpec:
    """Problem data: exponents p >= 0 and q > 1 plus the even density f."""

    p: float
    q: float
    f: np.ndarray
    even: bool = True

    def __post_init__(self) -> None:
        if not self.even:
            raise ValueError("only even (origin-symmetric) problems are supported")
        if not (self.p >= 0.0):
            raise ValueError(f"p must be >= 0, got {self.p}")
        if not (self.q > 1.0):
            raise ValueError(f"q must be > 1, got {self.q}")
        if self.q <= 2.0:
            warnings.warn(
                f"q <= 2: flow outside the proven curvature-estimate range "
                f"(got q={self.q}); computing anyway",
                RuntimeWarning,
                stacklevel=2,
            )
        f = np.asarray(self.f, dtype=float)
        object.__setattr__(self, "f", f)
        if f.ndim != 1 or f.size < 2 or f.size % 2 != 0:
            raise InvalidShape(f"density must be a 1-d array of even length, got shape {f.shape}")
        if not np.all(np.isfinite(f)) or np.any(f <= 0.0):
            raise InvalidShape("density must be finite and strictly positive")
        half = f.size // 2
        if not np.array_equal(f, np.roll(f, half)):
            raise InvalidShape(
                "density must satisfy f[i] == f[i + N/2] exactly; "
                "antipodally average the samples first"
            )


@dataclass(frozen=True)
class FlowConfig:
    """Stepping and recording controls.

    eps_stationary bounds the sup norm of dh/dt at which the run stops.
    radial_nodes and direction_nodes are forwarded to the quadrature of the
    potential field and the chord integral.
    """

    dt0: float = 1e-3
    dt_min: float = 1e-9
    max_steps: int = 200_000
    eps_stationary: float = 1e-5
    record_every: int = 500
    radial_nodes: int = 64
    direction_nodes: int = 256

    def __post_init__(self) -> None:
        if not (self.dt0 > self.dt_min > 0.0):
            raise ValueError(
                f"need dt0 > dt_min > 0, got dt0={self.dt0}, dt_min={self.dt_min}"
            )
        if not (self.eps_stationary > 0.0):
            raise ValueError(f"eps_stationary must be positive, got {self.eps_stationary}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")


@dataclass(frozen=True)
class FlowState:
    """One point of the evolution: body, normalization, and step bookkeeping.

    dt_cap is the current regrowth ceiling; it only ever decreases.
    """

    t: float
    h: SupportFunction
    theta: float
    dt: float
    step: int
    dt_cap: float


def chord_params(spec: ProblemSpec, config: FlowConfig) -> ChordParams:
    """Quadrature parameters for this problem, without re-warning about q."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return ChordParams(
            q=spec.q,
            radial_nodes=config.radial_nodes,
            direction_nodes=config.direction_nodes,
        )


def potential_field(sf: SupportFunction, params: ChordParams) -> np.ndarray:
    """Chord potential at the boundary points, as driven by the flow.

    For q = 3 the potential at a point y inside the body is exactly
    2 exp(-|y|^2/2) times the Gaussian volume of the body: substituting
    z = y + s d turns the double integral into the plain Gaussian integral
    over the body.  On the boundary |y|^2 = h^2 + h'^2.  Every other q goes
    through the general quadrature.  Verification code must not call this;
    it would collapse the two routes the q = 3 acceptance check compares.
    """
    if params.q == 3.0:
        dh, _ = eval_derivatives(sf)
        return 2.0 * np.exp(-0.5 * (sf.h**2 + dh**2)) * gaussian_volume(sf)
    return v_tilde_field(sf, params)


def theta(spec: ProblemSpec, sf: SupportFunction, vfield: np.ndarray) -> float:
    """Normalization ratio: integral of V h b over the integral of h^p f.

    Both integrals carry the same uniform angular weight, which cancels.
    """
    if spec.f.shape != sf.h.shape:
        raise ShapeMismatch(
            f"density has shape {spec.f.shape}, support function {sf.h.shape}"
        )
    vfield = np.asarray(vfield, dtype=float)
    if vfield.shape != sf.h.shape:
        raise ShapeMismatch(
            f"potential field has shape {vfield.shape}, support function {sf.h.shape}"
        )
    _, d2h = eval_derivatives(sf)
    b = d2h + sf.h
    num = float(np.sum(vfield * sf.h * b))
    hp = np.ones_like(sf.h) if spec.p == 0.0 else sf.h**spec.p
    den = float(np.sum(hp * spec.f))
    if not math.isfinite(den) or den <= 0.0:
        raise DegenerateDenominator(f"theta denominator is {den}")
    value = num / den
    if not math.isfinite(value) or value <= 0.0:
        raise DegenerateDenominator(f"theta evaluated to {value}")
    return value


@dataclass(frozen=True)
class _FlowFields:
    """Per-step evaluation bundle, all derived from one h."""

    vfield: np.ndarray
    b: np.ndarray
    curvature: np.ndarray
    theta: float
    rhs: np.ndarray


def _flow_fields(spec: ProblemSpec, sf: SupportFunction, params: ChordParams) -> _FlowFields:
    _, d2h = eval_derivatives(sf)
    b = d2h + sf.h
    bad = np.flatnonzero(b <= 0.0)
    if bad.size:
        i = int(bad[0])
        raise ConvexityViolation(f"convexity fails at node {i}: b={b[i]:.3e}", node=i)
    vfield = potential_field(sf, params)
    th = theta(spec, sf, vfield)
    hp = np.ones_like(sf.h) if spec.p == 0.0 else sf.h**spec.p
    rhs = -th * hp * spec.f / (vfield * b) + sf.h
    return _FlowFields(vfield=vfield, b=b, curvature=1.0 / b, theta=th, rhs=rhs)


def flow_rhs(
    spec: ProblemSpec, sf: SupportFunction, params: ChordParams | None = None
) -> np.ndarray:
    """Instantaneous dh/dt, with theta and the potential from this same h."""
    if params is None:
        params = chord_params(spec, FlowConfig())
    return _flow_fields(spec, sf, params).rhs


def phi(spec: ProblemSpec, sf: SupportFunction) -> float:
    """Monotone functional: (1/p) int f h^p for p > 0, int f log h for p = 0."""
    if spec.f.shape != sf.h.shape:
        raise ShapeMismatch(
            f"density has shape {spec.f.shape}, support function {sf.h.shape}"
        )
    w = TWO_PI / sf.grid.n
    if spec.p == 0.0:
        return w * float(np.sum(spec.f * np.log(sf.h)))
    return w * float(np.sum(spec.f * sf.h**spec.p)) / spec.p


def _acceptable(grid, cand: np.ndarray) -> bool:
    if not np.all(np.isfinite(cand)) or np.any(cand <= 0.0):
        return False
    n = grid.n
    d = grid.delta
    d2 = (
        -np.roll(cand, 2) + 16.0 * np.roll(cand, 1) - 30.0 * cand
        + 16.0 * np.roll(cand, -1) - np.roll(cand, -2)
    ) / (12.0 * d * d)
    return bool(np.all(d2 + cand > 0.0))


def step(spec: ProblemSpec, config: FlowConfig, state: FlowState) -> FlowState:
    """One accepted Euler step, shrinking dt as needed to stay convex.

    The returned state carries theta evaluated at its own (new) h, so the
    stored normalization always matches the stored body.
    """
    params = chord_params(spec, config)
    fields = _flow_fields(spec, state.h, params)
    state = _advance(config, state, fields.rhs)
    return replace(
        state, theta=theta(spec, state.h, potential_field(state.h, params))
    )


def _advance(config: FlowConfig, state: FlowState, rhs: np.ndarray) -> FlowState:
    """Accept one Euler step; theta in the result is stale until replaced."""
    grid = state.h.grid
    half = grid.n // 2
    dt = min(state.dt, state.dt_cap)
    cap = state.dt_cap
    while True:
        cand = state.h.h + dt * rhs
        cand = 0.5 * (cand + np.roll(cand, half))
        if _acceptable(grid, cand):
            break
        cap = 0.5 * dt
        dt = 0.5 * dt
        if dt < config.dt_min:
            raise StepSizeUnderflow(
                f"step size fell below dt_min={config.dt_min} at step {state.step}",
                state=state,
            )
    return FlowState(
        t=state.t + dt,
        h=SupportFunction(grid, cand),
        theta=state.theta,
        dt=min(dt * 1.2, cap),
        step=state.step + 1,
        dt_cap=cap,
    )


def _record(
    spec: ProblemSpec,
    state: FlowState,
    params: ChordParams,
    fields: _FlowFields | None = None,
) -> DiagnosticsRecord:
    if fields is None:
        fields = _flow_fields(spec, state.h, params)
    sf = state.h
    dh, _ = eval_derivatives(sf)
    rho = radial_function(sf)
    hp1 = sf.h if spec.p == 0.0 else sf.h ** (1.0 - spec.p)
    residual = fields.vfield * hp1 * fields.b / spec.f / fields.theta - 1.0
    return DiagnosticsRecord(
        step=state.step,
        t=state.t,
        dt=state.dt,
        theta=fields.theta,
        I_gamma_q=chord_integral(sf, params),
        Phi=phi(spec, sf),
        residual_sup=float(np.max(np.abs(residual))),
        h_min=float(sf.h.min()),
        h_max=float(sf.h.max()),
        rho_min=float(rho.min()),
        rho_max=float(rho.max()),
        K_min=float(fields.curvature.min()),
        K_max=float(fields.curvature.max()),
        grad_max=float(np.max(np.abs(dh))),
    )


def run(
    spec: ProblemSpec, config: FlowConfig, h0: SupportFunction
) -> tuple[FlowState, list[DiagnosticsRecord]]:
    """Evolve h0 to stationarity.

    Stops when the sup norm of dh/dt drops below eps_stationary.  Records a
    diagnostics row at step 0, every record_every accepted steps, and at the
    final step.  Raises NonConvergence when max_steps accepted steps were
    not enough and StepSizeUnderflow when the convexity guard drives dt
    below dt_min; both carry the last state and the partial series.
    """
    validate_body(h0)
    if not is_even(h0):
        h0 = evenize(h0)
    if spec.f.shape != h0.h.shape:
        raise ShapeMismatch(
            f"density has shape {spec.f.shape}, support function {h0.h.shape}"
        )
    params = chord_params(spec, config)
    fields = _flow_fields(spec, h0, params)
    state = FlowState(
        t=0.0, h=h0, theta=fields.theta, dt=config.dt0, step=0, dt_cap=config.dt0
    )
    series = [_record(spec, state, params, fields)]
    while True:
        if float(np.max(np.abs(fields.rhs))) < config.eps_stationary:
            if series[-1].step != state.step:
                series.append(_record(spec, state, params, fields))
            return state, series
        if state.step >= config.max_steps:
            if series[-1].step != state.step:
                series.append(_record(spec, state, params, fields))
            raise NonConvergence(
                f"no stationary point within {config.max_steps} steps "
                f"(sup |dh/dt| = {float(np.max(np.abs(fields.rhs))):.3e})",
                state=state,
                series=series,
            )
        try:
            state = _advance(config, state, fields.rhs)
        except StepSizeUnderflow as exc:
            exc.series = series
            raise
        fields = _flow_fields(spec, state.h, params)
        state = replace(state, theta=fields.theta)
        if state.step % config.record_every == 0:
            series.append(_record(spec, state, params, fields))


def tau_from_theta(state: FlowState) -> float:
    """Monge-Ampere normalization of the reached stationary point: 1/theta."""
    if not math.isfinite(state.theta) or state.theta <= 0.0:
        raise DegenerateDenominator(f"theta is {state.theta}")
    return 1.0 / state.theta
