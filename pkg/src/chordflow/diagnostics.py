"""Verification instruments: per-step records, structural reports, and the
stationarity certificate.

Everything here is deliberately independent of the flow loop: the
Monge-Ampere residual re-evaluates the chord potential through the general
quadrature path, the first-variation check differentiates the chord
integral by central finite differences, and the pointwise body inequalities
are recomputed from scratch.  A converged run that cannot pass these
checks is reported as failing; nothing in this module is allowed to reuse
the flow's own intermediate quantities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvexityViolation, DegenerateDenominator, InvalidShape
from .gaussian_chord import ChordParams, chord_integral, v_tilde_field
from .support_geometry import (
    SupportFunction,
    boundary_points,
    evenize,
    principal_radius,
    radial_function,
)

TWO_PI = 2.0 * math.pi

# Exact column set and order of the run series CSV.
CSV_COLUMNS = (
    "step",
    "t",
    "dt",
    "theta",
    "I_gamma_q",
    "Phi",
    "residual_sup",
    "h_min",
    "h_max",
    "K_min",
    "K_max",
)


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Snapshot of the tracked quantities at one recorded flow step."""

    step: int
    t: float
    dt: float
    theta: float
    I_gamma_q: float
    Phi: float
    residual_sup: float
    h_min: float
    h_max: float
    rho_min: float
    rho_max: float
    K_min: float
    K_max: float
    grad_max: float


def conservation_report(series) -> float:
    """Largest relative drift of the chord integral from its initial value."""
    if len(series) < 2:
        return 0.0
    base = series[0].I_gamma_q
    if base == 0.0:
        raise DegenerateDenominator("initial chord integral is zero")
    return max(abs(r.I_gamma_q - base) for r in series[1:]) / abs(base)


def monotonicity_report(series) -> float:
    """Largest positive increment of Phi between consecutive records (0 if none)."""
    worst = 0.0
    for prev, cur in zip(series, series[1:]):
        inc = cur.Phi - prev.Phi
        if inc > worst:
            worst = inc
    return worst


def ma_residual(
    spec,
    sf: SupportFunction,
    tau: float,
    params: ChordParams | None = None,
    vfield: np.ndarray | None = None,
) -> tuple[np.ndarray, float]:
    """Nodewise Monge-Ampere residual r = tau V h^(1-p) b / f - 1.

    The residual is affine in tau by construction.  ``vfield`` may be
    supplied to reuse an existing potential field; otherwise the general
    quadrature path is evaluated fresh.
    """
    if params is None:
        params = ChordParams(q=spec.q)
    if vfield is None:
        vfield = v_tilde_field(sf, params)
    b = principal_radius(sf)
    r = tau * vfield * sf.h ** (1.0 - spec.p) * b / spec.f - 1.0
    return r, float(np.max(np.abs(r)))


@dataclass(frozen=True)
class Lemma41Report:
    """Extremal coupling of support and radial functions.

    For an origin-symmetric convex body the extreme values of h and rho
    agree, the support function dominates the cosine cone of its maximizer,
    and the body lies inside the halfspace through its innermost boundary
    point, normal to that point's radial direction:

        h(x) >= (x . x_max) h(x_max)   for all x,
        y . (y_min/|y_min|) <= |y_min|  for all boundary points y.

    The extremal equalities are checked against the interpolated radial
    function (its construction limits them to ~1e-3 accuracy); the radial
    halfspace inequality is checked on the exact boundary samples, where it
    carries no interpolation error.  Positive ``support_slack`` /
    ``radial_slack`` measure the worst violation (0 when the inequalities
    hold).
    """

    h_max: float
    rho_max: float
    h_min: float
    rho_min: float
    max_gap: float
    min_gap: float
    support_slack: float
    radial_slack: float


def lemma41_check(sf: SupportFunction) -> Lemma41Report:
    g = sf.grid
    rho = radial_function(sf)
    h = sf.h
    i_max = int(np.argmax(h))
    # cos of the angle between node i and the extremal node, via unit normals
    cos_to_max = g.nx * g.nx[i_max] + g.ny * g.ny[i_max]
    support_slack = float(np.max(cos_to_max * h[i_max] - h))
    pts = boundary_points(sf)
    norms = np.hypot(pts[:, 0], pts[:, 1])
    j_min = int(np.argmin(norms))
    inner = pts @ (pts[j_min] / norms[j_min])
    radial_slack = float(np.max(inner - norms[j_min]))
    return Lemma41Report(
        h_max=float(h.max()),
        rho_max=float(rho.max()),
        h_min=float(h.min()),
        rho_min=float(rho.min()),
        max_gap=abs(float(h.max()) - float(rho.max())),
        min_gap=abs(float(h.min()) - float(rho.min())),
        support_slack=max(0.0, support_slack),
        radial_slack=max(0.0, radial_slack),
    )


@dataclass(frozen=True)
class BoundsReport:
    """Brackets of the tracked quantities over a recorded run."""

    h_min: float
    h_max: float
    rho_min: float
    rho_max: float
    K_min: float
    K_max: float
    theta_min: float
    theta_max: float
    grad_max: float


def bounds_report(series) -> BoundsReport:
    if not series:
        raise ValueError("bounds_report needs at least one record")
    return BoundsReport(
        h_min=min(r.h_min for r in series),
        h_max=max(r.h_max for r in series),
        rho_min=min(r.rho_min for r in series),
        rho_max=max(r.rho_max for r in series),
        K_min=min(r.K_min for r in series),
        K_max=max(r.K_max for r in series),
        theta_min=min(r.theta for r in series),
        theta_max=max(r.theta for r in series),
        grad_max=max(r.grad_max for r in series),
    )


@dataclass(frozen=True)
class FirstVariationResult:
    fd_derivative: float
    measure_integral: float
    ratio: float


def _perturbed_body(sf: SupportFunction, g: np.ndarray, p: float, t: float):
    if p == 0.0:
        h_t = sf.h * np.exp(t * g)
    else:
        base = sf.h**p + t * g**p
        if np.any(base <= 0.0):
            raise ConvexityViolation(
                f"perturbation drives h^p non-positive at t={t}", t=t
            )
        h_t = base ** (1.0 / p)
    body = evenize(SupportFunction(sf.grid, h_t))
    b = principal_radius(body)
    bad = np.flatnonzero(b <= 0.0)
    if bad.size:
        i = int(bad[0])
        raise ConvexityViolation(
            f"perturbed body fails convexity at t={t} (node {i})", node=i, t=t
        )
    return body


def first_variation_check(
    sf: SupportFunction,
    g: np.ndarray,
    p: float,
    q: float,
    t_step: float = 1e-4,
    params: ChordParams | None = None,
) -> FirstVariationResult:
    """Central finite difference of the chord integral along an L_p path,
    against the candidate first-variation measure.

    The path is h_t = (h^p + t g^p)^(1/p) for p != 0 and log h_t =
    log h + t g for p = 0.  The measure integrand is g^p V h^(1-p) b
    (respectively g V h b), and the fd/measure ratio is returned rather
    than asserted: the normalization constant is an observable here, not
    an assumption.
    """
    g = np.asarray(g, dtype=float)
    if g.shape != sf.h.shape:
        raise InvalidShape(f"perturbation has shape {g.shape}, body {sf.h.shape}")
    if np.any(g < 0.0) or not np.all(np.isfinite(g)):
        raise InvalidShape("perturbation must be finite and non-negative")
    if p < 0.0:
        raise ValueError(f"p must be >= 0, got {p}")
    if not (t_step > 0.0):
        raise ValueError(f"t_step must be positive, got {t_step}")
    if params is None:
        params = ChordParams(q=q)
    plus = _perturbed_body(sf, g, p, t_step)
    minus = _perturbed_body(sf, g, p, -t_step)
    fd = (chord_integral(plus, params) - chord_integral(minus, params)) / (
        2.0 * t_step
    )
    vf = v_tilde_field(sf, params)
    b = principal_radius(sf)
    d = TWO_PI / sf.grid.n
    if p == 0.0:
        measure = d * float(np.sum(g * vf * sf.h * b))
    else:
        measure = d * float(np.sum(g**p * vf * sf.h ** (1.0 - p) * b))
    ratio = fd / measure if measure != 0.0 else float("nan")
    return FirstVariationResult(fd, measure, ratio)


@dataclass(frozen=True)
class SurveyRow:
    body: str
    p: float
    q: float
    fd_derivative: float
    measure_integral: float
    ratio: float


def variation_ratio_survey(
    bodies,
    p: float,
    q: float,
    t_step: float = 1e-4,
    params: ChordParams | None = None,
) -> list[SurveyRow]:
    """fd/measure ratio across bodies, probing each along its own dilation.

    ``bodies`` is a sequence of (name, SupportFunction).  Using g = h makes
    the probe admissible for every body and the ratios directly comparable;
    a body-independent ratio is evidence the measure identification is
    correct up to one global constant.
    """
    rows = []
    for name, sf in bodies:
        res = first_variation_check(sf, sf.h.copy(), p, q, t_step=t_step, params=params)
        rows.append(
            SurveyRow(
                body=name,
                p=p,
                q=q,
                fd_derivative=res.fd_derivative,
                measure_integral=res.measure_integral,
                ratio=res.ratio,
            )
        )
    return rows
