"""Discrete support-function calculus for origin-symmetric planar convex bodies.

A body is represented by samples of its support function h on a uniform
periodic grid of outer normal angles.  Everything downstream (curvature,
boundary parametrization, radial function, containment and chord queries)
is derived from that single array:

* derivatives use fourth-order periodic central differences,
* the principal radius of curvature is b = h'' + h and the Gauss
  curvature in the plane is 1/b,
* boundary points are X(t) = h(t) (cos t, sin t) + h'(t) (-sin t, cos t),
* the radial function comes from monotone periodic interpolation of the
  boundary points' polar angles,
* containment tests the grid-direction support inequalities, i.e. the
  convex polygon circumscribed through the sampled support lines.

Origin symmetry (h equal at antipodal nodes, exactly) is an invariant the
flow relies on; ``evenize`` is the projection that enforces it.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvexityViolation,
    InterpolationError,
    InvalidShape,
    PointOutsideBody,
    ShapeMismatch,
)

TWO_PI = 2.0 * np.pi

# Relative slack allowed on the containment margin of nominally-interior
# query points (boundary nodes sit at margin ~ machine epsilon).
INSIDE_REL_TOL = 1e-9

# Absolute bisection tolerance for chord lengths, relative to the diameter.
CHORD_REL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class AngleGrid:
    """Uniform periodic grid of N outer-normal angles, N even and >= 16.

    Evenness is required so every node has an antipodal partner on the
    grid; the spacing 2*pi/N is the step of all difference stencils.
    """

    n: int = 256
    theta: np.ndarray = dataclasses.field(init=False, repr=False)
    nx: np.ndarray = dataclasses.field(init=False, repr=False)
    ny: np.ndarray = dataclasses.field(init=False, repr=False)

    def __post_init__(self):
        if self.n % 2 != 0 or self.n < 16:
            raise InvalidShape(f"grid size must be even and >= 16, got {self.n}")
        theta = np.arange(self.n) * (TWO_PI / self.n)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "nx", np.cos(theta))
        object.__setattr__(self, "ny", np.sin(theta))

    @property
    def delta(self) -> float:
        return TWO_PI / self.n

    def __eq__(self, other):
        return isinstance(other, AngleGrid) and other.n == self.n

    def __hash__(self):
        return hash(("AngleGrid", self.n))


@dataclass(frozen=True, eq=False)
class SupportFunction:
    """Support function samples h > 0 on an AngleGrid.

    Construction checks shape and positivity only; convexity (b > 0) and
    exact antipodal evenness are enforced where they matter, by
    ``make_body``, the flow stepper and explicit ``validate`` calls.
    """

    grid: AngleGrid
    h: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        if h.shape != (self.grid.n,):
            raise ShapeMismatch(
                f"support array has shape {h.shape}, grid expects ({self.grid.n},)"
            )
        if not np.all(np.isfinite(h)):
            raise InvalidShape("support values must be finite")
        if np.any(h <= 0.0):
            raise InvalidShape("support values must be strictly positive")
        object.__setattr__(self, "h", h)

    def with_values(self, h: np.ndarray) -> "SupportFunction":
        return SupportFunction(self.grid, h)


def eval_derivatives(sf: SupportFunction) -> tuple[np.ndarray, np.ndarray]:
    """First and second angular derivatives, fourth-order central stencils."""
    h = sf.h
    d = sf.grid.delta
    hp1, hm1 = np.roll(h, -1), np.roll(h, 1)
    hp2, hm2 = np.roll(h, -2), np.roll(h, 2)
    dh = (hm2 - 8.0 * hm1 + 8.0 * hp1 - hp2) / (12.0 * d)
    d2h = (-hm2 + 16.0 * hm1 - 30.0 * h + 16.0 * hp1 - hp2) / (12.0 * d * d)
    return dh, d2h


def principal_radius(sf: SupportFunction) -> np.ndarray:
    """Curvature radius b = h'' + h of the boundary point with normal theta."""
    _, d2h = eval_derivatives(sf)
    return d2h + sf.h


def gauss_curvature(sf: SupportFunction) -> np.ndarray:
    """Gauss curvature 1/b; raises ConvexityViolation if b <= 0 anywhere."""
    b = principal_radius(sf)
    bad = np.flatnonzero(b <= 0.0)
    if bad.size:
        i = int(bad[0])
        raise ConvexityViolation(
            f"principal radius non-positive at node {i} (b={b[i]:.3e})", node=i
        )
    return 1.0 / b


def boundary_points(sf: SupportFunction) -> np.ndarray:
    """Boundary parametrized by normal angle: rows X_i = h x_i + h' x_i_perp."""
    dh, _ = eval_derivatives(sf)
    g = sf.grid
    x = sf.h * g.nx - dh * g.ny
    y = sf.h * g.ny + dh * g.nx
    return np.column_stack([x, y])


def radial_function(sf: SupportFunction) -> np.ndarray:
    """Radial function sampled on the grid angles (now read as polar angles).

    Boundary points are computed in the normal-angle parametrization, their
    polar angles must be cyclically monotone (convexity with the origin
    inside), and the radii are linearly interpolated in angle, periodically.
    """
    pts = boundary_points(sf)
    xi = np.arctan2(pts[:, 1], pts[:, 0])
    r = np.hypot(pts[:, 0], pts[:, 1])
    xi = np.unwrap(xi)
    if np.any(np.diff(xi) <= 0.0):
        raise InterpolationError(
            "boundary polar angles are not cyclically monotone; body is not "
            "convex with the origin strictly inside"
        )
    # Periodic linear interpolation: extend one sample, then map each target
    # angle into [xi[0], xi[0] + 2*pi).
    xi_ext = np.concatenate([xi, [xi[0] + TWO_PI]])
    r_ext = np.concatenate([r, [r[0]]])
    targets = xi[0] + np.mod(sf.grid.theta - xi[0], TWO_PI)
    rho = np.interp(targets, xi_ext, r_ext)
    return rho


def containment_margin(sf: SupportFunction, point: np.ndarray) -> float:
    """max_i (point . x_i - h_i): <= 0 iff the point is in the discretized body."""
    point = np.asarray(point, dtype=float)
    g = sf.grid
    return float(np.max(point[0] * g.nx + point[1] * g.ny - sf.h))


def chord_from_point(
    sf: SupportFunction,
    y: np.ndarray,
    u: np.ndarray,
    tol_inside: float | None = None,
) -> float:
    """Length s* = sup{s >= 0 : y - s u inside the body}.

    y must satisfy the containment precondition up to ``tol_inside``
    (default 1e-9 of the diameter).  The length is bracketed by doubling
    from diam/N and then bisected to 1e-10 of the diameter.  Returns 0.0
    when y - eps*u exits immediately.
    """
    y = np.asarray(y, dtype=float)
    u = np.asarray(u, dtype=float)
    diam = 2.0 * float(np.max(sf.h))
    if tol_inside is None:
        tol_inside = INSIDE_REL_TOL * diam
    m0 = containment_margin(sf, y)
    if m0 > tol_inside:
        raise PointOutsideBody(
            f"query point lies outside the body (margin {m0:.3e} > tol {tol_inside:.3e})"
        )

    def margin(s: float) -> float:
        return containment_margin(sf, y - s * u)

    lo = 0.0
    hi = diam / sf.grid.n
    grow = 0
    while margin(hi) <= 0.0:
        lo = hi
        hi *= 2.0
        grow += 1
        if grow > 64:  # cannot happen for a bounded body; guards bad input
            raise PointOutsideBody("chord bracketing failed to exit the body")
    tol = CHORD_REL_TOL * diam
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if margin(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def evenize(sf: SupportFunction) -> SupportFunction:
    """Antipodal average (h_i + h_{i+N/2})/2; exact fixed point on even input."""
    half = sf.grid.n // 2
    h = 0.5 * (sf.h + np.roll(sf.h, -half))
    return sf.with_values(h)


def is_even(sf: SupportFunction) -> bool:
    half = sf.grid.n // 2
    return bool(np.array_equal(sf.h, np.roll(sf.h, -half)))


def validate_body(sf: SupportFunction) -> None:
    """Raise unless sf is positive, exactly even, and strictly convex."""
    if not is_even(sf):
        raise InvalidShape("support function is not antipodally even")
    b = principal_radius(sf)
    bad = np.flatnonzero(b <= 0.0)
    if bad.size:
        i = int(bad[0])
        raise ConvexityViolation(
            f"principal radius non-positive at node {i} (b={b[i]:.3e})", node=i
        )


def disk(radius: float, grid: AngleGrid | None = None) -> SupportFunction:
    if grid is None:
        grid = AngleGrid()
    if not (radius > 0.0 and np.isfinite(radius)):
        raise InvalidShape(f"disk radius must be positive, got {radius}")
    return SupportFunction(grid, np.full(grid.n, float(radius)))


def ellipse(a: float, b: float, grid: AngleGrid | None = None) -> SupportFunction:
    """Origin-centered, axis-aligned ellipse with semi-axes a, b."""
    if grid is None:
        grid = AngleGrid()
    if not (a > 0.0 and b > 0.0 and np.isfinite(a) and np.isfinite(b)):
        raise InvalidShape(f"ellipse semi-axes must be positive, got a={a}, b={b}")
    h = np.sqrt((a * grid.nx) ** 2 + (b * grid.ny) ** 2)
    return evenize(SupportFunction(grid, h))


def fourier_body(
    coeffs, c0: float = 1.0, grid: AngleGrid | None = None
) -> SupportFunction:
    """Even-harmonic perturbation h = c0 + sum_k c_k cos(2 k theta).

    ``coeffs`` is either a sequence [c_1, c_2, ...] or a mapping {k: c_k}.
    The result must be positive and strictly convex.
    """
    if grid is None:
        grid = AngleGrid()
    if isinstance(coeffs, dict):
        items = sorted((int(k), float(c)) for k, c in coeffs.items())
    else:
        items = [(k + 1, float(c)) for k, c in enumerate(coeffs)]
    h = np.full(grid.n, float(c0))
    for k, c in items:
        if k < 1:
            raise InvalidShape(f"harmonic index must be >= 1, got {k}")
        h = h + c * np.cos(2 * k * grid.theta)
    if np.any(h <= 0.0):
        raise InvalidShape("fourier body has non-positive support values")
    sf = evenize(SupportFunction(grid, h))
    validate_body(sf)
    return sf


def even_fourier_values(
    grid: AngleGrid, c0: float, even_harmonics=()
) -> np.ndarray:
    """Samples of c0 + sum c_k cos(2 k theta), made antipodally exact.

    The cosine arguments at theta and theta + pi differ by float rounding,
    so the raw samples are only even to machine precision; averaging each
    node with its antipode makes g[i] == g[i + N/2] hold bitwise, which the
    evolution's density validation requires.
    """
    values = np.full(grid.n, float(c0))
    for k, c in even_harmonics:
        k = int(k)
        if k < 1:
            raise InvalidShape(f"harmonic index must be >= 1, got {k}")
        values = values + float(c) * np.cos(2 * k * grid.theta)
    return 0.5 * (values + np.roll(values, grid.n // 2))


def make_body(kind: str, grid: AngleGrid | None = None, **params) -> SupportFunction:
    """Factory over the named families: disk, ellipse, fourier."""
    if kind == "disk":
        return disk(params["radius"], grid)
    if kind == "ellipse":
        return ellipse(params["a"], params["b"], grid)
    if kind == "fourier":
        return fourier_body(
            params.get("coeffs", params.get("even_harmonics", [])),
            c0=params.get("c0", 1.0),
            grid=grid,
        )
    raise InvalidShape(f"unknown body kind {kind!r}")


@dataclass(frozen=True)
class BodyGeometry:
    """Per-node derived geometry of a body, computed once and reused."""

    h: np.ndarray
    dh: np.ndarray
    d2h: np.ndarray
    b: np.ndarray  # principal radius h'' + h
    curvature: np.ndarray
    points: np.ndarray  # boundary points, shape (N, 2)
    rho: np.ndarray  # radial function on the grid angles


def compute_geometry(sf: SupportFunction) -> BodyGeometry:
    dh, d2h = eval_derivatives(sf)
    b = d2h + sf.h
    bad = np.flatnonzero(b <= 0.0)
    if bad.size:
        i = int(bad[0])
        raise ConvexityViolation(
            f"principal radius non-positive at node {i} (b={b[i]:.3e})", node=i
        )
    g = sf.grid
    pts = np.column_stack([sf.h * g.nx - dh * g.ny, sf.h * g.ny + dh * g.nx])
    rho = radial_function(sf)
    return BodyGeometry(
        h=sf.h, dh=dh, d2h=d2h, b=b, curvature=1.0 / b, points=pts, rho=rho
    )
