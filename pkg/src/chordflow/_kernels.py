"""Low-level chord and potential quadrature kernels.

The discretized body is the convex polygon cut out by the sampled support
inequalities, so the exit length of a ray is the minimum of slack/advance
ratios over facets the ray moves toward.  Two facts keep this cheap:

* the ratio profile over facet index is quasi-convex on the arc the ray
  can exit through, and
* as the ray direction rotates, the exit facet rotates monotonically.

Sweeping all directions for one query point therefore costs O(N + D)
ratio evaluations instead of O(N * D).  The radial factor of the chord
potential is integrated by composite Simpson; the Gaussian factor along
each ray is generated by a first-order multiplicative recurrence so the
inner loop is multiply-add only.

Kernels are compiled with numba when it is importable; otherwise the
module falls back to chunked numpy broadcasts with identical semantics.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except Exception:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return wrap


TWO_PI = 2.0 * math.pi

# A facet whose advance cosine is below this is treated as parallel to the
# ray: the exact-tangency cosine rounds to +-1e-16 and would otherwise flip
# the exit between 0 and the corner chord depending on the node.
DEN_FLOOR = 1e-12


def direction_grid(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Unit directions at angles 2*pi*k/n, returned as (cos, sin) arrays."""
    ang = np.arange(n) * (TWO_PI / n)
    return np.cos(ang), np.sin(ang)


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------


@njit(cache=True)
def _ratio(x, y, dx, dy, nx, ny, h, j):
    den = dx * nx[j] + dy * ny[j]
    if den <= DEN_FLOOR:
        return np.inf
    sl = h[j] - (x * nx[j] + y * ny[j])
    if sl < 0.0:
        sl = 0.0
    return sl / den


@njit(cache=True)
def _scan_exit(x, y, dx, dy, nx, ny, h):
    best = np.inf
    jstar = 0
    for j in range(h.shape[0]):
        r = _ratio(x, y, dx, dy, nx, ny, h, j)
        if r < best:
            best = r
            jstar = j
    return jstar, best


@njit(cache=True)
def _advance_exit(x, y, dx, dy, nx, ny, h, jstar):
    n = h.shape[0]
    rcur = _ratio(x, y, dx, dy, nx, ny, h, jstar)
    steps = 0
    while steps <= n:
        jn = jstar + 1
        if jn == n:
            jn = 0
        rn = _ratio(x, y, dx, dy, nx, ny, h, jn)
        if rn <= rcur:
            jstar = jn
            rcur = rn
            steps += 1
        else:
            break
    return jstar, rcur


@njit(cache=True)
def _exit_lengths_nb(px, py, dcos, dsin, nx, ny, h):
    p = px.shape[0]
    d = dcos.shape[0]
    out = np.empty((p, d))
    for ip in range(p):
        x = px[ip]
        y = py[ip]
        jstar, best = _scan_exit(x, y, dcos[0], dsin[0], nx, ny, h)
        out[ip, 0] = best
        for k in range(1, d):
            jstar, best = _advance_exit(x, y, dcos[k], dsin[k], nx, ny, h, jstar)
            out[ip, k] = best
    return out


@njit(cache=True)
def _potential_nb(px, py, dcos, dsin, nx, ny, h, q, m):
    p = px.shape[0]
    d = dcos.shape[0]
    out = np.empty(p)

    wts = np.empty(m + 1)
    wts[0] = 1.0
    wts[m] = 1.0
    for j in range(1, m):
        wts[j] = 4.0 if j % 2 == 1 else 2.0

    use_sub = q < 2.0
    tbl = np.empty(m + 1)
    if not use_sub:
        tbl[0] = 1.0 if q == 2.0 else 0.0
        for j in range(1, m + 1):
            tbl[j] = float(j) ** (q - 2.0)

    for ip in range(p):
        x = px[ip]
        y = py[ip]
        jstar, sstar = _scan_exit(x, y, dcos[0], dsin[0], nx, ny, h)
        acc = 0.0
        for k in range(d):
            dx = dcos[k]
            dy = dsin[k]
            if k > 0:
                jstar, sstar = _advance_exit(x, y, dx, dy, nx, ny, h, jstar)
            if sstar <= 0.0 or not np.isfinite(sstar):
                continue
            a = -(dx * x + dy * y)
            if use_sub:
                # sigma = s^(q-1) removes the endpoint singularity; the
                # integrand becomes exp(a s - s^2/2)/(q-1) d sigma.
                inv = 1.0 / (q - 1.0)
                dsig = sstar ** (q - 1.0) / m
                tot = wts[0] * 1.0  # s(sigma=0) = 0 -> integrand exp(0)
                for j in range(1, m + 1):
                    s = (dsig * j) ** inv
                    tot += wts[j] * math.exp(a * s - 0.5 * s * s)
                acc += tot * (dsig / 3.0) * inv
            else:
                ds = sstar / m
                # exp(a s_j - s_j^2/2) via w_{j+1} = w_j * A * C^j
                aa = math.exp(a * ds - 0.5 * ds * ds)
                cc = math.exp(-ds * ds)
                pf = ds ** (q - 2.0)
                w = 1.0
                cj = 1.0
                tot = wts[0] * tbl[0]
                for j in range(1, m + 1):
                    w *= aa * cj
                    cj *= cc
                    tot += wts[j] * w * tbl[j]
                acc += tot * (ds / 3.0) * pf
        out[ip] = 2.0 * math.exp(-(x * x + y * y)) * acc * (TWO_PI / d)
    return out


# ---------------------------------------------------------------------------
# numpy fallbacks (chunked broadcasts; same quantities, no sweep)
# ---------------------------------------------------------------------------

_CHUNK_FLOATS = 4_000_000


def _exit_lengths_np(px, py, dcos, dsin, nx, ny, h):
    p, d, n = px.size, dcos.size, h.size
    den = dcos[:, None] * nx[None, :] + dsin[:, None] * ny[None, :]
    invalid = den <= DEN_FLOOR
    out = np.empty((p, d))
    block = max(1, _CHUNK_FLOATS // (d * n))
    for i0 in range(0, p, block):
        i1 = min(p, i0 + block)
        sl = h[None, :] - (
            px[i0:i1, None] * nx[None, :] + py[i0:i1, None] * ny[None, :]
        )
        np.clip(sl, 0.0, None, out=sl)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = sl[:, None, :] / den[None, :, :]
        ratio[np.broadcast_to(invalid[None, :, :], ratio.shape)] = np.inf
        out[i0:i1] = ratio.min(axis=2)
    return out


def _potential_np(px, py, dcos, dsin, nx, ny, h, q, m):
    p, d = px.size, dcos.size
    lengths = _exit_lengths_np(px, py, dcos, dsin, nx, ny, h)
    wts = np.ones(m + 1)
    wts[1:m:2] = 4.0
    wts[2:m:2] = 2.0
    out = np.empty(p)
    block = max(1, _CHUNK_FLOATS // (d * (m + 1)))
    frac = np.arange(m + 1) / m
    for i0 in range(0, p, block):
        i1 = min(p, i0 + block)
        sstar = lengths[i0:i1]  # (B, D)
        a = -(px[i0:i1, None] * dcos[None, :] + py[i0:i1, None] * dsin[None, :])
        if q < 2.0:
            inv = 1.0 / (q - 1.0)
            sig = sstar[:, :, None] ** (q - 1.0) * frac[None, None, :]
            s = sig**inv
            vals = np.exp(a[:, :, None] * s - 0.5 * s * s)
            inner = (
                (vals * wts[None, None, :]).sum(axis=2)
                * (sstar ** (q - 1.0) / m / 3.0)
                * inv
            )
        else:
            s = sstar[:, :, None] * frac[None, None, :]
            with np.errstate(divide="ignore", invalid="ignore"):
                spow = s ** (q - 2.0)
            if q == 2.0:
                spow[...] = 1.0
            else:
                spow[:, :, 0] = 0.0
            vals = np.exp(a[:, :, None] * s - 0.5 * s * s) * spow
            inner = (vals * wts[None, None, :]).sum(axis=2) * (sstar / m / 3.0)
        inner[sstar <= 0.0] = 0.0
        out[i0:i1] = (
            2.0
            * np.exp(-(px[i0:i1] ** 2 + py[i0:i1] ** 2))
            * inner.sum(axis=1)
            * (TWO_PI / d)
        )
    return out


# ---------------------------------------------------------------------------
# public dispatch
# ---------------------------------------------------------------------------


def _as_components(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pts = np.ascontiguousarray(np.asarray(points, dtype=float))
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"points must have shape (P, 2), got {pts.shape}")
    return np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1])


def exit_lengths(points, dcos, dsin, nx, ny, h, force_numpy: bool = False):
    """Polygon exit lengths for every (point, direction) pair, shape (P, D)."""
    px, py = _as_components(points)
    dc = np.ascontiguousarray(np.asarray(dcos, dtype=float))
    ds = np.ascontiguousarray(np.asarray(dsin, dtype=float))
    if HAVE_NUMBA and not force_numpy:
        # The sweep kernel requires directions in counterclockwise order;
        # sort arbitrary input by angle and undo the permutation after.
        order = np.argsort(np.arctan2(ds, dc), kind="stable")
        if np.array_equal(order, np.arange(order.size)):
            return _exit_lengths_nb(px, py, dc, ds, nx, ny, h)
        out = np.empty((px.size, order.size))
        out[:, order] = _exit_lengths_nb(
            px, py, np.ascontiguousarray(dc[order]), np.ascontiguousarray(ds[order]), nx, ny, h
        )
        return out
    return _exit_lengths_np(px, py, dc, ds, nx, ny, h)


def potential_values(points, dcos, dsin, nx, ny, h, q, radial_panels, force_numpy=False):
    """Gaussian chord potential at each point via the full double quadrature."""
    px, py = _as_components(points)
    args = (px, py, dcos, dsin, nx, ny, h, float(q), int(radial_panels))
    if HAVE_NUMBA and not force_numpy:
        return _potential_nb(*args)
    return _potential_np(*args)
