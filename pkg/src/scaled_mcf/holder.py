"""Discrete little-Hoelder seminorms on the periodic chart and in time.

Distances are measured on the flat parameter torus.  The spatial seminorm
enumerates every pair of grid points by their index offset, which is an
exhaustive O(N^2) search.  For surfaces (``dim == 2``) the points are first
subsampled with stride ``max(1, n // 48)`` per axis unless a stride is given.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np

from .grid import Grid


@dataclass
class HolderReport:
    alpha: float
    R: float
    value: float
    profile: list = field(default_factory=list)  # (R, seminorm) with R decreasing


def _pointwise_norm(f: np.ndarray, dim: int) -> np.ndarray:
    """Euclidean norm over any leading component axes."""
    f = np.asarray(f, dtype=float)
    if f.ndim == dim:
        return np.abs(f)
    return np.sqrt(np.sum(f.reshape((-1,) + f.shape[-dim:]) ** 2, axis=0))


def _offset_table(grid: Grid, stride: int):
    m = grid.n // stride
    h = grid.h * stride
    if grid.dim == 1:
        offs = [(k,) for k in range(1, m // 2 + 1)]
        dist = [h * k for k in range(1, m // 2 + 1)]
        return offs, np.array(dist)
    offs, dist = [], []
    for k1 in range(m):
        for k2 in range(m):
            if (k1, k2) == (0, 0):
                continue
            offs.append((k1, k2))
            dist.append(h * np.hypot(min(k1, m - k1), min(k2, m - k2)))
    return offs, np.array(dist)


def _default_stride(grid: Grid) -> int:
    return 1 if grid.dim == 1 else max(1, grid.n // 48)


def pair_maxima(grid: Grid, f, stride: int | None = None):
    """Per index offset: the periodic distance and ``max |f(x) - f(x + offset)|``."""
    stride = stride or _default_stride(grid)
    f = np.asarray(f, dtype=float)
    sl = (Ellipsis,) + (slice(None, None, stride),) * grid.dim
    f = f[sl]
    offs, dist = _offset_table(grid, stride)
    axes = tuple(range(f.ndim - grid.dim, f.ndim))
    maxima = np.empty(len(offs))
    for i, off in enumerate(offs):
        diff = f - np.roll(f, off, axis=axes)
        maxima[i] = np.max(_pointwise_norm(diff, grid.dim))
    return dist, maxima


def holder_seminorm(grid: Grid, f, alpha: float, R: float = np.inf, stride: int | None = None) -> float:
    """``sup |f(x) - f(y)| / |x - y|^alpha`` over grid pairs with ``0 < |x - y| < R``.

    Vector-valued fields (extra leading axes) use the Euclidean norm.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if R <= 0:
        raise ValueError("R must be positive")
    dist, maxima = pair_maxima(grid, f, stride)
    mask = dist < R
    if not np.any(mask):
        return 0.0
    return float(np.max(maxima[mask] / dist[mask] ** alpha))


def holder_profile(grid: Grid, f, alpha: float, radii=None, stride: int | None = None) -> HolderReport:
    """Seminorm truncated at each radius, largest radius first."""
    dist, maxima = pair_maxima(grid, f, stride)
    if radii is None:
        radii = [np.inf] + [grid.h * 2.0 ** k for k in range(int(np.log2(grid.n)), 0, -1)]
    radii = sorted(radii, reverse=True)
    ratio = maxima / dist ** alpha
    profile = [(float(R), float(np.max(ratio[dist < R], initial=0.0))) for R in radii]
    return HolderReport(alpha=alpha, R=float(radii[0]), value=profile[0][1], profile=profile)


def _derivatives(grid: Grid, f, order: int):
    """All partial derivatives of exactly ``order`` (mixed ones once)."""
    if order == 0:
        return [np.asarray(f, dtype=float)]
    out = []
    for combo in combinations_with_replacement(range(grid.dim), order):
        g = np.asarray(f, dtype=float)
        if order == 2 and combo[0] == combo[1]:
            out.append(grid.diff2(g, combo[0], combo[0]))
            continue
        for ax in combo:
            g = grid.diff(g, ax)
        out.append(g)
    return out


def holder_norm(grid: Grid, f, alpha: float, order: int = 0, stride: int | None = None) -> float:
    """``h^{order+alpha}`` norm: sup norms of derivatives up to ``order``
    plus the alpha-seminorms of the highest derivatives."""
    total = 0.0
    for k in range(order + 1):
        for g in _derivatives(grid, f, k):
            total += float(np.max(_pointwise_norm(g, grid.dim)))
    for g in _derivatives(grid, f, order):
        total += holder_seminorm(grid, g, alpha, stride=stride)
    return total


def time_seminorm(times, values, beta: float, norm) -> float:
    """``sup ||v(t) - v(s)|| / |t - s|^beta`` over all snapshot pairs; ``0 < beta <= 1``."""
    if not 0 < beta <= 1:
        raise ValueError("beta must lie in (0, 1]")
    times = np.asarray(times, dtype=float)
    best = 0.0
    for k in range(len(times)):
        for l in range(k + 1, len(times)):
            best = max(best, norm(values[l] - values[k]) / abs(times[l] - times[k]) ** beta)
    return best


def spacetime_norms(traj, grid: Grid, alpha: float = 0.5, beta: float = 0.25) -> dict:
    """Time-Hoelder diagnostics of a trajectory for ``rho`` and ``u``.

    For each field the time seminorm of exponent ``beta`` is measured in the
    grid sup norm, in ``h^alpha`` and in ``h^{2+alpha}``; the finite-difference
    time derivative is measured in ``h^alpha``.  ``E1_proxy`` is the maximum
    over both fields of the sum of these space-time quantities.

    Raises
    ------
    ValueError
        Fewer than three snapshots.
    """
    snaps = traj.snapshots
    if len(snaps) < 3:
        raise ValueError("spacetime norms need at least 3 snapshots")
    t = np.array([s.state.t for s in snaps])
    sup = lambda v: float(np.max(np.abs(v)))
    x_alpha = lambda v: holder_norm(grid, v, alpha, 0)
    z_alpha = lambda v: holder_norm(grid, v, alpha, 2)
    report = {"alpha": alpha, "beta": beta}
    proxies = []
    for name in ("rho", "u"):
        vals = [getattr(s.state, name) for s in snaps]
        rate = [(vals[k + 1] - vals[k]) / (t[k + 1] - t[k]) for k in range(len(vals) - 1)]
        tmid = 0.5 * (t[1:] + t[:-1])
        entry = {
            "time_sup": time_seminorm(t, vals, beta, sup),
            "time_h_alpha": time_seminorm(t, vals, beta, x_alpha),
            "time_h_2_alpha": time_seminorm(t, vals, beta, z_alpha),
            "max_h_2_alpha": max(z_alpha(v) for v in vals),
            "dt_max_h_alpha": max(x_alpha(r) for r in rate),
            "dt_time_h_alpha": time_seminorm(tmid, rate, beta, x_alpha) if len(rate) > 1 else 0.0,
        }
        entry["E1_proxy"] = (entry["max_h_2_alpha"] + entry["time_h_2_alpha"]
                             + entry["dt_max_h_alpha"] + entry["dt_time_h_alpha"])
        proxies.append(entry["E1_proxy"])
        report[name] = entry
    report["E1_proxy"] = max(proxies)
    return report
