"""Geometry of the height-function surface ``theta_rho = theta_ref + rho * nu_ref``.

All quantities are pulled back to the periodic parameter chart.  Index
conventions follow :class:`~scaled_mcf.surfaces.SurfaceSample`: parameter
indices first, then the ambient component, then the grid axes.

Two independent routes to the mean curvature are provided.
:func:`mean_curvature_div` differentiates the discrete unit normal
(``H = -div_rho nu_rho``).  :func:`mean_curvature_quasilinear` never
differentiates the normal; it uses the closed-form second derivatives of the
reference surface and splits ``H(rho) = P(rho)[rho] + Q(rho)`` with the
principal coefficients

    p_ij = (w^ij (1 + s) - (W^-1 drho)_i (W^-1 drho)_j) / (1 + s)^(3/2),
    s = drho^T W^-1 drho,

where ``W = [w_kl]`` is the metric of the parallel surface at distance rho.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryBreakdown
from .grid import Grid
from .surfaces import ReferenceSurface, SurfaceSample

_SAMPLE_CACHE: dict = {}


def _sample(surface: ReferenceSurface, grid: Grid) -> SurfaceSample:
    key = (surface.kind, tuple(sorted(surface.params.items())), grid.dim, grid.n)
    smp = _SAMPLE_CACHE.get(key)
    if smp is None:
        if len(_SAMPLE_CACHE) > 64:
            _SAMPLE_CACHE.clear()
        smp = _SAMPLE_CACHE[key] = surface.sample(grid)
    return smp


def _inv(m: np.ndarray) -> np.ndarray:
    """Pointwise inverse of a ``(d, d, ...)`` matrix field."""
    if m.shape[0] == 1:
        return 1.0 / m
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    det = a * d - b * c
    return np.stack([np.stack([d, -b]), np.stack([-c, a])]) / det


def _det(m: np.ndarray) -> np.ndarray:
    if m.shape[0] == 1:
        return m[0, 0]
    return m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]


def _min_eig(m: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of a symmetric ``(d, d, ...)`` field."""
    if m.shape[0] == 1:
        return m[0, 0]
    a, b, d = m[0, 0], 0.5 * (m[0, 1] + m[1, 0]), m[1, 1]
    return 0.5 * (a + d) - np.sqrt(0.25 * (a - d) ** 2 + b ** 2)


def cross_normal(tangents: np.ndarray) -> np.ndarray:
    """Generalized cross product of the ``d`` tangent vectors (unnormalized).

    For curves this is the 90 degree rotation ``(-v2, v1)``; for surfaces the
    standard cross product.
    """
    if tangents.shape[0] == 1:
        v = tangents[0]
        return np.stack([-v[1], v[0]])
    return np.cross(tangents[0], tangents[1], axis=0)


@dataclass
class MetricData:
    """First-order geometry of ``Gamma_rho`` on the grid."""

    grid: Grid
    ref: SurfaceSample
    rho: np.ndarray
    drho: np.ndarray
    tangents: np.ndarray
    metric: np.ndarray
    metric_inv: np.ndarray
    sqrt_det: np.ndarray
    normal: np.ndarray
    a_factor: np.ndarray

    @property
    def dim(self) -> int:
        return self.grid.dim

    def raise_index(self, df: np.ndarray) -> np.ndarray:
        """Ambient vector ``sum g^ij df_i d_j gamma`` for covector ``df`` of shape ``(d, ...)``."""
        return np.einsum("ij...,i...,ja...->a...", self.metric_inv, df, self.tangents)

    def laplace_first_order(self) -> np.ndarray:
        """Coefficients ``b^k`` of the first-order part of the Laplace-Beltrami operator.

        ``b^k = sum g^ij d_i(g^kl d_l gamma) . d_j gamma``.
        """
        grid = self.grid
        # contravariant frame vectors e^k = g^kl d_l gamma, shape (d, m, ...)
        frame = np.einsum("kl...,la...->ka...", self.metric_inv, self.tangents)
        dframe = np.stack([grid.diff(frame, i) for i in range(self.dim)])  # (i, k, a, ...)
        return np.einsum("ij...,ika...,ja...->k...", self.metric_inv, dframe, self.tangents)

    def normal_gradient_coeffs(self) -> np.ndarray:
        """Coefficients ``e^i`` with ``nu_ref . grad_rho f = sum e^i d_i f``."""
        proj = np.einsum("ja...,a...->j...", self.tangents, self.ref.normal)
        return np.einsum("ij...,j...->i...", self.metric_inv, proj)


def assemble_geometry(surface: ReferenceSurface, grid: Grid, rho) -> MetricData:
    """Tangents, metric, unit normal and tilt factor ``a(rho)`` of ``Gamma_rho``.

    The normal is the normalized generalized cross product of the tangents,
    oriented so that ``nu_rho . nu_ref > 0`` wherever the reference cross
    product already agrees with ``nu_ref``.

    Raises
    ------
    GeometryBreakdown
        Non-finite heights, a degenerate metric, or a normal tilted past
        perpendicular to the reference normal.
    """
    rho = np.asarray(rho, dtype=float)
    if rho.shape != grid.shape:
        raise ValueError(f"height field has shape {rho.shape}, expected {grid.shape}")
    if not np.all(np.isfinite(rho)):
        raise GeometryBreakdown("height function contains non-finite values")
    ref = _sample(surface, grid)
    drho = grid.gradient(rho)
    tangents = ref.dpoint + drho[:, None] * ref.normal[None] + rho * ref.dnormal
    metric = np.einsum("ia...,ja...->ij...", tangents, tangents)
    det = _det(metric)
    if not np.all(det > 0):
        raise GeometryBreakdown(f"metric degenerate: min det g = {float(np.min(det)):.3e}")
    metric_inv = _inv(metric)
    orient = np.sign(np.sum(cross_normal(ref.dpoint) * ref.normal, axis=0))
    k = cross_normal(tangents)
    normal = orient * k / np.sqrt(np.sum(k * k, axis=0))
    cos_tilt = np.sum(normal * ref.normal, axis=0)
    if not np.all(cos_tilt > 0):
        raise GeometryBreakdown(
            f"normal turned past perpendicular: min nu_rho . nu_ref = {float(np.min(cos_tilt)):.3e}"
        )
    return MetricData(
        grid=grid,
        ref=ref,
        rho=rho,
        drho=drho,
        tangents=tangents,
        metric=metric,
        metric_inv=metric_inv,
        sqrt_det=np.sqrt(det),
        normal=normal,
        a_factor=1.0 / cos_tilt,
    )


def mean_curvature_div(geom: MetricData) -> np.ndarray:
    """``H = -sum g^ij d_i(nu_rho) . d_j gamma_rho`` with spectral derivatives of the normal."""
    dnu = np.stack([geom.grid.diff(geom.normal, i) for i in range(geom.dim)])
    return -np.einsum("ij...,ia...,ja...->...", geom.metric_inv, dnu, geom.tangents)


def surface_gradient(geom: MetricData, f) -> np.ndarray:
    """Tangential gradient ``sum g^ij d_i f d_j gamma``, shape ``(d+1, ...)``."""
    return geom.raise_index(geom.grid.gradient(f))


def surface_divergence(geom: MetricData, F) -> np.ndarray:
    """``sum g^ij d_i F . d_j gamma`` for an ambient vector field ``F`` of shape ``(d+1, ...)``."""
    dF = np.stack([geom.grid.diff(F, i) for i in range(geom.dim)])
    return np.einsum("ij...,ia...,ja...->...", geom.metric_inv, dF, geom.tangents)


def laplace_beltrami(geom: MetricData, f) -> np.ndarray:
    """Laplace-Beltrami operator in non-divergence chart form."""
    grid = geom.grid
    out = geom.laplace_first_order()
    out = np.einsum("k...,k...->...", out, grid.gradient(f))
    for i in range(geom.dim):
        for j in range(geom.dim):
            out = out + geom.metric_inv[i, j] * grid.diff2(f, i, j)
    return out


def immersion_margin(geom: MetricData) -> float:
    """Smallest singular value of the Jacobian ``[d_i gamma_rho]`` over the grid."""
    return float(np.sqrt(max(np.min(_min_eig(geom.metric)), 0.0)))


@dataclass
class QuasilinearCurvature:
    """Split ``H(rho) = P(rho)[rho] + Q(rho)``.

    ``P(rho)[v] = sum p_ij d_ij v + sum p_k d_k v`` and ``Q(rho) = q``.
    """

    grid: Grid
    p2: np.ndarray      # p_ij, shape (d, d, ...)
    p1: np.ndarray      # p_k, shape (d, ...)
    q: np.ndarray
    metric_inv: np.ndarray
    normal: np.ndarray
    a_factor: np.ndarray
    principal: np.ndarray  # P(rho)[rho]

    @property
    def lower(self) -> np.ndarray:
        return self.q

    @property
    def H(self) -> np.ndarray:
        return self.principal + self.q

    def apply(self, v) -> np.ndarray:
        """``P(rho)[v]`` for an arbitrary field ``v``."""
        grid = self.grid
        out = np.einsum("k...,k...->...", self.p1, grid.gradient(v))
        for i in range(grid.dim):
            for j in range(grid.dim):
                out = out + self.p2[i, j] * grid.diff2(v, i, j)
        return out

    def matrix(self) -> np.ndarray:
        """Dense collocation matrix of ``P(rho)`` on fields flattened in C order."""
        grid = self.grid
        op = np.zeros((grid.size, grid.size))
        for k in range(grid.dim):
            op += self.p1[k].reshape(-1, 1) * grid.diff_matrix(k)
        for i in range(grid.dim):
            for j in range(grid.dim):
                op += self.p2[i, j].reshape(-1, 1) * grid.diff2_matrix(i, j)
        return op


def mean_curvature_quasilinear(surface: ReferenceSurface, grid: Grid, rho) -> QuasilinearCurvature:
    """Quasilinear split of the mean curvature from reference data and ``rho``.

    Uses ``H = sum g^ij nu_rho . d_ij gamma_rho`` and separates the
    ``d_ij rho`` terms.  The normal comes from the projection formula
    ``nu_rho = (nu_ref - sum (W^-1 drho)_i t_i) / sqrt(1 + s)`` with
    ``t_i = d_i theta_ref + rho d_i nu_ref``, not from the cross product.
    """
    rho = np.asarray(rho, dtype=float)
    ref = _sample(surface, grid)
    beta = grid.gradient(rho)
    t = ref.dpoint + rho * ref.dnormal
    w = np.einsum("ka...,la...->kl...", ref.dpoint, ref.dpoint)
    w = w + rho * (
        np.einsum("ka...,la...->kl...", ref.dnormal, ref.dpoint)
        + np.einsum("la...,ka...->kl...", ref.dnormal, ref.dpoint)
    )
    w = w + rho ** 2 * np.einsum("ka...,la...->kl...", ref.dnormal, ref.dnormal)
    wdet = _det(w)
    if not np.all(np.abs(wdet) > 0):
        raise GeometryBreakdown("parallel-surface metric [w_kl] is singular")
    winv = _inv(w)
    wb = np.einsum("kl...,l...->k...", winv, beta)
    s = np.einsum("k...,k...->...", beta, wb)
    root = np.sqrt(1.0 + s)
    p2 = (winv * (1.0 + s) - wb[:, None] * wb[None, :]) / root ** 3
    metric_inv = winv - wb[:, None] * wb[None, :] / (1.0 + s)
    normal = (ref.normal - np.einsum("i...,ia...->a...", wb, t)) / root
    p1 = 2.0 * np.einsum("kj...,a...,ja...->k...", metric_inv, normal, ref.dnormal)
    dd = ref.ddpoint + rho * ref.ddnormal
    q = np.einsum("ij...,a...,ija...->...", metric_inv, normal, dd)
    qc = QuasilinearCurvature(
        grid=grid, p2=p2, p1=p1, q=q, metric_inv=metric_inv, normal=normal,
        a_factor=root, principal=np.zeros_like(rho),
    )
    qc.principal = qc.apply(rho)
    return qc


def ellipticity_margin(qc: QuasilinearCurvature, which: str = "principal") -> float:
    """Minimum over the grid of the smallest eigenvalue of ``[p_ij]`` (or of ``[g^ij]``)."""
    if which == "principal":
        return float(np.min(_min_eig(qc.p2)))
    if which == "metric":
        return float(np.min(_min_eig(qc.metric_inv)))
    raise ValueError(f"unknown margin {which!r}")
