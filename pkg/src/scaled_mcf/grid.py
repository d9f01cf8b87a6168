"""Periodic grids on the parameter domain [0, 2*pi)^d.

Fields are plain numpy arrays of shape ``grid.shape`` (scalars) or
``(m,) + grid.shape`` (vectors with ``m`` components).  Derivatives are
Fourier-spectral by default; a second-order centered-difference scheme is
available for robustness comparisons.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

SCHEMES = ("spectral", "fd2")


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with ``n`` points per dimension.

    Parameters
    ----------
    dim : int
        Parameter dimension, 1 (curves) or 2 (surfaces).
    n : int
        Points per dimension. Must be even and at least 8.
    scheme : str
        ``"spectral"`` or ``"fd2"``.
    """

    dim: int
    n: int
    scheme: str = "spectral"

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"grid dimension must be 1 or 2, got {self.dim}")
        if self.n % 2 != 0:
            raise ValueError("grid.n must be even")
        if self.n < 8:
            raise ValueError("grid.n must be at least 8")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown differentiation scheme {self.scheme!r}")

    @property
    def h(self) -> float:
        return 2.0 * np.pi / self.n

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n ** self.dim

    @cached_property
    def x1d(self) -> np.ndarray:
        return np.arange(self.n) * self.h

    @cached_property
    def coords(self) -> tuple:
        """Coordinate arrays, one per axis, each of shape ``grid.shape``."""
        if self.dim == 1:
            return (self.x1d.copy(),)
        return tuple(np.meshgrid(self.x1d, self.x1d, indexing="ij"))

    @cached_property
    def _ik(self) -> np.ndarray:
        k = np.fft.rfftfreq(self.n, d=1.0 / self.n)
        ik = 1j * k
        ik[-1] = 0.0  # Nyquist mode: real antisymmetric first derivative
        return ik

    @cached_property
    def _k2(self) -> np.ndarray:
        k = np.fft.rfftfreq(self.n, d=1.0 / self.n)
        return -(k ** 2)

    def _spectral(self, f, axis, mult):
        f = np.asarray(f, dtype=float)
        ax = f.ndim - self.dim + axis
        fh = np.fft.rfft(f, axis=ax)
        shape = [1] * f.ndim
        shape[ax] = mult.size
        return np.fft.irfft(fh * mult.reshape(shape), n=self.n, axis=ax)

    def diff(self, f, axis: int = 0) -> np.ndarray:
        """First derivative along ``axis``.

        Leading axes of ``f`` beyond the grid dimensions are treated as
        components, so vector fields can be differentiated in one call.
        """
        if not 0 <= axis < self.dim:
            raise ValueError(f"axis {axis} out of range for dim {self.dim}")
        if self.scheme == "spectral":
            return self._spectral(f, axis, self._ik)
        f = np.asarray(f, dtype=float)
        ax = f.ndim - self.dim + axis
        return (np.roll(f, -1, axis=ax) - np.roll(f, 1, axis=ax)) / (2.0 * self.h)

    def diff2(self, f, i: int, j: int) -> np.ndarray:
        """Second derivative along axes ``i`` and ``j``."""
        if i != j:
            return self.diff(self.diff(f, i), j)
        if self.scheme == "spectral":
            return self._spectral(f, i, self._k2)
        f = np.asarray(f, dtype=float)
        ax = f.ndim - self.dim + i
        return (np.roll(f, -1, axis=ax) - 2.0 * f + np.roll(f, 1, axis=ax)) / self.h ** 2

    def gradient(self, f) -> np.ndarray:
        """All first derivatives stacked on a new leading axis."""
        return np.stack([self.diff(f, i) for i in range(self.dim)])

    def integrate(self, f, weight=None) -> float:
        """Trapezoidal rule ``sum(f * weight) * h**d``."""
        f = np.asarray(f, dtype=float)
        if weight is not None:
            f = f * weight
        return float(np.sum(f) * self.h ** self.dim)

    def c1_norm(self, f) -> float:
        """Discrete C^1 norm: max of |f| and of all |d_i f| over the grid."""
        f = np.asarray(f, dtype=float)
        return float(max(np.max(np.abs(f)), np.max(np.abs(self.gradient(f)))))

    # Dense operators act on fields flattened in C order.

    @cached_property
    def _d1_matrix(self) -> np.ndarray:
        eye = np.eye(self.n)
        return Grid(1, self.n, self.scheme).diff(eye, 0).T

    @cached_property
    def _d2_matrix(self) -> np.ndarray:
        eye = np.eye(self.n)
        return Grid(1, self.n, self.scheme).diff2(eye, 0, 0).T

    def diff_matrix(self, axis: int) -> np.ndarray:
        if self.dim == 1:
            return self._d1_matrix
        eye = np.eye(self.n)
        if axis == 0:
            return np.kron(self._d1_matrix, eye)
        return np.kron(eye, self._d1_matrix)

    def diff2_matrix(self, i: int, j: int) -> np.ndarray:
        if i != j:
            return self.diff_matrix(j) @ self.diff_matrix(i)
        if self.dim == 1:
            return self._d2_matrix
        eye = np.eye(self.n)
        if i == 0:
            return np.kron(self._d2_matrix, eye)
        return np.kron(eye, self._d2_matrix)


def fourier_modes(grid: Grid, modes, offset: float = 0.0) -> np.ndarray:
    """Evaluate ``offset + sum a * cos(k . x + phase)`` on the grid.

    ``modes`` is a sequence of ``(k, amplitude, phase)`` with ``k`` an
    integer vector of length ``grid.dim``.
    """
    f = np.full(grid.shape, float(offset))
    for k, amp, phase in modes:
        k = np.atleast_1d(np.asarray(k, dtype=float))
        if k.size != grid.dim:
            raise ValueError(f"mode index {list(k)} does not match grid dimension {grid.dim}")
        arg = sum(ki * xi for ki, xi in zip(k, grid.coords))
        f = f + float(amp) * np.cos(arg + float(phase))
    return f
