"""Gibbs energy densities G(c) and the mobility-like scaling g = G - G' c."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from .errors import InvalidParameter

KINDS = ("exponential", "shifted_quadratic", "user_polynomial")


@dataclass(frozen=True)
class EnergyDensity:
    """Energy density with derivatives up to third order.

    Parameters
    ----------
    kind : str
        ``"exponential"`` (``G = exp(-c)``), ``"shifted_quadratic"``
        (``G = a0 + a2 c^2``) or ``"user_polynomial"`` (``G = sum coeffs[k] c^k``).
    params : dict
        ``{}``, ``{"a0", "a2"}`` or ``{"coeffs": [...]}`` respectively.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameter(f"unknown density kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "shifted_quadratic":
            if self.params.get("a0", 0) <= 0 or self.params.get("a2", 0) <= 0:
                raise InvalidParameter("shifted_quadratic requires a0 > 0 and a2 > 0")
        if self.kind == "user_polynomial" and not self.params.get("coeffs"):
            raise InvalidParameter("user_polynomial requires a non-empty coeffs list")

    @property
    def _poly(self) -> Polynomial:
        if self.kind == "shifted_quadratic":
            return Polynomial([self.params["a0"], 0.0, self.params["a2"]])
        return Polynomial(self.params["coeffs"])

    def derivative(self, c, order: int = 0):
        """``d^order G / dc^order`` evaluated at ``c``."""
        c = np.asarray(c, dtype=float)
        if self.kind == "exponential":
            return (-1.0) ** order * np.exp(-c)
        return self._poly.deriv(order)(c) if order else self._poly(c)

    def G(self, c):
        return self.derivative(c, 0)

    def dG(self, c):
        return self.derivative(c, 1)

    def d2G(self, c):
        return self.derivative(c, 2)

    def d3G(self, c):
        return self.derivative(c, 3)

    def g(self, c):
        """Scaling of the mean curvature in the velocity law, ``G(c) - G'(c) c``."""
        return self.G(c) - self.dG(c) * np.asarray(c, dtype=float)

    def dg(self, c):
        return -self.d2G(c) * np.asarray(c, dtype=float)

    def default_range(self) -> tuple[float, float] | None:
        """Interval on which the built-ins are certified when none is configured."""
        if self.kind == "exponential":
            return (0.0, 10.0)
        if self.kind == "shifted_quadratic":
            return (0.0, 0.99 * float(np.sqrt(self.params["a0"] / self.params["a2"])))
        return None


@dataclass(frozen=True)
class AdmissibilityReport:
    lo: float
    hi: float
    min_d2G: float
    min_g: float

    @property
    def admissible(self) -> bool:
        return self.min_d2G > 0 and self.min_g > 0


def check_admissible(density: EnergyDensity, lo: float, hi: float, samples: int = 10_000) -> AdmissibilityReport:
    """Sample ``G''`` and ``g`` on ``[lo, hi]``; admissible iff both stay positive.

    An empty interval (``lo > hi``) is vacuously admissible.
    """
    if lo > hi:
        return AdmissibilityReport(lo, hi, np.inf, np.inf)
    c = np.linspace(lo, hi, samples)
    return AdmissibilityReport(lo, hi, float(np.min(density.d2G(c))), float(np.min(density.g(c))))
