"""Assembled soliton solutions: diagram + potentials + conformal factor."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .potentials import DEFAULT_TRUNCATION, PotentialSet
from .quadrature import DEFAULT_SEGMENT_TOL, AlphaField
from .rods import RodDiagram


@dataclass(frozen=True)
class SolitonSolution:
    """Immutable bundle of the metric data of one space-periodic solution.

    The metric is
        g = e^{2 alpha} (drho^2 + dz^2) + sum_i e^{u_i} (dphi^i)^2
    on a time slice, with lapse rho e^{-sum u_i / 2} = e^{-c/2} constant.
    """

    diagram: RodDiagram
    potentials: PotentialSet
    alpha: AlphaField

    @property
    def n(self) -> int:
        return self.diagram.n

    @property
    def period(self) -> float:
        return self.potentials.period

    @property
    def lapse_constant(self) -> float:
        return self.potentials.lapse_constant

    def with_constants(self, kappa: Sequence[float], alpha0: float = 0.0) -> "SolitonSolution":
        """Re-gauge the additive constants; evaluator caches are rebuilt."""
        pots = self.potentials.with_constants(kappa)
        alpha = AlphaField(pots, self.alpha.base_point, alpha0, self.alpha.segment_tol)
        return SolitonSolution(self.diagram, pots, alpha)

    def metric_diag(self, rho: float, z: float,
                    alpha_anchor: Optional[tuple[float, float]] = None) -> np.ndarray:
        """Diagonal slice-metric coefficients (e^{2a}, e^{2a}, e^{u_1..n})."""
        a = self.alpha.value(rho, z, anchor=alpha_anchor)
        e2a = math.exp(2.0 * a)
        out = np.empty(self.n + 2)
        out[0] = out[1] = e2a
        for i in range(1, self.n + 1):
            out[i + 1] = math.exp(self.potentials.value(i, rho, z))
        return out


def build_solution(diagram: RodDiagram, truncation: int = DEFAULT_TRUNCATION,
                   segment_tol: float = DEFAULT_SEGMENT_TOL,
                   base_point: Optional[tuple[float, float]] = None,
                   constants: Optional[Sequence[float]] = None,
                   alpha0: float = 0.0) -> SolitonSolution:
    """Construct the (generally unbalanced) solution of a rod diagram."""
    pots = PotentialSet(diagram, truncation, constants)
    alpha = AlphaField(pots, base_point, alpha0, segment_tol)
    return SolitonSolution(diagram, pots, alpha)
