"""Kasner exponent algebra/extraction and Wick rotation to black-hole metrics.

In the far field u_i ~ A_i log rho and alpha ~ C log rho with
C = (1/8) sum A_i^2 - 1/2.  Substituting tau = rho^{C+1} brings the metric to
Kasner form with exponents

    p_z = C/(C+1),        p_i = A_i / (2(C+1)),

which satisfy sum p = sum p^2 = 1 identically whenever sum A_i = 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import AccuracyError, InputError
from .rods import Rod, RodStructure, TopologyLabel
from .solution import SolitonSolution


@dataclass(frozen=True)
class KasnerData:
    """Amplitudes, the conformal slope C, and the Kasner exponents.

    exponents[0] is the z-direction exponent; exponents[1..n] belong to the
    torus angles.  q0 and q1 are the normalization constants of the limiting
    form (-q0 dt^2 + q1 dtau^2 + ...); q0 depends on the lapse gauge and is
    only set when derived from an actual solution.
    """

    amplitudes: tuple[float, ...]
    C: float
    exponents: tuple[float, ...]
    q1: float
    q0: Optional[float] = None

    @property
    def sum_residual(self) -> float:
        return abs(sum(self.exponents) - 1.0)

    @property
    def square_residual(self) -> float:
        return abs(sum(p * p for p in self.exponents) - 1.0)


def kasner_from_amplitudes(amplitudes: Sequence[float], tol: float = 1e-8,
                           lapse_constant: Optional[float] = None) -> KasnerData:
    """Exponents from far-field amplitudes; requires sum A_i = 2, A_i > 0."""
    A = tuple(float(a) for a in amplitudes)
    if any(a <= 0.0 for a in A):
        raise InputError(f"amplitudes must be positive, got {A}")
    if abs(sum(A) - 2.0) > tol:
        raise InputError(f"sum of amplitudes is {sum(A)!r}, not 2 (the Kasner "
                         "identities require the tiling normalization)")
    C = sum(a * a for a in A) / 8.0 - 0.5
    if C + 1.0 <= 0.0:
        raise InputError(f"C + 1 = {C + 1.0} must be positive")
    p = (C / (C + 1.0),) + tuple(a / (2.0 * (C + 1.0)) for a in A)
    q1 = 1.0 / (C + 1.0) ** 2
    q0 = math.exp(-lapse_constant) if lapse_constant is not None else None
    return KasnerData(A, C, p, q1, q0)


@dataclass(frozen=True)
class KasnerFit:
    """Far-field fit of one solution against the Kasner asymptotics."""

    data: KasnerData
    fitted_C: float
    predicted_C: float
    amplitude_residual: float
    alpha_residual: float

    @property
    def c_gap(self) -> float:
        return abs(self.fitted_C - self.predicted_C)


def _far_field_samples(solution: SolitonSolution,
                       rho_samples: Optional[Sequence[float]],
                       z: Optional[float]):
    L = solution.period
    if rho_samples is None:
        rho_samples = list(np.geomspace(10.0 * L, 100.0 * L, 8))
    rhos = np.asarray(sorted(rho_samples), dtype=float)
    if rhos.size < 2:
        raise InputError("far-field fit needs at least two radii")
    if z is None:
        z = solution.alpha.base_point[1]
    return rhos, float(z)


def _fit_log_slopes(solution: SolitonSolution, rhos: np.ndarray, z: float):
    """Slopes and offsets of u_i and alpha against log rho, plus fit residuals."""
    X = np.column_stack([np.log(rhos), np.ones_like(rhos)])
    amps, offsets, amp_resid = [], [], 0.0
    for i in range(1, solution.n + 1):
        vals = np.array([solution.potentials.value(i, r, z) for r in rhos])
        coef, *_ = np.linalg.lstsq(X, vals, rcond=None)
        amps.append(float(coef[0]))
        offsets.append(float(coef[1]))
        amp_resid = max(amp_resid, float(np.max(np.abs(vals - X @ coef))))
    avals = np.array([solution.alpha.value(r, z) for r in rhos])
    coef, *_ = np.linalg.lstsq(X, avals, rcond=None)
    alpha_resid = float(np.max(np.abs(avals - X @ coef)))
    return amps, offsets, float(coef[0]), float(coef[1]), amp_resid, alpha_resid


def verify_kasner(solution: SolitonSolution,
                  rho_samples: Optional[Sequence[float]] = None,
                  z: Optional[float] = None, fit_tol: float = 1e-3) -> KasnerFit:
    """Fit A_i and C from u_i and alpha far-field samples, form the exponents.

    The default window is rho in [10 L, 100 L] (geometric), where the
    cylindrical-harmonic corrections are exponentially negligible and the
    radial coordinate plays the role of Kasner time.
    """
    rhos, z = _far_field_samples(solution, rho_samples, z)
    amps, _, fitted_C, _, amp_resid, alpha_resid = _fit_log_slopes(solution, rhos, z)
    if amp_resid > fit_tol or alpha_resid > fit_tol:
        raise AccuracyError(
            f"far-field fit residuals ({amp_resid:.2e}, {alpha_resid:.2e}) "
            "exceed tolerance; the sample window is not asymptotic")
    data = kasner_from_amplitudes(amps, tol=1e-6,
                                  lapse_constant=solution.lapse_constant)
    predicted = sum(a * a for a in amps) / 8.0 - 0.5
    return KasnerFit(data, fitted_C, predicted, amp_resid, alpha_resid)


def far_field_gauge(solution: SolitonSolution,
                    rho_samples: Optional[Sequence[float]] = None,
                    z: Optional[float] = None) -> SolitonSolution:
    """Re-gauge the additive constants so every far-field offset vanishes.

    In this gauge u_i = A_i log rho + O(e^{-a rho}) and alpha = C log rho
    + O(e^{-a rho}) with no constant terms, which is the normalization in
    which the asymptotic curvature laws carry their stated prefactors.
    Balancing is generally lost; this is a diagnostic gauge.
    """
    rhos, z = _far_field_samples(solution, rho_samples, z)
    _, offsets, _, alpha_offset, _, _ = _fit_log_slopes(solution, rhos, z)
    kappa = tuple(k - off for k, off in zip(solution.potentials.constants, offsets))
    alpha0 = solution.alpha.alpha0 - alpha_offset
    return solution.with_constants(kappa, alpha0)


# --- Wick rotation -------------------------------------------------------------

@dataclass(frozen=True)
class BlackHoleSolution:
    """Static vacuum black-hole spacetime from rotating one torus angle to time.

    The metric is -e^{u_i} dt^2 + e^{2 alpha}(drho^2 + dz^2)
    + sum_{j != i} e^{u_j} (dphi^j)^2; former family-i axis rods are horizon
    rods, the solution stays space-periodic and balanced, and the residual
    torus rank is n - 1.
    """

    base: SolitonSolution
    family: int
    horizon_rods: tuple[Rod, ...]
    horizon_topologies: tuple[TopologyLabel, ...]

    @property
    def torus_rank(self) -> int:
        return self.base.n - 1

    @property
    def spacetime_dimension(self) -> int:
        return self.base.n + 2

    def lapse_squared(self, rho: float, z: float) -> float:
        """e^{u_i}, stable down to rho = 0 (vanishes like rho^2 on horizons)."""
        c, rest = self.base.potentials.value_split(self.family, rho, z)
        return rho ** c * math.exp(rest)

    def metric_diag(self, rho: float, z: float,
                    alpha_anchor: Optional[tuple[float, float]] = None) -> np.ndarray:
        """Lorentzian coefficients ordered (rho, z, t, phi_j for j != i).

        The two coordinates the coefficients depend on stay in the first two
        slots, which is what the finite-difference curvature oracle assumes.
        """
        base = self.base.metric_diag(rho, z, alpha_anchor=alpha_anchor)
        others = [base[j + 1] for j in range(1, self.base.n + 1) if j != self.family]
        return np.array([base[0], base[1], -self.lapse_squared(rho, z), *others])

    def unrotated_diag(self, rho: float, z: float) -> np.ndarray:
        """Rotate time back to an angle: the original slice coefficient array."""
        md = self.metric_diag(rho, z)
        out = np.empty(self.base.n + 2)
        out[0], out[1] = md[0], md[1]
        out[self.family + 1] = -md[2]
        k = 3
        for j in range(1, self.base.n + 1):
            if j != self.family:
                out[j + 1] = md[k]
                k += 1
        return out


def wick_rotate(solution: SolitonSolution, family: int) -> BlackHoleSolution:
    """Turn the family-i angle into time; family-i rods become horizons.

    Horizon cross sections are S^3 x T^(n-3) or S^1 x S^2 x T^(n-3) according
    to whether the two neighboring rod structures are distinct or equal, and
    S^2 when n = 2.  Balancing constants carry over unchanged.
    """
    n = solution.n
    if not 1 <= family <= n:
        raise InputError(f"family index {family} outside 1..{n}")
    if n < 2:
        raise InputError("Wick rotation needs at least two torus directions")
    diagram = solution.diagram
    rods = diagram.rods
    horizon_rods, labels = [], []
    for k, rod in enumerate(rods):
        if rod.family() != family:
            continue
        horizon_rods.append(Rod(rod.start, rod.end, RodStructure((0,) * n)))
        left = rods[k - 1].family()
        right = rods[(k + 1) % len(rods)].family()
        labels.append(_horizon_label(left, right, n))
    return BlackHoleSolution(solution, family, tuple(horizon_rods), tuple(labels))


def _horizon_label(left: Optional[int], right: Optional[int], n: int) -> TopologyLabel:
    if n == 2:
        return TopologyLabel(((1, (2,), 0),))
    trank = n - 3
    if left == right:
        return TopologyLabel(((1, (1, 2), trank),))
    return TopologyLabel(((1, (3,), trank),))


def wick_ricci_check(bh: BlackHoleSolution, rho: float, z: float, h: float) -> float:
    """FD Ricci residual of the Lorentzian metric (componentwise stencil)."""
    from .curvature import fd_ricci_max

    if rho <= 2 * h:
        raise InputError("Ricci stencil requires rho > 2h")
    anchor = (rho, z)
    bh.base.alpha.value(rho, z)

    def diag(r, zz):
        return bh.metric_diag(r, zz, alpha_anchor=anchor)

    return fd_ricci_max(diag, rho, z, h)
