"""Logarithmic angle defects and the linear solve that cancels them.

On an axis rod of family f the defect is

    b = lim_{rho->0} ( log rho + alpha - u_f / 2 )
      = alpha(0, z) - (u_f - 2 log rho)(0, z) / 2,

so the log rho pieces cancel analytically and only the alpha axis limit needs
extrapolation.  Adding kappa_f to u_f and alpha0 to alpha shifts the defect by
alpha0 - kappa_f/2 exactly, which makes balancing a diagonal linear solve once
the per-family defects agree along and across rods.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import InputError, UnbalanceableError
from .solution import SolitonSolution

DEFECT_POSITIONS = (0.25, 0.5, 0.75)


def angle_defect(solution: SolitonSolution, rod_index: int, position: float = 0.5) -> float:
    """Defect of axis rod `rod_index` evaluated at a fractional interior position."""
    rods = solution.diagram.rods
    if not 0 <= rod_index < len(rods):
        raise InputError(f"rod index {rod_index} outside 0..{len(rods) - 1}")
    rod = rods[rod_index]
    fam = rod.family()
    if fam is None:
        raise InputError(f"rod {rod_index} has no basis family (structure {rod.structure})")
    if not 0.0 < position < 1.0:
        raise InputError("position must be strictly interior")
    z = float(rod.start + rod.length * position)
    u_bar = solution.potentials.reduced_value(fam, 0.0, z)
    a_axis = solution.alpha.axis_limit(z)
    return a_axis - 0.5 * u_bar


def defect_constancy(solution: SolitonSolution, rod_index: int,
                     positions: Sequence[float] = DEFECT_POSITIONS) -> float:
    """Max spread of the defect over interior sample positions of one rod."""
    values = [angle_defect(solution, rod_index, p) for p in positions]
    return max(values) - min(values)


@dataclass(frozen=True)
class DefectReport:
    """Per-rod defects, per-family aggregates, and the balanced verdict."""

    rod_defects: tuple[float, ...]
    rod_families: tuple[int, ...]
    family_means: tuple[float, ...]
    family_spreads: tuple[float, ...]
    balanced: bool

    @property
    def max_abs_defect(self) -> float:
        return max(abs(b) for b in self.rod_defects)


def compute_defects(solution: SolitonSolution, tol: float = 1e-6) -> DefectReport:
    """Midpoint defect of every rod, grouped into family means and spreads."""
    rods = solution.diagram.rods
    defects = tuple(angle_defect(solution, k) for k in range(len(rods)))
    families = tuple(r.family() for r in rods)
    means, spreads = [], []
    for f in range(1, solution.n + 1):
        vals = [b for b, fam in zip(defects, families) if fam == f]
        if vals:
            means.append(sum(vals) / len(vals))
            spreads.append(max(vals) - min(vals))
        else:
            means.append(0.0)
            spreads.append(0.0)
    balanced = all(abs(b) < tol for b in defects)
    return DefectReport(defects, families, tuple(means), tuple(spreads), balanced)


def balance_constants(solution: SolitonSolution,
                      spread_tol: float = 1e-7) -> tuple[tuple[float, ...], float]:
    """Constants (kappa_1..n, alpha0) that cancel every fundamental-domain defect.

    Gauge convention: alpha0 = 0 and kappa_f = 2 b_f, using the per-family mean
    defect b_f.  Rods of one family must already agree to spread_tol (the
    diagram symmetry guarantees this for the supported configurations);
    otherwise no constant choice can balance them and we refuse.
    """
    report = compute_defects(solution)
    bad = [f + 1 for f, s in enumerate(report.family_spreads) if s > spread_tol]
    if bad:
        detail = ", ".join(
            f"family {f}: spread {report.family_spreads[f - 1]:.3e}" for f in bad)
        raise UnbalanceableError(
            f"intra-family defect spread exceeds {spread_tol:.1e} ({detail}); "
            "the diagram lacks the reflection symmetry needed for balancing")
    # defects were computed with the solution's current constants, and
    # b(kappa) = b(kappa0) - (kappa_f - kappa0_f)/2 exactly, so:
    kappa = tuple(k0 + 2.0 * b for k0, b in zip(solution.potentials.constants,
                                                report.family_means))
    return kappa, 0.0


def balance_solution(solution: SolitonSolution,
                     spread_tol: float = 1e-7) -> tuple[SolitonSolution, DefectReport]:
    """Apply balance_constants; returns the balanced solution and the pre-report."""
    before = compute_defects(solution)
    kappa, alpha0 = balance_constants(solution, spread_tol)
    return solution.with_constants(kappa, alpha0), before
