"""Curvature of the assembled metrics: closed forms, FD oracle, holonomy, flux.

Two independent routes to the curvature coexist here on purpose.  The closed
forms build the nonzero Riemann components from analytic derivatives of the
potentials and of the quadrature integrand; the finite-difference oracle
differentiates nothing but the metric coefficients themselves.  Their
agreement, and the vanishing of the oracle's Ricci tensor, are the actual
verification of the construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from .errors import InputError
from .potentials import ChargedInterval, green_log_grad
from .rods import Rod
from .solution import SolitonSolution


@dataclass(frozen=True)
class MetricFrame:
    """Pointwise diagonal metric data plus the lapse-constancy residual."""

    rho: float
    z: float
    e2alpha: float
    torus_coefficients: tuple[float, ...]
    lapse: float
    lapse_residual: float

    def diag(self) -> np.ndarray:
        return np.array([self.e2alpha, self.e2alpha, *self.torus_coefficients])


def metric_at(solution: SolitonSolution, rho: float, z: float) -> MetricFrame:
    """Assemble the slice metric coefficients at one point."""
    if rho <= 0.0:
        raise InputError("metric evaluation requires rho > 0")
    pots = solution.potentials
    a = solution.alpha.value(rho, z)
    torus = tuple(math.exp(pots.value(i, rho, z)) for i in range(1, pots.n + 1))
    lapse = pots.lapse(rho, z)
    resid = abs(lapse - math.exp(-0.5 * pots.lapse_constant))
    return MetricFrame(rho, z, math.exp(2.0 * a), torus, lapse, resid)


@dataclass(frozen=True)
class CurvatureFrame:
    """The nonzero Riemann data of the diagonal slice metric at one point.

    f1/f2/f3 are indexed by family; g_matrix[i, j] holds the torus-torus
    component for i < j (zero elsewhere).
    """

    rho: float
    z: float
    n: int
    e2alpha: float
    r_rho_z: float           # R_{rho z rho z} = -e^{2 alpha} lap2(alpha)
    lap2_alpha: float
    f1: tuple[float, ...]
    f2: tuple[float, ...]
    f3: tuple[float, ...]
    g_matrix: np.ndarray

    def endomorphisms(self) -> list[np.ndarray]:
        """The (n+2)(n+1)/2 antisymmetric curvature matrices of the torus frame.

        Ordering: R(rho,z); R(phi_i, phi_j) for i<j; R(rho, phi_i); R(z, phi_i).
        Entry (mu, nu) of R(X, Y) is the lowered component R_{mu nu X Y}.
        """
        dim = self.n + 2
        mats: list[np.ndarray] = []
        m = np.zeros((dim, dim))
        m[0, 1] = -self.e2alpha * self.lap2_alpha
        m[1, 0] = -m[0, 1]
        mats.append(m)
        for i in range(1, self.n + 1):
            for j in range(i + 1, self.n + 1):
                m = np.zeros((dim, dim))
                m[i + 1, j + 1] = self.g_matrix[i - 1, j - 1]
                m[j + 1, i + 1] = -m[i + 1, j + 1]
                mats.append(m)
        for i in range(1, self.n + 1):
            m = np.zeros((dim, dim))
            m[0, i + 1] = self.f1[i - 1]
            m[1, i + 1] = self.f2[i - 1]
            m[i + 1, 0] = -self.f1[i - 1]
            m[i + 1, 1] = -self.f2[i - 1]
            mats.append(m)
        for i in range(1, self.n + 1):
            m = np.zeros((dim, dim))
            m[0, i + 1] = self.f2[i - 1]
            m[1, i + 1] = self.f3[i - 1]
            m[i + 1, 0] = -self.f2[i - 1]
            m[i + 1, 1] = -self.f3[i - 1]
            mats.append(m)
        return mats


def curvature_components(solution: SolitonSolution, rho: float, z: float) -> CurvatureFrame:
    """Closed-form Riemann components from analytic first/second derivatives."""
    if rho <= 0.0:
        raise InputError("curvature evaluation requires rho > 0")
    pots = solution.potentials
    n = pots.n
    a_r, a_z = solution.alpha.integrand(rho, z)
    lap2 = solution.alpha.laplacian2(rho, z)
    e2a = math.exp(2.0 * solution.alpha.value(rho, z))

    u = [pots.value(i, rho, z) for i in range(1, n + 1)]
    grads = [pots.gradient(i, rho, z) for i in range(1, n + 1)]
    hess = [pots.hessian(i, rho, z) for i in range(1, n + 1)]

    f1, f2, f3 = [], [], []
    for i in range(n):
        ur, uz = grads[i]
        urr, urz, uzz = hess[i]
        eu4 = math.exp(u[i]) / 4.0
        f1.append(eu4 * (2 * ur * a_r - 2 * uz * a_z - 2 * urr - ur * ur))
        f2.append(eu4 * (2 * ur * a_z + 2 * uz * a_r - 2 * urz - ur * uz))
        f3.append(eu4 * (2 * uz * a_z - 2 * ur * a_r - 2 * uzz - uz * uz))

    gmat = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            uri, uzi = grads[i]
            urj, uzj = grads[j]
            gmat[i, j] = -math.exp(u[i] + u[j]) / e2a / 4.0 * (uri * urj + uzi * uzj)

    return CurvatureFrame(rho, z, n, e2a, -e2a * lap2, lap2,
                          tuple(f1), tuple(f2), tuple(f3), gmat)


def curvature_endomorphisms(solution: SolitonSolution, rho: float, z: float) -> list[np.ndarray]:
    return curvature_components(solution, rho, z).endomorphisms()


def holonomy_rank(solution: SolitonSolution, rho: float, z: float,
                  rel_threshold: float = 1e-8, abs_floor: float = 1e-10) -> int:
    """Rank of the span of the curvature matrices (singular-value threshold).

    Singular values below rel_threshold times the largest count as zero; a
    stack whose largest singular value sits at the truncation noise floor
    (the flat diagnostic) has rank zero outright.
    """
    mats = curvature_endomorphisms(solution, rho, z)
    stack = np.array([m.ravel() for m in mats])
    sv = np.linalg.svd(stack, compute_uv=False)
    if sv.size == 0 or not np.isfinite(sv[0]) or sv[0] < abs_floor:
        return 0
    return int(np.count_nonzero(sv > rel_threshold * sv[0]))


# --- finite-difference Riemann/Ricci oracle -----------------------------------

DiagMetric = Callable[[float, float], np.ndarray]


def _fd_metric_jets(diag_fn: DiagMetric, rho: float, z: float, h: float):
    """Metric, first and second coordinate derivatives from a 3x3 stencil."""
    m = {}
    for i in (-1, 0, 1):
        for j in (-1, 0, 1):
            m[(i, j)] = np.asarray(diag_fn(rho + i * h, z + j * h), dtype=float)
    g = m[(0, 0)]
    g1 = [(m[(1, 0)] - m[(-1, 0)]) / (2 * h), (m[(0, 1)] - m[(0, -1)]) / (2 * h)]
    g11 = (m[(1, 0)] - 2 * g + m[(-1, 0)]) / h**2
    g22 = (m[(0, 1)] - 2 * g + m[(0, -1)]) / h**2
    g12 = (m[(1, 1)] - m[(1, -1)] - m[(-1, 1)] + m[(-1, -1)]) / (4 * h**2)
    return g, g1, (g11, g12, g22)


def _fd_riemann_up(diag_fn: DiagMetric, rho: float, z: float, h: float):
    """R^a_{bcd} of a diagonal metric g(rho, z), plus the metric itself.

    The coefficients depend on the first two coordinates only; all other
    directions are handled analytically (their derivatives vanish), so a 2d
    stencil suffices and the result is O(h^2) accurate.
    """
    g, g1, (g11, g12, g22) = _fd_metric_jets(diag_fn, rho, z, h)
    dim = g.size
    Ginv = np.diag(1.0 / g)
    dG = np.zeros((dim, dim, dim))
    dG[0] = np.diag(g1[0])
    dG[1] = np.diag(g1[1])
    d2G = np.zeros((dim, dim, dim, dim))
    d2G[0, 0] = np.diag(g11)
    d2G[0, 1] = d2G[1, 0] = np.diag(g12)
    d2G[1, 1] = np.diag(g22)

    def sym_part(t):  # S[d,b,c] = d_b g_{dc} + d_c g_{db} - d_d g_{bc}
        return np.einsum("bdc->dbc", t) + np.einsum("cdb->dbc", t) - t

    S = sym_part(dG)
    Gamma = 0.5 * np.einsum("ad,dbc->abc", Ginv, S)
    dGamma = np.zeros((2, dim, dim, dim))
    for e in (0, 1):
        dGinv_e = -Ginv @ dG[e] @ Ginv
        dGamma[e] = 0.5 * (np.einsum("ad,dbc->abc", dGinv_e, S)
                           + np.einsum("ad,dbc->abc", Ginv, sym_part(d2G[e])))

    Rup = np.zeros((dim, dim, dim, dim))
    for e in (0, 1):
        # R^a_{bed} += d_e Gamma^a_{db};  R^a_{bce} -= d_e Gamma^a_{cb}
        Rup[:, :, e, :] += np.einsum("adb->abd", dGamma[e])
        Rup[:, :, :, e] -= np.einsum("acb->abc", dGamma[e])
    Rup += np.einsum("ace,edb->abcd", Gamma, Gamma)
    Rup -= np.einsum("ade,ecb->abcd", Gamma, Gamma)
    return g, Rup


def fd_riemann_lowered(diag_fn: DiagMetric, rho: float, z: float, h: float) -> np.ndarray:
    """Lowered Riemann tensor R_{abcd} by finite differences of the metric."""
    g, Rup = _fd_riemann_up(diag_fn, rho, z, h)
    return np.einsum("ae,ebcd->abcd", np.diag(g), Rup)


def fd_ricci_max(diag_fn: DiagMetric, rho: float, z: float, h: float) -> float:
    """Max |Ricci_{bd}| of a diagonal metric, entirely by finite differences."""
    _, Rup = _fd_riemann_up(diag_fn, rho, z, h)
    ric = np.einsum("abad->bd", Rup)
    return float(np.max(np.abs(ric)))


def ricci_residual(solution: SolitonSolution, rho: float, z: float, h: float) -> float:
    """Independent Ricci-flatness check of the slice metric at one point.

    Alpha values on the stencil are anchored at the center so quadrature
    errors are correlated and do not pollute the differences.
    """
    if rho <= 2 * h:
        raise InputError("Ricci stencil requires rho > 2h")
    anchor = (rho, z)
    solution.alpha.value(rho, z)  # prime the memoized anchor value

    def diag(r, zz):
        return solution.metric_diag(r, zz, alpha_anchor=anchor)

    return fd_ricci_max(diag, rho, z, h)


# --- homology flux ------------------------------------------------------------

def homology_flux(solution: SolitonSolution, rod_index: int,
                  around: Optional[int] = None,
                  radius: Optional[float] = None,
                  crossings: Optional[tuple[float, float]] = None) -> float:
    """Flux of rod `rod_index`'s closed form through the cycle over `around`.

    The form is e^{c/2} rho (dU/drho dz - dU/dz drho) built from the single
    charged interval of rod `rod_index`; it is integrated over the open path
    (0,z1) -> (P,z1) -> (P,z2) -> (0,z2) times the torus volume (2 pi)^(n-1).
    Crossings default to the corners of the `around` rod (its own cycle), so
    the result is 2 (2 pi)^(n-1) e^{c/2} |rod| when around == rod_index and 0
    for the cycle over any other rod.
    """
    diagram = solution.diagram
    rods = diagram.rods
    if not 0 <= rod_index < len(rods):
        raise InputError(f"rod index {rod_index} outside 0..{len(rods) - 1}")
    rod = rods[rod_index]
    fam = rod.family()
    if fam is None:
        raise InputError("flux is defined for axis rods of a single family")
    L = float(diagram.period)
    a, b = float(rod.start), float(rod.end)

    if crossings is None:
        k = around if around is not None else rod_index
        if not 0 <= k < len(rods):
            raise InputError(f"around index {k} outside 0..{len(rods) - 1}")
        z1, z2 = float(rods[k].start), float(rods[k].end)
    else:
        z1, z2 = crossings
    if not z1 < z2:
        raise InputError(f"axis crossings ({z1}, {z2}) are out of order")
    # crossings must not sit strictly inside a rod of the form's family, where
    # the pullback of the form onto the axis does not vanish
    for zc in (z1, z2):
        owner = _owning_rod_at(diagram, zc)
        if owner is not None and owner.family() == fam:
            raise InputError(
                f"contour crosses the axis at z={zc} inside a family-{fam} rod")

    P = radius if radius is not None else max(L, 2.0 * (b - a))
    interval = ChargedInterval(a, b)

    def du(rr, zz):
        return green_log_grad(interval, rr, zz)

    leg1 = quad(lambda r: -r * du(r, z1)[1], 0.0, P,
                epsabs=1e-12, epsrel=1e-12, limit=200, full_output=1)[0]
    leg2 = quad(lambda zz: P * du(P, zz)[0], z1, z2,
                epsabs=1e-12, epsrel=1e-12, limit=200, full_output=1)[0]
    leg3 = quad(lambda r: -r * du(r, z2)[1], P, 0.0,
                epsabs=1e-12, epsrel=1e-12, limit=200, full_output=1)[0]
    line = leg1 + leg2 + leg3
    c = solution.potentials.lapse_constant
    return (2.0 * math.pi) ** (solution.n - 1) * math.exp(0.5 * c) * line


def flux_formula(solution: SolitonSolution, rod_index: int) -> float:
    """The closed-form value 2 (2 pi)^(n-1) e^{c/2} |rod| for comparison."""
    rod = solution.diagram.rods[rod_index]
    c = solution.potentials.lapse_constant
    return 2.0 * (2.0 * math.pi) ** (solution.n - 1) * math.exp(0.5 * c) * float(rod.length)


def _owning_rod_at(diagram, z: float) -> Optional[Rod]:
    L = float(diagram.period)
    zmod = z % L
    for rod in diagram.rods:
        if float(rod.start) < zmod < float(rod.end):
            return rod
    return None
