"""Renormalized z-periodic axis potentials and their derivatives.

Each family owns a periodic orbit of charged axis intervals.  The potential of
one orbit is the renormalized image sum

    u = lim_m ( sum_{|l|<=m} U_{I+lL} + (2 lam/L) log m ),

evaluated as a symmetric truncation plus closed-form Euler-Maclaurin tail
corrections, so the truncation error is ~1e-12 at the default truncation
order instead of the O(1/m) of the raw series.

Every logarithmically singular piece (the 2 log rho behavior on a rod, the
2/rho in the radial gradient) is tracked as an explicit coefficient next to a
smooth remainder.  Downstream consumers combine the two parts analytically,
which is what keeps the conformal-factor integrand and the axis limits free of
catastrophic cancellation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import CornerEvaluationError, InputError, SingularPointError, UnsupportedStructureError
from .rods import RodDiagram, validate

DEFAULT_TRUNCATION = 40

# Euler-Maclaurin midpoint coefficients: sum_{l>m} f(l) = int_{m+1/2} f
#   + C1 f'(m+1/2) + C3 f'''(m+1/2) + O(f^(5))
_EM1 = 1.0 / 24.0
_EM3 = -7.0 / 5760.0


@dataclass(frozen=True)
class ChargedInterval:
    """Uniformly charged axis interval [a, b]."""

    a: float
    b: float

    def __post_init__(self):
        if not self.b >= self.a:
            raise InputError(f"interval endpoints out of order: [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a


def green_log(interval: ChargedInterval, rho: float, z: float) -> float:
    """Interval Green's function U_I = log(r_a - z_a) - log(r_b - z_b).

    Uses log(r - s) = 2 log rho - log(r + s) on the s > 0 side, which is the
    cancellation-free branch near the axis.
    """
    if rho <= 0.0:
        raise InputError(f"green_log requires rho > 0, got {rho}")
    if interval.length == 0.0:
        return 0.0
    c, rest = _interval_value(rho, z, interval.a, interval.b)
    return c * math.log(rho) + rest


def green_log_grad(interval: ChargedInterval, rho: float, z: float) -> tuple[float, float]:
    """(d/drho, d/dz) of green_log; singular only on the closed interval at rho=0."""
    if rho <= 0.0:
        raise InputError(f"green_log_grad requires rho > 0, got {rho}")
    if interval.length == 0.0:
        return 0.0, 0.0
    c, wr, uz = _interval_grad(rho, z, interval.a, interval.b)
    return c / rho + wr, uz


def green_log_hessian(interval: ChargedInterval, rho: float, z: float) -> tuple[float, float, float]:
    """(d2/drho2, d2/drhodz, d2/dz2) of green_log."""
    if rho <= 0.0:
        raise InputError(f"green_log_hessian requires rho > 0, got {rho}")
    if interval.length == 0.0:
        return 0.0, 0.0, 0.0
    c, wrr, wrz, wzz = _interval_hessian(rho, z, interval.a, interval.b)
    return -c / rho**2 + wrr, wrz, wzz


# --- single-interval pieces (vectorized over image index) --------------------

def _interval_value(rho, z, a, b):
    sa, sb = z - a, z - b
    ra, rb = np.hypot(rho, sa), np.hypot(rho, sb)
    ga = np.where(sa > 0, -_safe_log(ra + sa), _safe_log(ra - sa))
    gb = np.where(sb > 0, -_safe_log(rb + sb), _safe_log(rb - sb))
    coeff = 2.0 * (np.count_nonzero(sa > 0) - np.count_nonzero(sb > 0))
    return coeff, float(np.sum(ga - gb))


def _safe_log(x):
    with np.errstate(divide="ignore"):
        return np.log(x)


def _interval_grad(rho, z, a, b):
    sa, sb = z - a, z - b
    ra, rb = np.hypot(rho, sa), np.hypot(rho, sb)
    # d/drho log(r-s): rho/(r(r-s)) for s<=0, else 2/rho - rho/(r(r+s));
    # where() evaluates both branches, so silence the discarded one at rho=0
    with np.errstate(divide="ignore", invalid="ignore"):
        wa = np.where(sa > 0, -rho / (ra * (ra + sa)), rho / (ra * (ra - sa)))
        wb = np.where(sb > 0, -rho / (rb * (rb + sb)), rho / (rb * (rb - sb)))
    coeff = 2.0 * (np.count_nonzero(sa > 0) - np.count_nonzero(sb > 0))
    uz = float(np.sum(1.0 / rb - 1.0 / ra))
    return coeff, float(np.sum(wa - wb)), uz


def _interval_hessian(rho, z, a, b):
    sa, sb = z - a, z - b
    ra, rb = np.hypot(rho, sa), np.hypot(rho, sb)
    # per endpoint: g_zz = s/r^3, g_rz = rho/r^3; g_rr via harmonicity
    # g_rr = -g_r/rho - g_zz with the singular part split off (needs rho > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        wa = np.where(sa > 0, -rho / (ra * (ra + sa)), rho / (ra * (ra - sa)))
        wb = np.where(sb > 0, -rho / (rb * (rb + sb)), rho / (rb * (rb - sb)))
    wzz = float(np.sum(sa / ra**3 - sb / rb**3))
    wrz = float(np.sum(rho / ra**3 - rho / rb**3))
    wrr = float(np.sum(-(wa - wb) / rho - (sa / ra**3 - sb / rb**3)))
    coeff = 2.0 * (np.count_nonzero(sa > 0) - np.count_nonzero(sb > 0))
    return coeff, wrr, wrz, wzz


# --- one periodic orbit of images ---------------------------------------------

class _Orbit:
    """Periodic images [a + lL, b + lL] of one rod, with tail closed forms."""

    __slots__ = ("a", "b", "L", "lam")

    def __init__(self, a: float, b: float, L: float):
        self.a, self.b, self.L = a, b, L
        self.lam = b - a

    def _shifts(self, m: int):
        l = np.arange(-m, m + 1, dtype=float)
        return self.a + l * self.L, self.b + l * self.L

    def _tail_args(self, z: float, m: int):
        half = (m + 0.5) * self.L
        # plus side: images far to the right of z (s large negative)
        # minus side: images far to the left of z (s large positive)
        return (z - self.a - half, z - self.b - half,
                z - self.a + half, z - self.b + half)

    def value(self, rho: float, z: float, m: int) -> tuple[float, float]:
        """(coefficient of log rho, smooth rest) of the renormalized orbit sum."""
        av, bv = self._shifts(m)
        coeff, rest = _interval_value(rho, z, av, bv)
        sap, sbp, sam, sbm = self._tail_args(z, m)
        rap, rbp = math.hypot(rho, sap), math.hypot(rho, sbp)
        ram, rbm = math.hypot(rho, sam), math.hypot(rho, sbm)
        L = self.L
        lam = self.lam

        # boundary antiderivative differences, written so no O(mL log mL)
        # magnitudes ever cancel: Ghat(s) = s log(r-s) + r on the s<0 side,
        # Hhat(s) = r - s log(r+s) on the s>0 side, with s_a - s_b = lam and
        # r_a - r_b = lam (s_a + s_b)/(r_a + r_b).
        dr_p = lam * (sap + sbp) / (rap + rbp)
        dghat = sap * math.log1p((dr_p - lam) / (rbp - sbp)) \
            + lam * math.log(rbp - sbp) + dr_p
        dr_m = lam * (sam + sbm) / (ram + rbm)
        dhhat = dr_m - sam * math.log1p((dr_m + lam) / (rbm + sbm)) \
            - lam * math.log(rbm + sbm)
        tail = dghat / L - dhhat / L - (2.0 * lam / L) * math.log(2.0 * L)
        # Euler-Maclaurin: phi'(m+1/2) on both sides, then phi'''
        phip_p = L * (1.0 / rap - 1.0 / rbp)
        phip_m = L * (1.0 / rbm - 1.0 / ram)
        g3 = lambda s, r: (rho * rho - 2.0 * s * s) / r**5
        phi3_p = -L**3 * (g3(sap, rap) - g3(sbp, rbp))
        phi3_m = L**3 * (g3(sam, ram) - g3(sbm, rbm))
        tail += _EM1 * (phip_p + phip_m) + _EM3 * (phi3_p + phi3_m)
        return coeff, rest + tail

    def grad(self, rho: float, z: float, m: int) -> tuple[float, float, float]:
        """(coefficient of 1/rho, smooth radial part, z part) of the gradient."""
        av, bv = self._shifts(m)
        coeff, wr, uz = _interval_grad(rho, z, av, bv)
        sap, sbp, sam, sbm = self._tail_args(z, m)
        rap, rbp = math.hypot(rho, sap), math.hypot(rho, sbp)
        ram, rbm = math.hypot(rho, sam), math.hypot(rho, sbm)
        L = self.L

        # d/dz and d/drho of the integral boundary terms:
        #   Ghat'(s) = log(r-s),  dGhat/drho = rho/(r-s)   (s < 0)
        #   Hhat'(s) = -log(r+s), dHhat/drho = rho/(r+s)   (s > 0, sign folded below)
        uz += (math.log(rap - sap) - math.log(rbp - sbp)) / L
        uz += (math.log(ram + sam) - math.log(rbm + sbm)) / L
        wr += (rho / (rap - sap) - rho / (rbp - sbp)) / L
        wr += -(rho / (ram + sam) - rho / (rbm + sbm)) / L
        # Euler-Maclaurin phi' derivatives
        uz += _EM1 * L * ((-sap / rap**3 + sbp / rbp**3) + (-sbm / rbm**3 + sam / ram**3))
        wr += _EM1 * L * ((-rho / rap**3 + rho / rbp**3) + (-rho / rbm**3 + rho / ram**3))
        # phi''' derivatives
        g3z = lambda s, r: 3.0 * s * (2.0 * s * s - 3.0 * rho * rho) / r**7
        g3r = lambda s, r: 3.0 * rho * (4.0 * s * s - rho * rho) / r**7
        uz += _EM3 * (-L**3 * (g3z(sap, rap) - g3z(sbp, rbp))
                      + L**3 * (g3z(sam, ram) - g3z(sbm, rbm)))
        wr += _EM3 * (-L**3 * (g3r(sap, rap) - g3r(sbp, rbp))
                      + L**3 * (g3r(sam, ram) - g3r(sbm, rbm)))
        return coeff, wr, uz

    def hessian(self, rho: float, z: float, m: int) -> tuple[float, float, float, float]:
        """(coefficient of 1/rho^2 with sign -, wrr, wrz, wzz) of the hessian."""
        av, bv = self._shifts(m)
        coeff, wrr, wrz, wzz = _interval_hessian(rho, z, av, bv)
        sap, sbp, sam, sbm = self._tail_args(z, m)
        rap, rbp = math.hypot(rho, sap), math.hypot(rho, sbp)
        ram, rbm = math.hypot(rho, sam), math.hypot(rho, sbm)
        L = self.L

        wzz += (-1.0 / rap + 1.0 / rbp) / L + (1.0 / ram - 1.0 / rbm) / L
        wrz += (rho / (rap * (rap - sap)) - rho / (rbp * (rbp - sbp))) / L
        wrz += (rho / (ram * (ram + sam)) - rho / (rbm * (rbm + sbm))) / L
        wrr += (-sap / (rap * (rap - sap)) + sbp / (rbp * (rbp - sbp))) / L
        wrr += -(sam / (ram * (ram + sam)) - sbm / (rbm * (rbm + sbm))) / L
        # Euler-Maclaurin phi' second derivatives (phi''' seconds are ~1e-11)
        d_zz = lambda s, r: -(1.0 / r**3 - 3.0 * s * s / r**5)
        d_rz = lambda s, r: 3.0 * s * rho / r**5
        d_rr = lambda s, r: -(1.0 / r**3 - 3.0 * rho * rho / r**5)
        wzz += _EM1 * L * ((d_zz(sap, rap) - d_zz(sbp, rbp))
                           + (d_zz(sbm, rbm) - d_zz(sam, ram)))
        wrz += _EM1 * L * ((d_rz(sap, rap) - d_rz(sbp, rbp))
                           + (d_rz(sbm, rbm) - d_rz(sam, ram)))
        wrr += _EM1 * L * ((d_rr(sap, rap) - d_rr(sbp, rbp))
                           + (d_rr(sbm, rbm) - d_rr(sam, ram)))
        return coeff, wrr, wrz, wzz


# --- the full potential set ---------------------------------------------------

@dataclass(frozen=True)
class GradientSplit:
    """u_rho = sing/rho + radial; u_z = axial.  sing is 2 inside the owning rod."""

    sing: float
    radial: float
    axial: float

    def combined(self, rho: float) -> tuple[float, float]:
        return self.sing / rho + self.radial, self.axial


@dataclass(frozen=True)
class HessianSplit:
    """u_rhorho = -sing/rho^2 + rr; mixed and zz parts are smooth."""

    sing: float
    rr: float
    rz: float
    zz: float

    def combined(self, rho: float) -> tuple[float, float, float]:
        return -self.sing / rho**2 + self.rr, self.rz, self.zz


class PotentialSet:
    """Evaluators for the n renormalized family potentials of a rod diagram.

    Immutable after construction; all evaluators are pure functions of the
    point, so instances are safe to share between threads.
    """

    def __init__(self, diagram: RodDiagram, truncation: int = DEFAULT_TRUNCATION,
                 constants: Optional[Sequence[float]] = None):
        report = validate(diagram)
        if not report.ok:
            raise InputError(f"invalid diagram: {report}")
        if diagram.horizon_rods:
            raise InputError("soliton potentials admit no horizon rods")
        if truncation < 1:
            raise InputError(f"truncation must be >= 1, got {truncation}")
        self.diagram = diagram
        self.truncation = int(truncation)
        self.period = float(diagram.period)
        self.n = diagram.n
        if constants is None:
            constants = (0.0,) * diagram.n
        self.constants = tuple(float(k) for k in constants)
        if len(self.constants) != diagram.n:
            raise InputError("one additive constant per family is required")

        self._orbits: list[list[_Orbit]] = [[] for _ in range(diagram.n)]
        self._rod_bounds: list[list[tuple[float, float]]] = [[] for _ in range(diagram.n)]
        for rod in diagram.axis_rods:
            fam = rod.family()
            if fam is None:
                raise UnsupportedStructureError(
                    f"rod structure {rod.structure} is outside the diagonal ansatz")
            orbit = _Orbit(float(rod.start), float(rod.end), self.period)
            self._orbits[fam - 1].append(orbit)
            self._rod_bounds[fam - 1].append((float(rod.start), float(rod.end)))
        # junction points between rods; a single full-axis rod has no corner
        self._corners = ([float(r.start) for r in diagram.rods]
                         if len(diagram.rods) > 1 else [])

    # -- bookkeeping

    @property
    def unshifted_constant(self) -> float:
        """The lapse constant at zero additive constants: -2 log(2L)."""
        return -2.0 * math.log(2.0 * self.period)

    @property
    def lapse_constant(self) -> float:
        """c in sum(u_i) = 2 log rho + c, including the additive constants."""
        return sum(self.constants) + self.unshifted_constant

    @property
    def collar(self) -> float:
        """Half-width of the near-axis strip where regularized forms apply."""
        return float(self.diagram.min_rod_length()) / 8.0

    def with_constants(self, constants: Sequence[float]) -> "PotentialSet":
        return PotentialSet(self.diagram, self.truncation, constants)

    def _owning_rod(self, i: int, z: float, margin: float = 0.0) -> Optional[tuple[float, float]]:
        zmod = z % self.period
        for (a, b) in self._rod_bounds[i - 1]:
            for zz in (zmod, zmod + self.period, zmod - self.period):
                if a + margin < zz < b - margin:
                    return a, b
        return None

    def _check_family(self, i: int):
        if not 1 <= i <= self.n:
            raise InputError(f"family index {i} outside 1..{self.n}")

    # -- evaluators

    def value_split(self, i: int, rho: float, z: float) -> tuple[float, float]:
        """(coefficient of log rho, smooth rest) for u_i at (rho, z)."""
        self._check_family(i)
        c_tot, rest = 0.0, self.constants[i - 1]
        for orbit in self._orbits[i - 1]:
            c, r = orbit.value(rho, z, self.truncation)
            c_tot += c
            rest += r
        return c_tot, rest

    def value(self, i: int, rho: float, z: float) -> float:
        """u_i at (rho, z); rho = 0 is allowed off the closed family-i rods."""
        if rho < 0.0:
            raise InputError(f"rho must be >= 0, got {rho}")
        c, rest = self.value_split(i, rho, z)
        if rho == 0.0:
            if c != 0.0:
                raise SingularPointError(
                    f"u_{i} is singular on its rod axis at z={z}; use reduced_value")
            return rest
        return c * math.log(rho) + rest

    def reduced_value(self, i: int, rho: float, z: float) -> float:
        """u_i - 2 log rho, finite through the axis on family-i rod interiors."""
        if rho < 0.0:
            raise InputError(f"rho must be >= 0, got {rho}")
        if rho < self.collar:
            if self._near_corner(z):
                raise CornerEvaluationError(
                    f"z={z} is within the corner collar; reduced evaluation refused")
            if self._owning_rod(i, z) is None:
                raise SingularPointError(
                    f"(rho={rho}, z={z}) is not over a family-{i} rod interior")
        c, rest = self.value_split(i, rho, z)
        c -= 2.0
        if rho == 0.0:
            if c != 0.0:
                raise SingularPointError(
                    f"u_{i} - 2 log rho diverges on the axis at z={z}")
            return rest
        return c * math.log(rho) + rest

    def _near_corner(self, z: float) -> bool:
        return self.corner_margin(z) < self.collar

    def corner_margin(self, z: float) -> float:
        """Distance from z to the nearest corner (inf when there is none)."""
        zmod = z % self.period
        margin = math.inf
        for edge in self._corners:
            d = min(abs(zmod - edge), abs(zmod - edge - self.period),
                    abs(zmod - edge + self.period))
            margin = min(margin, d)
        return margin

    def gradient_split(self, i: int, rho: float, z: float) -> GradientSplit:
        """Gradient with the 2/rho singular part split off analytically."""
        self._check_family(i)
        c_tot, wr, uz = 0.0, 0.0, 0.0
        for orbit in self._orbits[i - 1]:
            c, w, a = orbit.grad(rho, z, self.truncation)
            c_tot += c
            wr += w
            uz += a
        return GradientSplit(c_tot, wr, uz)

    def gradient(self, i: int, rho: float, z: float) -> tuple[float, float]:
        if rho <= 0.0:
            raise SingularPointError("gradient evaluation requires rho > 0")
        s = self.gradient_split(i, rho, z)
        return s.sing / rho + s.radial, s.axial

    def gradient_splits(self, rho: float, z: float) -> list[GradientSplit]:
        return [self.gradient_split(i, rho, z) for i in range(1, self.n + 1)]

    def hessian_split(self, i: int, rho: float, z: float) -> HessianSplit:
        self._check_family(i)
        c_tot, wrr, wrz, wzz = 0.0, 0.0, 0.0, 0.0
        for orbit in self._orbits[i - 1]:
            c, a, b, d = orbit.hessian(rho, z, self.truncation)
            c_tot += c
            wrr += a
            wrz += b
            wzz += d
        return HessianSplit(c_tot, wrr, wrz, wzz)

    def hessian(self, i: int, rho: float, z: float) -> tuple[float, float, float]:
        if rho <= 0.0:
            raise SingularPointError("hessian evaluation requires rho > 0")
        s = self.hessian_split(i, rho, z)
        return s.combined(rho)

    def sum_values(self, rho: float, z: float) -> float:
        """sum_i u_i; analytically 2 log rho + lapse_constant."""
        return sum(self.value(i, rho, z) for i in range(1, self.n + 1))

    def lapse(self, rho: float, z: float) -> float:
        """rho e^{-sum u_i / 2}; constant e^{-c/2} for valid diagrams."""
        total_c, total_rest = 0.0, 0.0
        for i in range(1, self.n + 1):
            c, rest = self.value_split(i, rho, z)
            total_c += c
            total_rest += rest
        # rho * exp(-(total_c log rho + total_rest)/2), with total_c = 2
        return rho ** (1.0 - total_c / 2.0) * math.exp(-total_rest / 2.0)


def laplacian_residual(pset: PotentialSet, i: int, rho: float, z: float, h: float) -> float:
    """Five-point axisymmetric Laplacian u_rr + u_r/rho + u_zz by differences.

    Vanishes to O(h^2) plus truncation tolerance since each u_i is harmonic.
    """
    if rho <= h:
        raise InputError("laplacian stencil requires rho > h")
    u0 = pset.value(i, rho, z)
    up = pset.value(i, rho + h, z)
    um = pset.value(i, rho - h, z)
    vp = pset.value(i, rho, z + h)
    vm = pset.value(i, rho, z - h)
    urr = (up - 2.0 * u0 + um) / h**2
    ur = (up - um) / (2.0 * h)
    uzz = (vp - 2.0 * u0 + vm) / h**2
    return urr + ur / rho + uzz


@dataclass(frozen=True)
class FarFieldFit:
    """u_i ~ slope * log rho + offset in the exponential-decay regime."""

    slope: float
    offset: float
    max_residual: float


def far_field_fit(pset: PotentialSet, i: int, rho_samples: Iterable[float],
                  z: float = 0.0) -> FarFieldFit:
    """Least-squares fit of u_i against log rho over far-field samples."""
    rhos = np.asarray(sorted(rho_samples), dtype=float)
    if rhos.size < 2:
        raise InputError("far-field fit needs at least two samples")
    vals = np.array([pset.value(i, r, z) for r in rhos])
    X = np.column_stack([np.log(rhos), np.ones_like(rhos)])
    coef, *_ = np.linalg.lstsq(X, vals, rcond=None)
    resid = vals - X @ coef
    return FarFieldFit(float(coef[0]), float(coef[1]), float(np.max(np.abs(resid))))
