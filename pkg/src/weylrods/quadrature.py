"""The conformal factor alpha, defined by line quadrature of first-order data.

alpha solves

    alpha_rho = (rho/8) sum_i (u_{i,rho}^2 - u_{i,z}^2) - 1/(2 rho),
    alpha_z   = (rho/4) sum_i u_{i,rho} u_{i,z},

up to one additive constant.  The system is integrable because the u_i are
harmonic, which is what the path-independence checks verify numerically.

Writing u_{i,rho} = c_i/rho + w_i with the integer-weight singular part split
off (c_i = 2 over the owning rod, else 0) turns the integrand into

    alpha_rho = (sum c_i^2/8 - 1/2)/rho + sum ( c_i w_i/4 + rho(w_i^2 - u_{i,z}^2)/8 )

whose 1/rho prefactor vanishes identically over a tiling diagram, so the
integrand is evaluated cancellation-free arbitrarily close to the axis.
"""
from __future__ import annotations

import threading
from typing import Optional, Sequence

from scipy.integrate import quad

from .errors import AccuracyError, CornerEvaluationError, InputError
from .potentials import PotentialSet

DEFAULT_SEGMENT_TOL = 1e-10


class AlphaField:
    """Evaluator for alpha with a fixed base point and additive constant.

    Values are memoized per target point; the memo only caches results of the
    deterministic canonical path, so concurrent readers always agree.
    """

    def __init__(self, potentials: PotentialSet, base_point: Optional[tuple[float, float]] = None,
                 alpha0: float = 0.0, segment_tol: float = DEFAULT_SEGMENT_TOL):
        self.potentials = potentials
        L = potentials.period
        if base_point is None:
            base_point = (L, 0.0)
        if base_point[0] <= 0.0:
            raise InputError("base point must have rho > 0")
        self.base_point = (float(base_point[0]), float(base_point[1]))
        self.alpha0 = float(alpha0)
        self.segment_tol = float(segment_tol)
        self._memo: dict[tuple[float, float], float] = {}
        self._lock = threading.Lock()

    def with_constant(self, alpha0: float) -> "AlphaField":
        return AlphaField(self.potentials, self.base_point, alpha0, self.segment_tol)

    # -- integrand -------------------------------------------------------------

    def integrand(self, rho: float, z: float) -> tuple[float, float]:
        """(alpha_rho, alpha_z) at a point; exact near-axis cancellation."""
        if rho < 0.0:
            raise InputError(f"rho must be >= 0, got {rho}")
        if rho == 0.0 and self.potentials._near_corner(z):
            raise CornerEvaluationError(f"integrand singular at the corner near z={z}")
        splits = self.potentials.gradient_splits(rho, z)
        sum_c2 = sum(s.sing**2 for s in splits)
        a_r = sum(s.sing * s.radial / 4.0 + rho * (s.radial**2 - s.axial**2) / 8.0
                  for s in splits)
        a_z = sum(s.sing * s.axial / 4.0 + rho * s.radial * s.axial / 4.0
                  for s in splits)
        resid = sum_c2 / 8.0 - 0.5
        if resid != 0.0:
            if rho == 0.0:
                raise CornerEvaluationError(
                    f"axis integrand undefined at z={z}: no owning rod")
            a_r += resid / rho
        return a_r, a_z

    def laplacian2(self, rho: float, z: float) -> float:
        """Flat 2d Laplacian of alpha from the closed form

        d2 alpha = -(1/8) sum |grad u_i|^2 + 1/(2 rho^2).
        """
        splits = self.potentials.gradient_splits(rho, z)
        sum_c2 = sum(s.sing**2 for s in splits)
        out = (1.0 - sum_c2 / 4.0) / (2.0 * rho**2) if rho > 0.0 else 0.0
        if rho > 0.0:
            out -= sum(s.sing * s.radial for s in splits) / (4.0 * rho)
        out -= sum(s.radial**2 + s.axial**2 for s in splits) / 8.0
        return out

    # -- line integration --------------------------------------------------------

    def _leg(self, p: tuple[float, float], q: tuple[float, float]) -> float:
        """Integral of the alpha one-form along an axis-parallel segment."""
        if p == q:
            return 0.0
        if p[1] == q[1]:
            z = p[1]
            f = lambda r: self.integrand(r, z)[0]
            a, b = p[0], q[0]
        elif p[0] == q[0]:
            rho = p[0]
            f = lambda zz: self.integrand(rho, zz)[1]
            a, b = p[1], q[1]
        else:
            raise InputError(f"leg {p} -> {q} is not axis-parallel")
        out = quad(f, a, b, epsabs=self.segment_tol, epsrel=1e-12, limit=400,
                   full_output=1)
        val, err = out[0], out[1]
        if err > 50.0 * self.segment_tol * max(1.0, abs(b - a)):
            raise AccuracyError(
                f"segment quadrature error {err:.2e} over {p}->{q} exceeds budget")
        return val

    def integrate_path(self, points: Sequence[tuple[float, float]]) -> float:
        """Integral of (alpha_rho drho + alpha_z dz) along rectilinear waypoints."""
        total = 0.0
        for p, q in zip(points[:-1], points[1:]):
            total += self._leg(p, q)
        return total

    def _canonical_path(self, rho: float, z: float) -> list[tuple[float, float]]:
        r0, z0 = self.base_point
        rj = max(r0, rho)
        pts = [(r0, z0)]
        if rj != r0:
            pts.append((rj, z0))
        if z != z0:
            pts.append((rj, z))
        if rho != rj:
            pts.append((rho, z))
        return pts

    def value(self, rho: float, z: float,
              anchor: Optional[tuple[float, float]] = None) -> float:
        """alpha at (rho, z) = alpha0 + integral from the base point.

        With an anchor, the integral runs from the (memoized) anchor value
        along a short local path, which keeps stencil evaluations cheap and
        their quadrature errors correlated.
        """
        if rho <= 0.0:
            raise InputError(f"alpha evaluation requires rho > 0, got {rho}")
        key = (rho, z)
        with self._lock:
            if key in self._memo:
                return self._memo[key]
        if anchor is not None and anchor != (rho, z):
            base = self.value(*anchor)
            ra, za = anchor
            path = [(ra, za), (ra, z), (rho, z)] if za != z else [(ra, za), (rho, z)]
            val = base + self.integrate_path(path)
        else:
            val = self.alpha0 + self.integrate_path(self._canonical_path(rho, z))
            with self._lock:
                self._memo[key] = val
        return val

    # -- verification quantities ---------------------------------------------------

    def path_independence_gap(self, rho: float, z: float,
                              via: tuple[float, float]) -> float:
        """|alpha along the canonical path - alpha along a detour through `via`|."""
        direct = self.value(rho, z)
        r0, z0 = self.base_point
        rv, zv = via
        detour = self.alpha0 + self.integrate_path(
            [(r0, z0), (rv, z0), (rv, zv), (rho, zv), (rho, z)])
        return abs(direct - detour)

    def periodicity_defect(self, rho: float) -> float:
        """Integral of alpha_z over one period at fixed rho (zero if periodic)."""
        if rho <= 0.0:
            raise InputError("periodicity defect requires rho > 0")
        L = self.potentials.period
        z0 = self.base_point[1]
        f = lambda zz: self.integrand(rho, zz)[1]
        out = quad(f, z0, z0 + L, epsabs=self.segment_tol, epsrel=1e-12, limit=400,
                   full_output=1)
        return out[0]

    def integrability_residual(self, rho: float, z: float, h: float) -> float:
        """|d_z alpha_rho - d_rho alpha_z| by central differences of the integrand."""
        if rho <= h:
            raise InputError("integrability stencil requires rho > h")
        dz_ar = (self.integrand(rho, z + h)[0] - self.integrand(rho, z - h)[0]) / (2 * h)
        dr_az = (self.integrand(rho + h, z)[1] - self.integrand(rho - h, z)[1]) / (2 * h)
        return abs(dz_ar - dr_az)

    def axis_limit_with_estimate(self, z: float) -> tuple[float, float]:
        """lim_{rho->0} alpha(rho, z) by rho^2 Richardson extrapolation.

        z must lie in a rod interior, clear of the corner collar; alpha has an
        even expansion there whose coefficients grow like inverse powers of
        the distance to the nearest corner, so the starting radius is scaled
        to that margin and two Richardson levels reach well below 1e-7.
        """
        pots = self.potentials
        if pots._near_corner(z):
            raise CornerEvaluationError(f"axis limit at z={z} is inside a corner collar")
        margin = pots.corner_margin(z)
        rho1 = min(pots.collar, margin / 25.0)
        v1 = self.value(rho1, z)
        v2 = self.value(rho1 / 2.0, z, anchor=(rho1, z))
        v3 = self.value(rho1 / 4.0, z, anchor=(rho1 / 2.0, z))
        a1 = (4.0 * v2 - v1) / 3.0
        a2 = (4.0 * v3 - v2) / 3.0
        best = (16.0 * a2 - a1) / 15.0
        return best, abs(best - a2)

    def axis_limit(self, z: float, accuracy: float = 1e-6) -> float:
        value, estimate = self.axis_limit_with_estimate(z)
        if estimate > accuracy:
            raise AccuracyError(
                f"axis extrapolation at z={z} stalled at estimate {estimate:.2e}")
        return value
