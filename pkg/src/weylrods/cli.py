"""Command-line pipeline: config ingestion, verification runs, report export.

Reports are deterministic structured text (12-digit scientific notation, fixed
section and key names), so repeated runs on the same config are byte
identical and suitable for golden-file comparison.  Exit codes: 0 success,
1 check failure, 2 input error, 3 numerical-accuracy failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from . import balance as bal
from . import curvature as curv
from .asymptotics import verify_kasner, wick_ricci_check, wick_rotate
from .errors import AccuracyError, InputError, WeylrodsError
from .potentials import far_field_fit, laplacian_residual
from .rods import (RodDiagram, classify_slice_topology, detect_reflection_symmetry,
                   diagram_from_families, validate)
from .solution import SolitonSolution, build_solution

COMMANDS = ("validate", "classify", "build", "balance", "verify", "kasner",
            "holonomy", "wick", "sample")


# --- configuration -------------------------------------------------------------

@dataclass(frozen=True)
class RodSpec:
    family: int
    fraction: Optional[Fraction] = None
    start: Optional[Fraction] = None
    end: Optional[Fraction] = None


@dataclass(frozen=True)
class RunConfig:
    """Parsed run configuration; lengths are exact fractions of the period."""

    n: int
    period: Fraction
    rods: tuple[RodSpec, ...]
    truncation: int = 40
    segment_tol: float = 1e-10
    tol_sum: float = 1e-8
    tol_harmonic: float = 1e-5
    tol_quad: float = 1e-8
    tol_defect: float = 1e-6
    tol_ricci: float = 1e-4
    tol_flux: float = 1e-6
    tol_kasner: float = 1e-4
    rank_threshold: float = 1e-8
    spread_tol: float = 1e-7
    far_min: Fraction = Fraction(10)
    far_max: Fraction = Fraction(100)
    far_count: int = 8
    grid_rho_min: Fraction = Fraction(1, 5)
    grid_rho_max: Fraction = Fraction(2)
    grid_rho_count: int = 8
    grid_z_count: int = 8
    out: str = "sample.csv"
    threads: int = 1

    def to_diagram(self) -> RodDiagram:
        fams = [r.family for r in self.rods]
        if all(r.fraction is not None for r in self.rods):
            return diagram_from_families(self.n, self.period, fams,
                                         [r.fraction for r in self.rods])
        from .rods import Rod, basis_structure
        rods = [Rod(r.start * self.period, r.end * self.period,
                    basis_structure(r.family, self.n)) for r in self.rods]
        return RodDiagram(self.n, self.period, rods)

    def far_samples(self) -> list[float]:
        L = float(self.period)
        return list(np.geomspace(float(self.far_min) * L, float(self.far_max) * L,
                                 self.far_count))


_INT_KEYS = {"n", "truncation", "far_count", "grid_rho_count", "grid_z_count", "threads"}
_FLOAT_KEYS = {"segment_tol", "tol_sum", "tol_harmonic", "tol_quad", "tol_defect",
               "tol_ricci", "tol_flux", "tol_kasner", "rank_threshold", "spread_tol"}
_FRACTION_KEYS = {"period", "far_min", "far_max", "grid_rho_min", "grid_rho_max"}
_STR_KEYS = {"out"}
_ROD_KEYS = {"family", "fraction", "start", "end"}


def _parse_fraction(text: str, lineno: int) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"line {lineno}: bad fraction {text!r} ({exc})") from None


def parse_config(text: str) -> RunConfig:
    """Strict line-oriented key=value parser with repeated [rod] sections."""
    top: dict[str, object] = {}
    rods: list[dict[str, object]] = []
    current: Optional[dict[str, object]] = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if line != "[rod]":
                raise InputError(f"line {lineno}: unknown section {line!r}")
            current = {}
            rods.append(current)
            continue
        if "=" not in line:
            raise InputError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not value:
            raise InputError(f"line {lineno}: empty value for {key!r}")
        target = current if current is not None else top
        allowed = _ROD_KEYS if current is not None else (
            _INT_KEYS | _FLOAT_KEYS | _FRACTION_KEYS | _STR_KEYS)
        if key in target:
            raise InputError(f"line {lineno}: duplicate key {key!r}")
        if key not in allowed:
            where = "[rod] section" if current is not None else "top level"
            raise InputError(f"line {lineno}: unknown key {key!r} at {where}")
        if current is not None:
            if key == "family":
                try:
                    target[key] = int(value)
                except ValueError:
                    raise InputError(f"line {lineno}: bad integer {value!r}") from None
            else:
                target[key] = _parse_fraction(value, lineno)
        elif key in _INT_KEYS:
            try:
                target[key] = int(value)
            except ValueError:
                raise InputError(f"line {lineno}: bad integer {value!r}") from None
        elif key in _FLOAT_KEYS:
            try:
                target[key] = float(value)
            except ValueError:
                raise InputError(f"line {lineno}: bad number {value!r}") from None
        elif key in _FRACTION_KEYS:
            target[key] = _parse_fraction(value, lineno)
        else:
            target[key] = value

    for req in ("n", "period"):
        if req not in top:
            raise InputError(f"missing required key {req!r}")
    if not rods:
        raise InputError("at least one [rod] section is required")

    specs = []
    by_fraction = ["fraction" in r for r in rods]
    by_endpoint = [("start" in r) or ("end" in r) for r in rods]
    if any(by_fraction) and any(by_endpoint):
        raise InputError("rods must use either fractions or explicit endpoints, not both")
    for k, r in enumerate(rods):
        if "family" not in r:
            raise InputError(f"[rod] section {k + 1} is missing 'family'")
        if "fraction" in r:
            specs.append(RodSpec(r["family"], fraction=r["fraction"]))
        elif "start" in r and "end" in r:
            specs.append(RodSpec(r["family"], start=r["start"], end=r["end"]))
        else:
            raise InputError(f"[rod] section {k + 1} needs 'fraction' or 'start'+'end'")

    cfg = RunConfig(n=top.pop("n"), period=top.pop("period"), rods=tuple(specs),
                    **top)  # type: ignore[arg-type]
    if cfg.truncation < 1:
        raise InputError("truncation must be >= 1")
    for name in _FLOAT_KEYS:
        if getattr(cfg, name) <= 0:
            raise InputError(f"{name} must be positive")
    if cfg.threads < 1:
        raise InputError("threads must be >= 1")
    return cfg


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read config {path!r}: {exc}") from None


# --- report rendering -----------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12e}"
    return str(value)


class Report:
    def __init__(self):
        self._lines: list[str] = []
        self.failures: list[str] = []

    def section(self, name: str):
        if self._lines:
            self._lines.append("")
        self._lines.append(f"[{name}]")

    def put(self, key: str, value):
        self._lines.append(f"{key}: {_fmt(value)}")

    def check(self, key: str, value: float, tol: float):
        ok = abs(value) < tol
        self.put(key, value)
        self.put(f"{key}_tolerance", tol)
        self.put(f"{key}_pass", ok)
        if not ok:
            self.failures.append(key)
        return ok

    def render(self) -> str:
        return "\n".join(self._lines) + "\n"


def _ordered_map(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


# --- commands --------------------------------------------------------------------

def _built(config: RunConfig) -> SolitonSolution:
    diagram = config.to_diagram()
    report = validate(diagram)
    if not report.ok:
        raise InputError(f"invalid diagram: {report}")
    return build_solution(diagram, truncation=config.truncation,
                          segment_tol=config.segment_tol)


def _balanced(config: RunConfig) -> SolitonSolution:
    sol, _ = bal.balance_solution(_built(config), spread_tol=config.spread_tol)
    return sol


def _cmd_validate(config: RunConfig, rep: Report, **_) -> int:
    diagram = config.to_diagram()
    result = validate(diagram)
    rep.section("validate")
    rep.put("n", diagram.n)
    rep.put("period", str(diagram.period))
    rep.put("rod_count", len(diagram.rods))
    rep.put("sequence", ",".join(str(r.structure) for r in diagram.rods))
    rep.put("valid", result.ok)
    for k, v in enumerate(result.violations, start=1):
        rep.put(f"violation_{k}", v)
    return 0 if result.ok else 2


def _cmd_classify(config: RunConfig, rep: Report, **_) -> int:
    diagram = config.to_diagram()
    labels = classify_slice_topology(diagram.structure_sequence(), diagram.n)
    rep.section("classify")
    rep.put("n", diagram.n)
    rep.put("sequence", ",".join(str(r.structure) for r in diagram.rods))
    if labels:
        rep.put("label_count", len(labels))
        for k, lab in enumerate(labels, start=1):
            rep.put(f"label_{k}", lab.render())
    else:
        rep.put("label_count", 0)
        rep.put("label_1", "unclassified")
    return 0


def _cmd_build(config: RunConfig, rep: Report, **_) -> int:
    sol = _built(config)
    rep.section("build")
    rep.put("n", sol.n)
    rep.put("period", str(sol.diagram.period))
    rep.put("truncation", config.truncation)
    rep.put("lapse_constant", sol.lapse_constant)
    rep.put("lapse_value", math.exp(-0.5 * sol.lapse_constant))
    sym = detect_reflection_symmetry(sol.diagram)
    rep.put("reflection_symmetry", "none" if sym is None else
            f"center={sym.center} permutation={','.join(map(str, sym.permutation))}")
    fars = config.far_samples()
    for i in range(1, sol.n + 1):
        fit = far_field_fit(sol.potentials, i, fars)
        rep.put(f"amplitude_{i}", fit.slope)
    return 0


def _cmd_balance(config: RunConfig, rep: Report, **_) -> int:
    sol = _built(config)
    balanced, before = bal.balance_solution(sol, spread_tol=config.spread_tol)
    after = bal.compute_defects(balanced, tol=config.tol_defect)
    rep.section("balance")
    rep.put("rod_count", len(sol.diagram.rods))
    for k, b in enumerate(before.rod_defects, start=1):
        rep.put(f"defect_pre_{k}", b)
    for i, kap in enumerate(balanced.potentials.constants, start=1):
        rep.put(f"kappa_{i}", kap)
    rep.put("alpha0", balanced.alpha.alpha0)
    for k, b in enumerate(after.rod_defects, start=1):
        rep.put(f"defect_post_{k}", b)
    rep.check("max_abs_defect", after.max_abs_defect, config.tol_defect)
    return 1 if rep.failures else 0


def _verify_points(L: float) -> list[tuple[float, float]]:
    return [(0.37 * L, 0.21 * L), (0.93 * L, 0.55 * L), (1.61 * L, 0.83 * L)]


def _cmd_verify(config: RunConfig, rep: Report, threads: int = 1, **_) -> int:
    sol = _balanced(config)
    L = sol.period
    n = sol.n
    pts = _verify_points(L)

    rep.section("verify.sum_identity")
    rhos = np.linspace(0.2 * L, 2.0 * L, 10)
    zs = np.linspace(0.0, L, 10, endpoint=False)
    grid = [(r, z) for r in rhos for z in zs]
    c = sol.lapse_constant

    def sum_resid(p):
        r, z = p
        return abs(sol.potentials.sum_values(r, z) - 2.0 * math.log(r) - c)

    resid = max(_ordered_map(sum_resid, grid, threads))
    rep.check("max_residual", resid, config.tol_sum)

    rep.section("verify.harmonicity")
    h = 1e-3
    worst = 0.0
    for i in range(1, n + 1):
        vals = [abs(laplacian_residual(sol.potentials, i, r, z, h)) for (r, z) in pts]
        rep.put(f"max_residual_u{i}", max(vals))
        worst = max(worst, max(vals))
    rep.check("max_residual", worst, config.tol_harmonic)

    rep.section("verify.integrability")
    worst = max(sol.alpha.integrability_residual(r, z, h) for (r, z) in pts)
    rep.check("max_residual", worst, config.tol_harmonic)

    rep.section("verify.path_independence")
    gap1 = sol.alpha.path_independence_gap(1.7 * L, 0.9 * L, via=(2.6 * L, 1.4 * L))
    gap2 = sol.alpha.path_independence_gap(0.45 * L, 0.31 * L, via=(3.1 * L, 0.7 * L))
    rep.check("max_gap", max(gap1, gap2), config.tol_quad)

    rep.section("verify.periodicity")
    worst = 0.0
    for rho in (0.1 * L, L, 10.0 * L):
        d = abs(sol.alpha.value(rho, 0.37 * L + L) - sol.alpha.value(rho, 0.37 * L))
        worst = max(worst, d)
    rep.put("max_alpha_shift", worst)
    defect = abs(sol.alpha.periodicity_defect(L))
    rep.put("alpha_z_integral", defect)
    rep.check("max_residual", max(worst, defect), config.tol_quad)

    rep.section("verify.defects")
    report = bal.compute_defects(sol, tol=config.tol_defect)
    for k, b in enumerate(report.rod_defects, start=1):
        rep.put(f"defect_{k}", b)
    spread = max(bal.defect_constancy(sol, k) for k in range(len(sol.diagram.rods)))
    rep.put("max_along_rod_spread", spread)
    rep.check("max_abs_defect", max(report.max_abs_defect, spread), config.tol_defect)

    rep.section("verify.lapse")
    worst = max(abs(sol.potentials.lapse(r, z) - math.exp(-0.5 * c)) for (r, z) in pts)
    rep.check("max_residual", worst, 1e-10)

    rep.section("verify.ricci")
    vals = _ordered_map(lambda p: curv.ricci_residual(sol, p[0], p[1], h), pts, threads)
    for k, v in enumerate(vals, start=1):
        rep.put(f"residual_{k}", v)
    rep.check("max_residual", max(vals), config.tol_ricci)

    rep.section("verify.flux")
    worst = 0.0
    for k in range(len(sol.diagram.rods)):
        got = curv.homology_flux(sol, k)
        want = curv.flux_formula(sol, k)
        rep.put(f"flux_{k + 1}", got)
        rep.put(f"flux_formula_{k + 1}", want)
        worst = max(worst, abs(got - want))
    rep.check("max_mismatch", worst, config.tol_flux)

    rep.section("verify.summary")
    rep.put("checks_failed", len(rep.failures))
    rep.put("failed_keys", ",".join(rep.failures) if rep.failures else "none")
    return 1 if rep.failures else 0


def _cmd_kasner(config: RunConfig, rep: Report, **_) -> int:
    sol = _balanced(config)
    fit = verify_kasner(sol, rho_samples=config.far_samples())
    rep.section("kasner")
    for i, a in enumerate(fit.data.amplitudes, start=1):
        rep.put(f"amplitude_{i}", a)
    rep.put("C_fitted", fit.fitted_C)
    rep.put("C_formula", fit.predicted_C)
    rep.check("C_gap", fit.c_gap, config.tol_kasner)
    for k, p in enumerate(fit.data.exponents):
        rep.put(f"p_{k}", p)
    rep.check("sum_residual", fit.data.sum_residual, 1e-6)
    rep.check("square_residual", fit.data.square_residual, 1e-6)
    rep.put("q0", fit.data.q0)
    rep.put("q1", fit.data.q1)
    return 1 if rep.failures else 0


def _cmd_holonomy(config: RunConfig, rep: Report, **_) -> int:
    sol = _balanced(config)
    L = sol.period
    point = (20.0 * L, 0.3 * L)
    rank = curv.holonomy_rank(sol, *point, rel_threshold=config.rank_threshold)
    expected = (sol.n + 2) * (sol.n + 1) // 2
    rep.section("holonomy")
    rep.put("rho", point[0])
    rep.put("z", point[1])
    rep.put("matrix_count", expected)
    rep.put("rank", rank)
    rep.put("expected_rank", expected)
    ok = rank == expected
    rep.put("rank_pass", ok)
    if not ok:
        rep.failures.append("rank")
    return 1 if rep.failures else 0


def _cmd_wick(config: RunConfig, rep: Report, family: Optional[int] = None, **_) -> int:
    if family is None:
        raise InputError("wick requires --family")
    sol = _balanced(config)
    bh = wick_rotate(sol, family)
    rep.section("wick")
    rep.put("family", family)
    rep.put("spacetime_dimension", bh.spacetime_dimension)
    rep.put("torus_rank", bh.torus_rank)
    rep.put("horizon_rod_count", len(bh.horizon_rods))
    for k, (rod, lab) in enumerate(zip(bh.horizon_rods, bh.horizon_topologies), start=1):
        rep.put(f"horizon_{k}", f"[{rod.start},{rod.end}] {lab.render()}")
    mid = float(bh.horizon_rods[0].midpoint)
    rep.put("lapse_squared_at_1e-3", bh.lapse_squared(1e-3, mid))
    L = sol.period
    resid = wick_ricci_check(bh, 0.75 * L, 0.21 * L, 1e-3)
    rep.check("ricci_residual", resid, config.tol_ricci)
    return 1 if rep.failures else 0


def _cmd_sample(config: RunConfig, rep: Report, threads: int = 1,
                out: Optional[str] = None, **_) -> int:
    sol = _balanced(config)
    L = sol.period
    rhos = np.linspace(float(config.grid_rho_min) * L, float(config.grid_rho_max) * L,
                       config.grid_rho_count)
    zs = np.linspace(0.0, L, config.grid_z_count, endpoint=False)
    grid = [(r, z) for r in rhos for z in zs]

    def row(p):
        r, z = p
        us = [sol.potentials.value(i, r, z) for i in range(1, sol.n + 1)]
        a = sol.alpha.value(r, z)
        lapse = sol.potentials.lapse(r, z)
        return ",".join(_fmt(v) for v in (r, z, *us, a, lapse))

    rows = _ordered_map(row, grid, threads)
    header = "rho,z," + ",".join(f"u{i}" for i in range(1, sol.n + 1)) + ",alpha,lapse"
    path = out or config.out
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for r in rows:
            fh.write(r + "\n")
    rep.section("sample")
    rep.put("path", path)
    rep.put("rows", len(rows))
    rep.put("columns", 4 + sol.n)
    return 0


_HANDLERS = {
    "validate": _cmd_validate,
    "classify": _cmd_classify,
    "build": _cmd_build,
    "balance": _cmd_balance,
    "verify": _cmd_verify,
    "kasner": _cmd_kasner,
    "holonomy": _cmd_holonomy,
    "wick": _cmd_wick,
    "sample": _cmd_sample,
}


def run_pipeline(config: RunConfig, command: str, family: Optional[int] = None,
                 threads: Optional[int] = None, out: Optional[str] = None) -> tuple[str, int]:
    """Run one command; returns (report text, exit status)."""
    if command not in _HANDLERS:
        raise InputError(f"unknown command {command!r}; choose from {COMMANDS}")
    rep = Report()
    status = _HANDLERS[command](config, rep, family=family,
                                threads=threads or config.threads, out=out)
    return rep.render(), status


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="weylrods",
        description="Space-periodic static vacuum solitons from rod diagrams")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("config", help="path to the run configuration file")
    parser.add_argument("--family", type=int, default=None,
                        help="torus angle index for wick rotation")
    parser.add_argument("--threads", type=int, default=None,
                        help="parallel workers for grid sweeps (output unchanged)")
    parser.add_argument("--out", default=None, help="override the sample output path")
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config)
        text, status = run_pipeline(config, args.command, family=args.family,
                                    threads=args.threads, out=args.out)
    except InputError as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return 2
    except AccuracyError as exc:
        sys.stderr.write(f"accuracy error: {exc}\n")
        return 3
    except WeylrodsError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
