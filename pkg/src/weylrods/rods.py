"""Periodic rod diagrams: validation, lattice admissibility, and topology.

A rod diagram partitions one period [0, L) of the symmetry axis into typed
intervals ("rods"), each labeled by an integer vector that tells which torus
combination degenerates there.  Everything in this module is exact: rod
endpoints are rationals and structure arithmetic is integer, so symmetry
detection and admissibility checks never hit floating-point edge cases.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb, gcd
from typing import Iterable, Optional, Sequence

from .errors import InputError, UnsupportedStructureError

RationalLike = Fraction | int | str


def _as_fraction(x: RationalLike) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


@dataclass(frozen=True)
class RodStructure:
    """Integer vector labeling an axis interval; zero vector marks a horizon."""

    entries: tuple[int, ...]

    def __init__(self, entries: Iterable[int]):
        object.__setattr__(self, "entries", tuple(int(e) for e in entries))

    @property
    def is_horizon(self) -> bool:
        return all(e == 0 for e in self.entries)

    @property
    def is_primitive(self) -> bool:
        """gcd of the absolute values of the nonzero entries equals 1."""
        g = 0
        for e in self.entries:
            g = gcd(g, abs(e))
        return g == 1

    def basis_index(self) -> Optional[int]:
        """1-based index i if this is the standard basis vector e_i, else None."""
        idx = None
        for k, e in enumerate(self.entries):
            if e == 1 and idx is None:
                idx = k + 1
            elif e != 0:
                return None
        return idx

    def __len__(self) -> int:
        return len(self.entries)

    def __str__(self) -> str:
        i = self.basis_index()
        if i is not None:
            return f"e{i}"
        return "(" + ",".join(str(e) for e in self.entries) + ")"


def basis_structure(i: int, n: int) -> RodStructure:
    """Standard basis vector e_i in Z^n (1-based)."""
    if not 1 <= i <= n:
        raise InputError(f"family index {i} outside 1..{n}")
    return RodStructure(tuple(1 if k == i - 1 else 0 for k in range(n)))


@dataclass(frozen=True)
class Rod:
    """Axis or horizon interval [start, end) with its structure vector."""

    start: Fraction
    end: Fraction
    structure: RodStructure

    def __init__(self, start: RationalLike, end: RationalLike, structure: RodStructure | Iterable[int]):
        if not isinstance(structure, RodStructure):
            structure = RodStructure(structure)
        object.__setattr__(self, "start", _as_fraction(start))
        object.__setattr__(self, "end", _as_fraction(end))
        object.__setattr__(self, "structure", structure)

    @property
    def kind(self) -> str:
        return "horizon" if self.structure.is_horizon else "axis"

    @property
    def length(self) -> Fraction:
        return self.end - self.start

    @property
    def midpoint(self) -> Fraction:
        return (self.start + self.end) / 2

    def family(self) -> Optional[int]:
        return self.structure.basis_index()


@dataclass(frozen=True)
class SymmetryDescriptor:
    """Reflection center z_c and the family permutation it induces (1-based)."""

    center: Fraction
    permutation: tuple[int, ...]

    @property
    def is_identity(self) -> bool:
        return all(p == k + 1 for k, p in enumerate(self.permutation))


@dataclass(frozen=True)
class RodDiagram:
    """One period of a space-periodic rod configuration.

    Rods must tile [0, period) in order; `n` is the torus rank.  The optional
    symmetry field records a reflection that fixes the diagram; it is verified
    during validation but never trusted for numerics (detect it instead).
    """

    n: int
    period: Fraction
    rods: tuple[Rod, ...]
    symmetry: Optional[SymmetryDescriptor] = None

    def __init__(self, n: int, period: RationalLike, rods: Sequence[Rod],
                 symmetry: Optional[SymmetryDescriptor] = None):
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "period", _as_fraction(period))
        object.__setattr__(self, "rods", tuple(sorted(rods, key=lambda r: r.start)))
        object.__setattr__(self, "symmetry", symmetry)

    @property
    def axis_rods(self) -> tuple[Rod, ...]:
        return tuple(r for r in self.rods if r.kind == "axis")

    @property
    def horizon_rods(self) -> tuple[Rod, ...]:
        return tuple(r for r in self.rods if r.kind == "horizon")

    def families(self) -> tuple[int, ...]:
        """Sorted family indices that own at least one axis rod."""
        fams = set()
        for r in self.axis_rods:
            f = r.family()
            if f is not None:
                fams.add(f)
        return tuple(sorted(fams))

    def rods_of_family(self, i: int) -> tuple[Rod, ...]:
        return tuple(r for r in self.axis_rods if r.family() == i)

    def structure_sequence(self) -> tuple[RodStructure, ...]:
        return tuple(r.structure for r in self.rods)

    def min_rod_length(self) -> Fraction:
        return min(r.length for r in self.rods)

    def with_symmetry(self, symmetry: Optional[SymmetryDescriptor]) -> "RodDiagram":
        return RodDiagram(self.n, self.period, self.rods, symmetry)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "valid"
        return "; ".join(self.violations)


def det2(v: RodStructure | Iterable[int], w: RodStructure | Iterable[int]) -> int:
    """Second determinant divisor: gcd of all 2x2 minors of the column pair (v, w).

    Returns 0 when every minor vanishes (e.g. proportional vectors).
    """
    ve = v.entries if isinstance(v, RodStructure) else tuple(int(e) for e in v)
    we = w.entries if isinstance(w, RodStructure) else tuple(int(e) for e in w)
    if len(ve) != len(we):
        raise InputError(f"dimension mismatch: {len(ve)} vs {len(we)}")
    if len(ve) < 2:
        raise InputError("det2 needs vectors of length >= 2")
    g = 0
    for j1, j2 in combinations(range(len(ve)), 2):
        minor = ve[j1] * we[j2] - ve[j2] * we[j1]
        g = gcd(g, abs(minor))
    return g


def validate(diagram: RodDiagram) -> ValidationReport:
    """Check every diagram invariant; violations are reported, not raised."""
    v: list[str] = []
    n, L, rods = diagram.n, diagram.period, diagram.rods
    if n < 1:
        v.append(f"torus rank n={n} must be >= 1")
    if L <= 0:
        v.append(f"period {L} must be positive")
    if not rods:
        v.append("diagram has no rods")
        return ValidationReport(tuple(v))

    for k, rod in enumerate(rods):
        if rod.end <= rod.start:
            v.append(f"rod {k}: end {rod.end} <= start {rod.start}")
        if len(rod.structure) != n:
            v.append(f"rod {k}: structure length {len(rod.structure)} != n={n}")
        elif not rod.structure.is_horizon and not rod.structure.is_primitive:
            v.append(f"rod {k}: structure {rod.structure} entries are not relatively prime")

    # coverage of [0, L) without gaps or overlaps
    if rods[0].start != 0:
        v.append(f"coverage: first rod starts at {rods[0].start}, not 0")
    for k in range(len(rods) - 1):
        a, b = rods[k], rods[k + 1]
        if a.end < b.start:
            v.append(f"coverage: gap between {a.end} and {b.start}")
        elif a.end > b.start:
            v.append(f"coverage: overlap between rods {k} and {k + 1}")
    if rods[-1].end != L:
        v.append(f"coverage: last rod ends at {rods[-1].end}, not period {L}")

    # corners between consecutive axis rods, wrapping around the period;
    # a single full-axis rod has no corner with its own translate.
    if len(rods) > 1:
        for k in range(len(rods)):
            a = rods[k]
            b = rods[(k + 1) % len(rods)]
            where = f"corner at z={b.start}" if k + 1 < len(rods) else "corner at the period seam"
            if a.kind == "axis" and b.kind == "axis":
                if a.structure == b.structure:
                    v.append(f"{where}: consecutive rods share structure {a.structure}; merge them")
                elif len(a.structure) == n and len(b.structure) == n and n >= 2:
                    d = det2(a.structure, b.structure)
                    if d != 1:
                        v.append(f"{where}: Det2({a.structure},{b.structure}) = {d}, not 1")

    if diagram.symmetry is not None and not v:
        if not _symmetry_fixes(diagram, diagram.symmetry):
            v.append("declared symmetry does not fix the diagram")

    return ValidationReport(tuple(v))


# --- topology labels ---------------------------------------------------------

Summand = tuple[int, tuple[int, ...], int]  # multiplicity, sphere dims, torus rank


@dataclass(frozen=True)
class TopologyLabel:
    """Connected sum of sphere-product pieces, optionally minus a B^2 x T^r end."""

    summands: tuple[Summand, ...]
    removed_torus_rank: Optional[int] = None

    def render(self) -> str:
        parts = []
        for mult, dims, trank in self.summands:
            factors = [f"S^{d}" for d in dims] + ([f"T^{trank}"] if trank > 0 else [])
            base = " x ".join(factors)
            if mult > 1:
                parts.append(f"{mult}({base})")
            elif len(self.summands) > 1 and len(factors) > 1:
                parts.append(f"({base})")
            else:
                parts.append(base)
        body = " # ".join(parts)
        if self.removed_torus_rank is None:
            return body
        if len(parts) > 1:
            body = f"[{body}]"
        return f"{body} \\ (B^2 x T^{self.removed_torus_rank})"

    def __str__(self) -> str:
        return self.render()


def horizon_topology(left: RodStructure, right: RodStructure, n: int) -> TopologyLabel:
    """Cross-sectional topology of a horizon rod from its two axis neighbors.

    Distinct basis neighbors give S^3 x T^(n-2), equal neighbors give
    S^1 x S^2 x T^(n-2); the torus factor is suppressed for n = 2.
    """
    if n < 2:
        raise InputError("horizon topology rule needs torus rank n >= 2")
    i = left.basis_index()
    j = right.basis_index()
    if i is None or j is None:
        raise UnsupportedStructureError(
            f"neighbors {left}, {right} are not standard basis vectors (diagonal ansatz)")
    trank = n - 2
    if i == j:
        return TopologyLabel(((1, (1, 2), trank),))
    return TopologyLabel(((1, (3,), trank),))


def _basic_sequence_label(n: int) -> TopologyLabel:
    """Connected-sum label for the basic period e_1,...,e_n with n >= 4."""
    summands = tuple(
        (k * comb(n - 2, k + 1), (2 + k, n - k), 0) for k in range(1, n - 2)
    )
    return TopologyLabel(summands, removed_torus_rank=n)


def _first_occurrence_relabel(seq: Sequence[int]) -> tuple[int, ...]:
    mapping: dict[int, int] = {}
    out = []
    for f in seq:
        if f not in mapping:
            mapping[f] = len(mapping) + 1
        out.append(mapping[f])
    return tuple(out)


def classify_slice_topology(period: Sequence[RodStructure], n: int) -> tuple[TopologyLabel, ...]:
    """Quotient-slice topology for the recognized period families.

    The period is treated as a cyclic sequence up to relabeling of basis
    vectors and reversal.  Returns every matching label (distinct labels can
    coexist where the classification cases overlap); empty means unclassified.
    """
    fams = [s.basis_index() for s in period]
    if any(f is None for f in fams):
        return ()

    table: dict[tuple[int, ...], TopologyLabel] = {}
    if n == 2:
        table[(1, 2)] = TopologyLabel(((1, (4,), 0),), removed_torus_rank=2)
        table[(1, 2, 1, 2)] = TopologyLabel(((1, (2, 2), 0),), removed_torus_rank=2)
    elif n == 3:
        table[(1, 2, 3)] = TopologyLabel(((1, (5,), 0),), removed_torus_rank=3)
        table[(1, 2, 1, 3)] = TopologyLabel(((1, (2, 3), 0),), removed_torus_rank=3)
    elif n == 4:
        table[(1, 2, 1, 3, 4)] = TopologyLabel(((1, (2, 4), 0), (2, (3, 3), 0)),
                                               removed_torus_rank=4)
    if n >= 4:
        table[tuple(range(1, n + 1))] = _basic_sequence_label(n)

    labels: list[TopologyLabel] = []
    candidates = [fams[r:] + fams[:r] for r in range(len(fams))]
    candidates += [list(reversed(c)) for c in candidates]
    for cand in candidates:
        key = _first_occurrence_relabel(cand)
        label = table.get(key)
        if label is not None and label not in labels:
            labels.append(label)
    return tuple(labels)


# --- reflection symmetry -----------------------------------------------------

def _symmetry_fixes(diagram: RodDiagram, sym: SymmetryDescriptor) -> bool:
    perm = sym.permutation
    if sorted(perm) != list(range(1, diagram.n + 1)):
        return False
    L = diagram.period
    by_start = {r.start: r for r in diagram.rods}
    for rod in diagram.rods:
        start = (2 * sym.center - rod.end) % L
        image = by_start.get(start)
        if image is None or image.length != rod.length:
            return False
        f = rod.family()
        g = image.family()
        if f is None or g is None:
            if rod.structure != image.structure:
                return False
        elif perm[f - 1] != g:
            return False
    return True


def detect_reflection_symmetry(diagram: RodDiagram) -> Optional[SymmetryDescriptor]:
    """Find a reflection center and family permutation fixing the diagram.

    Candidate centers are half-sums of rod boundaries (the only places a
    reflection can map the corner set to itself).  Exact rational arithmetic
    makes the search deterministic.  A diagram can admit several reflections;
    one with the identity family permutation is preferred (every u_i is then
    even about the center), ties broken by the smallest center.
    """
    L = diagram.period
    boundaries = sorted({r.start for r in diagram.rods})
    candidates: set[Fraction] = set()
    for b1 in boundaries:
        for b2 in boundaries:
            candidates.add(((b1 + b2) / 2) % L)
            candidates.add(((b1 + b2 + L) / 2) % L)

    by_start = {r.start: r for r in diagram.rods}
    found: list[SymmetryDescriptor] = []
    for zc in sorted(candidates):
        mapping: dict[int, int] = {}
        ok = True
        for rod in diagram.rods:
            start = (2 * zc - rod.end) % L
            image = by_start.get(start)
            if image is None or image.length != rod.length:
                ok = False
                break
            f, g = rod.family(), image.family()
            if f is None or g is None:
                if rod.structure != image.structure:
                    ok = False
                    break
                continue
            if mapping.setdefault(f, g) != g:
                ok = False
                break
        if not ok:
            continue
        perm = tuple(mapping.get(f, f) for f in range(1, diagram.n + 1))
        if sorted(perm) != list(range(1, diagram.n + 1)):
            continue
        sym = SymmetryDescriptor(zc, perm)
        if _symmetry_fixes(diagram, sym):
            found.append(sym)
    for sym in found:
        if sym.is_identity:
            return sym
    return found[0] if found else None


# --- builders ----------------------------------------------------------------

def diagram_from_families(n: int, period: RationalLike,
                          families: Sequence[int],
                          fractions: Optional[Sequence[RationalLike]] = None) -> RodDiagram:
    """Build a diagram from a family sequence and optional length fractions.

    Fractions are of the whole period and default to equal lengths.  The
    result is not validated; run validate() to collect violations.
    """
    L = _as_fraction(period)
    k = len(families)
    if fractions is None:
        fracs = [Fraction(1, k)] * k
    else:
        if len(fractions) != k:
            raise InputError("one fraction per rod is required")
        fracs = [_as_fraction(f) for f in fractions]
    rods = []
    pos = Fraction(0)
    for fam, frac in zip(families, fracs):
        end = pos + frac * L
        rods.append(Rod(pos, end, basis_structure(fam, n)))
        pos = end
    return RodDiagram(n, L, rods)


def equal_rod_diagram(n: int, period: RationalLike) -> RodDiagram:
    """The fundamental period e_1,...,e_n with equal rod lengths."""
    return diagram_from_families(n, period, list(range(1, n + 1)))


def full_axis_diagram(period: RationalLike) -> RodDiagram:
    """n=1 diagnostic: the whole axis carries a single family (flat space)."""
    L = _as_fraction(period)
    return RodDiagram(1, L, [Rod(0, L, basis_structure(1, 1))])
