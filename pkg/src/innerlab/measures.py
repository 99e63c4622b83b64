"""Finite positive singular measures on the unit circle.

A measure is described by point masses (atoms) together with self-similar
Cantor components.  A Cantor component of depth ``d`` is handled as the
standard truncation at generation ``d``: its mass is spread uniformly over
the 2^d surviving cells, which makes every interval/Poisson computation a
finite closed-form sum.  Grating operations (see :mod:`innerlab.roberts`)
produce scaled restrictions of such measures; restrictions of truncated
cells are carried around as explicit weighted arcs.

Angles are radians in [0, 2*pi).  Normalized Lebesgue measure m (unit total
mass) is used wherever a length enters an entropy sum.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

TAU = 2.0 * math.pi

# Probe endpoints are pushed this far away from atom angles so that interval
# computations never depend on whether a window endpoint charges the measure.
ENDPOINT_NUDGE = 1e-9


def wrap_angle(theta: float) -> float:
    """Reduce an angle to [0, 2*pi)."""
    t = math.fmod(theta, TAU)
    return t + TAU if t < 0.0 else t


@dataclass(frozen=True)
class Interval:
    """Half-open arc [start, start + length) on the circle."""

    start: float
    length: float

    def __post_init__(self):
        if not (0.0 < self.length <= TAU + 1e-12):
            raise ValueError(f"interval length {self.length} not in (0, 2*pi]")
        object.__setattr__(self, "start", wrap_angle(self.start))
        object.__setattr__(self, "length", min(self.length, TAU))

    @property
    def end(self) -> float:
        return self.start + self.length

    def contains(self, angle: float) -> bool:
        return (wrap_angle(angle) - self.start) % TAU < self.length

    def overlap_length(self, start: float, length: float) -> float:
        """Arc length of the intersection with [start, start+length)."""
        rel = (start - self.start) % TAU
        total = 0.0
        for lo in (rel, rel - TAU):
            hi = lo + length
            total += max(0.0, min(hi, self.length) - max(lo, 0.0))
        return total


def full_circle() -> Interval:
    return Interval(0.0, TAU)


@dataclass(frozen=True)
class CantorComponent:
    """Self-similar Cantor measure on a base arc, truncated at ``depth``.

    ``gap_ratio`` is the fraction of each cell removed from its middle, so
    the two children of a cell of length L have length L*(1-gap_ratio)/2.
    """

    base_arc: Interval
    gap_ratio: float
    depth: int
    mass: float

    def __post_init__(self):
        if not (0.0 < self.gap_ratio < 1.0):
            raise ValueError("gap_ratio must lie in (0, 1)")
        if self.depth < 1:
            raise ValueError("depth must be a positive integer")
        if self.mass < 0.0:
            raise ValueError("negative mass")

    @property
    def child_scale(self) -> float:
        return (1.0 - self.gap_ratio) / 2.0

    def cell_starts(self) -> np.ndarray:
        """Start offsets (relative to base_arc.start) of the depth-level cells."""
        s = self.child_scale
        length = self.base_arc.length
        starts = np.array([0.0])
        for level in range(self.depth):
            cell = length * s**level
            starts = np.concatenate([starts, starts + cell * (1.0 - s)])
        starts.sort()
        return starts

    def cells(self) -> np.ndarray:
        """(n_cells, 3) array of (start, length, mass) weighted arcs."""
        starts = (self.base_arc.start + self.cell_starts()) % TAU
        n = starts.size
        cell_len = self.base_arc.length * self.child_scale**self.depth
        out = np.empty((n, 3))
        out[:, 0] = starts
        out[:, 1] = cell_len
        out[:, 2] = self.mass / n
        return out

    def gap_list(self, include_base_complement: bool = True) -> "GapList":
        """Complementary arcs of the truncated carrier, with an entropy tail bound.

        The tail bound covers the gaps of every generation beyond ``depth``
        (normalized-length entropy of the untruncated construction).
        """
        gaps = []
        covered = 0.0
        length = self.base_arc.length
        s = self.child_scale
        if include_base_complement and length < TAU - 1e-12:
            gaps.append(Interval(self.base_arc.end % TAU, TAU - length))
            covered += TAU - length
        starts = np.array([0.0])
        for level in range(self.depth):
            cell = length * s**level
            gap_len = cell * self.gap_ratio
            for x in starts:
                gaps.append(Interval((self.base_arc.start + x + cell * s) % TAU, gap_len))
            covered += starts.size * gap_len
            starts = np.concatenate([starts, starts + cell * (1.0 - s)])
        tail = 0.0
        for level in range(self.depth, 10_000):
            cell = length * s**level
            gap_norm = cell * self.gap_ratio / TAU
            if gap_norm <= 0.0:
                break
            term = 2**level * gap_norm * math.log(1.0 / gap_norm)
            tail += term
            if term < 1e-17 * max(tail, 1.0):
                break
        return GapList(gaps=tuple(gaps), covered_total=covered, tail_bound=tail)


@dataclass(frozen=True)
class GapList:
    """Pairwise-disjoint complementary arcs of a closed set."""

    gaps: tuple[Interval, ...]
    covered_total: float
    tail_bound: float = 0.0

    def __post_init__(self):
        total = sum(g.length for g in self.gaps)
        if total > TAU + 1e-9:
            raise ValueError("gap lengths exceed the circle")


class _MassProfile:
    """Cumulative mass function F(x) = mu([0, x)) on [0, 2*pi].

    Atoms contribute steps (left-continuous convention: an atom at a is
    counted in F(x) iff a < x, matching half-open windows [s, s+t)); cells
    contribute a piecewise-linear part.
    """

    def __init__(self, atoms: np.ndarray, cells: np.ndarray):
        if atoms.size:
            order = np.argsort(atoms[:, 0])
            self.atom_angles = atoms[order, 0]
            self.atom_cum = np.concatenate([[0.0], np.cumsum(atoms[order, 1])])
        else:
            self.atom_angles = np.empty(0)
            self.atom_cum = np.zeros(1)
        seg_start, seg_end, seg_rate = [], [], []
        for start, length, w in cells:
            rate = w / length
            end = start + length
            if end <= TAU + 1e-15:
                seg_start.append(start)
                seg_end.append(min(end, TAU))
                seg_rate.append(rate)
            else:
                seg_start.append(start)
                seg_end.append(TAU)
                seg_rate.append(rate)
                seg_start.append(0.0)
                seg_end.append(end - TAU)
                seg_rate.append(rate)
        pos = np.concatenate([seg_start, seg_end, [0.0, TAU]])
        dr = np.concatenate([seg_rate, [-r for r in seg_rate], [0.0, 0.0]])
        order = np.argsort(pos, kind="stable")
        pos, dr = pos[order], dr[order]
        rate = np.cumsum(dr)
        self.knots = pos
        self.knot_vals = np.concatenate([[0.0], np.cumsum(rate[:-1] * np.diff(pos))])
        self.total = float(self.atom_cum[-1] + self.knot_vals[-1])

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lin = np.interp(x, self.knots, self.knot_vals)
        idx = np.searchsorted(self.atom_angles, x, side="left")
        return lin + self.atom_cum[idx]

    def window_mass(self, starts: np.ndarray, t: float) -> np.ndarray:
        """Masses of the half-open windows [s, s+t) (wrapping allowed)."""
        s = np.mod(np.asarray(starts, dtype=float), TAU)
        e = s + t
        base = self(np.minimum(e, TAU)) - self(s)
        # the wrapped tail [0, e - 2*pi) can never pass the window start;
        # clamping guards against one-ulp overlap when t is the full circle
        tail = np.clip(e - TAU, 0.0, s)
        extra = np.where(e > TAU, self(tail), 0.0)
        return base + extra


@dataclass(frozen=True)
class CircleMeasure:
    """Finite positive singular measure: atoms + Cantor components.

    ``extra_cells`` holds weighted uniform arcs produced by restricting a
    truncated Cantor component below its resolved depth; user-constructed
    measures normally leave it empty.
    """

    atoms: tuple[tuple[float, float], ...] = ()
    cantor_parts: tuple[CantorComponent, ...] = ()
    extra_cells: tuple[tuple[float, float, float], ...] = ()

    def __post_init__(self):
        atoms = tuple((wrap_angle(a), float(m)) for a, m in self.atoms)
        if any(m < 0.0 for _, m in atoms):
            raise ValueError("negative atom mass")
        angles = [a for a, _ in atoms]
        if len(set(angles)) != len(angles):
            raise ValueError("atoms must have distinct angles")
        if any(c[2] < 0.0 or c[1] <= 0.0 for c in self.extra_cells):
            raise ValueError("invalid extra cell")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "extra_cells", tuple(map(tuple, self.extra_cells)))

    @cached_property
    def cells(self) -> np.ndarray:
        """All weighted uniform arcs: expanded Cantor cells plus extras."""
        blocks = [np.empty((0, 3))]
        blocks += [part.cells() for part in self.cantor_parts]
        if self.extra_cells:
            blocks.append(np.asarray(self.extra_cells, dtype=float))
        return np.vstack(blocks)

    @cached_property
    def atom_array(self) -> np.ndarray:
        return np.asarray(self.atoms, dtype=float).reshape(-1, 2)

    @cached_property
    def profile(self) -> _MassProfile:
        return _MassProfile(self.atom_array, self.cells)

    def is_atomic(self) -> bool:
        return not self.cantor_parts and not self.extra_cells

    def scaled(self, factor: float) -> "CircleMeasure":
        if factor < 0.0:
            raise ValueError("negative scale factor")
        return CircleMeasure(
            atoms=tuple((a, m * factor) for a, m in self.atoms),
            cantor_parts=tuple(
                CantorComponent(p.base_arc, p.gap_ratio, p.depth, p.mass * factor)
                for p in self.cantor_parts
            ),
            extra_cells=tuple((s, l, m * factor) for s, l, m in self.extra_cells),
        )

    # -- serialization ---------------------------------------------------

    @classmethod
    def from_json(cls, text: str) -> "CircleMeasure":
        data = json.loads(text)
        atoms = tuple((float(a["angle"]), float(a["mass"])) for a in data.get("atoms", []))
        if any(m < 0 for _, m in atoms):
            raise ValueError("negative atom mass in measure file")
        parts = []
        for c in data.get("cantor", []):
            if float(c["mass"]) < 0:
                raise ValueError("negative cantor mass in measure file")
            parts.append(
                CantorComponent(
                    base_arc=Interval(float(c["arc_start"]), float(c["arc_length"])),
                    gap_ratio=float(c["gap_ratio"]),
                    depth=int(c.get("depth", 12)),
                    mass=float(c["mass"]),
                )
            )
        return cls(atoms=atoms, cantor_parts=tuple(parts))

    def to_json(self) -> str:
        return json.dumps(
            {
                "atoms": [{"angle": a, "mass": m} for a, m in self.atoms],
                "cantor": [
                    {
                        "arc_start": p.base_arc.start,
                        "arc_length": p.base_arc.length,
                        "gap_ratio": p.gap_ratio,
                        "depth": p.depth,
                        "mass": p.mass,
                    }
                    for p in self.cantor_parts
                ],
            },
            sort_keys=True,
        )


def delta(angle: float, mass: float = 1.0) -> CircleMeasure:
    return CircleMeasure(atoms=((angle, mass),))


def middle_thirds_cantor(
    mass: float = 1.0,
    base_arc: Interval | None = None,
    depth: int = 12,
) -> CircleMeasure:
    part = CantorComponent(
        base_arc=base_arc or full_circle(), gap_ratio=1.0 / 3.0, depth=depth, mass=mass
    )
    return CircleMeasure(cantor_parts=(part,))


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def total_mass(mu: CircleMeasure) -> float:
    m = sum(w for _, w in mu.atoms)
    m += sum(p.mass for p in mu.cantor_parts)
    m += sum(c[2] for c in mu.extra_cells)
    return m


def interval_mass(mu: CircleMeasure, i: Interval) -> float:
    """mu([start, start+length)); cell mass assigned proportionally to overlap."""
    return float(mu.profile.window_mass(np.array([i.start]), i.length)[0])


def _window_starts(mu: CircleMeasure, t: float, n_probe: int) -> np.ndarray:
    pts = [a + k * ENDPOINT_NUDGE for a, _ in mu.atoms for k in (0, -1)]
    pts += [a - t + k * ENDPOINT_NUDGE for a, _ in mu.atoms for k in (1, 2)]
    parts = [np.asarray(pts, dtype=float)]
    cells = mu.cells
    if cells.size:
        ends = cells[:, 0] + cells[:, 1]
        parts += [cells[:, 0], ends, cells[:, 0] - t, ends - t]
    if n_probe > 0:
        parts.append(np.linspace(0.0, TAU, n_probe, endpoint=False))
    return np.mod(np.concatenate(parts), TAU)


def modulus_of_continuity(mu: CircleMeasure, t: float, n_probe: int = 64) -> float:
    """Lower-bound estimate of sup over length-t windows of the window mass.

    Window starts include every atom angle and every materialized cell
    endpoint (with nudged variants), so the estimate is exact for atomic
    measures and for the uniform-cell truncation of Cantor components.
    """
    if not (0.0 < t <= TAU):
        raise ValueError("window length must lie in (0, 2*pi]")
    if n_probe < 1:
        raise ValueError("n_probe must be >= 1")
    starts = _window_starts(mu, t, n_probe)
    return float(np.max(mu.profile.window_mass(starts, t)))


def _poisson_kernel_primitive(t: np.ndarray, r: float) -> np.ndarray:
    """Continuous antiderivative of the Poisson kernel P_r.

    Integral of (1-r^2)/(1 - 2r cos s + r^2) ds from 0 to t, branch-continued
    over all of R so arcs of any length < 2*pi can be handled.
    """
    t = np.asarray(t, dtype=float)
    k = np.floor((t + math.pi) / TAU)
    t0 = t - TAU * k
    c = (1.0 + r) / (1.0 - r)
    val = 2.0 * np.arctan(c * np.tan(0.5 * t0))
    return val + TAU * k


def harmonic_measure_of_arcs(
    z: complex, starts: np.ndarray, lengths: np.ndarray
) -> np.ndarray:
    """Harmonic measures at z of the arcs [start, start+length), in [0, 1]."""
    r = abs(z)
    if r >= 1.0:
        raise ValueError("point must lie in the open unit disk")
    phi = math.atan2(z.imag, z.real)
    t1 = np.mod(starts - phi + math.pi, TAU) - math.pi
    t2 = t1 + lengths
    return (_poisson_kernel_primitive(t2, r) - _poisson_kernel_primitive(t1, r)) / TAU


def harmonic_measure_of_arc(z: complex, start: float, length: float) -> float:
    return float(harmonic_measure_of_arcs(z, np.array([start]), np.array([length]))[0])


def poisson_extension(mu: CircleMeasure, z: complex) -> float:
    """P_mu(z) = integral of (1-|z|^2)/|zeta - z|^2 d mu(zeta).

    Atoms in closed form; Cantor components via the exact harmonic measure
    of each depth-level cell.
    """
    z = complex(z)
    if abs(z) >= 1.0:
        raise ValueError("Poisson extension requires |z| < 1")
    one_minus = 1.0 - abs(z) ** 2
    total = 0.0
    atoms = mu.atom_array
    if atoms.size:
        zeta = np.exp(1j * atoms[:, 0])
        total += float(np.sum(atoms[:, 1] * one_minus / np.abs(zeta - z) ** 2))
    cells = mu.cells
    if cells.size:
        hm = harmonic_measure_of_arcs(z, cells[:, 0], cells[:, 1])
        total += float(np.sum(cells[:, 2] * hm * TAU / cells[:, 1]))
    return total


def herglotz_transform(mu: CircleMeasure, z: complex, order: int = 6) -> complex:
    """Integral of (zeta + z)/(zeta - z) d mu(zeta), |z| < 1.

    Atoms in closed form; cells by fixed-order Gauss-Legendre (cells are
    short, so a low order is already far below 1e-12).
    """
    z = complex(z)
    if abs(z) >= 1.0:
        raise ValueError("Herglotz transform requires |z| < 1")
    total = 0.0 + 0.0j
    atoms = mu.atom_array
    if atoms.size:
        zeta = np.exp(1j * atoms[:, 0])
        total += complex(np.sum(atoms[:, 1] * (zeta + z) / (zeta - z)))
    cells = mu.cells
    if cells.size:
        xg, wg = np.polynomial.legendre.leggauss(order)
        theta = cells[:, 0, None] + 0.5 * cells[:, 1, None] * (xg[None, :] + 1.0)
        zeta = np.exp(1j * theta)
        vals = (zeta + z) / (zeta - z)
        per_cell = 0.5 * vals @ wg
        total += complex(np.sum(cells[:, 2] * per_cell))
    return total


def herglotz_derivative(mu: CircleMeasure, z: complex, order: int = 6) -> complex:
    """d/dz of the Herglotz transform: integral of 2*zeta/(zeta - z)^2 d mu."""
    z = complex(z)
    if abs(z) >= 1.0:
        raise ValueError("Herglotz transform requires |z| < 1")
    total = 0.0 + 0.0j
    atoms = mu.atom_array
    if atoms.size:
        zeta = np.exp(1j * atoms[:, 0])
        total += complex(np.sum(atoms[:, 1] * 2.0 * zeta / (zeta - z) ** 2))
    cells = mu.cells
    if cells.size:
        xg, wg = np.polynomial.legendre.leggauss(order)
        theta = cells[:, 0, None] + 0.5 * cells[:, 1, None] * (xg[None, :] + 1.0)
        zeta = np.exp(1j * theta)
        vals = 2.0 * zeta / (zeta - z) ** 2
        per_cell = 0.5 * vals @ wg
        total += complex(np.sum(cells[:, 2] * per_cell))
    return total


def bc_entropy(gaps: GapList) -> float:
    """Entropy sum |I| log(1/|I|) over the gaps, lengths normalized to m(S^1)=1.

    Includes the recorded tail bound of a truncated self-similar carrier.
    Returns math.inf when the tail bound is infinite.
    """
    if math.isinf(gaps.tail_bound):
        return math.inf
    total = gaps.tail_bound
    for g in gaps.gaps:
        ell = g.length / TAU
        if ell > 0.0:
            total += ell * math.log(1.0 / ell)
    return total


def is_beurling_carleson(
    gaps: GapList, tail_bound: float = 0.0, cap: float = 1e6
) -> tuple[bool, float]:
    """True iff truncated entropy + tail bound is finite below ``cap``."""
    if tail_bound < 0.0:
        raise ValueError("tail_bound must be nonnegative")
    e = bc_entropy(gaps) + tail_bound
    return (bool(e < cap and not math.isinf(e)), e)


def restrict_scaled(mu: CircleMeasure, i: Interval, factor: float = 1.0) -> CircleMeasure:
    """factor * (mu restricted to the half-open arc i), cells split exactly."""
    atoms = tuple((a, w * factor) for a, w in mu.atoms if i.contains(a))
    cells = []
    for start, length, w in mu.cells:
        ov = i.overlap_length(start, length)
        if ov <= 0.0:
            continue
        if ov >= length * (1.0 - 1e-15):
            cells.append((start, length, w * factor))
        else:
            # clip the cell against the arc in the arc's frame
            rel = (start - i.start) % TAU
            for lo in (rel, rel - TAU):
                a = max(lo, 0.0)
                b = min(lo + length, i.length)
                if b > a:
                    cells.append(
                        ((i.start + a) % TAU, b - a, w * factor * (b - a) / length)
                    )
    return CircleMeasure(atoms=atoms, extra_cells=tuple(cells))


def merge(measures: list[CircleMeasure]) -> CircleMeasure:
    """Sum of measures (atoms at coinciding angles merged)."""
    masses: dict[float, float] = {}
    for mu in measures:
        for a, w in mu.atoms:
            masses[a] = masses.get(a, 0.0) + w
    cantor = tuple(p for mu in measures for p in mu.cantor_parts)
    cells = tuple(c for mu in measures for c in mu.extra_cells)
    return CircleMeasure(
        atoms=tuple(sorted(masses.items())), cantor_parts=cantor, extra_cells=cells
    )
