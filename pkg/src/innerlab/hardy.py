"""Finite Blaschke products, singular inner and outer functions, and the
gap functional of a Nevanlinna-class function.

A finite Blaschke product is stored as its zero multiset plus a unimodular
rotation and is evaluated through the polynomial pair (P, Q): with
A(z) = prod (z - a_i), the product is rotation * z^0 * P/Q where P = A and
Q(z) = prod (1 - conj(a_i) z) is the conjugate-reversed polynomial of A.
Derivatives and critical points go through W = P'Q - PQ', whose roots in
the open disk are the critical points.

The gap of f over an arc I is the boundary log-integral minus the radial
limit of the circle log-integrals; for a quotient of singular inner
functions it recovers the singular measure of I.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad

from .measures import (
    TAU,
    CircleMeasure,
    Interval,
    herglotz_derivative,
    herglotz_transform,
    poisson_extension,
    total_mass,
    wrap_angle,
)

_TINY = 1e-300


def _conj_reverse(coeffs: np.ndarray) -> np.ndarray:
    """Coefficients of z^n * conj(p(1/conj(z))) for a degree-n polynomial."""
    return np.conj(coeffs[::-1])


@dataclass(frozen=True)
class BlaschkeProduct:
    """Finite Blaschke product: zero multiset in the open disk + rotation."""

    zeros: tuple[tuple[complex, int], ...] = ()
    rotation: complex = 1.0 + 0.0j

    def __post_init__(self):
        zs = tuple((complex(a), int(m)) for a, m in self.zeros)
        if any(abs(a) >= 1.0 for a, _ in zs):
            raise ValueError("Blaschke zeros must lie in the open unit disk")
        if any(m < 1 for _, m in zs):
            raise ValueError("zero multiplicities must be >= 1")
        rot = complex(self.rotation)
        if abs(abs(rot) - 1.0) > 1e-12:
            raise ValueError("rotation must be unimodular")
        object.__setattr__(self, "zeros", zs)
        object.__setattr__(self, "rotation", rot / abs(rot))

    @property
    def degree(self) -> int:
        return sum(m for _, m in self.zeros)

    @cached_property
    def zero_list(self) -> np.ndarray:
        """Zeros repeated according to multiplicity."""
        out = [a for a, m in self.zeros for _ in range(m)]
        return np.asarray(out, dtype=complex)

    @cached_property
    def _pq(self) -> tuple[np.ndarray, np.ndarray]:
        if self.degree == 0:
            return np.array([1.0 + 0j]), np.array([1.0 + 0j])
        p = np.atleast_1d(np.poly(self.zero_list)).astype(complex)
        return p, _conj_reverse(p)

    @cached_property
    def _w(self) -> np.ndarray:
        """Numerator of the derivative: W = P'Q - PQ'."""
        p, q = self._pq
        if self.degree == 0:
            return np.array([0.0 + 0j])
        return np.polysub(np.polymul(np.polyder(p), q), np.polymul(p, np.polyder(q)))

    def eval(self, z):
        """Value at z (scalar or array), |z| <= 1."""
        z = np.asarray(z, dtype=complex)
        p, q = self._pq
        return self.rotation * np.polyval(p, z) / np.polyval(q, z)

    def derivative(self, z):
        """Exact analytic derivative at z via W/Q^2."""
        z = np.asarray(z, dtype=complex)
        _, q = self._pq
        qv = np.polyval(q, z)
        return self.rotation * np.polyval(self._w, z) / (qv * qv)

    def has_zero_at_origin(self) -> bool:
        return any(abs(a) < 1e-14 for a, _ in self.zeros)

    # -- serialization ----------------------------------------------------

    @classmethod
    def from_json(cls, text: str) -> "BlaschkeProduct":
        import json

        data = json.loads(text)
        zeros = tuple(
            (complex(float(e["re"]), float(e["im"])), int(e.get("mult", 1)))
            for e in data.get("zeros", [])
        )
        rot = np.exp(1j * float(data.get("rotation_angle", 0.0)))
        return cls(zeros=zeros, rotation=rot)

    def to_json(self) -> str:
        import json

        return json.dumps(
            {
                "rotation_angle": float(np.angle(self.rotation)),
                "zeros": [
                    {"re": a.real, "im": a.imag, "mult": m} for a, m in self.zeros
                ],
            },
            sort_keys=True,
        )


def blaschke_from_points(points: Sequence[complex], rotation: complex = 1.0) -> BlaschkeProduct:
    """Build a product from a plain point list, merging coincident points."""
    merged: list[tuple[complex, int]] = []
    for p in points:
        for i, (a, m) in enumerate(merged):
            if abs(a - p) < 1e-13:
                merged[i] = (a, m + 1)
                break
        else:
            merged.append((complex(p), 1))
    return BlaschkeProduct(zeros=tuple(merged), rotation=rotation)


class RootFindingError(RuntimeError):
    """Companion-matrix root finding failed to produce clean critical points."""


def critical_points(
    b: BlaschkeProduct, cluster_tol: float = 5e-7, residual_tol: float = 1e-10
) -> list[tuple[complex, int]]:
    """Zeros of b' in the open disk, with multiplicities.

    Roots of the numerator polynomial W of b', filtered to the open disk and
    Newton-polished; nearby roots are merged into a multiple point.
    """
    if b.degree < 1:
        raise ValueError("critical_points requires degree >= 1")
    if b.degree == 1:
        return []
    w = np.array(b._w, dtype=complex)
    scale = np.max(np.abs(w))
    w = np.trim_zeros(np.where(np.abs(w) > 1e-14 * scale, w, 0.0), "f")
    roots = np.roots(w)
    inside = roots[np.abs(roots) < 1.0 - 1e-12]
    if inside.size != b.degree - 1:
        raise RootFindingError(
            f"expected {b.degree - 1} interior roots, found {inside.size}; "
            f"numerator coefficients {w}"
        )
    # merge clusters (multiple critical points split by rounding)
    pts = sorted(inside, key=lambda z: (z.real, z.imag))
    clusters: list[list[complex]] = []
    for z in pts:
        placed = False
        for c in clusters:
            if abs(z - np.mean(c)) < cluster_tol:
                c.append(z)
                placed = True
                break
        if not placed:
            clusters.append([z])
    wd = np.polyder(w)
    out = []
    for c in clusters:
        z0 = complex(np.mean(c))
        mult = len(c)
        if mult == 1:
            for _ in range(50):
                f, df = np.polyval(w, z0), np.polyval(wd, z0)
                if abs(df) == 0.0:
                    break
                step = f / df
                z0 -= step
                if abs(step) < 1e-15:
                    break
        if abs(b.derivative(z0)) > residual_tol * max(1.0, float(np.max(np.abs(w)))):
            raise RootFindingError(
                f"critical point {z0} has derivative residual above tolerance"
            )
        out.append((z0, mult))
    return sorted(out, key=lambda t: (t[0].real, t[0].imag))


def boundary_log_derivative(b: BlaschkeProduct, theta):
    """log |b'(e^{i theta})| for b with a zero at the origin.

    Uses the exact Poisson-sum boundary formula: on the circle,
    |b'(x)| = sum over zeros of P_a(x); the zero at the origin contributes 1.
    """
    if not b.has_zero_at_origin():
        raise ValueError("boundary formula requires a zero at the origin")
    theta = np.asarray(theta, dtype=float)
    x = np.exp(1j * theta)
    s = np.zeros_like(theta, dtype=float)
    for a, m in b.zeros:
        s += m * (1.0 - abs(a) ** 2) / np.abs(x - a) ** 2
    return np.log(s)


def frostman_shift(f_eval: Callable | BlaschkeProduct, xi: complex) -> Callable:
    """z -> (f(z) - xi)/(1 - conj(xi) f(z)) as an evaluator."""
    if abs(xi) >= 1.0:
        raise ValueError("Frostman shift parameter must lie in the open disk")
    fn = f_eval.eval if isinstance(f_eval, BlaschkeProduct) else f_eval

    def shifted(z):
        w = fn(z)
        return (w - xi) / (1.0 - np.conj(xi) * w)

    return shifted


def mobius_compose(b: BlaschkeProduct, xi: complex) -> BlaschkeProduct:
    """The Frostman shift T_xi o b, reconstructed as a finite Blaschke product.

    Its zeros are the d preimages b^{-1}(xi); the rotation is matched by value.
    """
    if abs(xi) >= 1.0:
        raise ValueError("shift parameter must lie in the open disk")
    p, q = b._pq
    num = np.polysub(b.rotation * p, xi * np.concatenate([[0.0], q]) if len(q) < len(p) else xi * q)
    # pad q to p's length for the subtraction
    qq = np.concatenate([np.zeros(max(0, len(p) - len(q)), dtype=complex), q])
    num = np.polysub(b.rotation * p, xi * qq)
    roots = np.roots(np.trim_zeros(num, "f"))
    if np.any(np.abs(roots) >= 1.0):
        raise RootFindingError("preimage of the shift target escaped the disk")
    composed = blaschke_from_points(roots)
    target = (b.eval(0.0) - xi) / (1.0 - np.conj(xi) * b.eval(0.0))
    gamma = target / composed.eval(0.0)
    return BlaschkeProduct(zeros=composed.zeros, rotation=gamma / abs(gamma))


@dataclass(frozen=True)
class SingularInner:
    """Singular inner function of a positive singular measure."""

    measure: CircleMeasure

    def eval(self, z: complex) -> complex:
        z = complex(z)
        if abs(z) >= 1.0:
            raise ValueError("singular inner functions are evaluated for |z| < 1")
        return np.exp(-herglotz_transform(self.measure, z))

    def log_modulus(self, z: complex) -> float:
        """log |S(z)| = -P_mu(z)."""
        return -poisson_extension(self.measure, complex(z))

    def derivative(self, z: complex) -> complex:
        z = complex(z)
        return -self.eval(z) * herglotz_derivative(self.measure, z)


@dataclass(frozen=True)
class OuterFromBoundary:
    """Outer function from log-modulus samples on a uniform circle grid."""

    log_modulus: np.ndarray

    def __post_init__(self):
        lm = np.asarray(self.log_modulus, dtype=float)
        if lm.ndim != 1 or lm.size < 4:
            raise ValueError("log_modulus must be a 1-D grid of at least 4 samples")
        if not np.all(np.isfinite(lm)):
            raise ValueError("log_modulus samples must be finite")
        object.__setattr__(self, "log_modulus", lm)

    @classmethod
    def from_function(cls, fn: Callable, m: int) -> "OuterFromBoundary":
        theta = np.arange(m) * TAU / m
        return cls(log_modulus=np.asarray(fn(theta), dtype=float))

    def eval(self, z: complex) -> complex:
        """exp of the Herglotz integral of the samples (trapezoid = grid mean)."""
        z = complex(z)
        if abs(z) >= 1.0:
            raise ValueError("outer functions are evaluated for |z| < 1")
        m = self.log_modulus.size
        zeta = np.exp(1j * np.arange(m) * TAU / m)
        kernel = (zeta + z) / (zeta - z)
        return np.exp(complex(np.mean(kernel * self.log_modulus)))


def outer_eval(o: OuterFromBoundary, z: complex) -> complex:
    return o.eval(z)


def eval_singular(s: SingularInner, z: complex) -> complex:
    return s.eval(z)


# ---------------------------------------------------------------------------
# circle log-integrals and the gap functional
# ---------------------------------------------------------------------------


def _log_abs(f_eval: Callable, z, clip_count: list | None = None):
    w = np.abs(np.asarray(f_eval(z)))
    tiny = w < _TINY
    if clip_count is not None and np.any(tiny):
        clip_count.append(int(np.sum(tiny)))
    return np.log(np.maximum(w, _TINY))


def radial_log_integral(
    f_eval: Callable,
    r: float,
    grid: int = 2048,
    positive_part: bool = False,
    breakpoints: Sequence[float] = (),
    with_flags: bool = False,
):
    """(1/2pi) * integral over |z|=r of log|f| (or log+ |f|) d theta.

    Uniform trapezoid (spectral for smooth integrands); when breakpoints are
    supplied, adaptive quadrature split at them is used instead.
    """
    if not (0.0 < r < 1.0):
        raise ValueError("radius must lie in (0, 1)")
    clip: list = []
    if breakpoints:
        fn = lambda t: _apply_pos(
            _log_abs(f_eval, r * np.exp(1j * np.atleast_1d(t)), clip), positive_part
        )[0]
        pts = sorted(wrap_angle(p) for p in breakpoints)
        val = 0.0
        edges = [0.0] + pts + [TAU]
        for a, b in zip(edges[:-1], edges[1:]):
            if b - a > 1e-14:
                val += quad(fn, a, b, limit=200)[0]
        mean = val / TAU
    else:
        theta = np.arange(grid) * TAU / grid
        vals = _apply_pos(_log_abs(f_eval, r * np.exp(1j * theta), clip), positive_part)
        mean = float(np.mean(vals))
    if with_flags:
        return mean, sum(clip)
    return mean


def _apply_pos(vals: np.ndarray, positive_part: bool) -> np.ndarray:
    return np.maximum(vals, 0.0) if positive_part else vals


def _neville_to_zero(xs: np.ndarray, ys: np.ndarray, max_order: int = 3):
    """Polynomial extrapolation of y(x) to x=0 (Richardson on a radii ladder).

    Returns (estimate, previous-order estimate) for a convergence check.
    """
    n = len(xs)
    order = min(max_order, n - 1)
    t = [list(ys)]
    for j in range(1, order + 1):
        row = []
        for i in range(n - j):
            num = xs[i] * t[j - 1][i + 1] - xs[i + j] * t[j - 1][i]
            row.append(num / (xs[i] - xs[i + j]))
        t.append(row)
    return t[order][-1], (t[order - 1][-1] if order >= 1 else ys[-1])


@dataclass(frozen=True)
class GapEstimate:
    """Result of the boundary-vs-radial-limit comparison over an arc."""

    interval: Interval
    boundary_term: float
    radial_limit_term: float
    gap: float
    radii_used: tuple[float, ...]
    sequence: tuple[float, ...]
    converged: bool
    endpoint_nudged: bool = False


class GapConvergenceError(RuntimeError):
    pass


def gap_over_interval(
    f_eval: Callable,
    i: Interval,
    radii: Sequence[float],
    grid: int = 512,
    boundary_log_modulus: Callable | float | None = None,
    singular_angles: Sequence[float] = (),
    conv_tol: float = 5e-3,
    strict: bool = False,
) -> GapEstimate:
    """Estimate the singular mass of the arc i carried by f.

    boundary term: (1/2pi) * integral over I of log|f| at r = 1, taken from
    the supplied boundary modulus (None means inner: log|f| = 0 a.e.).
    radial term: Richardson-extrapolated limit of the integrals over rI.
    """
    radii = list(radii)
    if any(b <= a for a, b in zip(radii, radii[1:])) or radii[-1] < 0.999:
        raise ValueError("radii must increase strictly and reach at least 0.999")
    start, length = i.start, i.length
    nudged = False
    for a in singular_angles:
        if abs((start - a + math.pi) % TAU - math.pi) < 1e-9:
            start += 1e-9
            nudged = True
        if abs((start + length - a + math.pi) % TAU - math.pi) < 1e-9:
            length += 1e-9
            nudged = True
    # boundary term
    if boundary_log_modulus is None:
        boundary = 0.0
    elif callable(boundary_log_modulus):
        pts = sorted(
            (wrap_angle(p) - start) % TAU
            for p in singular_angles
            if 1e-12 < (wrap_angle(p) - start) % TAU < length - 1e-12
        )
        fn = lambda t: float(np.atleast_1d(boundary_log_modulus(start + t))[0])
        val, edges = 0.0, [0.0] + pts + [length]
        for a, b in zip(edges[:-1], edges[1:]):
            if b - a > 1e-14:
                val += quad(fn, a, b, limit=200)[0]
        boundary = val / TAU
    else:
        boundary = float(boundary_log_modulus)
    # radial sequence
    seq = []
    for r in radii:
        pts = sorted(
            (wrap_angle(p) - start) % TAU
            for p in singular_angles
            if 1e-12 < (wrap_angle(p) - start) % TAU < length - 1e-12
        )
        fn = lambda t: float(_log_abs(f_eval, r * np.exp(1j * (start + np.atleast_1d(t))))[0])
        val, edges = 0.0, [0.0] + pts + [length]
        for a, b in zip(edges[:-1], edges[1:]):
            if b - a > 1e-14:
                val += quad(fn, a, b, limit=200)[0]
        seq.append(val / TAU)
    xs = 1.0 - np.asarray(radii, dtype=float)
    est, prev = _neville_to_zero(xs, np.asarray(seq))
    converged = abs(est - prev) <= conv_tol * max(1.0, abs(est))
    if strict and not converged:
        raise GapConvergenceError(
            f"radial limit did not settle: last two extrapolants {prev}, {est}"
        )
    return GapEstimate(
        interval=Interval(start, min(length, TAU)),
        boundary_term=boundary,
        radial_limit_term=float(est),
        gap=float(boundary - est),
        radii_used=tuple(radii),
        sequence=tuple(seq),
        converged=converged,
        endpoint_nudged=nudged,
    )


def geometric_radii(k_min: int = 3, k_max: int = 12) -> list[float]:
    """The ladder 1 - 2^-k used for radial limits."""
    return [1.0 - 2.0**-k for k in range(k_min, k_max + 1)]


# ---------------------------------------------------------------------------
# Blaschke approximation of an atomic singular inner function
# ---------------------------------------------------------------------------


def blaschke_approximation_of_singular(mu: CircleMeasure, n: int) -> BlaschkeProduct:
    """Degree-n product converging on compacts to the singular inner function.

    Each atom (theta, m) receives a block of zeros at radius 1 - m/n_block
    in the atom's direction; blocks are sized proportionally to mass.
    """
    if not mu.is_atomic():
        raise ValueError("approximation is defined for purely atomic measures")
    if n < 1:
        raise ValueError("n must be >= 1")
    atoms = [(a, m) for a, m in mu.atoms if m > 0]
    if not atoms:
        return BlaschkeProduct()
    m_tot = sum(m for _, m in atoms)
    counts = [max(1, int(n * m / m_tot)) for _, m in atoms]
    while sum(counts) > n and max(counts) > 1:
        counts[int(np.argmax(counts))] -= 1
    rema = sorted(
        range(len(atoms)),
        key=lambda k: n * atoms[k][1] / m_tot - counts[k],
        reverse=True,
    )
    k = 0
    while sum(counts) < n:
        counts[rema[k % len(atoms)]] += 1
        k += 1
    zeros = []
    rot = 1.0 + 0.0j
    for (theta, m), cnt in zip(atoms, counts):
        rho = min(max(1.0 - m / cnt, 0.05), 1.0 - 1e-9)
        a = rho * np.exp(1j * theta)
        zeros.append((a, cnt))
        rot *= (-rho / a) ** cnt
    return BlaschkeProduct(zeros=tuple(zeros), rotation=rot / abs(rot))


def approximation_deviation(
    mu: CircleMeasure, b: BlaschkeProduct, n_r: int = 6, n_t: int = 48
) -> float:
    """sup |b - S_mu| over a polar sample of the disk |z| <= 1/2."""
    s = SingularInner(mu)
    worst = abs(b.eval(0.0) - s.eval(0.0))
    for r in np.linspace(0.1, 0.5, n_r):
        for t in np.arange(n_t) * TAU / n_t:
            z = r * np.exp(1j * t)
            worst = max(worst, abs(complex(b.eval(z)) - s.eval(z)))
    return float(worst)
