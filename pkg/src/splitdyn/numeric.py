"""Floating-point complex dynamics with deterministic seeding.

Periodic points with multipliers come from companion-matrix roots of the
exact fixed-point form plus Newton polish; invariant measures are sampled by
uniformly chosen backward orbits; curve pullback measures solve fibers
numerically; discrepancy compares empirical averages over a fixed
versioned dictionary of test functions; series linearization at repelling
fixed points solves the conjugacy functional equation order by order.
All charts live on the sphere: any point with modulus above one is stored
through its reciprocal.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import config
from .curves import BiCurve
from .errors import (
    NonRepellingError,
    PreconditionViolatedError,
    SplitdynError,
)
from .heights import RationalMap
from .poly import Poly

logger = logging.getLogger(__name__)


def _as_map(f: Union[RationalMap, Poly]) -> RationalMap:
    return f if isinstance(f, RationalMap) else RationalMap(f)


@dataclass(frozen=True)
class ComplexPoint:
    """A point of the sphere in one of two charts.

    inverted=False stores z itself (|z| <= 1 preferred); inverted=True stores
    w = 1/z, so infinity is (0, 0, inverted=True).  Coordinates stay finite.
    """

    re: float
    im: float
    inverted: bool = False

    @classmethod
    def from_complex(cls, z: complex) -> "ComplexPoint":
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            return cls(0.0, 0.0, True)
        if abs(z) > 1.0:
            w = 1.0 / z
            return cls(w.real, w.imag, True)
        return cls(z.real, z.imag, False)

    @classmethod
    def infinity(cls) -> "ComplexPoint":
        return cls(0.0, 0.0, True)

    @property
    def coordinate(self) -> complex:
        return complex(self.re, self.im)

    @property
    def is_infinity(self) -> bool:
        return self.inverted and self.re == 0.0 and self.im == 0.0

    def to_complex(self) -> complex:
        """Standard-chart value; infinity maps to complex(inf, 0)."""
        z = self.coordinate
        if not self.inverted:
            return z
        if z == 0:
            return complex(math.inf, 0.0)
        return 1.0 / z

    def sphere_coords(self) -> tuple[float, float, float]:
        """Stereographic embedding into the unit sphere, chart-stable."""
        z = self.coordinate
        n2 = z.real * z.real + z.imag * z.imag
        if not self.inverted:
            s = 1.0 + n2
            return (2.0 * z.real / s, 2.0 * z.imag / s, (n2 - 1.0) / s)
        # actual point is 1/z; formulas in terms of w = z avoid overflow
        s = 1.0 + n2
        return (2.0 * z.real / s, -2.0 * z.imag / s, (1.0 - n2) / s)

    def spherical_distance(self, other: "ComplexPoint") -> float:
        a = self.sphere_coords()
        b = other.sphere_coords()
        return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


class _ChartMap:
    """Chart-aware float evaluation of a rational map from its integer lift."""

    def __init__(self, f: RationalMap):
        a0, a1 = f.lift
        self.direct0 = np.array(a0, dtype=float)  # F0(z, 1): ascending in z
        self.direct1 = np.array(a1, dtype=float)
        self.reversed0 = self.direct0[::-1].copy()  # F0(1, w): ascending in w
        self.reversed1 = self.direct1[::-1].copy()
        self.degree = f.degree

    @staticmethod
    def _horner(coeffs: np.ndarray, z: complex) -> complex:
        acc = 0j
        for c in coeffs[::-1]:
            acc = acc * z + c
        return acc

    def pair(self, point: ComplexPoint) -> tuple[complex, complex]:
        if point.inverted:
            p0, p1 = self.reversed0, self.reversed1
        else:
            p0, p1 = self.direct0, self.direct1
        z = point.coordinate
        return self._horner(p0, z), self._horner(p1, z)

    def apply(self, point: ComplexPoint) -> ComplexPoint:
        n, d = self.pair(point)
        if abs(n) >= abs(d):
            if n == 0:
                raise SplitdynError("map evaluation hit an indeterminate point")
            w = d / n
            return ComplexPoint(w.real, w.imag, True)
        z = n / d
        return ComplexPoint(z.real, z.imag, False)

    def step_derivative(self, point: ComplexPoint, next_point: ComplexPoint) -> complex:
        """Derivative of (chart-out . f . chart-in^-1) at the point's coordinate."""
        if point.inverted:
            p0, p1 = self.reversed0, self.reversed1
        else:
            p0, p1 = self.direct0, self.direct1
        if next_point.inverted:
            num, den = p1, p0
        else:
            num, den = p0, p1
        z = point.coordinate
        n = self._horner(num, z)
        d = self._horner(den, z)
        n_prime = self._horner(np.arange(1, len(num)) * num[1:], z) if len(num) > 1 else 0j
        d_prime = self._horner(np.arange(1, len(den)) * den[1:], z) if len(den) > 1 else 0j
        return (n_prime * d - n * d_prime) / (d * d)


@dataclass(frozen=True)
class PeriodicPointData:
    """One point of an exact-period-n cycle with the cycle multiplier."""

    point: ComplexPoint
    period: int
    multiplier: complex
    repelling: bool


def periodic_points(
    f: Union[RationalMap, Poly], n: int, tol: float = 1e-9
) -> list[PeriodicPointData]:
    """All points of exact period n with multipliers along their cycles.

    Roots of the degree d^n + 1 fixed-point form of the n-th iterate come
    from companion-matrix eigenvalues with a Newton polish; points fixed by
    a proper sub-iterate are filtered out; multipliers use the chain rule in
    spherical charts.
    """
    f = _as_map(f)
    if n < 1:
        raise PreconditionViolatedError("period must be >= 1")
    fn = f.iterate_map(n)
    a0, a1 = fn.lift
    d_n = fn.degree
    # fixed-point binary form: F0(X) X1 - F1(X) X0, degree d^n + 1
    coeffs = [0] * (d_n + 2)
    for i, c in enumerate(a0):
        coeffs[i] += c
    for i, c in enumerate(a1):
        coeffs[i + 1] -= c
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    finite_roots = _exact_poly_roots(coeffs, tol)
    points = [ComplexPoint.from_complex(z) for z in finite_roots]
    if len(coeffs) - 1 < d_n + 1:  # degree drop: the form vanishes at infinity
        points.append(ComplexPoint.infinity())
    chart = _ChartMap(f)
    match_tol = max(tol * 100, 1e-7)
    # keep exact period n: drop points fixed by a proper divisor iterate
    exact = []
    for pt in points:
        if _exact_period(chart, pt, n, match_tol) == n:
            exact.append(pt)
    # group into cycles and attach multipliers
    out: list[PeriodicPointData] = []
    used = [False] * len(exact)
    for idx, pt in enumerate(exact):
        if used[idx]:
            continue
        cycle = [pt]
        used[idx] = True
        current = pt
        for _ in range(n - 1):
            current = chart.apply(current)
            j = _closest_index(exact, current, match_tol)
            if j is not None and not used[j]:
                used[j] = True
                cycle.append(exact[j])
            else:
                cycle.append(current)
        multiplier = 1.0 + 0j
        for k, cpt in enumerate(cycle):
            nxt = cycle[(k + 1) % len(cycle)]
            multiplier *= chart.step_derivative(cpt, nxt)
        repelling = abs(multiplier) > 1.0 + tol
        for cpt in cycle:
            out.append(
                PeriodicPointData(
                    point=cpt, period=n, multiplier=multiplier, repelling=repelling
                )
            )
    return out


def _exact_poly_roots(coeffs: Sequence[int], tol: float) -> list[complex]:
    """Roots of an integer polynomial: companion eigenvalues, Newton polish."""
    if len(coeffs) <= 1:
        return []
    arr = np.array(coeffs[::-1], dtype=float)
    if len(coeffs) - 1 > 60:
        logger.warning(
            "root finding at degree %d may be ill-conditioned", len(coeffs) - 1
        )
    roots = np.roots(arr)
    cs = [complex(c) for c in coeffs]
    der = [i * c for i, c in enumerate(cs)][1:]
    polished = []
    for r in roots:
        z = complex(r)
        for _ in range(12):
            pv = _complex_horner(cs, z)
            dv = _complex_horner(der, z)
            if dv == 0:
                break
            step = pv / dv
            z -= step
            if abs(step) < tol * max(1.0, abs(z)):
                break
        polished.append(z)
    return polished


def _complex_horner(coeffs: Sequence[complex], z: complex) -> complex:
    acc = 0j
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def _exact_period(chart: _ChartMap, pt: ComplexPoint, n: int, tol: float) -> int:
    current = pt
    for k in range(1, n + 1):
        current = chart.apply(current)
        if current.spherical_distance(pt) < tol:
            return k
    return n  # treat as full period if nothing smaller matched


def _closest_index(points, target: ComplexPoint, tol: float) -> Optional[int]:
    best, best_dist = None, tol
    for i, p in enumerate(points):
        dist = p.spherical_distance(target)
        if dist < best_dist:
            best, best_dist = i, dist
    return best


class EmpiricalMeasure:
    """A weighted point cloud approximating an invariant or pullback measure.

    Points are complex numbers (shape (N,) clouds on the line, (N, 2) clouds
    on a curve inside the plane squared); weights are nonnegative and sum to
    one within 1e-12; the seed makes the cloud reproducible bit for bit.
    """

    def __init__(self, points: np.ndarray, weights: np.ndarray, seed: Optional[int]):
        points = np.asarray(points, dtype=complex)
        weights = np.asarray(weights, dtype=float)
        if points.shape[0] == 0:
            raise PreconditionViolatedError("empty measure")
        if weights.shape[0] != points.shape[0]:
            raise PreconditionViolatedError("weights do not match points")
        if np.any(weights < 0):
            raise PreconditionViolatedError("negative weight")
        total = float(weights.sum())
        if total <= 0:
            raise PreconditionViolatedError("zero total mass")
        self.points = points
        self.weights = weights / total
        self.seed = seed

    @property
    def is_planar_pair(self) -> bool:
        return self.points.ndim == 2

    def pushforward(self, func: Callable[[complex], complex]) -> "EmpiricalMeasure":
        if self.is_planar_pair:
            raise SplitdynError("pushforward is defined for one-coordinate clouds")
        mapped = np.array([func(z) for z in self.points], dtype=complex)
        return EmpiricalMeasure(mapped, self.weights.copy(), self.seed)


def sample_invariant_measure(
    f: Union[RationalMap, Poly],
    n_samples: int = config.DEFAULT_SAMPLES,
    burn_in: int = config.DEFAULT_BURN_IN,
    seed: int = config.DEFAULT_SEED,
) -> EmpiricalMeasure:
    """Backward-orbit sampler: repeatedly jump to a uniformly chosen preimage.

    Pulling back by the map multiplies mass by the degree on injectivity
    pieces, so the uniform preimage walk equidistributes toward the measure
    of maximal entropy; burn-in discards the transient.
    """
    f = _as_map(f)
    if n_samples < 1:
        raise PreconditionViolatedError("need at least one sample")
    rng = np.random.default_rng(seed)
    a0 = np.array(f.lift[0], dtype=float)
    a1 = np.array(f.lift[1], dtype=float)
    d = f.degree
    z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
    state = ComplexPoint.from_complex(z)
    samples = np.empty(n_samples, dtype=complex)
    total = burn_in + n_samples
    for step in range(total):
        state = _backward_step(a0, a1, d, state, rng)
        if step >= burn_in:
            samples[step - burn_in] = state.to_complex()
    return EmpiricalMeasure(samples, np.full(n_samples, 1.0 / n_samples), seed)


def _backward_step(a0, a1, d, point: ComplexPoint, rng) -> ComplexPoint:
    """One uniformly chosen preimage of the point (counting multiplicity)."""
    if point.inverted:
        z0, z1 = 1.0 + 0j, point.coordinate
    else:
        z0, z1 = point.coordinate, 1.0 + 0j
    for attempt in range(6):
        coeffs = a0 * z1 - a1 * z0  # ascending in w: F0(w,1) z1 - F1(w,1) z0
        trimmed = np.trim_zeros(coeffs, "b")
        expected_finite = len(trimmed) - 1  # the rest of the d preimages sit at infinity
        finite = (
            np.roots(trimmed[::-1]) if len(trimmed) > 1 else np.array([], dtype=complex)
        )
        finite = finite[np.isfinite(finite)]
        if len(finite) == expected_finite:
            pick = int(rng.integers(0, d))
            if pick < expected_finite:
                return ComplexPoint.from_complex(complex(finite[pick]))
            return ComplexPoint.infinity()
        # degenerate solve: nudge the target and retry deterministically
        z0 += complex(rng.normal(scale=1e-9), rng.normal(scale=1e-9))
        logger.debug("backward step retry %d near a critical value", attempt)
    raise SplitdynError("backward orbit failed to find a preimage")


def curve_pullback_measure(
    C: BiCurve,
    f: Union[RationalMap, Poly],
    coordinate: int,
    n_samples: int = config.DEFAULT_SAMPLES,
    seed: int = config.DEFAULT_SEED,
    burn_in: int = config.DEFAULT_BURN_IN,
) -> EmpiricalMeasure:
    """Pull the invariant measure of one coordinate back onto the curve.

    Each base sample lifts to the fiber solutions of the curve over that
    coordinate, every solution carrying weight 1/deg(projection); fibers that
    degenerate numerically are perturbed and logged.
    """
    if coordinate not in (1, 2):
        raise PreconditionViolatedError("coordinate must be 1 or 2")
    base = sample_invariant_measure(f, n_samples, burn_in, seed)
    dx, dy = C.bidegree
    fiber_degree = dy if coordinate == 1 else dx
    if fiber_degree < 1:
        raise PreconditionViolatedError("curve has no fiber over that coordinate")
    rng = np.random.default_rng(seed + 10_007)
    pts = []
    for z in base.points:
        roots = _fiber_roots(C, coordinate, z, fiber_degree, rng)
        for y in roots:
            pts.append((z, y) if coordinate == 1 else (y, z))
    points = np.array(pts, dtype=complex)
    weights = np.full(len(pts), 1.0 / len(pts))
    return EmpiricalMeasure(points, weights, seed)


def _fiber_roots(C, coordinate, z, fiber_degree, rng):
    value = z
    for attempt in range(4):
        coeffs = C.fiber_coefficients(coordinate, value)
        trimmed = np.trim_zeros(np.array(coeffs, dtype=complex), "b")
        if len(trimmed) == fiber_degree + 1:
            roots = np.roots(trimmed[::-1])
            roots = roots[np.isfinite(roots)]
            if len(roots) == fiber_degree:
                return [complex(r) for r in roots]
        value = z + complex(rng.normal(scale=1e-9), rng.normal(scale=1e-9))
        logger.debug("fiber solve retry %d near the discriminant locus", attempt)
    # fiber genuinely drops degree (leading coefficient vanishes there):
    # return the finite solutions that exist
    coeffs = C.fiber_coefficients(coordinate, value)
    trimmed = np.trim_zeros(np.array(coeffs, dtype=complex), "b")
    if len(trimmed) <= 1:
        raise SplitdynError("fiber collapsed while sampling the curve")
    roots = np.roots(trimmed[::-1])
    return [complex(r) for r in roots[np.isfinite(roots)]]


# -- discrepancy -----------------------------------------------------------------------

_BOX_GRID = 32
_JOINT_GRID = 8


def _sphere_features(points: np.ndarray) -> np.ndarray:
    """Rows of (s1, s2, s3) stereographic coordinates, overflow-safe."""
    out = np.empty((len(points), 3), dtype=float)
    for k, z in enumerate(points):
        out[k] = ComplexPoint.from_complex(complex(z)).sphere_coords()
    return out


def _box_histogram(sphere: np.ndarray, weights: np.ndarray, grid: int) -> np.ndarray:
    lon = np.arctan2(sphere[:, 1], sphere[:, 0])  # [-pi, pi]
    lon_bin = np.clip(((lon + math.pi) / (2 * math.pi) * grid).astype(int), 0, grid - 1)
    h_bin = np.clip(((sphere[:, 2] + 1.0) / 2.0 * grid).astype(int), 0, grid - 1)
    hist = np.zeros(grid * grid)
    np.add.at(hist, lon_bin * grid + h_bin, weights)
    return hist


def _moment_features(sphere: np.ndarray, weights: np.ndarray) -> np.ndarray:
    s1, s2, s3 = sphere[:, 0], sphere[:, 1], sphere[:, 2]
    feats = [s1, s2, s3, s1 * s1, s2 * s2, s3 * s3, s1 * s2, s1 * s3, s2 * s3]
    return np.array([float(np.dot(weights, f)) for f in feats])


def measure_discrepancy(m1: EmpiricalMeasure, m2: EmpiricalMeasure) -> float:
    """Largest difference of empirical averages over the fixed v1 dictionary:
    low-order sphere moments plus indicator boxes on a longitude-height grid
    (marginals and a coarse joint grid for clouds on a curve)."""
    if m1.is_planar_pair != m2.is_planar_pair:
        raise PreconditionViolatedError("clouds live on different spaces")
    diffs: list[float] = []
    if not m1.is_planar_pair:
        s_a = _sphere_features(m1.points)
        s_b = _sphere_features(m2.points)
        hist = _box_histogram(s_a, m1.weights, _BOX_GRID) - _box_histogram(
            s_b, m2.weights, _BOX_GRID
        )
        diffs.append(float(np.max(np.abs(hist))))
        diffs.append(
            float(
                np.max(
                    np.abs(
                        _moment_features(s_a, m1.weights)
                        - _moment_features(s_b, m2.weights)
                    )
                )
            )
        )
        return max(diffs)
    spheres_a = [_sphere_features(m1.points[:, i]) for i in (0, 1)]
    spheres_b = [_sphere_features(m2.points[:, i]) for i in (0, 1)]
    for i in (0, 1):
        hist = _box_histogram(spheres_a[i], m1.weights, _BOX_GRID) - _box_histogram(
            spheres_b[i], m2.weights, _BOX_GRID
        )
        diffs.append(float(np.max(np.abs(hist))))
        diffs.append(
            float(
                np.max(
                    np.abs(
                        _moment_features(spheres_a[i], m1.weights)
                        - _moment_features(spheres_b[i], m2.weights)
                    )
                )
            )
        )
    # coarse joint boxes over (longitude, height) of both coordinates
    joint_a = _joint_histogram(spheres_a, m1.weights)
    joint_b = _joint_histogram(spheres_b, m2.weights)
    diffs.append(float(np.max(np.abs(joint_a - joint_b))))
    # cross moments between the two coordinates
    cross_a = _cross_moments(spheres_a, m1.weights)
    cross_b = _cross_moments(spheres_b, m2.weights)
    diffs.append(float(np.max(np.abs(cross_a - cross_b))))
    return max(diffs)


def _joint_histogram(spheres, weights) -> np.ndarray:
    g = _JOINT_GRID
    bins = []
    for s in spheres:
        lon = np.arctan2(s[:, 1], s[:, 0])
        lon_bin = np.clip(((lon + math.pi) / (2 * math.pi) * g).astype(int), 0, g - 1)
        h_bin = np.clip(((s[:, 2] + 1.0) / 2.0 * g).astype(int), 0, g - 1)
        bins.append(lon_bin)
        bins.append(h_bin)
    idx = ((bins[0] * g + bins[1]) * g + bins[2]) * g + bins[3]
    hist = np.zeros(g ** 4)
    np.add.at(hist, idx, weights)
    return hist


def _cross_moments(spheres, weights) -> np.ndarray:
    out = []
    for i in range(3):
        for j in range(3):
            out.append(float(np.dot(weights, spheres[0][:, i] * spheres[1][:, j])))
    return np.array(out)


# -- series linearization ------------------------------------------------------------


@dataclass(frozen=True)
class GermSeries:
    """A finite power series h(z) = sum coeffs[k] (z - center)^k.

    exact=True marks polynomial germs given exactly (the identity, a finite
    polynomial); truncations of analytic germs carry exact=False and a
    reliability radius estimated from coefficient decay.
    """

    center: complex
    coeffs: tuple[complex, ...]
    exact: bool = True

    @classmethod
    def identity(cls, center: complex) -> "GermSeries":
        return cls(center=center, coeffs=(center, 1.0 + 0j), exact=True)

    def __call__(self, z: complex) -> complex:
        acc = 0j
        w = z - self.center
        for c in reversed(self.coeffs):
            acc = acc * w + c
        return acc

    def derivative_at_center(self) -> complex:
        return self.coeffs[1] if len(self.coeffs) > 1 else 0j

    def reliability_radius(self) -> float:
        if self.exact:
            return math.inf
        best = math.inf
        for k in range(2, len(self.coeffs)):
            mag = abs(self.coeffs[k])
            if mag > 0:
                best = min(best, mag ** (-1.0 / k))
        return best


@dataclass(frozen=True)
class PoincareSeries:
    """Solution sigma of f(sigma(w)) = sigma(multiplier * w), sigma(0) = x0,
    sigma'(0) = 1, through the given order."""

    fixed_point: complex
    multiplier: complex
    coeffs: tuple[complex, ...]  # sigma_0 = x0, sigma_1 = 1, ...
    radius_estimate: float

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def evaluate(self, w: complex) -> complex:
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * w + c
        return acc

    def as_germ(self) -> GermSeries:
        """The series as a germ in (z - x0): sigma(w) with w = z - x0."""
        shifted = list(self.coeffs)
        return GermSeries(center=self.fixed_point, coeffs=tuple(shifted), exact=False)


def _series_mul(a: list[complex], b: list[complex], order: int) -> list[complex]:
    out = [0j] * (order + 1)
    for i, ai in enumerate(a):
        if i > order or ai == 0:
            continue
        for j, bj in enumerate(b):
            if i + j > order:
                break
            out[i + j] += ai * bj
    return out


def _series_compose_poly(
    coeffs: Sequence[complex], series: list[complex], order: int
) -> list[complex]:
    """Polynomial(series) truncated: Horner in series arithmetic."""
    acc = [0j] * (order + 1)
    for c in reversed(list(coeffs)):
        acc = _series_mul(acc, series, order)
        acc[0] += c
    return acc


def _series_divide(
    num: list[complex], den: list[complex], order: int
) -> list[complex]:
    if den[0] == 0:
        raise SplitdynError("series division by a series vanishing at 0")
    out = [0j] * (order + 1)
    inv0 = 1.0 / den[0]
    for k in range(order + 1):
        acc = num[k] if k < len(num) else 0j
        for j in range(1, k + 1):
            if j < len(den):
                acc -= den[j] * out[k - j]
        out[k] = acc * inv0
    return out


def poincare_series(
    f: Union[RationalMap, Poly], x0: complex, order: int = 12
) -> PoincareSeries:
    """Linearizing series at a repelling fixed point.

    The order-k coefficient solves a linear equation with factor
    (multiplier^k - multiplier), never zero when |multiplier| > 1.
    """
    f = _as_map(f)
    if order < 1:
        raise PreconditionViolatedError("order must be >= 1")
    num = [complex(c) for c in f.numerator.fraction_coefficients()]
    den = [complex(c) for c in f.denominator.fraction_coefficients()]
    fx0 = _complex_horner(num, x0) / _complex_horner(den, x0)
    if abs(fx0 - x0) > 1e-8 * (1.0 + abs(x0)):
        raise PreconditionViolatedError(f"{x0} is not fixed (f(x0) = {fx0})")
    dnum = [i * c for i, c in enumerate(num)][1:]
    dden = [i * c for i, c in enumerate(den)][1:]
    nv, dv = _complex_horner(num, x0), _complex_horner(den, x0)
    npv = _complex_horner(dnum, x0) if dnum else 0j
    dpv = _complex_horner(dden, x0) if dden else 0j
    lam = (npv * dv - nv * dpv) / (dv * dv)
    if abs(lam) <= 1.0 + 1e-9:
        raise NonRepellingError(f"multiplier {lam} is not repelling")
    sigma: list[complex] = [complex(x0), 1.0 + 0j] + [0j] * (order - 1)
    for k in range(2, order + 1):
        # with sigma_k still zero, [w^k](f . sigma) picks up lam * sigma_k
        # once sigma_k is added, so the order-k equation is linear:
        # r_k + lam * sigma_k = lam^k * sigma_k
        comp_num = _series_compose_poly(num, sigma, k)
        comp_den = _series_compose_poly(den, sigma, k)
        f_sigma = _series_divide(comp_num, comp_den, k)
        sigma[k] = f_sigma[k] / (lam ** k - lam)
    radius = math.inf
    for k in range(2, order + 1):
        mag = abs(sigma[k])
        if mag > 0:
            radius = min(radius, mag ** (-1.0 / k))
    return PoincareSeries(
        fixed_point=complex(x0),
        multiplier=lam,
        coeffs=tuple(sigma),
        radius_estimate=radius,
    )


def poincare_residual(f: Union[RationalMap, Poly], series: PoincareSeries, order: int) -> float:
    """Max coefficient mismatch of f(sigma(w)) - sigma(multiplier w) through order."""
    f = _as_map(f)
    num = [complex(c) for c in f.numerator.fraction_coefficients()]
    den = [complex(c) for c in f.denominator.fraction_coefficients()]
    sigma = list(series.coeffs[: order + 1])
    comp = _series_divide(
        _series_compose_poly(num, sigma, order),
        _series_compose_poly(den, sigma, order),
        order,
    )
    lam = series.multiplier
    worst = 0.0
    for k in range(min(order, series.order) + 1):
        worst = max(worst, abs(comp[k] - (lam ** k) * sigma[k]))
    return worst


def germ_equality_residual(
    f: Union[RationalMap, Poly],
    g: Union[RationalMap, Poly],
    n: int,
    m: int,
    h: GermSeries,
    radius: float,
    grid: int = 16,
) -> float:
    """Max of |h(f^n(z)) - g^m(h(z))| over rings in the disk around h.center.

    A small residual is numerical evidence for the germ identity, never a
    proof.  The series must stay reliable on the stretched disk the forward
    iterates reach.
    """
    f = _as_map(f)
    g = _as_map(g)
    if n < 1 or m < 1:
        raise PreconditionViolatedError("iterate counts must be >= 1")
    if h.derivative_at_center() == 0:
        raise PreconditionViolatedError("germ must be invertible (h'(x0) != 0)")
    x0 = h.center
    chart_f = _ChartMap(f)
    chart_g = _ChartMap(g)
    # reach of f^n on the disk, against the series reliability radius
    lam_f = chart_f.step_derivative(
        ComplexPoint.from_complex(x0), ComplexPoint.from_complex(x0)
    )
    reach = radius * max(abs(lam_f), 1.0) ** n * 1.5
    safe = h.reliability_radius()
    if reach > safe:
        raise PreconditionViolatedError(
            f"radius {radius} stretches to {reach:.3g}, past the series "
            f"reliability radius {safe:.3g}"
        )
    worst = 0.0
    for ring in range(1, 4):
        r = radius * ring / 3.0
        for k in range(grid):
            z = x0 + r * complex(
                math.cos(2 * math.pi * k / grid), math.sin(2 * math.pi * k / grid)
            )
            zf = ComplexPoint.from_complex(z)
            for _ in range(n):
                zf = chart_f.apply(zf)
            lhs = h(zf.to_complex())
            wg = ComplexPoint.from_complex(h(z))
            for _ in range(m):
                wg = chart_g.apply(wg)
            rhs = wg.to_complex()
            worst = max(worst, abs(lhs - rhs))
    return worst


# -- rendering --------------------------------------------------------------------------


def julia_render(
    f: Union[RationalMap, Poly],
    resolution: int = 256,
    iterations: int = config.DEFAULT_RENDER_ITERATIONS,
    window: float = config.DEFAULT_RENDER_WINDOW,
) -> np.ndarray:
    """Grayscale image of the chaotic locus, deterministic.

    Polynomials: escape-time shading (slow escape = bright, bounded = dark).
    Other rational maps: shading from spherical derivative accumulation along
    the orbit (strong expansion = bright).
    """
    f = _as_map(f)
    if resolution < 2:
        raise PreconditionViolatedError("resolution must be >= 2")
    img = np.zeros((resolution, resolution), dtype=np.uint8)
    xs = np.linspace(-window, window, resolution)
    ys = np.linspace(-window, window, resolution)
    if f.is_polynomial:
        coeffs = [complex(c) for c in f.as_poly().fraction_coefficients()]
        lead = abs(coeffs[-1])
        escape = max(2.0, 2.0 * (sum(abs(c) for c in coeffs[:-1]) + 1.0) / lead)
        log_scale = 255.0 / math.log(iterations + 2.0)
        for row, y in enumerate(ys):
            for col, x in enumerate(xs):
                z = complex(x, y)
                shade = 0
                for k in range(iterations):
                    z = _complex_horner(coeffs, z)
                    if abs(z) > escape:
                        shade = int(log_scale * math.log(k + 2.0))
                        break
                img[row, col] = shade
        return img
    chart = _ChartMap(f)
    for row, y in enumerate(ys):
        for col, x in enumerate(xs):
            pt = ComplexPoint.from_complex(complex(x, y))
            log_expansion = 0.0
            for _ in range(iterations):
                nxt = chart.apply(pt)
                deriv = abs(chart.step_derivative(pt, nxt))
                if deriv > 0:
                    log_expansion += math.log(deriv)
                pt = nxt
            value = 255.0 / (1.0 + math.exp(-log_expansion / max(iterations, 1)))
            img[row, col] = int(max(0.0, min(255.0, value)))
    return img
