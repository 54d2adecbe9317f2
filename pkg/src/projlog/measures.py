"""Finitely supported probability measures and their concentration.

A :class:`Measure` is either an explicit list of weighted atoms or a sample
cloud (uniform weights 1/N) standing in for a continuous law.  Points may be
real (R^N) or complex (C^n, seen as R^{2n} for distances).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .geometry import complex_to_real, normalize_homog, norm_sq

WEIGHT_TOL = 1e-12
FAMILIES = ("ball", "sphere", "segment", "kplane", "cantor_line", "uniform_Pn")


class MeasureError(ValueError):
    """Invalid measure construction."""


@dataclass(frozen=True, eq=False)
class Measure:
    """Probability measure with finite support.

    ``points`` has shape (m, d); ``weights`` has shape (m,) and sums to 1.
    ``kind`` is ``"atomic"`` or ``"cloud"``.
    """

    points: np.ndarray
    weights: np.ndarray
    kind: str = "atomic"

    def __post_init__(self):
        pts = np.asarray(self.points)
        if pts.ndim == 1:
            pts = pts[:, None]
        if not np.iscomplexobj(pts):
            pts = pts.astype(float)
        w = np.asarray(self.weights, dtype=float)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise MeasureError("a measure needs at least one point")
        if w.shape != (pts.shape[0],):
            raise MeasureError(f"{pts.shape[0]} points but {w.size} weights")
        if self.kind not in ("atomic", "cloud"):
            raise MeasureError(f"unknown measure kind {self.kind!r}")
        pts = pts.copy()
        w = w.copy()
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        """Number of coordinates (complex dimension for complex points)."""
        return self.points.shape[1]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.points)

    @property
    def ambient_dim(self) -> int:
        """Real dimension N of the ambient space."""
        return 2 * self.dim if self.is_complex else self.dim

    def real_points(self) -> np.ndarray:
        return complex_to_real(self.points) if self.is_complex else self.points

    def support_radius(self) -> float:
        return float(np.sqrt(norm_sq(self.points)).max())

    def max_atom(self) -> float:
        return float(self.weights.max())


def make_atomic(points, weights) -> Measure:
    """Atomic measure sum_i weights[i] * delta_{points[i]}.

    Weights must be nonnegative and sum to 1 within 1e-12; they are rescaled
    to sum exactly to 1.  Points must be distinct.
    """
    pts = np.asarray(points)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    elif pts.ndim == 1:
        pts = pts[:, None]
    w = np.asarray(weights, dtype=float).ravel()
    if w.size != pts.shape[0]:
        raise MeasureError(f"{pts.shape[0]} points but {w.size} weights")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise MeasureError("weights must be finite and nonnegative")
    total = math.fsum(w)
    if abs(total - 1.0) > WEIGHT_TOL:
        raise MeasureError(f"weights sum to {total:.12g}")
    if np.unique(pts, axis=0).shape[0] != pts.shape[0]:
        raise MeasureError("atom locations must be distinct")
    return Measure(pts, w / total, "atomic")


def dirac(point) -> Measure:
    p = np.atleast_1d(np.asarray(point))
    return make_atomic(p[None, :], [1.0])


def cloud(points) -> Measure:
    """Uniform sample cloud (weights 1/N)."""
    pts = np.asarray(points)
    if pts.ndim == 1:
        pts = pts[:, None]
    m = pts.shape[0]
    return Measure(pts, np.full(m, 1.0 / m), "cloud")


def mixture(measures: Sequence[Measure], coeffs: Sequence[float]) -> Measure:
    """Convex combination of measures; coincident atoms are merged."""
    coeffs = np.asarray(coeffs, dtype=float)
    if len(measures) != coeffs.size or len(measures) == 0:
        raise MeasureError("need one coefficient per measure")
    if np.any(coeffs < 0) or abs(math.fsum(coeffs) - 1.0) > WEIGHT_TOL:
        raise MeasureError("mixture coefficients must be a probability vector")
    pts = np.concatenate([m.points for m in measures], axis=0)
    w = np.concatenate([c * m.weights for m, c in zip(measures, coeffs)])
    uniq, inv = np.unique(pts, axis=0, return_inverse=True)
    merged = np.zeros(uniq.shape[0])
    np.add.at(merged, inv.ravel(), w)
    return Measure(uniq, merged / merged.sum(), "atomic")


@dataclass(frozen=True)
class FamilySpec:
    """Recipe for a sample cloud from a named family.

    family       one of ball, sphere, segment, kplane, cantor_line, uniform_Pn
    n_points     sample count N
    seed         seed of the generator owned by the call
    dim          ambient dimension: complex dim if ``field == "complex"``,
                 real dim otherwise; for uniform_Pn the projective dim n
    field        "real" or "complex"
    center       ball/sphere center (defaults to the origin)
    radius       ball/sphere radius
    start, end   segment endpoints (default: origin to first basis vector)
    length       side of the k-plane cube, or length of the Cantor line
    kdim         dimension of the k-plane (spanned by the first kdim axes)
    ratio        Cantor contraction ratio in (0, 1/2]
    """

    family: str
    n_points: int
    seed: int = 0
    dim: int = 1
    field: str = "real"
    center: tuple | None = None
    radius: float = 1.0
    start: tuple | None = None
    end: tuple | None = None
    length: float = 1.0
    kdim: int = 1
    ratio: float = 1.0 / 3.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise MeasureError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.n_points < 1:
            raise MeasureError("n_points must be >= 1")
        if self.dim < 1:
            raise MeasureError("dim must be >= 1")
        if self.field not in ("real", "complex"):
            raise MeasureError("field must be 'real' or 'complex'")
        if not 0.0 < self.ratio <= 0.5:
            raise MeasureError("Cantor ratio must lie in (0, 1/2]")
        if self.radius <= 0 or self.length <= 0:
            raise MeasureError("radius and length must be positive")
        if self.family == "kplane" and not 1 <= self.kdim <= self.real_dim:
            raise MeasureError("kdim must lie in [1, real dimension]")

    @property
    def real_dim(self) -> int:
        return 2 * self.dim if self.field == "complex" else self.dim


def _vec(value, d, default=0.0) -> np.ndarray:
    if value is None:
        return np.full(d, default)
    v = np.asarray(value, dtype=float).ravel()
    if v.size != d:
        raise MeasureError(f"expected {d} real coordinates, got {v.size}")
    return v


def _to_field(x: np.ndarray, spec: FamilySpec) -> np.ndarray:
    return x[:, 0::2] + 1j * x[:, 1::2] if spec.field == "complex" else x


def sample_family(spec: FamilySpec) -> Measure:
    """Draw a deterministic sample cloud from ``spec``.

    Real-valued parameters (center, start, end) are given in real coordinates,
    interleaved (re, im) when ``field == "complex"``.
    """
    rng = np.random.default_rng(spec.seed)
    N, d = spec.n_points, spec.real_dim
    fam = spec.family
    if fam == "uniform_Pn":
        g = rng.standard_normal((N, spec.dim + 1)) + 1j * rng.standard_normal((N, spec.dim + 1))
        return cloud(normalize_homog(g))
    if fam in ("ball", "sphere"):
        g = rng.standard_normal((N, d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        if fam == "ball":
            g *= rng.random(N)[:, None] ** (1.0 / d)
        x = _vec(spec.center, d) + spec.radius * g
    elif fam == "segment":
        a = _vec(spec.start, d)
        b = _vec(spec.end, d) if spec.end is not None else a + np.eye(d)[0]
        t = rng.random(N)[:, None]
        x = a + t * (b - a)
    elif fam == "kplane":
        x = np.zeros((N, d))
        x[:, : spec.kdim] = spec.length * rng.random((N, spec.kdim))
        x += _vec(spec.center, d)
    else:  # cantor_line
        depth = max(1, math.ceil(math.log2(N)))
        r = spec.ratio
        digits = rng.integers(0, 2, size=(N, depth))
        offsets = (1.0 - r) * r ** np.arange(depth)
        t = digits @ offsets + 0.5 * r**depth
        x = np.zeros((N, d))
        x[:, 0] = spec.length * t
        x += _vec(spec.center, d)
    return cloud(_to_field(x, spec))


def _as_real(x) -> np.ndarray:
    x = np.asarray(x)
    return complex_to_real(x) if np.iscomplexobj(x) else np.asarray(x, dtype=float)


def concentration(mu: Measure, x, r: float) -> float:
    """mu(B(x, r)): total weight of support points with |p - x| < r."""
    if r <= 0:
        raise ValueError("radius must be positive")
    x = np.asarray(x)
    if x.ndim == 0:
        x = x.reshape(1)
    d = np.sqrt(norm_sq(mu.points - x))
    return float(math.fsum(mu.weights[d < r]))


def ball_masses(mu: Measure, centers, radii) -> np.ndarray:
    """Matrix of mu(B(c, r)) for each center (rows) and radius (columns).

    Balls are open.  Uniform clouds are counted with a KD-tree; weighted
    measures by chunked brute force.
    """
    radii = np.asarray(radii, dtype=float)
    C = _as_real(centers)
    if C.ndim == 1:
        C = C[None, :]
    P = mu.real_points()
    if mu.kind == "cloud":
        tree = cKDTree(P)
        out = np.empty((C.shape[0], radii.size))
        for j, r in enumerate(radii):
            # query_ball_point uses closed balls
            cnt = tree.query_ball_point(C, np.nextafter(r, 0.0), return_length=True)
            out[:, j] = cnt / mu.size
        return out
    out = np.empty((C.shape[0], radii.size))
    order = np.argsort(radii)
    chunk = max(1, 2_000_000 // max(1, P.shape[0]))
    for s in range(0, C.shape[0], chunk):
        d = np.sqrt(((C[s : s + chunk, None, :] - P[None, :, :]) ** 2).sum(-1))
        for j in order:
            out[s : s + chunk, j] = (mu.weights * (d < radii[j])).sum(axis=1)
    return out


@dataclass(frozen=True)
class ConcentrationProfile:
    """Levy concentration Q_mu(r) = sup over support points of mu(x, r)."""

    radii: np.ndarray
    values: np.ndarray
    n_centers: int = 0


def _centers(mu: Measure, max_centers: int | None) -> np.ndarray:
    if max_centers is None or mu.size <= max_centers:
        return mu.points
    idx = np.unique(np.linspace(0, mu.size - 1, max_centers).round().astype(int))
    return mu.points[idx]


def q_concentration(mu: Measure, radii, max_centers: int | None = None) -> ConcentrationProfile:
    """Concentration profile over ascending ``radii``.

    The supremum is taken over support points (all of them, or an evenly
    spaced subset of ``max_centers`` of them for large clouds).
    """
    radii = np.asarray(radii, dtype=float).ravel()
    if radii.size == 0:
        raise ValueError("radii must be nonempty")
    if np.any(radii <= 0) or np.any(np.diff(radii) < 0):
        raise ValueError("radii must be positive and ascending")
    C = _centers(mu, max_centers)
    masses = ball_masses(mu, C, radii)
    vals = np.minimum(masses.max(axis=0), 1.0)
    return ConcentrationProfile(radii, np.maximum.accumulate(vals), C.shape[0])


@dataclass(frozen=True)
class DimensionEstimate:
    """Log-log slope fit of Q_mu(r) against r.

    ``gamma`` is the slope clamped to [0, N]; ``residual`` is the RMS misfit
    of the fitted line in log Q; ``flat`` marks a degenerate profile
    (Q identically 1); ``min_ball_count`` is the largest number of samples in
    a ball of the smallest radius, and ``undersampled`` flags clouds where it
    is below 100 so the sup is dominated by sampling noise.
    """

    gamma: float
    slope: float
    residual: float
    flat: bool
    min_ball_count: float
    undersampled: bool
    profile: ConcentrationProfile = field(repr=False)


def dimension_estimate(
    mu: Measure,
    r_lo: float,
    r_hi: float,
    num_radii: int = 12,
    max_centers: int | None = 2000,
) -> DimensionEstimate:
    """Estimate the lower concentration dimension of ``mu``.

    Fits log Q_mu(r) against log r on a geometric grid of ``num_radii`` radii
    in [r_lo, r_hi].  The liminf in the definition is not reachable from a
    finite sample, so the slope over a window of resolved scales is used.
    """
    if not 0 < r_lo < r_hi:
        raise ValueError("need 0 < r_lo < r_hi")
    if num_radii < 3:
        raise ValueError("num_radii must be >= 3")
    radii = np.geomspace(r_lo, r_hi, num_radii)
    prof = q_concentration(mu, radii, max_centers)
    logq = np.log(prof.values)
    min_count = prof.values[0] * mu.size if mu.kind == "cloud" else math.inf
    undersampled = mu.kind == "cloud" and min_count < 100
    if np.all(prof.values >= 1.0):
        return DimensionEstimate(0.0, 0.0, 0.0, True, min_count, undersampled, prof)
    A = np.vstack([np.log(radii), np.ones_like(radii)]).T
    coef, *_ = np.linalg.lstsq(A, logq, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - logq) ** 2)))
    slope = float(coef[0])
    gamma = float(np.clip(slope, 0.0, mu.ambient_dim))
    return DimensionEstimate(gamma, slope, resid, False, min_count, undersampled, prof)


def log_moment(mu: Measure) -> float:
    """Integral of log(1 + |w|^2) against mu."""
    return float(math.fsum(mu.weights * np.log1p(norm_sq(mu.points))))
