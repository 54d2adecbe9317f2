"""Complex-projective linear algebra on C^n and P^n.

Points of C^n are plain complex numpy arrays whose last axis holds the
coordinates; most functions broadcast over leading axes.  Points of P^n are
stored as unit-norm homogeneous vectors in C^{n+1}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: two projective points are equal when |a ^ b|^2 falls below this
PROJECTIVE_EQ_TOL = 1e-20
#: |zeta_k| must exceed this fraction of |zeta| for zeta to lie in chart U_k
CHART_TOL = 1e-12


class ChartDomainError(ValueError):
    """Raised when a projective point does not lie in the requested chart."""


def as_cvec(a) -> np.ndarray:
    """Coerce `a` to a complex array with at least one axis."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.shape[-1] < 1:
        raise ValueError("vectors must have dimension >= 1")
    return arr


def real_to_complex(x) -> np.ndarray:
    """Interpret the last axis of a real array as interleaved (re, im) pairs."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] % 2:
        raise ValueError(f"need an even number of real coordinates, got {x.shape[-1]}")
    return x[..., 0::2] + 1j * x[..., 1::2]


def complex_to_real(z) -> np.ndarray:
    """Inverse of :func:`real_to_complex`."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def norm_sq(a) -> np.ndarray:
    a = np.asarray(a)
    return np.sum(a.real**2 + a.imag**2, axis=-1)


def hermitian_dot(a, b) -> np.ndarray:
    """a . conj(b), summed over the last axis."""
    return np.sum(np.asarray(a) * np.conj(b), axis=-1)


def _check_pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = as_cvec(a)
    b = as_cvec(b)
    if a.shape[-1] != b.shape[-1]:
        raise ValueError(f"dimension mismatch: {a.shape[-1]} vs {b.shape[-1]}")
    return a, b


def _cross(ai, bj, aj, bi) -> np.ndarray:
    """ai * bj - aj * bi in real arithmetic.

    Real products commute exactly, so the result is exactly antisymmetric
    under swapping a and b and exactly zero when a == b (complex multiply
    may round the two products differently).
    """
    re = (ai.real * bj.real - ai.imag * bj.imag) - (aj.real * bi.real - aj.imag * bi.imag)
    im = (ai.real * bj.imag + ai.imag * bj.real) - (aj.real * bi.imag + aj.imag * bi.real)
    return re + 1j * im


def wedge_minors(a, b) -> np.ndarray:
    """Antisymmetric matrix M_ij = a_i b_j - a_j b_i (last two axes)."""
    a, b = _check_pair(a, b)
    return _cross(a[..., :, None], b[..., None, :], a[..., None, :], b[..., :, None])


def wedge_norm_sq(a, b) -> np.ndarray:
    """|a ^ b|^2 = sum_{i<j} |a_i b_j - a_j b_i|^2, computed from the minors.

    Exactly zero when `a` and `b` coincide; broadcasts over leading axes.
    """
    a, b = _check_pair(a, b)
    d = a.shape[-1]
    if d == 1:
        return np.zeros(np.broadcast_shapes(a.shape[:-1], b.shape[:-1]))
    i, j = np.triu_indices(d, k=1)
    m = _cross(a[..., i], b[..., j], a[..., j], b[..., i])
    return np.sum(m.real**2 + m.imag**2, axis=-1)


def lagrange_rhs(a, b) -> np.ndarray:
    """|a|^2 |b|^2 - |a . conj(b)|^2, the other side of the Lagrange identity."""
    a, b = _check_pair(a, b)
    return norm_sq(a) * norm_sq(b) - np.abs(hermitian_dot(a, b)) ** 2


def affine_lagrange_sides(z, w) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of the affine Lagrange identity for z, w in C^n.

    Returns ``(lhs, rhs)`` with
    lhs = (|z-w|^2 + |z^w|^2) / ((1+|z|^2)(1+|w|^2)) and
    rhs = 1 - |1 + z.conj(w)|^2 / ((1+|z|^2)(1+|w|^2)).
    """
    z, w = _check_pair(z, w)
    den = (1.0 + norm_sq(z)) * (1.0 + norm_sq(w))
    lhs = (norm_sq(z - w) + wedge_norm_sq(z, w)) / den
    rhs = 1.0 - np.abs(1.0 + hermitian_dot(z, w)) ** 2 / den
    return lhs, rhs


@dataclass(frozen=True, eq=False)
class ProjectivePoint:
    """A point of P^n held as a unit-norm representative in C^{n+1}."""

    homog: np.ndarray

    def __post_init__(self):
        v = as_cvec(self.homog)
        if v.ndim != 1:
            raise ValueError("ProjectivePoint holds a single vector")
        if v.shape[0] < 2:
            raise ValueError("P^n needs at least two homogeneous coordinates")
        nrm = np.sqrt(norm_sq(v))
        if not np.isfinite(nrm) or nrm == 0.0:
            raise ValueError("homogeneous coordinates must be finite and nonzero")
        v = v / nrm
        v.setflags(write=False)
        object.__setattr__(self, "homog", v)

    @property
    def n(self) -> int:
        return self.homog.shape[0] - 1

    def __eq__(self, other):
        if not isinstance(other, ProjectivePoint):
            return NotImplemented
        if other.n != self.n:
            return False
        return bool(wedge_norm_sq(self.homog, other.homog) < PROJECTIVE_EQ_TOL)

    __hash__ = None  # equality is tolerance based

    def __repr__(self):
        return f"ProjectivePoint({np.array2string(self.homog, precision=6)})"


@dataclass(frozen=True)
class AffinePoint:
    """Affine coordinates z in C^n of a point in the chart U_k."""

    z: np.ndarray
    chart: int

    def __post_init__(self):
        z = as_cvec(self.z)
        if z.ndim != 1:
            raise ValueError("AffinePoint holds a single vector")
        if not 0 <= self.chart <= z.shape[0]:
            raise ValueError(f"chart index {self.chart} outside [0, {z.shape[0]}]")
        z = z.copy()
        z.setflags(write=False)
        object.__setattr__(self, "z", z)


def normalize_homog(zeta) -> np.ndarray:
    """Scale homogeneous vectors (last axis) to unit norm."""
    zeta = as_cvec(zeta)
    return zeta / np.sqrt(norm_sq(zeta))[..., None]


def _homog(p) -> np.ndarray:
    return p.homog if isinstance(p, ProjectivePoint) else as_cvec(p)


def projective_sine_distance(p, q) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(sine, dist)`` between projective points.

    sine = |zeta ^ eta| / (|zeta||eta|) lies in [0, 1] and the Fubini-Study
    geodesic distance is dist = sqrt(2) * arcsin(sine), in [0, pi/sqrt(2)].
    Accepts ProjectivePoint instances or arrays of homogeneous vectors.
    """
    a, b = _check_pair(_homog(p), _homog(q))
    s2 = wedge_norm_sq(a, b) / (norm_sq(a) * norm_sq(b))
    sine = np.sqrt(np.clip(s2, 0.0, 1.0))
    return sine, np.sqrt(2.0) * np.arcsin(sine)


def chart_transform(p, k: int) -> AffinePoint:
    """Affine coordinates z_j = zeta_j / zeta_k (j != k, increasing j)."""
    zeta = _homog(p)
    if zeta.ndim != 1:
        raise ValueError("chart_transform takes a single point; use chart_coords for arrays")
    n = zeta.shape[0] - 1
    if not 0 <= k <= n:
        raise ValueError(f"chart index {k} outside [0, {n}]")
    return AffinePoint(chart_coords(zeta, k), k)


def chart_coords(zeta, k: int) -> np.ndarray:
    """Vectorized chart map on arrays of homogeneous vectors."""
    zeta = as_cvec(zeta)
    zk = zeta[..., k]
    if np.any(np.abs(zk) <= CHART_TOL * np.sqrt(norm_sq(zeta))):
        raise ChartDomainError(f"point not in chart U_{k}: coordinate {k} vanishes")
    rest = np.delete(zeta, k, axis=-1)
    return rest / zk[..., None]


def from_chart(a: AffinePoint | np.ndarray, k: int | None = None) -> ProjectivePoint:
    """Inverse chart map: insert 1 at slot k and renormalize."""
    if isinstance(a, AffinePoint):
        z, k = a.z, a.chart
    else:
        if k is None:
            raise ValueError("chart index required for a bare coordinate vector")
        z = as_cvec(a)
    return ProjectivePoint(np.insert(z, k, 1.0))


def homog_from_chart(z, k: int) -> np.ndarray:
    """Vectorized inverse chart map returning unit homogeneous vectors."""
    z = as_cvec(z)
    return normalize_homog(np.insert(z, k, 1.0, axis=-1))


def chart_transition(z, k: int, l: int) -> np.ndarray:
    """Coordinates in U_l of the point with coordinates z in U_k.

    Coordinates are labelled by homogeneous index; with zeta_k = 1, the new
    coordinates are w_j = z_j / z_l for j not in {k, l} and w_k = 1 / z_l.
    """
    z = as_cvec(z)
    n = z.shape[-1]
    if k == l:
        return z.copy()
    idx_k = [j for j in range(n + 1) if j != k]  # homogeneous label of each z slot
    pos = {lab: s for s, lab in enumerate(idx_k)}
    zl = z[..., pos[l]]
    if np.any(np.abs(zl) <= CHART_TOL * np.sqrt(1.0 + norm_sq(z))):
        raise ChartDomainError(f"point not in chart U_{l}")
    out = []
    for lab in range(n + 1):
        if lab == l:
            continue
        out.append(1.0 / zl if lab == k else z[..., pos[lab]] / zl)
    return np.stack(out, axis=-1)


def fs_potential(z) -> np.ndarray:
    """Local potential (1/2) log(1 + |z|^2) of the Fubini-Study form."""
    return 0.5 * np.log1p(norm_sq(as_cvec(z)))


def homogenize_value(u, p, k: int = 0) -> float:
    """Value at p of the omega-psh function attached to u in the Lelong class.

    phi_u(zeta) = u(z) - (1/2) log(1 + |z|^2) with z the chart-k coordinates
    of p.  Points on the hyperplane zeta_k = 0 raise ChartDomainError; their
    values are only reachable through :func:`projlog.potentials.robin_estimate`.
    """
    z = chart_transform(p, k).z
    val = float(u(z))
    if val == -np.inf:
        return -np.inf
    return val - float(fs_potential(z))
