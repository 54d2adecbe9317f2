"""Logarithmic potentials of measures, their derivatives and Monge-Ampere
densities.

For a probability measure mu with finite support in C^n:

    U_mu(z)     = int K(z, w) dmu(w)
    V_mu^eps(z) = int N_eps(z, w) dmu(w)      (V_mu = V_mu^0)
    V_mu^phi    = V_mu^eps + phi              (twisted by a smooth phi)

and for mu on P^n, G_mu(p) = int G(p, q) dmu(q).

Monge-Ampere densities use dd^c = (i/pi) d dbar, for which
(dd^c u)^n = cma(n) det(H_u) dLebesgue with cma(n) = 2^n n! / pi^n, and a
unit Dirac mass is the Monge-Ampere measure of N(., w).  For k < n the
k-Hessian measure (dd^c u)^k ^ beta^(n-k), beta = dd^c |z|^2, has density
cma(n) sigma_k(lambda) / binom(n, k) in the Hessian eigenvalues lambda.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .geometry import (
    ChartDomainError,
    ProjectivePoint,
    as_cvec,
    chart_coords,
    fs_potential,
    norm_sq,
    normalize_homog,
    wedge_norm_sq,
)
from .kernels import grad_N_eps, hessian_N_eps, kernel_G, kernel_K, kernel_N
from .measures import Measure, log_moment
from .quadrature import BallQuad, ball_mass, cma, parallel_map, sphere_average, total_mass_cn

log = logging.getLogger(__name__)

TWIST_CHECK_POINTS = 10
TWIST_CHECK_TOL = 1e-5
#: pair evaluations per chunk (points x atoms)
_PAIR_BUDGET = 200_000


# ----------------------------------------------------------------------------
# twists


@dataclass(frozen=True)
class Twist:
    """Smooth function phi on C^n with analytic derivatives.

    ``value`` maps (..., n) -> (...); ``grad`` gives d phi / dz_m with shape
    (..., n); ``hess`` gives d^2 phi / dz_j dzbar_k with shape (..., n, n).
    """

    value: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"


def fubini_study_twist(scale: float = 1.0) -> Twist:
    """phi = scale * (1/2) log(1 + |z|^2)."""

    def value(z):
        return scale * fs_potential(z)

    def grad(z):
        z = as_cvec(z)
        return scale * np.conj(z) / (2.0 * (1.0 + norm_sq(z)))[..., None]

    def hess(z):
        z = as_cvec(z)
        s = (1.0 + norm_sq(z))[..., None, None]
        zz = np.conj(z)[..., :, None] * z[..., None, :]
        return 0.5 * scale * (s * np.eye(z.shape[-1]) - zz) / (s * s)

    return Twist(value, grad, hess, f"fubini_study({scale:g})")


def quadratic_twist(c: float = 1.0) -> Twist:
    """phi = c |z|^2."""

    def value(z):
        return c * norm_sq(as_cvec(z))

    def grad(z):
        return c * np.conj(as_cvec(z))

    def hess(z):
        z = as_cvec(z)
        return np.broadcast_to(c * np.eye(z.shape[-1], dtype=complex), z.shape + (z.shape[-1],)).copy()

    return Twist(value, grad, hess, f"quadratic({c:g})")


def _wirtinger_fd(f, z: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Central differences of ``f`` along each real and imaginary axis.

    Returns arrays indexed [m, ...] of df/dx_m and df/dy_m.
    """
    n = z.shape[-1]
    dx, dy = [], []
    for m in range(n):
        e = np.zeros(n)
        e[m] = h
        dx.append((f(z + e) - f(z - e)) / (2 * h))
        dy.append((f(z + 1j * e) - f(z - 1j * e)) / (2 * h))
    return np.array(dx), np.array(dy)


def check_twist(twist: Twist, n: int, seed: int = 0, h: float = 1e-6) -> float:
    """Largest relative mismatch between the analytic and finite-difference
    derivatives of ``twist`` on TWIST_CHECK_POINTS probe points."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(TWIST_CHECK_POINTS):
        z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        fx, fy = _wirtinger_fd(lambda t: np.asarray(twist.value(t), dtype=float), z, h)
        g_fd = 0.5 * (fx - 1j * fy)
        g = np.asarray(twist.grad(z))
        worst = max(worst, float(np.max(np.abs(g - g_fd))) / max(1.0, float(np.max(np.abs(g)))))
        gx, gy = _wirtinger_fd(lambda t: np.asarray(twist.grad(t)), z, h)
        # H_jk = d g_j / dzbar_k; gx[k, j] = d g_j / dx_k
        h_fd = 0.5 * (gx + 1j * gy).T
        H = np.asarray(twist.hess(z))
        worst = max(worst, float(np.max(np.abs(H - h_fd))) / max(1.0, float(np.max(np.abs(H)))))
    return worst


# ----------------------------------------------------------------------------
# fields


def _complex_measure(mu: Measure) -> Measure:
    if mu.is_complex:
        return mu
    return Measure(mu.points.astype(complex), mu.weights, mu.kind)


@dataclass(frozen=True, eq=False)
class PotentialField:
    """The regularized, optionally twisted potential V_mu^eps + phi on C^n.

    ``chart`` records which affine chart of P^n the coordinates refer to.
    A twist is finite-difference checked at construction.
    """

    measure: Measure
    eps: float = 0.0
    twist: Twist | None = None
    chart: int = 0

    def __post_init__(self):
        if self.eps < 0:
            raise ValueError("eps must be >= 0")
        object.__setattr__(self, "measure", _complex_measure(self.measure))
        if not 0 <= self.chart <= self.n:
            raise ValueError(f"chart index {self.chart} outside [0, {self.n}]")
        if self.twist is not None:
            err = check_twist(self.twist, self.n)
            if not err <= TWIST_CHECK_TOL:
                raise ValueError(f"twist derivatives inconsistent (relative error {err:.3g})")

    @property
    def n(self) -> int:
        return self.measure.dim

    def value(self, z) -> np.ndarray:
        v = eval_V(self.measure, z, self.eps)
        if self.twist is not None:
            v = v + self.twist.value(as_cvec(z))
        return v


def _flat(z, n: int) -> tuple[np.ndarray, tuple]:
    z = as_cvec(z)
    if z.shape[-1] != n:
        raise ValueError(f"dimension mismatch: {z.shape[-1]} vs {n}")
    return z.reshape(-1, n), z.shape[:-1]


def _weighted(vals: np.ndarray, w: np.ndarray) -> np.ndarray:
    """sum_i w_i vals[:, i, ...] with zero weights dropped so -inf propagates
    only from atoms of positive mass."""
    keep = w > 0
    v = vals[:, keep]
    wk = w[keep].reshape((1, -1) + (1,) * (v.ndim - 2))
    return (wk * v).sum(axis=1)


def _over_atoms(kernel, mu: Measure, z, out_tail: tuple = ()) -> np.ndarray:
    """Integrate kernel(z_i, w_j) against mu at each point of z."""
    Z, lead = _flat(z, mu.dim)
    P = mu.points

    def chunk(Zc):
        return _weighted(kernel(Zc[:, None, :], P[None, :, :]), mu.weights)

    out = parallel_map(chunk, Z, max(1, _PAIR_BUDGET // mu.size))
    return out.reshape(lead + out_tail)


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def eval_U(mu: Measure, z) -> np.ndarray:
    """U_mu(z) = int (1/2) log(|z - w|^2 / (1 + |w|^2)) dmu(w)."""
    mu = _complex_measure(mu)
    with np.errstate(invalid="ignore"):
        return _scalar(_over_atoms(kernel_K, mu, z))


def eval_V(mu: Measure, z, eps: float = 0.0) -> np.ndarray:
    """V_mu^eps(z) = int N_eps(z, w) dmu(w); eps = 0 gives V_mu."""
    mu = _complex_measure(mu)
    return _scalar(_over_atoms(lambda a, b: kernel_N(a, b, eps), mu, z))


def _homog_points(p) -> np.ndarray:
    return p.homog if isinstance(p, ProjectivePoint) else as_cvec(p)


def eval_G(mu: Measure, p) -> np.ndarray:
    """G_mu(p) = int (1/2) log(|zeta ^ eta|^2 / (|zeta|^2 |eta|^2)) dmu(eta).

    ``mu`` holds homogeneous vectors in C^{n+1}; ``p`` is a ProjectivePoint
    or an array of homogeneous vectors.
    """
    Z = _homog_points(p)
    if Z.shape[-1] != mu.dim:
        raise ValueError(f"dimension mismatch: {Z.shape[-1]} vs {mu.dim}")
    return _scalar(_over_atoms(kernel_G, mu, Z))


def grad_V(field: PotentialField, z) -> np.ndarray:
    """Holomorphic gradient d(V_mu^eps + phi)/dz_m."""
    if not field.eps > 0:
        raise ValueError("derivatives require eps > 0")
    mu = field.measure
    g = _over_atoms(lambda a, b: grad_N_eps(a, b, field.eps), mu, z, (mu.dim,))
    if field.twist is not None:
        g = g + field.twist.grad(as_cvec(z))
    return g


def hessian_V(field: PotentialField, z) -> np.ndarray:
    """Complex Hessian d^2(V_mu^eps + phi)/dz_j dzbar_k, Hermitian."""
    if not field.eps > 0:
        raise ValueError("derivatives require eps > 0")
    mu = field.measure
    H = _over_atoms(lambda a, b: hessian_N_eps(a, b, field.eps), mu, z, (mu.dim, mu.dim))
    if field.twist is not None:
        H = H + field.twist.hess(as_cvec(z))
    return H


def grad_norm(field: PotentialField, z) -> np.ndarray:
    """|d V| = (sum_m |dV/dz_m|^2)^(1/2); the real gradient has norm 2|d V|."""
    return np.sqrt(norm_sq(grad_V(field, z)))


# ----------------------------------------------------------------------------
# derivative bounds


def _riesz_pointwise(mu: Measure, z, alpha: float) -> np.ndarray:
    Z, lead = _flat(z, mu.dim)

    def chunk(Zc):
        d2 = norm_sq(Zc[:, None, :] - mu.points[None, :, :])
        with np.errstate(divide="ignore"):
            return (mu.weights * d2 ** (-alpha / 2)).sum(axis=1)

    return parallel_map(chunk, Z, max(1, _PAIR_BUDGET // mu.size)).reshape(lead)


def gradient_bound(mu: Measure, z) -> np.ndarray:
    """sqrt2/2 + (sqrt2/2)(1 + |z|) J_{mu,1}(z), an upper bound for |d V_mu^eps|."""
    mu = _complex_measure(mu)
    r = np.sqrt(norm_sq(as_cvec(z)))
    c = math.sqrt(2.0) / 2.0
    return c + c * (1.0 + r) * _riesz_pointwise(mu, z, 1.0)


def hessian_entry_bound(mu: Measure, z) -> np.ndarray:
    """2 + 2(1 + |z|^2) J_{mu,2}(z), an upper bound for each |H_jk| of V_mu^eps.

    From |H_jk(N_eps(., w))| <= (1 + |w|^2) / |z - w|^2 and
    1 + |w|^2 <= 2(1 + |z|^2) + 2|z - w|^2.
    """
    mu = _complex_measure(mu)
    return 2.0 + 2.0 * (1.0 + norm_sq(as_cvec(z))) * _riesz_pointwise(mu, z, 2.0)


# ----------------------------------------------------------------------------
# Monge-Ampere densities


def elementary_symmetric(lam: np.ndarray, k: int) -> np.ndarray:
    """sigma_k over the last axis."""
    lam = np.asarray(lam)
    e = np.zeros(lam.shape[:-1] + (k + 1,), dtype=lam.dtype)
    e[..., 0] = 1.0
    for i in range(lam.shape[-1]):
        x = lam[..., i : i + 1]
        e[..., 1:] = e[..., 1:] + x * e[..., :-1]
    return e[..., k]


@dataclass(frozen=True)
class DensityResult:
    density: np.ndarray
    clamped: np.ndarray  # True where negative eigenvalues were set to 0


def hessian_density(H: np.ndarray, k: int | None = None) -> DensityResult:
    """k-Hessian density cma(n) sigma_k(lambda) / binom(n, k) of Hermitian H.

    Negative eigenvalues (below -1e-12 relative) are clamped at 0 and
    flagged.  For k = n with nothing clamped the determinant is used.
    """
    H = np.asarray(H)
    n = H.shape[-1]
    k = n if k is None else k
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}]")
    lam = np.linalg.eigvalsh(H)
    scale = np.maximum(1.0, np.abs(lam).max(axis=-1))
    clamped = lam.min(axis=-1) < -1e-12 * scale
    lam_c = np.maximum(lam, 0.0)
    if k == n:
        det = np.real(np.linalg.det(H))
        val = np.where(clamped, np.prod(lam_c, axis=-1), np.maximum(det, 0.0))
    else:
        val = elementary_symmetric(lam_c, k) / math.comb(n, k)
    return DensityResult(cma(n) * val, clamped)


def ma_density(field: PotentialField, z, k: int | None = None, return_clamped: bool = False):
    """Density of (dd^c V)^k ^ beta^(n-k) with respect to Lebesgue measure.

    ``k`` defaults to n, the Monge-Ampere density cma(n) det(H).
    """
    res = hessian_density(hessian_V(field, z), k)
    if np.any(res.clamped):
        log.warning("ma_density: clamped negative Hessian eigenvalues at %d points", int(np.sum(res.clamped)))
    dens = _scalar(res.density)
    return (dens, res.clamped) if return_clamped else dens


def mixed_discriminant(mats: Sequence[np.ndarray]) -> np.ndarray:
    """D(A_1, ..., A_n) = (1/n!) sum over permutations s of det(C_s), where
    column j of C_s is column j of A_{s(j)}.

    Normalized so that D(A, ..., A) = det A; symmetric and multilinear.
    Broadcasts over leading axes of the matrices.
    """
    mats = [np.asarray(A) for A in mats]
    if not mats:
        raise ValueError("need at least one matrix")
    n = mats[0].shape[-1]
    if len(mats) != n:
        raise ValueError(f"need {n} matrices of size {n}, got {len(mats)}")
    for A in mats:
        if A.shape[-2:] != (n, n):
            raise ValueError("size mismatch among matrices")
    total = 0.0
    for perm in itertools.permutations(range(n)):
        C = np.stack([mats[perm[j]][..., :, j] for j in range(n)], axis=-1)
        total = total + np.linalg.det(C)
    return total / math.factorial(n)


def mixed_ma_density(hessians: Sequence[np.ndarray]) -> np.ndarray:
    """Density of dd^c u_1 ^ ... ^ dd^c u_n from the Hessians of the u_i."""
    n = np.asarray(hessians[0]).shape[-1]
    return cma(n) * np.real(mixed_discriminant(hessians))


def ma_density_expansion(mu: Measure, z, eps: float) -> float:
    """(dd^c V_mu^eps)^n density at z expanded over atoms:

        cma(n) sum_{i_1..i_n} c_{i_1} ... c_{i_n} D(H_{i_1}, ..., H_{i_n}),

    with H_i the Hessian of N_eps(., w_i).  Cost m^n for m atoms.
    """
    if not eps > 0:
        raise ValueError("derivatives require eps > 0")
    mu = _complex_measure(mu)
    z = as_cvec(z)
    n = mu.dim
    Hs = hessian_N_eps(z[None, :], mu.points, eps)
    c = mu.weights
    terms = []
    for idx in itertools.product(range(mu.size), repeat=n):
        coef = math.prod(c[i] for i in idx)
        if coef == 0.0:
            continue
        terms.append(coef * float(np.real(mixed_discriminant([Hs[i] for i in idx]))))
    return cma(n) * math.fsum(terms)


def dirac_ma_total_mass(w, eps: float, r_max: float = 1e4) -> float:
    """Integral over C^n of the density of (dd^c N_eps(., w))^n."""
    if not eps > 0:
        raise ValueError("derivatives require eps > 0")
    w = as_cvec(w)
    n = w.size

    def density(Z):
        return cma(n) * np.real(np.linalg.det(hessian_N_eps(Z, w, eps)))

    return total_mass_cn(density, w, eps, r_max=r_max)


# ----------------------------------------------------------------------------
# atoms


@dataclass(frozen=True)
class AtomMass:
    eps: float
    radius: float
    mass: float


def atom_mass_diagnostic(
    mu: Measure,
    a,
    eps_list,
    r_of_eps: Callable[[float], float] | None = None,
    twist: Twist | None = None,
    quad: BallQuad = BallQuad(),
) -> list[AtomMass]:
    """Monge-Ampere mass of V_mu^eps (+ twist) in B(a, r(eps)) for each eps.

    An atom of mass c at a keeps this at least about c^n as eps decreases;
    for atomless measures it tends to 0 once r(eps) falls well below the
    scale of the support.  ``eps_list`` must be descending; r(eps) = 10 eps
    by default.  The product rule is centred at ``a``: sharp density peaks
    of other atoms inside the ball are integrated less accurately.
    """
    eps_list = [float(e) for e in eps_list]
    if any(e <= 0 for e in eps_list):
        raise ValueError("derivatives require eps > 0")
    if any(b >= a_ for a_, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly descending")
    r_of_eps = r_of_eps or (lambda e: 10.0 * e)
    mu = _complex_measure(mu)
    rows = []
    for e in eps_list:
        fld = PotentialField(mu, e, twist)
        r = float(r_of_eps(e))
        m = ball_mass(lambda Z: ma_density(fld, Z), a, r, quad)
        rows.append(AtomMass(e, r, m))
    return rows


# ----------------------------------------------------------------------------
# Robin function


@dataclass(frozen=True)
class RobinEstimate:
    """Robin value at xi: ``value`` is the extrapolated limit, ``raw`` holds
    u(lambda xi) - log(lambda) on the lambda grid."""

    value: float
    raw: tuple
    lambdas: tuple
    small_lambda: bool


def robin_estimate(mu: Measure, xi, lambdas, kind: str = "V", eps: float = 0.0) -> RobinEstimate:
    """Estimate rho(xi) = lim (u(lambda xi) - log|lambda xi|) for u = V_mu or U_mu.

    The deviation has an expansion in powers of 1/lambda, so the raw values
    are fitted by rho + c_1/lambda + c_2/lambda^2 (fewer terms for short
    grids) and the constant term is returned.  ``small_lambda`` is set when
    some lambda is below 10 times the support radius.
    """
    mu = _complex_measure(mu)
    xi = as_cvec(xi)
    if xi.shape != (mu.dim,):
        raise ValueError(f"xi must have shape ({mu.dim},)")
    r = math.sqrt(float(norm_sq(xi)))
    if abs(r - 1.0) > 1e-12:
        raise ValueError("xi must be a unit vector")
    lam = np.asarray(lambdas, dtype=float).ravel()
    if lam.size == 0 or np.any(lam <= 0) or np.any(np.diff(lam) <= 0):
        raise ValueError("lambdas must be positive and ascending")
    if kind == "V":
        vals = eval_V(mu, lam[:, None] * xi, eps)
    elif kind == "U":
        vals = eval_U(mu, lam[:, None] * xi)
    else:
        raise ValueError("kind must be 'U' or 'V'")
    raw = np.asarray(vals) - np.log(lam)
    terms = min(2, lam.size - 1)
    if terms == 0:
        value = float(raw[-1])
    else:
        A = np.vstack([lam ** (-j) for j in range(terms + 1)]).T
        coef, *_ = np.linalg.lstsq(A, raw, rcond=None)
        value = float(coef[0])
    small = bool(lam.min() < 10.0 * mu.support_radius())
    return RobinEstimate(value, tuple(float(x) for x in raw), tuple(float(x) for x in lam), small)


def robin_limit(mu: Measure, xi, kind: str = "V") -> float:
    """Exact Robin function at a unit vector xi.

    For V_mu it is (1/2) int log((1 + |xi ^ w|^2) / (1 + |w|^2)) dmu(w); for
    U_mu it is the constant -(1/2) int log(1 + |w|^2) dmu(w).  The first is
    never below the second.
    """
    mu = _complex_measure(mu)
    if kind == "U":
        return -0.5 * log_moment(mu)
    if kind != "V":
        raise ValueError("kind must be 'U' or 'V'")
    xi = as_cvec(xi)
    P = mu.points
    t = np.log1p(wedge_norm_sq(xi[None, :], P)) - np.log1p(norm_sq(P))
    return 0.5 * math.fsum(mu.weights * t)


# ----------------------------------------------------------------------------
# sphere means and charts


def sphere_mean(mu: Measure, kind: str = "U", radius: float = 1.0, eps: float = 0.0) -> float:
    """Quadrature mean of U_mu or V_mu^eps over |z| = radius."""
    mu = _complex_measure(mu)
    if kind == "U":
        f = lambda Z: eval_U(mu, Z)  # noqa: E731
    elif kind == "V":
        f = lambda Z: eval_V(mu, Z, eps)  # noqa: E731
    else:
        raise ValueError("kind must be 'U' or 'V'")
    return sphere_average(f, mu.dim, radius)


@dataclass(frozen=True)
class ChartPiece:
    """Part of a projective measure living in chart U_k, in affine coordinates."""

    mass: float
    chart: int
    measure: Measure = field(repr=False)


def localize(mu: Measure) -> list[ChartPiece]:
    """Split a measure on P^n into chart pieces.

    Each atom goes to the chart of its largest homogeneous coordinate, so
    its affine coordinates are bounded by 1.  Then
    G_mu = sum_j m_j (V_{mu_j} - (1/2) log(1 + |z^(j)|^2)).
    """
    H = normalize_homog(mu.points)
    k_of = np.argmax(np.abs(H), axis=1)
    pieces = []
    for k in np.unique(k_of):
        sel = k_of == k
        m = math.fsum(mu.weights[sel])
        Z = chart_coords(H[sel], int(k))
        pieces.append(ChartPiece(m, int(k), Measure(Z, mu.weights[sel] / m, mu.kind)))
    return pieces


def eval_G_localized(pieces: Sequence[ChartPiece], p) -> np.ndarray:
    """G_mu(p) assembled from affine potentials of the chart pieces.

    Raises ChartDomainError when p misses one of the charts used.
    """
    P = _homog_points(p)
    total = 0.0
    for piece in pieces:
        z = chart_coords(P, piece.chart)
        total = total + piece.mass * (eval_V(piece.measure, z) - fs_potential(z))
    return _scalar(total)


__all__ = [
    "AtomMass",
    "ChartDomainError",
    "ChartPiece",
    "DensityResult",
    "PotentialField",
    "RobinEstimate",
    "Twist",
    "atom_mass_diagnostic",
    "check_twist",
    "dirac_ma_total_mass",
    "elementary_symmetric",
    "eval_G",
    "eval_G_localized",
    "eval_U",
    "eval_V",
    "fubini_study_twist",
    "grad_V",
    "grad_norm",
    "gradient_bound",
    "hessian_V",
    "hessian_density",
    "hessian_entry_bound",
    "localize",
    "ma_density",
    "ma_density_expansion",
    "mixed_discriminant",
    "mixed_ma_density",
    "quadratic_twist",
    "robin_estimate",
    "robin_limit",
    "sphere_mean",
]
