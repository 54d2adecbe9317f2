"""Riesz potentials, their radial (Cavalieri) form, L^p probes and the
critical integrability exponents attached to a concentration dimension."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import norm_sq
from .measures import Measure
from .quadrature import GridSpec, parallel_map

BOUNDED_RATIO = 1.1


def _distances(mu: Measure, x) -> np.ndarray:
    """|x - p_i| with x of shape (..., d) -> (..., m)."""
    x = np.asarray(x)
    if x.ndim == 1:
        x = x[None, :]
        return np.sqrt(norm_sq(x[:, None, :] - mu.points[None, :, :]))[0]
    return np.sqrt(norm_sq(x[..., None, :] - mu.points))


def riesz_J(mu: Measure, x, alpha: float) -> np.ndarray:
    """J_{mu,alpha}(x) = sum_i w_i |x - p_i|^{-alpha}; +inf on atoms.

    ``x`` may hold several points along leading axes.
    """
    if not 0 < alpha < mu.ambient_dim:
        raise ValueError(f"alpha must lie in (0, {mu.ambient_dim})")
    x = np.asarray(x)
    single = x.ndim == 1
    X = x[None, :] if single else x.reshape(-1, x.shape[-1])

    def chunk(Xc):
        d = np.sqrt(norm_sq(Xc[:, None, :] - mu.points[None, :, :]))
        with np.errstate(divide="ignore"):
            return (mu.weights * d ** (-alpha)).sum(axis=1)

    out = parallel_map(chunk, X, max(1, 500_000 // mu.size))
    return out[0] if single else out.reshape(x.shape[:-1])


def cavalieri_J(mu: Measure, x, alpha: float, r_max: float | None = None, quad_points: int = 4096) -> float:
    """J_{mu,alpha}(x) from alpha * int_0^inf mu(x, r) r^{-alpha-1} dr.

    mu(x, r) vanishes below the distance d_min to the support, so the
    integral runs over [d_min, r_max] with ``quad_points`` log-spaced midpoint
    nodes; above r_max, where mu(x, r) = 1, the tail is r_max^{-alpha}.
    Returns +inf when x lies on the support.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if quad_points < 64:
        raise ValueError("quad_points must be >= 64")
    d = _distances(mu, np.asarray(x))
    d_max = float(d.max())
    if r_max is None:
        r_max = 2.0 * d_max
    if d_max >= r_max:
        raise ValueError("support exceeds r_max")
    d_min = float(d.min())
    if d_min == 0.0:
        return math.inf
    edges = np.linspace(math.log(d_min), math.log(r_max), quad_points + 1)
    s = 0.5 * (edges[1:] + edges[:-1])
    ds = edges[1] - edges[0]
    r = np.exp(s)
    order = np.argsort(d)
    cum = np.concatenate([[0.0], np.cumsum(mu.weights[order])])
    mass = cum[np.searchsorted(d[order], r, side="left")]  # open ball
    body = alpha * math.fsum(mass * r ** (-alpha) * ds)
    return body + r_max ** (-alpha)


def _pos(x: float) -> float:
    return max(x, 0.0)


def _ratio(num: float, den_pos: float) -> float:
    if den_pos == 0.0:
        return math.inf
    return num / den_pos


@dataclass(frozen=True)
class ExponentReport:
    """Critical exponents for a measure of concentration dimension gamma on P^n.

    p1_star    W^{1,p} for 1 <= p < (2n - gamma) / (1 - gamma)_+
    alpha_star Holder continuity for exponents below
               1 - 2n (1 - gamma)_+ / (2n - gamma)
    p2_star    W^{2,p} for 1 < p < (2n - gamma) / (2 - gamma)_+
    q_star     Monge-Ampere density in L^q for 1 < q < (2n - gamma) / (n (2 - gamma)_+)
    """

    gamma: float
    n: int
    N: int
    p1_star: float
    alpha_star: float
    p2_star: float
    q_star: float
    alpha: float | None = None

    @property
    def riesz_threshold(self) -> float | None:
        """riesz_p_star at the stored alpha, if one was given."""
        return None if self.alpha is None else self.riesz_p_star(self.alpha)

    def riesz_p_star(self, alpha: float) -> float:
        """Riesz potential J_alpha in L^p_loc for 1 < p < (N - gamma) / (alpha - gamma)_+."""
        return _ratio(self.N - self.gamma, _pos(alpha - self.gamma))

    def as_dict(self) -> dict:
        d = {
            "gamma": self.gamma,
            "n": self.n,
            "N": self.N,
            "p1_star": self.p1_star,
            "alpha_star": self.alpha_star,
            "p2_star": self.p2_star,
            "q_star": self.q_star,
        }
        if self.alpha is not None:
            d["alpha"] = self.alpha
            d["riesz_p_star"] = self.riesz_threshold
        return d


def critical_exponents(gamma: float, n: int, N: int | None = None, alpha: float | None = None) -> ExponentReport:
    """Evaluate the critical exponents; a zero positive part gives +inf.

    ``N`` is the real ambient dimension (2n by default).
    """
    if N is None:
        N = 2 * n
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= gamma <= N:
        raise ValueError(f"gamma must lie in [0, {N}]")
    two_n = 2 * n
    p1 = _ratio(two_n - gamma, _pos(1.0 - gamma))
    if _pos(1.0 - gamma) == 0.0:
        a_star = 1.0
    else:
        a_star = 1.0 - two_n * _pos(1.0 - gamma) / (two_n - gamma)
    p2 = _ratio(two_n - gamma, _pos(2.0 - gamma))
    q = _ratio(two_n - gamma, n * _pos(2.0 - gamma))
    if alpha is not None and alpha <= 0:
        raise ValueError("alpha must be positive")
    return ExponentReport(float(gamma), n, N, p1, a_star, p2, q, alpha)


@dataclass(frozen=True)
class ProbeRow:
    p: float
    resolution: int
    norm: float
    ratio: float  # norm / norm at the previous resolution (nan for the first)
    power_ratio: float  # same for the integral of |J|^p
    excluded: int


@dataclass(frozen=True)
class ProbeResult:
    rows: list
    diagnosis: dict  # p -> "bounded" | "divergent"


def lp_threshold_probe(
    mu: Measure,
    alpha: float,
    p_list,
    resolutions,
    center=None,
    half_width: float = 1.0,
) -> ProbeResult:
    """Grid L^p norms of J_{mu,alpha} over a box under refinement.

    For each p, the midpoint-rule norm is computed at each resolution
    (points per axis, ascending).  The last refinement ratio decides:
    below 1.1 the norms are "bounded", otherwise "divergent".
    """
    res = [int(r) for r in resolutions]
    if any(b <= a for a, b in zip(res, res[1:])):
        raise ValueError("resolutions must be ascending")
    p_list = [float(p) for p in p_list]
    if any(p < 1 for p in p_list):
        raise ValueError("p must be >= 1")
    N = mu.ambient_dim
    if center is None:
        center = np.zeros(N)
    rows, diag = [], {}
    cache = {}
    for m in res:
        spec = GridSpec(tuple(center), (half_width,), m)
        X = spec.nodes()
        if mu.is_complex:
            X = X[:, 0::2] + 1j * X[:, 1::2]
        cache[m] = (riesz_J(mu, X, alpha), spec.cell_volume)
    for p in p_list:
        prev = None
        for m in res:
            J, vol = cache[m]
            good = np.isfinite(J)
            power = math.fsum(J[good] ** p) * vol
            norm = power ** (1.0 / p)
            ratio = norm / prev[0] if prev else math.nan
            pratio = power / prev[1] if prev else math.nan
            rows.append(ProbeRow(p, m, norm, ratio, pratio, int((~good).sum())))
            prev = (norm, power)
        last = rows[-1].ratio
        diag[p] = "bounded" if last < BOUNDED_RATIO else "divergent"
    return ProbeResult(rows, diag)
