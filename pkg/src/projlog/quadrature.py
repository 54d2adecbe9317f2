"""Integration backends: box grids, Monte Carlo and radial rules on P^n,
spherical product rules and ball masses in C^n.

Volumes on P^n are normalized to total mass 1.  In polar coordinates about
a point, the Fubini-Study volume has the radial density
A(r) = c_n sin^{2n-2}(r/sqrt2) sin(sqrt2 r) on [0, pi/sqrt2]; the substitution
v = sin^2(r/sqrt2) turns it into n v^{n-1} dv on [0, 1], so c_n = n/sqrt2.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .geometry import normalize_homog

log = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
THREADS_ENV = "PROJLOG_THREADS"


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def parallel_map(fn: Callable[[np.ndarray], np.ndarray], X: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Apply ``fn`` to row-chunks of ``X`` and concatenate in row order.

    Chunks run on a thread pool sized by the PROJLOG_THREADS variable; the
    output order never depends on scheduling.
    """
    pieces = [X[s : s + chunk] for s in range(0, X.shape[0], chunk)]
    if not pieces:
        return np.empty((0,))
    workers = thread_count()
    if workers == 1 or len(pieces) == 1:
        out = [fn(p) for p in pieces]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            out = list(ex.map(fn, pieces))
    return np.concatenate(out, axis=0)


# ----------------------------------------------------------------------------
# box grids

@dataclass(frozen=True)
class GridSpec:
    """Midpoint grid on a box in R^d."""

    center: tuple
    half_widths: tuple
    points_per_axis: int

    def __post_init__(self):
        c = tuple(float(x) for x in np.atleast_1d(self.center))
        h = tuple(float(x) for x in np.atleast_1d(self.half_widths))
        if len(h) == 1 and len(c) > 1:
            h = h * len(c)
        if len(c) != len(h):
            raise ValueError("center and half_widths differ in length")
        if any(x <= 0 for x in h):
            raise ValueError("half-widths must be positive")
        if self.points_per_axis < 2:
            raise ValueError("points_per_axis must be >= 2")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "half_widths", h)

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def cell_volume(self) -> float:
        return math.prod(2 * h / self.points_per_axis for h in self.half_widths)

    @property
    def volume(self) -> float:
        return math.prod(2 * h for h in self.half_widths)

    def axes(self) -> list[np.ndarray]:
        m = self.points_per_axis
        return [c - h + (2 * h / m) * (np.arange(m) + 0.5) for c, h in zip(self.center, self.half_widths)]

    def nodes(self) -> np.ndarray:
        """All midpoints, shape (m**d, d), row-major over the axes."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=-1)


def grid_integrate(f, spec: GridSpec, return_excluded: bool = False, chunk: int = 65536):
    """Midpoint Riemann sum of ``f`` over the box.

    ``f`` maps an (m, d) array of points to m values.  Non-finite node values
    are dropped and counted; if every node is dropped a ValueError is raised.
    """
    vals = parallel_map(lambda X: np.asarray(f(X), dtype=float), spec.nodes(), chunk)
    good = np.isfinite(vals)
    excluded = int(vals.size - good.sum())
    if excluded == vals.size:
        raise ValueError("integrand is non-finite at every node")
    if excluded:
        log.info("grid_integrate: excluded %d non-finite nodes", excluded)
    total = math.fsum(vals[good]) * spec.cell_volume
    return (total, excluded) if return_excluded else total


def lp_norm(f, spec: GridSpec, p: float, return_excluded: bool = False):
    """Grid L^p norm (integral of |f|^p)^(1/p)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    total, excl = grid_integrate(lambda X: np.abs(f(X)) ** p, spec, return_excluded=True)
    val = total ** (1.0 / p)
    return (val, excl) if return_excluded else val


# ----------------------------------------------------------------------------
# P^n

def sample_pn(n: int, N: int, rng: np.random.Generator) -> np.ndarray:
    """N Fubini-Study uniform points of P^n as unit vectors in C^{n+1}."""
    g = rng.standard_normal((N, n + 1)) + 1j * rng.standard_normal((N, n + 1))
    return normalize_homog(g)


def mc_integrate_pn(f, n: int, N: int, seed: int) -> tuple[float, float]:
    """Monte Carlo mean of ``f`` over P^n with its standard error.

    ``f`` takes an (N, n+1) array of unit homogeneous vectors.
    """
    if N < 100:
        raise ValueError("N must be >= 100")
    pts = sample_pn(n, N, np.random.default_rng(seed))
    vals = np.asarray(f(pts), dtype=float)
    mean = math.fsum(vals) / N
    se = float(np.std(vals, ddof=1)) / math.sqrt(N)
    return mean, se


def radial_density(r, n: int) -> np.ndarray:
    """A(r) normalized to unit mass on [0, pi/sqrt2]."""
    r = np.asarray(r, dtype=float)
    return (n / SQRT2) * np.sin(r / SQRT2) ** (2 * n - 2) * np.sin(SQRT2 * r)


def _v_to_r(v):
    return SQRT2 * np.arcsin(np.sqrt(np.clip(v, 0.0, 1.0)))


@dataclass(frozen=True)
class RadialRule:
    """Gauss-Jacobi rule for integrals against A(r) dr on P^n.

    Nodes come from the weight v^{n-1} on v = sin^2(r/sqrt2) in [0, 1]; the
    rule is exact for polynomials of degree < 2m in cos(sqrt2 r) = 1 - 2v.
    """

    m: int
    n: int

    @property
    def v_nodes_weights(self) -> tuple[np.ndarray, np.ndarray]:
        x, wx = roots_jacobi(self.m, 0.0, float(self.n - 1))
        v = 0.5 * (1.0 + x)
        # int_0^1 n v^{n-1} h dv = n / 2^n * int (1+x)^{n-1} h dx
        return v, wx * self.n / 2.0**self.n

    @property
    def nodes(self) -> np.ndarray:
        return _v_to_r(self.v_nodes_weights[0])

    @property
    def weights(self) -> np.ndarray:
        return self.v_nodes_weights[1]

    def integrate(self, g) -> float:
        return math.fsum(self.weights * np.asarray(g(self.nodes), dtype=float))


def _graded_panels(n_panels: int, q: float) -> np.ndarray:
    """Breakpoints on [0, 1] refined geometrically toward both ends."""
    left = q ** np.arange(n_panels, 0, -1) * 0.5
    return np.concatenate([[0.0], left, [0.5], 1.0 - left[::-1], [1.0]])


@lru_cache(maxsize=None)
def _graded_rule(order: int, n_panels: int, q: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(order)
    br = _graded_panels(n_panels, q)
    a, b = br[:-1, None], br[1:, None]
    nodes = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
    weights = (0.5 * (b - a) * w).ravel()
    return nodes, weights


def radial_integrate_pn(g, n: int, order: int = 20, n_panels: int = 40, q: float = 0.25) -> float:
    """Integral of g(r) A(r) dr over [0, pi/sqrt2], for the unit-mass A.

    Works in v = sin^2(r/sqrt2), where the integral is int_0^1 n v^{n-1} g dv,
    with composite Gauss-Legendre panels graded geometrically toward both
    endpoints so that integrable logarithmic singularities there (such as
    log sin(r/sqrt2) at r = 0) are resolved.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    v, w = _graded_rule(order, n_panels, q)
    vals = n * v ** (n - 1) * np.asarray(g(_v_to_r(v)), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("radial quadrature produced non-finite values")
    return math.fsum(w * vals)


@lru_cache(maxsize=None)
def alpha_n(n: int) -> float:
    """alpha_n = -int log sin(r/sqrt2) A(r) dr; the radial quadrature gives 1/(2n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return -radial_integrate_pn(lambda r: np.log(np.sin(r / SQRT2)), n)


def cma(n: int) -> float:
    """Monge-Ampere normalization 2^n n! / pi^n (for d^c = (i/2pi)(dbar - d))."""
    return 2.0**n * math.factorial(n) / math.pi**n


# ----------------------------------------------------------------------------
# spheres and balls in C^n

def _simplex_rule(n: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Product rule for the uniform probability measure on the simplex
    {t in R^n_{>=0}: sum t = 1} via stick breaking."""
    if n == 1:
        return np.ones((1, 1)), np.ones(1)
    # first coordinate has density (n-1)(1-u)^{n-2} on [0, 1]
    x, wx = roots_jacobi(m, float(n - 2), 0.0)
    u = 0.5 * (1.0 + x)
    wu = wx * (n - 1) / 2.0 ** (n - 1)
    sub_t, sub_w = _simplex_rule(n - 1, m)
    first = np.repeat(u, sub_t.shape[0])[:, None]
    rest = ((1.0 - u)[:, None, None] * sub_t[None, :, :]).reshape(-1, n - 1)
    return np.hstack([first, rest]), np.outer(wu, sub_w).ravel()


_DEFAULT_PHASES = {1: 32, 2: 16, 3: 8}


@lru_cache(maxsize=None)
def sphere_rule(n: int, m_moduli: int = 8, m_phase: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Nodes on the unit sphere of C^n with weights summing to 1.

    Uses that (|z_1|^2, ..., |z_n|^2) is uniform on the simplex and the
    phases are independent and uniform for the normalized surface measure.
    The phase rule is the periodic trapezoid rule; ``m_phase`` defaults to
    32, 16, 8 phases per coordinate for n = 1, 2, 3 (6 beyond).
    """
    if m_phase is None:
        m_phase = _DEFAULT_PHASES.get(n, 6)
    t, wt = _simplex_rule(n, m_moduli)
    theta = 2 * np.pi * np.arange(m_phase) / m_phase
    ph = np.stack(np.meshgrid(*([theta] * n), indexing="ij"), axis=-1).reshape(-1, n)
    z = np.sqrt(t)[:, None, :] * np.exp(1j * ph)[None, :, :]
    w = np.repeat(wt, ph.shape[0]) / ph.shape[0]
    nodes = z.reshape(-1, n)
    nodes.setflags(write=False)
    w.setflags(write=False)
    return nodes, w


def sphere_average(f, n: int, radius: float = 1.0, center=None, m_moduli: int = 8, m_phase: int | None = None) -> float:
    """Mean of ``f`` over the sphere |z - center| = radius in C^n."""
    nodes, w = sphere_rule(n, m_moduli, m_phase)
    c = np.zeros(n, dtype=complex) if center is None else np.asarray(center, dtype=complex)
    vals = np.asarray(f(c + radius * nodes), dtype=float)
    return math.fsum(w * vals)


def unit_ball_volume(d: int) -> float:
    """Volume tau_d of the unit ball in R^d."""
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


@dataclass(frozen=True)
class BallQuad:
    """Product rule parameters for ball and shell integrals."""

    n_radial: int = 48
    m_moduli: int = 8
    m_phase: int | None = None


def shell_mass(density, center, r_in: float, r_out: float, quad: BallQuad = BallQuad(), chunk: int = 8192) -> float:
    """Integral of ``density`` over r_in <= |z - center| < r_out in C^n.

    ``density`` maps an (m, n) complex array to m values (per unit Lebesgue
    volume of R^{2n}).  Radial Gauss-Legendre nodes times the spherical rule.
    """
    if not 0 <= r_in < r_out:
        raise ValueError("need 0 <= r_in < r_out")
    c = np.atleast_1d(np.asarray(center, dtype=complex))
    n = c.size
    d = 2 * n
    x, wx = roots_legendre(quad.n_radial)
    rho = 0.5 * (r_out - r_in) * x + 0.5 * (r_out + r_in)
    wr = 0.5 * (r_out - r_in) * wx * rho ** (d - 1) * d * unit_ball_volume(d)
    s_nodes, s_w = sphere_rule(n, quad.m_moduli, quad.m_phase)
    pts = (c + rho[:, None, None] * s_nodes[None, :, :]).reshape(-1, n)
    vals = parallel_map(lambda Z: np.asarray(density(Z), dtype=float), pts, chunk)
    return math.fsum((np.outer(wr, s_w).ravel() * vals))


def ball_mass(density, center, r: float, quad: BallQuad = BallQuad()) -> float:
    """Integral of ``density`` over the ball B(center, r) in C^n."""
    if r <= 0:
        raise ValueError("radius must be positive")
    return shell_mass(density, center, 0.0, r, quad)


def total_mass_cn(density, center, eps: float, r_max: float = 1e4, decades_per_panel: float = 0.5,
                  order: int = 12, m_moduli: int = 8, m_phase: int | None = None) -> float:
    """Integral of ``density`` over C^n in polar coordinates about ``center``.

    Radii from eps*1e-6 to r_max on log-spaced composite Gauss-Legendre
    panels; the inner ball is negligible for bounded densities and the
    outer tail for densities decaying like |z|^{-2n-2}.
    """
    lo, hi = math.log(eps * 1e-6), math.log(r_max)
    n_pan = max(1, math.ceil((hi - lo) / (decades_per_panel * math.log(10))))
    br = np.linspace(lo, hi, n_pan + 1)
    x, wx = roots_legendre(order)
    s = (0.5 * (br[1:, None] - br[:-1, None]) * x + 0.5 * (br[1:, None] + br[:-1, None])).ravel()
    ws = (0.5 * (br[1:, None] - br[:-1, None]) * wx).ravel()
    c = np.atleast_1d(np.asarray(center, dtype=complex))
    n = c.size
    d = 2 * n
    rho = np.exp(s)
    wr = ws * rho * rho ** (d - 1) * d * unit_ball_volume(d)
    s_nodes, s_w = sphere_rule(n, m_moduli, m_phase)
    pts = (c + rho[:, None, None] * s_nodes[None, :, :]).reshape(-1, n)
    vals = parallel_map(lambda Z: np.asarray(density(Z), dtype=float), pts, 8192)
    return math.fsum(np.outer(wr, s_w).ravel() * vals)
