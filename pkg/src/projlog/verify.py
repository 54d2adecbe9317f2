"""Property suites that exercise the library's identities, bounds and
dichotomies at desk scale.

Each check reports the measured quantity against its tolerance.  Reports
contain no timings, so a fixed seed gives byte-identical output.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import (
    affine_lagrange_sides,
    chart_coords,
    chart_transition,
    hermitian_dot,
    homog_from_chart,
    lagrange_rhs,
    norm_sq,
    normalize_homog,
    projective_sine_distance,
    wedge_norm_sq,
)
from .kernels import HESSIAN_ENTRY_CONST, grad_N_eps, hessian_N_eps, kernel_K, kernel_N
from .measures import FamilySpec, cloud, dimension_estimate, dirac, make_atomic, sample_family
from .potentials import (
    PotentialField,
    atom_mass_diagnostic,
    dirac_ma_total_mass,
    eval_G,
    gradient_bound,
    grad_norm,
    hessian_V,
    hessian_entry_bound,
    ma_density,
    ma_density_expansion,
    sphere_mean,
)
from .quadrature import BallQuad, alpha_n, ball_mass, mc_integrate_pn
from .riesz import cavalieri_J, critical_exponents, lp_threshold_probe, riesz_J

SUITES = ("geometry", "kernels", "potentials", "riesz")

#: eps schedule and quadrature for the atomless segment-cloud diagnostic
SEGMENT_EPS_SCHEDULE = (0.02, 0.01, 0.005)
SEGMENT_QUAD = BallQuad(n_radial=24, m_moduli=6, m_phase=8)
SQUARE_WINDOW = (0.05, 0.5)
CANTOR_WINDOW = (1e-4, 1e-1)
MC_SAMPLES = 100_000


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    tolerance: str
    passed: bool

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name:<52} measured={_num(self.measured):>13}  {self.tolerance}"


def _num(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.6e}"


def _le(name, value, tol) -> Check:
    return Check(name, float(value), f"<= {tol:g}", bool(value <= tol))


def _ge(name, value, bound) -> Check:
    return Check(name, float(value), f">= {bound:.6g}", bool(value >= bound))


def _crandn(rng, *shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# ----------------------------------------------------------------------------
# finite differences (used as independent oracles)


def fd_gradient(f: Callable, z: np.ndarray, h) -> np.ndarray:
    """d f / dz_m from central differences along the real and imaginary axes.

    ``z`` has shape (M, n); ``h`` is a scalar or a per-row step.
    """
    n = z.shape[-1]
    h = np.broadcast_to(np.asarray(h, dtype=float), z.shape[:-1])[..., None]
    out = np.empty(z.shape, dtype=complex)
    for m in range(n):
        e = np.zeros(n)
        e[m] = 1.0
        fx = (f(z + h * e) - f(z - h * e)) / (2 * h[..., 0])
        fy = (f(z + 1j * h * e) - f(z - 1j * h * e)) / (2 * h[..., 0])
        out[..., m] = 0.5 * (fx - 1j * fy)
    return out


def _d4(g: Callable, z: np.ndarray, e: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Fourth-order central difference of g along direction e."""
    hh = h[..., None]
    return (-g(z + 2 * hh * e) + 8 * g(z + hh * e) - 8 * g(z - hh * e) + g(z - 2 * hh * e)) / (12 * h[..., None])


def fd_hessian_from_gradient(g: Callable, z: np.ndarray, h) -> np.ndarray:
    """H_jk = d g_j / dzbar_k = (1/2)(d/dx_k + i d/dy_k) g_j, differenced."""
    n = z.shape[-1]
    h = np.broadcast_to(np.asarray(h, dtype=float), z.shape[:-1])
    H = np.empty(z.shape + (n,), dtype=complex)
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        H[..., :, k] = 0.5 * (_d4(g, z, e, h) + 1j * _d4(g, z, 1j * e, h))
    return H


# ----------------------------------------------------------------------------
# suites


def suite_geometry(rng: np.random.Generator) -> list[Check]:
    out = []
    worst1 = worst2 = worst3 = 0.0
    for d in range(2, 6):
        a, b = _crandn(rng, MC_SAMPLES, d), _crandn(rng, MC_SAMPLES, d)
        full = norm_sq(a) * norm_sq(b)
        # |a ^ b|^2 + |a . conj b|^2 = |a|^2 |b|^2
        worst1 = max(worst1, float(np.max(np.abs(wedge_norm_sq(a, b) + np.abs(hermitian_dot(a, b)) ** 2 - full) / full)))
        # normalized form: sine^2 + cosine^2 = 1 for unit representatives
        ua, ub = normalize_homog(a), normalize_homog(b)
        worst2 = max(worst2, float(np.max(np.abs(wedge_norm_sq(ua, ub) - lagrange_rhs(ua, ub)))))
        z, w = a[:, :-1], b[:, :-1]
        lhs, rhs = affine_lagrange_sides(z, w)
        worst3 = max(worst3, float(np.max(np.abs(lhs - rhs))))
    out.append(_le("lagrange identity, |a^b|^2 form (dims 2-5)", worst1, 1e-12))
    out.append(_le("lagrange identity, unit-vector form", worst2, 1e-12))
    out.append(_le("lagrange identity, affine form", worst3, 1e-12))

    zeta = _crandn(rng, 10_000, 3)
    rt = homog_from_chart(chart_coords(zeta, 1), 1)
    out.append(_le("chart round trip (wedge norm)", float(np.max(wedge_norm_sq(rt, normalize_homog(zeta)))), 1e-20))
    z0 = chart_coords(zeta, 0)
    direct = chart_coords(zeta, 1)
    out.append(_le("chart transition U_0 -> U_1", float(np.max(np.abs(chart_transition(z0, 0, 1) - direct))), 1e-12 * float(np.max(np.abs(direct)))))

    p, q, r = (normalize_homog(_crandn(rng, 10_000, 3)) for _ in range(3))
    _, dpq = projective_sine_distance(p, q)
    _, dqr = projective_sine_distance(q, r)
    _, dpr = projective_sine_distance(p, r)
    out.append(_le("sine distance triangle inequality excess", float(np.max(dpr - dpq - dqr)), 1e-9))
    return out


def suite_kernels(rng: np.random.Generator) -> list[Check]:
    out = []
    z, w = _crandn(rng, MC_SAMPLES, 2), _crandn(rng, MC_SAMPLES, 2)
    K, N = kernel_K(z, w), kernel_N(z, w)
    fs = 0.5 * np.log1p(norm_sq(z))
    gap_hi = 0.5 * np.log1p(np.minimum(norm_sq(z), norm_sq(w)))
    tol = 1e-12
    viol = int(np.sum(K > N + tol)) + int(np.sum(N > fs + tol))
    out.append(_le("sandwich K <= N <= log(1+|z|^2)/2 violations", viol, 0))
    viol = int(np.sum(N - K < -tol)) + int(np.sum(N - K > gap_hi + tol))
    out.append(_le("gap 0 <= N - K <= log(1+min)/2 violations", viol, 0))

    g_err = h_err = 0.0
    for n in (1, 2, 3):
        for eps in np.linspace(0.1, 1.0, 10):
            z, w = _crandn(rng, 100, n), _crandn(rng, 100, n)
            f = lambda t: kernel_N(t, w, eps)  # noqa: E731
            g = grad_N_eps(z, w, eps)
            gf = fd_gradient(f, z, 1e-5)
            g_err = max(g_err, float(np.max(np.max(np.abs(g - gf), axis=1) / np.max(np.abs(g), axis=1))))
            s = np.sqrt(norm_sq(z - w) + eps * eps)
            H = hessian_N_eps(z, w, eps)
            Hf = fd_hessian_from_gradient(lambda t: grad_N_eps(t, w, eps), z, 1e-3 * s)
            h_err = max(h_err, float(np.max(np.max(np.abs(H - Hf), axis=(1, 2)) / np.max(np.abs(H), axis=(1, 2)))))
    out.append(_le("gradient vs finite differences (rel, n=1..3)", g_err, 1e-6))
    out.append(_le("hessian vs finite differences (rel, n=1..3)", h_err, 1e-6))

    z, w = _crandn(rng, 10_000, 2), _crandn(rng, 10_000, 2)
    eps = rng.uniform(0.01, 1.0)
    H = hessian_N_eps(z, w, eps)
    out.append(_le("hessian hermitian defect", float(np.max(np.abs(H - np.conj(np.swapaxes(H, -1, -2))))), 0.0))
    out.append(_ge("hessian min eigenvalue (psh)", float(np.min(np.linalg.eigvalsh(H))), -1e-10))
    D = norm_sq(z - w) + wedge_norm_sq(z, w) + eps * eps
    ratio = np.max(np.abs(H), axis=(1, 2)) / (HESSIAN_ENTRY_CONST * (1 + norm_sq(w)) / D)
    out.append(_le("hessian entries / ((1+|w|^2)/D)", float(np.max(ratio)), 1.0))
    gn = np.sqrt(norm_sq(grad_N_eps(z, w, eps)))
    gb = (math.sqrt(2) / 2) * (1 + np.sqrt(norm_sq(w))) / np.sqrt(norm_sq(z - w))
    out.append(_le("|dN_eps| / ((sqrt2/2)(1+|w|)/|z-w|)", float(np.max(gn / gb)), 1.0))

    for n in (1, 2):
        for eps in (0.5, 0.1):
            w0 = 0.5 * _crandn(rng, n)
            m = dirac_ma_total_mass(w0, eps)
            out.append(_le(f"dirac MA total mass |m-1|, n={n}, eps={eps}", abs(m - 1.0), 0.02))
    eps = 0.1
    w0 = _crandn(rng, 1)
    fld = PotentialField(dirac(w0), eps)
    m = ball_mass(lambda Z: ma_density(fld, Z), w0, 10 * eps)
    out.append(_le("n=1 mass in B(w,10eps) vs 100/101", abs(m - 100 / 101), 1e-3))
    return out


def _segment_cloud(n_points: int, seed: int, dim: int = 2):
    return sample_family(FamilySpec("segment", n_points, seed=seed, dim=dim, field="complex"))


def _grid_slice(m: int, half: float, z2: complex) -> np.ndarray:
    t = np.linspace(-half, half, m)
    X, Y = np.meshgrid(t, t, indexing="ij")
    return np.stack([(X + 1j * Y).ravel(), np.full(m * m, z2)], axis=-1)


def suite_potentials(rng: np.random.Generator) -> list[Check]:
    out = []
    # derivative bounds on a 101^2 grid of the slice z_2 = 0.25
    grid = _grid_slice(101, 2.0, 0.25)
    measures = {
        "atom": dirac(np.array([0.3 + 0.1j, 0.2])),
        "two atoms": make_atomic(np.array([[0.3 + 0.1j, 0.2], [-0.5, 0.25 + 0.5j]]), [0.5, 0.5]),
        "segment cloud": _segment_cloud(500, int(rng.integers(2**31))),
    }
    for label, mu in measures.items():
        fld = PotentialField(mu, 0.05)
        g = grad_norm(fld, grid) / gradient_bound(mu, grid)
        H = np.max(np.abs(hessian_V(fld, grid)), axis=(1, 2)) / hessian_entry_bound(mu, grid)
        out.append(_le(f"gradient / bound on grid, {label}", float(np.max(g)), 1.0))
        out.append(_le(f"hessian entries / bound on grid, {label}", float(np.max(H)), 1.0))

    # multilinear expansion of the MA density
    mu = make_atomic(_crandn(rng, 3, 2), rng.dirichlet(np.ones(3)))
    worst = 0.0
    for _ in range(100):
        z, eps = _crandn(rng, 2), float(rng.uniform(0.05, 1.0))
        a = ma_density(PotentialField(mu, eps), z)
        b = ma_density_expansion(mu, z, eps)
        worst = max(worst, abs(a - b) / abs(b))
    out.append(_le("MA density vs mixed-discriminant expansion", worst, 1e-10))

    # atom dichotomy
    # b lies outside every ball so the radial rule about a stays accurate
    a, b = np.zeros(2, complex), np.array([3.0, 0.0], complex)
    mu = make_atomic(np.array([a, b]), [0.5, 0.5])
    rows = atom_mass_diagnostic(mu, a, [0.2, 0.1, 0.05])
    out.append(_ge("two atoms: min MA mass in B(a,10eps)", min(r.mass for r in rows), 0.25 * 0.9))
    cl = _segment_cloud(1000, int(rng.integers(2**31)))
    x = cl.points[np.argmin(np.abs(cl.points[:, 0] - 0.5))]
    rows = atom_mass_diagnostic(cl, x, SEGMENT_EPS_SCHEDULE, quad=SEGMENT_QUAD)
    out.append(_le(f"segment cloud: MA mass at eps={SEGMENT_EPS_SCHEDULE[-1]}", rows[-1].mass, 0.05))

    # normalization of G against the Fubini-Study volume, n = 2
    for i in range(3):
        m = i + 1
        mu_p = make_atomic(normalize_homog(_crandn(rng, m, 3)), rng.dirichlet(np.ones(m)))
        mean, se = mc_integrate_pn(lambda P: eval_G(mu_p, P), 2, MC_SAMPLES, int(rng.integers(2**31)))
        out.append(_le(f"|int G_mu dV + alpha_2| / SE, {m} atom(s)", abs(mean + alpha_n(2)) / se, 2.0))

    # sphere means
    worst = math.inf
    for _ in range(5):
        m = int(rng.integers(1, 6))
        mu = make_atomic(3.0 * _crandn(rng, m, 2) / 2, rng.dirichlet(np.ones(m)))
        worst = min(worst, sphere_mean(mu, "U"), sphere_mean(mu, "V"))
    out.append(_ge("min sphere mean of U, V over |z|=1", worst, -math.log(math.sqrt(5))))
    return out


def suite_riesz(rng: np.random.Generator) -> list[Check]:
    out = []
    measures = [
        dirac(np.zeros(2, complex)),
        make_atomic(_crandn(rng, 2, 2), [0.3, 0.7]),
        cloud(_crandn(rng, 50, 2)),
    ]
    worst = 0.0
    for mu in measures:
        for alpha in (1.0, 2.0):
            for _ in range(100):
                x = 2.0 * _crandn(rng, 2)
                j = float(riesz_J(mu, x, alpha))
                c = cavalieri_J(mu, x, alpha)
                worst = max(worst, abs(c - j) / j)
    out.append(_le("cavalieri vs direct Riesz potential (rel)", worst, 0.01))

    est = dimension_estimate(dirac(np.zeros(2)), 0.01, 0.1)
    out.append(_le("dimension of a Dirac mass", est.gamma, 0.0))
    sq = sample_family(FamilySpec("kplane", MC_SAMPLES, seed=int(rng.integers(2**31)), dim=2, kdim=2))
    est = dimension_estimate(sq, *SQUARE_WINDOW)
    out.append(_le("|dimension(square) - 2|", abs(est.gamma - 2.0), 0.15))
    ca = sample_family(FamilySpec("cantor_line", MC_SAMPLES, seed=int(rng.integers(2**31)), dim=1))
    est = dimension_estimate(ca, *CANTOR_WINDOW)
    out.append(_le("|dimension(cantor 1/3) - log2/log3|", abs(est.gamma - math.log(2) / math.log(3)), 0.1))

    expected = [
        ((0.0, 2), (4.0, 0.0, 2.0, 1.0)),
        ((1.0, 2), (math.inf, 1.0, 3.0, 1.5)),
    ]
    bad = 0
    for (g, n), vals in expected:
        r = critical_exponents(g, n)
        bad += sum(got != want for got, want in zip((r.p1_star, r.alpha_star, r.p2_star, r.q_star), vals))
    r = critical_exponents(2.0, 2)
    bad += (r.p2_star != math.inf) + (r.q_star != math.inf)
    bad += critical_exponents(1.0, 2, N=4, alpha=2.0).riesz_threshold != 3.0
    out.append(_le("critical exponent mismatches", bad, 0))

    res = lp_threshold_probe(dirac(np.zeros(2)), 1.0, [1.5, 3.0], [64, 128, 256, 512])
    last = {row.p: row.ratio for row in res.rows}
    out.append(Check("L^p probe at p=1.5 diagnosed bounded", last[1.5], "ratio < 1.1", res.diagnosis[1.5] == "bounded"))
    out.append(Check("L^p probe at p=3 diagnosed divergent", last[3.0], "ratio >= 1.1", res.diagnosis[3.0] == "divergent"))
    return out


def alpha_lines(seed: int) -> list[str]:
    """Cross-check of alpha_n between radial quadrature and Monte Carlo."""
    lines = []
    for n in (1, 2):
        a = normalize_homog(np.eye(n + 1)[0].astype(complex))
        mean, se = mc_integrate_pn(lambda P: eval_G(dirac(a), P), n, MC_SAMPLES, seed + n)
        q = alpha_n(n)
        ok = abs(-mean - q) <= 2 * se and abs(q - 1 / (2 * n)) <= 1e-6
        tag = "PASS" if ok else "FAIL"
        lines.append(
            f"{tag}  alpha_{n}: quadrature={q:.12f}  monte_carlo={-mean:.6f} +- {se:.6f}"
            f"  1/(2n)={1 / (2 * n):.12f}"
        )
    return lines


_SUITE_FUNCS = {
    "geometry": suite_geometry,
    "kernels": suite_kernels,
    "potentials": suite_potentials,
    "riesz": suite_riesz,
}


def run_suite(name: str, seed: int) -> list[Check]:
    if name not in _SUITE_FUNCS:
        raise KeyError(name)
    # one generator per suite so suites are independent of each other
    rng = np.random.default_rng([seed, SUITES.index(name)])
    return _SUITE_FUNCS[name](rng)


def run_verify(suite: str, seed: int = 0, stream=None) -> int:
    """Run a suite (or "all") and print the PASS/FAIL table.

    Returns 0 when every check passes, 1 otherwise and 2 for an unknown suite.
    """
    stream = stream or sys.stdout
    if suite != "all" and suite not in SUITES:
        print(f"error: unknown suite {suite!r}; choose from {', '.join(SUITES + ('all',))}", file=sys.stderr)
        return 2
    names = SUITES if suite == "all" else (suite,)
    failed = 0
    stream.write(f"verify suite={suite} seed={seed}\n")
    for name in names:
        stream.write(f"[{name}]\n")
        for chk in run_suite(name, seed):
            stream.write(chk.line() + "\n")
            failed += not chk.passed
    if suite == "all":
        stream.write("[constants]\n")
        for line in alpha_lines(seed):
            stream.write(line + "\n")
            failed += line.startswith("FAIL")
    stream.write(f"{'PASS' if failed == 0 else 'FAIL'}: {failed} failed\n")
    stream.flush()
    return 0 if failed == 0 else 1
