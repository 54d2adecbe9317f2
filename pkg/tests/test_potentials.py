import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import crandn
from projlog.geometry import ChartDomainError, homog_from_chart, norm_sq, projective_sine_distance
from projlog.kernels import hessian_N_eps, kernel_K, kernel_N
from projlog.measures import dirac, make_atomic, mixture
from projlog.potentials import (
    PotentialField,
    Twist,
    atom_mass_diagnostic,
    dirac_ma_total_mass,
    elementary_symmetric,
    eval_G,
    eval_G_localized,
    eval_U,
    eval_V,
    fubini_study_twist,
    grad_V,
    gradient_bound,
    hessian_V,
    hessian_density,
    hessian_entry_bound,
    localize,
    ma_density,
    ma_density_expansion,
    mixed_discriminant,
    mixed_ma_density,
    quadratic_twist,
    robin_estimate,
    robin_limit,
    sphere_mean,
)
from projlog.quadrature import alpha_n, cma, mc_integrate_pn


def _atoms(rng, m, n, scale=1.0):
    return make_atomic(scale * crandn(rng, m, n), rng.dirichlet(np.ones(m)))


def _fd_gradient(f, z, h):
    g = np.zeros(z.size, complex)
    for m in range(z.size):
        e = np.zeros(z.size, complex)
        e[m] = h
        g[m] = 0.5 * ((f(z + e) - f(z - e)) - 1j * (f(z + 1j * e) - f(z - 1j * e))) / (2 * h)
    return g


def _fd_hessian_from_gradient(grad, z, h):
    n = z.size
    H = np.zeros((n, n), complex)
    for k in range(n):
        e = np.zeros(n, complex)
        e[k] = h
        dx = (grad(z + e) - grad(z - e)) / (2 * h)
        dy = (grad(z + 1j * e) - grad(z - 1j * e)) / (2 * h)
        H[:, k] = 0.5 * (dx + 1j * dy)
    return H


# ----------------------------------------------------------------------------
# values


def test_dirac_potentials_are_the_kernels(rng):
    w = crandn(rng, 2)
    z = crandn(rng, 30, 2)
    mu = dirac(w)
    assert np.array_equal(eval_U(mu, z), kernel_K(z, w))
    assert np.array_equal(eval_V(mu, z), kernel_N(z, w))
    assert np.array_equal(eval_V(mu, z, 0.2), kernel_N(z, w, 0.2))


def test_real_measures_are_promoted_to_complex():
    mu = dirac([1.0, 0.0])
    # |z - w|^2 = 3 and |z ^ w|^2 = 1 for z = (i, 1), w = (1, 0)
    assert eval_V(mu, np.array([1j, 1])) == pytest.approx(0.5 * math.log(4 / 2), rel=1e-14)


def test_potential_bounds_on_random_points(rng):
    mu = _atoms(rng, 7, 2)
    z = 3 * crandn(rng, 5000, 2)
    U, V = eval_U(mu, z), eval_V(mu, z)
    top = 0.5 * np.log1p(norm_sq(z))
    assert np.all(U <= V + 1e-12) and np.all(V <= top + 1e-12)


def test_regularized_potential_is_monotone_in_eps(rng):
    mu = _atoms(rng, 5, 2)
    z = crandn(rng, 500, 2)
    v = [eval_V(mu, z, e) for e in (1.0, 0.3, 0.1, 0.0)]
    assert all(np.all(a >= b) for a, b in zip(v, v[1:]))


def test_potential_is_minus_infinity_on_atoms_only_with_positive_weight(rng):
    P = crandn(rng, 3, 2)
    mu = make_atomic(P, [0.5, 0.5, 0.0])
    with np.errstate(divide="ignore"):
        assert eval_V(mu, P[0]) == -np.inf and eval_U(mu, P[1]) == -np.inf
    assert np.isfinite(eval_V(mu, P[2]))


def test_linearity_of_values_and_derivatives(rng):
    a, b = _atoms(rng, 3, 2), _atoms(rng, 4, 2)
    m = mixture([a, b], [0.3, 0.7])
    z = crandn(rng, 50, 2)
    eps = 0.2
    for f in (lambda mu: eval_U(mu, z), lambda mu: eval_V(mu, z, eps)):
        assert np.allclose(f(m), 0.3 * f(a) + 0.7 * f(b), rtol=0, atol=1e-12)
    for f in (grad_V, hessian_V):
        fa, fb, fm = (f(PotentialField(mu, eps), z) for mu in (a, b, m))
        assert np.allclose(fm, 0.3 * fa + 0.7 * fb, rtol=0, atol=1e-12)


def test_hessian_of_two_atoms_is_average(rng):
    w1, w2 = crandn(rng, 2), crandn(rng, 2)
    z, eps = crandn(rng, 2), 0.3
    H = hessian_V(PotentialField(make_atomic([w1, w2], [0.5, 0.5]), eps), z)
    expect = 0.5 * hessian_N_eps(z, w1, eps) + 0.5 * hessian_N_eps(z, w2, eps)
    assert np.allclose(H, expect, rtol=0, atol=1e-15)


# ----------------------------------------------------------------------------
# projective potential


def test_projective_dirac_examples():
    mu = make_atomic(np.array([[1, 0, 0j]]), [1.0])
    with np.errstate(divide="ignore"):
        assert eval_G(mu, np.array([2, 0, 0j])) == -np.inf
    assert eval_G(mu, np.array([0, 1, 1j])) == 0.0


def test_projective_potential_is_weighted_log_sine(rng):
    mu = make_atomic(crandn(rng, 6, 3), rng.dirichlet(np.ones(6)))
    p = crandn(rng, 100, 3)
    s = np.stack([projective_sine_distance(p, q)[0] for q in mu.points], axis=1)
    d = np.stack([projective_sine_distance(p, q)[1] for q in mu.points], axis=1)
    assert np.allclose(eval_G(mu, p), np.log(s) @ mu.weights, rtol=0, atol=1e-12)
    assert np.allclose(eval_G(mu, p), np.log(np.sin(d / math.sqrt(2))) @ mu.weights, rtol=0, atol=1e-12)
    assert np.all(eval_G(mu, p) <= 0)


def test_projective_potential_chart_identity(rng):
    W = crandn(rng, 5, 2)
    mu_aff = make_atomic(W, rng.dirichlet(np.ones(5)))
    mu_proj = make_atomic(homog_from_chart(W, 0), mu_aff.weights)
    z = crandn(rng, 200, 2)
    G = eval_G(mu_proj, homog_from_chart(z, 0))
    assert np.allclose(G, eval_V(mu_aff, z) - 0.5 * np.log1p(norm_sq(z)), rtol=0, atol=1e-12)


def test_localization_across_charts(rng):
    mu = make_atomic(crandn(rng, 9, 3), rng.dirichlet(np.ones(9)))
    pieces = localize(mu)
    assert math.fsum(p.mass for p in pieces) == pytest.approx(1.0, abs=1e-15)
    assert all(np.all(np.abs(p.measure.points) <= 1 + 1e-12) for p in pieces)
    P = crandn(rng, 100, 3)
    assert np.allclose(eval_G_localized(pieces, P), eval_G(mu, P), rtol=0, atol=1e-12)
    off_chart = np.zeros(3, complex)
    off_chart[(pieces[0].chart + 1) % 3] = 1
    with pytest.raises(ChartDomainError):
        eval_G_localized(pieces, off_chart)


@pytest.mark.parametrize("n", [1, 2])
def test_projective_potential_integrates_to_minus_alpha(n):
    a = np.zeros(n + 1, complex)
    a[0] = 1
    mu = make_atomic(a[None, :], [1.0])
    mean, se = mc_integrate_pn(lambda P: eval_G(mu, P), n, 100_000, seed=21)
    assert abs(mean + alpha_n(n)) <= 2 * se


def test_sphere_mean_lower_bound(rng):
    for _ in range(3):
        mu = _atoms(rng, 5, 2, 0.7)
        for kind in ("U", "V"):
            assert sphere_mean(mu, kind) >= -math.log(math.sqrt(5))
    with pytest.raises(ValueError):
        sphere_mean(mu, "W")


# ----------------------------------------------------------------------------
# derivatives


def test_derivatives_require_positive_eps(rng):
    fld = PotentialField(_atoms(rng, 2, 2))
    with pytest.raises(ValueError, match="derivatives require eps > 0"):
        grad_V(fld, np.zeros(2))
    with pytest.raises(ValueError, match="derivatives require eps > 0"):
        hessian_V(fld, np.zeros(2))
    with pytest.raises(ValueError):
        PotentialField(_atoms(rng, 2, 2), -1.0)


def test_gradient_at_dirac_atom_is_twist_gradient(rng):
    w = crandn(rng, 2)
    tw = quadratic_twist(0.5)
    g = grad_V(PotentialField(dirac(w), 0.1, tw), w)
    assert np.allclose(g, tw.grad(w), rtol=0, atol=1e-15)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_derivatives_match_finite_differences(n, rng):
    for twist in (None, fubini_study_twist(0.5)):
        for _ in range(5):
            fld = PotentialField(_atoms(rng, 4, n), 10 ** rng.uniform(-1, 0), twist)
            z = crandn(rng, n)
            g = grad_V(fld, z)
            g_fd = _fd_gradient(fld.value, z, 1e-5)
            assert np.linalg.norm(g - g_fd) <= 1e-6 * max(np.linalg.norm(g), 1.0)
            H = hessian_V(fld, z)
            H_fd = _fd_hessian_from_gradient(lambda x: grad_V(fld, x), z, 1e-4)
            assert np.max(np.abs(H - H_fd)) <= 1e-6 * max(np.max(np.abs(H)), 1.0)


def test_gradient_and_hessian_bounds_on_grid(rng):
    mus = [dirac([0.3 + 0.1j, -0.2j]), _atoms(rng, 2, 2), _atoms(rng, 40, 2)]
    x = np.linspace(-2, 2, 31)
    X, Y = np.meshgrid(x, x)
    z = np.stack([X.ravel() + 1j * Y.ravel(), np.full(X.size, 0.25 - 0.1j)], axis=1)
    for mu in mus:
        for eps in (0.3, 0.03):
            fld = PotentialField(mu, eps)
            g = np.sqrt(norm_sq(grad_V(fld, z)))
            assert np.all(g <= gradient_bound(mu, z))
            H = np.abs(hessian_V(fld, z)).max(axis=(-1, -2))
            assert np.all(H <= hessian_entry_bound(mu, z))


def test_twist_must_be_consistent():
    bad = quadratic_twist(1.0)
    bad = Twist(bad.value, lambda z: 2 * np.conj(z), bad.hess, "bad")
    with pytest.raises(ValueError, match="twist derivatives inconsistent"):
        PotentialField(dirac([0j]), 0.1, bad)


def test_hessian_is_psd_with_psh_twist(rng):
    fld = PotentialField(_atoms(rng, 5, 3), 0.05, fubini_study_twist())
    lam = np.linalg.eigvalsh(hessian_V(fld, crandn(rng, 500, 3)))
    assert lam.min() >= -1e-10 * np.abs(lam).max()


# ----------------------------------------------------------------------------
# Monge-Ampere densities


def test_one_dimensional_dirac_density_at_atom():
    w, eps = np.array([0.2 + 0.5j]), 0.07
    assert ma_density(PotentialField(dirac(w), eps), w) == pytest.approx(1 / (math.pi * eps**2), rel=1e-13)


@pytest.mark.parametrize("n,eps", [(1, 0.5), (1, 0.1), (2, 0.5), (2, 0.1)])
def test_dirac_total_mass_is_one(n, eps, rng):
    assert dirac_ma_total_mass(0.5 * crandn(rng, n), eps) == pytest.approx(1.0, abs=0.02)


def test_elementary_symmetric_matches_brute_force(rng):
    lam = rng.standard_normal(5)
    for k in range(6):
        brute = sum(math.prod(c) for c in itertools.combinations(lam, k))
        assert elementary_symmetric(lam, k) == pytest.approx(brute, abs=1e-12)


def test_k_hessian_density_normalization():
    for n in (1, 2, 3):
        for k in range(1, n + 1):
            assert hessian_density(np.eye(n), k).density == pytest.approx(cma(n), rel=1e-14)
    with pytest.raises(ValueError):
        hessian_density(np.eye(2), 3)


def test_density_is_nonnegative_and_clamps(rng):
    fld = PotentialField(_atoms(rng, 4, 2), 0.1)
    z = crandn(rng, 200, 2)
    for k in (1, 2):
        d, cl = ma_density(fld, z, k, return_clamped=True)
        assert np.all(d >= 0) and not np.any(cl)
    res = hessian_density(np.diag([1.0, -1.0]), 2)
    assert res.clamped and res.density == 0.0


def test_mixed_discriminant_examples(rng):
    A = rng.standard_normal((3, 3))
    assert mixed_discriminant([A, A, A]) == pytest.approx(np.linalg.det(A), rel=1e-12)
    md = mixed_discriminant([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    assert md == pytest.approx(0.5, abs=1e-15)
    assert mixed_ma_density([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]) == pytest.approx(cma(2) / 2, rel=1e-15)
    with pytest.raises(ValueError):
        mixed_discriminant([np.eye(2)])
    with pytest.raises(ValueError):
        mixed_discriminant([np.eye(2), np.eye(3)])


def test_mixed_discriminant_matches_polarization(rng):
    # D(A_1..A_n) = (1/n!) sum over subsets S of (-1)^(n-|S|) det(sum_{i in S} A_i)
    for n in (2, 3):
        mats = [rng.standard_normal((n, n)) for _ in range(n)]
        pol = 0.0
        for r in range(1, n + 1):
            for S in itertools.combinations(range(n), r):
                pol += (-1) ** (n - r) * np.linalg.det(sum(mats[i] for i in S))
        assert mixed_discriminant(mats) == pytest.approx(pol / math.factorial(n), rel=1e-10)


@given(st.integers(0, 2**16), st.permutations([0, 1, 2]))
def test_mixed_discriminant_is_symmetric(seed, perm):
    rng = np.random.default_rng(seed)
    mats = [rng.standard_normal((3, 3)) for _ in range(3)]
    a = mixed_discriminant(mats)
    b = mixed_discriminant([mats[i] for i in perm])
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


def test_multilinear_expansion_matches_density(rng):
    mu = _atoms(rng, 3, 2)
    for _ in range(20):
        z, eps = crandn(rng, 2), 10 ** rng.uniform(-1.5, 0)
        d = ma_density(PotentialField(mu, eps), z)
        assert ma_density_expansion(mu, z, eps) == pytest.approx(d, rel=1e-10)


# ----------------------------------------------------------------------------
# atoms


def test_dirac_atom_mass_one_dimensional():
    rows = atom_mass_diagnostic(dirac([0.1j]), [0.1j], [0.2, 0.05, 0.01])
    assert all(r.mass == pytest.approx(100 / 101, abs=1e-3) and r.radius == 10 * r.eps for r in rows)


def test_two_atom_mass_survives():
    a, b = np.zeros(2, complex), np.array([3.0, 0j])
    mu = make_atomic([a, b], [0.5, 0.5])
    rows = atom_mass_diagnostic(mu, a, [0.2, 0.1, 0.05])
    assert all(r.mass >= 0.25 * 0.9 for r in rows)


def test_atom_diagnostic_validation():
    with pytest.raises(ValueError):
        atom_mass_diagnostic(dirac([0j]), [0j], [0.1, 0.2])
    with pytest.raises(ValueError):
        atom_mass_diagnostic(dirac([0j]), [0j], [0.1, 0.0])


# ----------------------------------------------------------------------------
# Robin function


def test_robin_of_origin_dirac_is_zero():
    est = robin_estimate(dirac([0j, 0j]), [1, 0], [10, 100, 1000])
    assert est.value == pytest.approx(0.0, abs=1e-12) and not est.small_lambda


def test_robin_matches_closed_form_and_is_nonpositive(rng):
    mu = _atoms(rng, 4, 2, 0.5)
    lam = np.geomspace(50, 5000, 8)
    for _ in range(10):
        xi = crandn(rng, 2)
        xi /= np.linalg.norm(xi)
        est = robin_estimate(mu, xi, lam)
        assert est.value == pytest.approx(robin_limit(mu, xi), abs=1e-6)
        assert est.value <= 1e-6
        assert robin_limit(mu, xi) >= robin_limit(mu, xi, "U") - 1e-15
        assert robin_estimate(mu, xi, lam, "U").value == pytest.approx(robin_limit(mu, xi, "U"), abs=1e-6)


def test_robin_mean_lower_bound(rng):
    mu = _atoms(rng, 4, 2, 0.8)
    xis = crandn(rng, 400, 2)
    xis /= np.linalg.norm(xis, axis=1, keepdims=True)
    vals = np.array([robin_limit(mu, x) for x in xis])
    se = vals.std() / math.sqrt(vals.size)
    assert vals.mean() >= robin_limit(mu, xis[0], "U") - 2 * se


def test_robin_flags_and_validation():
    mu = dirac([2.0 + 0j])
    assert robin_estimate(mu, [1], [1.0, 2.0]).small_lambda
    with pytest.raises(ValueError):
        robin_estimate(mu, [2], [10.0])
    with pytest.raises(ValueError):
        robin_estimate(mu, [1], [10.0, 5.0])
    with pytest.raises(ValueError):
        robin_estimate(mu, [1], [10.0], kind="G")
