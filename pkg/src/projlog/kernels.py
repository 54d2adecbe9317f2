"""Pointwise logarithmic kernels on C^n x C^n and P^n x P^n.

All functions broadcast over leading axes: ``z`` of shape (..., n) against
``w`` of shape (..., n).  The value -inf is returned, not raised, on the
diagonal of the unregularized kernels.

Complex derivatives use the Wirtinger convention: the gradient is the
vector of d/dz_m and the Hessian holds H_jk = d^2 u / dz_j dzbar_k.  The
real gradient of a real function has Euclidean norm 2 * |d u|.
"""

from __future__ import annotations

import numpy as np

from .geometry import _check_pair, norm_sq, wedge_minors, wedge_norm_sq

#: |H_jk| <= HESSIAN_ENTRY_CONST * (1+|w|^2) / (|z-w|^2 + |z^w|^2 + eps^2)
HESSIAN_ENTRY_CONST = 1.0


def _log_half(num, den):
    with np.errstate(divide="ignore"):
        return 0.5 * np.log(num / den)


def kernel_K(z, w) -> np.ndarray:
    """K(z, w) = (1/2) log(|z - w|^2 / (1 + |w|^2))."""
    z, w = _check_pair(z, w)
    return _log_half(norm_sq(z - w), 1.0 + norm_sq(w))


def projective_distance_sq(z, w) -> np.ndarray:
    """|z - w|^2 + |z ^ w|^2, i.e. |(1,z) ^ (1,w)|^2."""
    z, w = _check_pair(z, w)
    return norm_sq(z - w) + wedge_norm_sq(z, w)


def kernel_N(z, w, eps: float = 0.0) -> np.ndarray:
    """N_eps(z, w) = (1/2) log((|z-w|^2 + |z^w|^2 + eps^2) / (1 + |w|^2)).

    ``eps = 0`` gives the projective logarithmic kernel N itself.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    z, w = _check_pair(z, w)
    return _log_half(projective_distance_sq(z, w) + eps * eps, 1.0 + norm_sq(w))


def kernel_G(p, q) -> np.ndarray:
    """G(zeta, eta) = (1/2) log(|zeta ^ eta|^2 / (|zeta|^2 |eta|^2)) <= 0."""
    from .geometry import _homog

    a, b = _check_pair(_homog(p), _homog(q))
    s2 = np.minimum(wedge_norm_sq(a, b) / (norm_sq(a) * norm_sq(b)), 1.0)
    with np.errstate(divide="ignore"):
        return 0.5 * np.log(s2)


def _require_eps(eps: float):
    if not eps > 0:
        raise ValueError("derivatives require eps > 0")


def distance_gradient(z, w) -> np.ndarray:
    """d/dz_m of |z-w|^2 + |z^w|^2, from the minor expansion.

    conj(z_m - w_m) + sum_{j>m} w_j conj(z_m w_j - z_j w_m)
                    - sum_{i<m} w_i conj(z_i w_m - z_m w_i);
    both sums fold into sum_j w_j conj(M_mj) with M the wedge minors.
    """
    z, w = _check_pair(z, w)
    M = wedge_minors(z, w)
    return np.conj(z - w) + np.einsum("...mj,...j->...m", np.conj(M), w)


def grad_N_eps(z, w, eps: float) -> np.ndarray:
    """Holomorphic gradient d N_eps / dz_m; requires eps > 0."""
    _require_eps(eps)
    z, w = _check_pair(z, w)
    num = distance_gradient(z, w)
    D = projective_distance_sq(z, w) + eps * eps
    return num / (2.0 * D[..., None])


def hessian_N_eps(z, w, eps: float) -> np.ndarray:
    """Complex Hessian H_jk = d^2 N_eps / dz_j dzbar_k; requires eps > 0.

    With D = |z-w|^2 + |z^w|^2 + eps^2, W = 1 + |w|^2 and v = dD/dz,

        H = (1/2) [ (W I - conj(w) w^T) / D - v conj(v)^T / D^2 ],

    where dD/dzbar_k of v_j is W delta_jk - conj(w_j) w_k.  Each entry obeys
    |H_jk| <= (1 + |w|^2) / D.
    """
    _require_eps(eps)
    z, w = _check_pair(z, w)
    n = z.shape[-1]
    v = distance_gradient(z, w)
    D = (projective_distance_sq(z, w) + eps * eps)[..., None, None]
    W = (1.0 + norm_sq(w))[..., None, None]
    ww = np.conj(w)[..., :, None] * w[..., None, :]
    vv = v[..., :, None] * np.conj(v)[..., None, :]
    H = 0.5 * ((W * np.eye(n) - ww) / D - vv / (D * D))
    # exact Hermitian symmetry (complex products may round asymmetrically)
    return 0.5 * (H + np.conj(np.swapaxes(H, -1, -2)))
