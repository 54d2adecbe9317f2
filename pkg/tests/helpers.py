import numpy as np
from hypothesis import strategies as st


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


finite = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)


def cvecs(n):
    """Strategy for complex vectors of length n with moderate entries."""
    return st.lists(st.tuples(finite, finite), min_size=n, max_size=n).map(
        lambda xs: np.array([complex(a, b) for a, b in xs])
    )


def fd_wirtinger_gradient(f, z, h):
    """d f / dz_m = (d/dx_m - i d/dy_m) f / 2 by central differences; z of shape (M, n)."""
    h = np.broadcast_to(np.asarray(h, dtype=float), z.shape[:-1])[:, None]
    out = np.empty(z.shape, complex)
    for m in range(z.shape[-1]):
        e = np.zeros(z.shape[-1])
        e[m] = 1.0
        fx = (f(z + h * e) - f(z - h * e)) / (2 * h[:, 0])
        fy = (f(z + 1j * h * e) - f(z - 1j * h * e)) / (2 * h[:, 0])
        out[:, m] = 0.5 * (fx - 1j * fy)
    return out


def fd_hessian_of_gradient(g, z, h):
    """H_jk = d g_j / dzbar_k by five-point differences of the gradient g."""
    h = np.broadcast_to(np.asarray(h, dtype=float), z.shape[:-1])[:, None]
    n = z.shape[-1]

    def d5(e):
        return (-g(z + 2 * h * e) + 8 * g(z + h * e) - 8 * g(z - h * e) + g(z - 2 * h * e)) / (12 * h)

    H = np.empty(z.shape + (n,), complex)
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        H[:, :, k] = 0.5 * (d5(e) + 1j * d5(1j * e))
    return H
