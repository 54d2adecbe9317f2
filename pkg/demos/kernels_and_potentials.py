"""Kernels and potentials on C^2.

Evaluates the three logarithmic kernels on random pairs, checks the
ordering K <= N <= (1/2) log(1 + |z|^2), then builds the potentials of a
small atomic measure and prints their values along a line and their means
over the unit sphere.

    python3 demos/kernels_and_potentials.py
"""

import math

import numpy as np

from projlog import PotentialField, eval_U, eval_V, make_atomic, ma_density
from projlog.geometry import norm_sq
from projlog.kernels import kernel_K, kernel_N
from projlog.potentials import grad_norm, sphere_mean


def main():
    rng = np.random.default_rng(0)
    z = rng.standard_normal((10_000, 2)) + 1j * rng.standard_normal((10_000, 2))
    w = rng.standard_normal((10_000, 2)) + 1j * rng.standard_normal((10_000, 2))
    K, N = kernel_K(z, w), kernel_N(z, w)
    top = 0.5 * np.log1p(norm_sq(z))
    print(f"pairs with K > N: {int(np.sum(K > N + 1e-12))}, with N above the bound: {int(np.sum(N > top + 1e-12))}")

    mu = make_atomic(np.array([[0.5, 0.0], [-0.5j, 0.3]]), [0.4, 0.6])
    fld = PotentialField(mu, eps=0.05)
    print("\n   x      U(x,0)     V(x,0)   V_eps(x,0)  |dV_eps|   MA density")
    for x in np.linspace(-1.5, 1.5, 7):
        p = np.array([x, 0.0], complex)
        print(f"{x:5.2f}  {eval_U(mu, p):9.4f}  {eval_V(mu, p):9.4f}  {fld.value(p):9.4f}"
              f"  {grad_norm(fld, p):8.4f}  {ma_density(fld, p):10.4e}")

    print(f"\nsphere means over |z| = 1: U {sphere_mean(mu, 'U'):.4f}, V {sphere_mean(mu, 'V'):.4f}"
          f" (lower bound {-math.log(math.sqrt(5)):.4f})")


if __name__ == "__main__":
    main()
