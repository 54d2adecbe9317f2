"""The constant alpha_n two ways.

alpha_n is minus the mean of log sin(d / sqrt2) over P^n, d the distance to
a fixed point.  The radial rule computes it from the one-dimensional law of
d; Monte Carlo samples P^n directly.  Both agree with 1/(2n).

    python3 demos/alpha_constant.py
"""

import numpy as np

from projlog import alpha_n, dirac, eval_G, mc_integrate_pn


def main():
    for n in (1, 2, 3):
        a = np.zeros(n + 1, complex)
        a[0] = 1.0
        mean, se = mc_integrate_pn(lambda P: eval_G(dirac(a), P), n, 100_000, seed=n)
        print(f"n={n}: radial rule {alpha_n(n):.12f}   Monte Carlo {-mean:.5f} +- {se:.5f}   1/(2n) = {1 / (2 * n):.12f}")


if __name__ == "__main__":
    main()
