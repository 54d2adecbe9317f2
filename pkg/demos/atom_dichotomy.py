"""Atoms of a measure leave point masses in the Monge-Ampere measure.

For each eps the Monge-Ampere density of the regularized potential is
integrated over B(a, 10 eps).  With an atom of mass 1/2 at a the mass stays
above (1/2)^2 in C^2; for a sample cloud spread along a segment it drains
away once eps falls below the sample spacing scale.

    python3 demos/atom_dichotomy.py
"""

import numpy as np

from projlog import FamilySpec, atom_mass_diagnostic, dirac, make_atomic, sample_family
from projlog.quadrature import BallQuad


def show(title, rows):
    print(title)
    for r in rows:
        print(f"  eps={r.eps:<6g} radius={r.radius:<6g} mass={r.mass:.4f}")


def main():
    show("Dirac mass in C^1 (closed form 100/101 = 0.9901):",
         atom_mass_diagnostic(dirac([0.2j]), [0.2j], [0.2, 0.05, 0.01]))

    a = np.zeros(2, complex)
    two = make_atomic([a, np.array([3.0, 0j])], [0.5, 0.5])
    show("\nhalf-mass atom in C^2 (expect >= 0.25):", atom_mass_diagnostic(two, a, [0.2, 0.1, 0.05]))

    seg = sample_family(FamilySpec("segment", 1000, seed=7, dim=2, field="complex"))
    x = seg.points[np.argmin(np.abs(seg.points[:, 0] - 0.5))]
    rows = atom_mass_diagnostic(seg, x, [0.05, 0.02, 0.01, 0.005], quad=BallQuad(24, 6, 8))
    show("\n1000-point segment cloud in C^2 (expect -> 0):", rows)


if __name__ == "__main__":
    main()
