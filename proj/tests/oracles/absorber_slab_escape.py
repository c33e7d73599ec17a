"""Escape probability through the far face of a purely absorbing slab.

Uniform isotropic source in the first a cm of a slab of thickness L and
total cross section sigma. A particle born at depth x travelling with
direction cosine mu > 0 escapes with probability exp(-sigma (L - x) / mu).
Averaging over x in [0, a] and the isotropic half-range of mu gives

    P = 1 / (2 a) * int_0^a int_0^1 exp(-sigma (L - x) / mu) dmu dx

which is evaluated here by adaptive 2-D quadrature and cross-checked
against the E3 closed form.
"""

import math

from scipy import integrate, special

SIGMA = 1.0
L = 2.0
A = 0.01


def escape_numeric(sigma=SIGMA, length=L, a=A):
    val, _ = integrate.dblquad(
        lambda mu, x: math.exp(-sigma * (length - x) / mu),
        0.0, a, 1e-12, 1.0, epsabs=1e-15, epsrel=1e-13)
    return val / (2.0 * a)


def escape_closed_form(sigma=SIGMA, length=L, a=A):
    return (special.expn(3, sigma * (length - a)) - special.expn(3, sigma * length)) / (2.0 * a * sigma)


def one_cell_diamond():
    # 1x1 cm cell, sigma_t = 1, unit isotropic source, vacuum faces, and the
    # 8-direction set whose in-plane cosines all have magnitude 1/sqrt(3).
    c = 1.0 / math.sqrt(3.0)
    return 1.0 / (1.0 + 2.0 * c + 2.0 * c)


if __name__ == "__main__":
    p = escape_numeric()
    print(f"escape_numeric     {p:.15g}")
    print(f"escape_closed_form {escape_closed_form():.15g}")
    print(f"one_cell_diamond   {one_cell_diamond():.17g}")
