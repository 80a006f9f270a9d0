"""The shielding integral J(x) and its exponential growth.

J collects the wavenumber integral of 1/|eps|^2.  Debye shielding makes
it finite without any small-k cutoff, but at large x the near-zero of
Re(eps) turns into a Lorentzian of width |Psi_I| ~ e^{-x^2/2}, so
J ~ sqrt(8 pi) e^{x^2/2} / x^3.  The demo compares the closed form with
direct quadrature (sinh-flattened around the peak) and shows the scaled
J~ = e^{-x^2/2} J that every downstream product actually consumes.
"""

import math

import numpy as np

from balescu import jay, jay_oracle, jay_scaled
from balescu.config import PlasmaConfig

SQRT_8PI = math.sqrt(8.0 * math.pi)

print("== closed form vs adaptive quadrature of the defining integral (k0 = 1)")
for x in (0.0, 1.0, 3.0, 6.0, 9.0, 12.0):
    a, b = jay(x), jay_oracle(x)
    print(f"  x={x:5.1f}: J={a:.6e}  oracle rel diff {abs(a - b) / b:.1e}")

print(f"\n  J(0) = 2 ln 2 - 1 = {jay(0.0):.15f}")
print(f"  J(0) at k0=2 = 2 ln 5 - 8/5 = {jay(0.0, PlasmaConfig(k0=2.0)):.15f}")

print("\n== approach to the asymptote x^3 e^{-x^2/2} J -> sqrt(8 pi) = %.6f" % SQRT_8PI)
print("   (the correction factor is 1 + 3/x^2 + 15/x^4 + ...)")
for x in (6.0, 9.0, 12.0, 20.0, 40.0, 80.0):
    ratio = x ** 3 * jay_scaled(x) / SQRT_8PI
    predicted = 1.0 + 3.0 / x ** 2 + 15.0 / x ** 4
    print(f"  x={x:5.1f}: ratio {ratio:.6f}   1 + 3/x^2 + 15/x^4 = {predicted:.6f}")

print("\n== the scaled form stays finite far beyond the overflow range of e^{x^2/2}")
for x in (30.0, 60.0, 120.0):
    print(f"  J~({x:5.1f}) = {jay_scaled(x):.6e}   sqrt(8 pi)/x^3 = {SQRT_8PI / x ** 3:.6e}")

print("\n== evenness: J(-x) = J(x) bit-for-bit")
xs = np.linspace(0.0, 20.0, 7)
print("  max |J~(-x) - J~(x)| =", np.abs(jay_scaled(-xs) - jay_scaled(xs)).max())
