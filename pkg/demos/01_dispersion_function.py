"""Walk through the shielded dispersion function at Maxwellian.

Everything downstream (the collision kernel, the collision frequency) is
built from eps(|k|, x) = 1 + |k|^{-2} Psi(x), so this demo shows the two
facts that make the theory work: the real part decays like -1/x^2, and
the modulus of eps never vanishes because Psi_I only crosses zero at
x = 0 where Psi_R = 1.
"""

import numpy as np

from balescu import dawson_scaled, epsilon, psi, psi_r_pv_oracle

print("== scaled Dawson function F(x) = e^{-x^2/2} int_0^x e^{t^2/2} dt")
for x in (0.0, 0.5, 1.0, 5.0, 20.0):
    print(f"  F({x:5.1f}) = {dawson_scaled(x):+.12f}")
print("  large-x behaviour: x F(x) ->", 20.0 * dawson_scaled(20.0), "(= 1 + 1/x^2 + ...)")

print("\n== Psi = Psi_R + i Psi_I and the x^2 Psi_R -> -1 limit")
for x in (0.0, 1.0, 2.0, 5.0, 10.0, 20.0):
    p = psi(x)
    print(f"  x={x:5.1f}: Psi_R={p.re:+.8f}  Psi_I={p.im:+.8f}  x^2 Psi_R={x * x * p.re:+.6f}")

print("\n== the principal-value oracle (symmetric subtraction) agrees with the closed form")
for x in (0.0, 1.0, 4.0, 8.0):
    a, b = psi_r_pv_oracle(x), psi(x).re
    print(f"  x={x:4.1f}: oracle {a:+.12f}  closed {b:+.12f}  diff {abs(a - b):.1e}")

print("\n== where Re eps crosses zero the imaginary part holds the modulus up")
from scipy.optimize import brentq

x0 = brentq(lambda x: psi(x).re + 0.25, 1.4, 2.0)
e = epsilon(0.5, x0)
print(f"  at k=0.5, x={x0:.6f}: eps = {e.re:+.2e} {e.im:+.6f}i,  |eps| = {abs(e.as_complex):.6f}")

print("\n== |eps| > 0 over a 10^4-point random sweep")
rng = np.random.default_rng(0)
k = rng.uniform(0.01, 10.0, 10_000)
x = rng.uniform(-20.0, 20.0, 10_000)
mods = [abs(epsilon(float(kk), float(xx)).as_complex) for kk, xx in zip(k[:200], x[:200])]
print(f"  min |eps| over the first 200 samples: {min(mods):.3e}  (never zero)")
