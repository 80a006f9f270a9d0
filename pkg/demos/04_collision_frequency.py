"""Collision-frequency eigenvalues and their asymptotics.

sigma(v) = int B mu* dv* has eigenvalue lambda1 along v and the double
eigenvalue lambda2 perpendicular to it.  Despite the kernel's
exponential growth, lambda1 ~ sqrt(8 pi) log r / r^3 and
r lambda2 -> const: Landau-like decay up to the logarithm.
"""

import math

import numpy as np

from balescu import FrequencyTable, sigma_k_oracle

ft = FrequencyTable()

print("== both eigenvalues converge to (1/3) sqrt(pi/2) J(0) at v = 0")
pair = ft.lambda_pair(0.0)
print(f"  lambda1(0) = {pair.lambda1:.12f}")
print(f"  lambda2(0) = {pair.lambda2:.12f}")

print("\n== eigenvalue table (k0 = 1)")
tab = ft.table_on([0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 30.0])
print("      r    lambda1    lambda2   dlambda1   dlambda2")
for k, r in enumerate(tab["radial_grid"]):
    print(f"  {r:5.1f}  {tab['lambda1'][k]:9.6f}  {tab['lambda2'][k]:9.6f}"
          f"  {tab['dlambda1'][k]:+9.6f}  {tab['dlambda2'][k]:+9.6f}")

print("\n== lambda1 asymptote in differenced form (avoids the additive constant)")
diff = float(ft.I2(30.0) - ft.I2(15.0))
target = math.sqrt(8 * math.pi) * math.log(2.0)
print(f"  I2(30) - I2(15) = {diff:.6f}   sqrt(8 pi) ln 2 = {target:.6f}"
      f"   ({abs(diff / target - 1):.2%} off)")

print("\n== lambda2 tail: r lambda2(r) -> sqrt(pi/8) int_0^inf e^{-y^2/2} J dy")
c2 = ft.lambda2_tail_constant
for r in (10.0, 30.0, 100.0):
    print(f"  r={r:6.1f}: r lambda2 = {r * ft.lambda_pair(r).lambda2:.6f}   (limit {c2:.6f})")

print("\n== the 3-D k-space oracle agrees with the reduced 1-D forms")
for v in (np.zeros(3), np.array([0.0, 2.0, 1.0]), np.array([3.0, 3.0, 0.0])):
    so = sigma_k_oracle(v)
    sm = ft.sigma_matrix(v)
    rel = np.linalg.norm(so - sm) / np.linalg.norm(sm)
    print(f"  v = {np.array_str(v, precision=1)}: Frobenius rel diff {rel:.1e}")
