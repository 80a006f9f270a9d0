"""Numerics for the linearized Balescu-Lenard collision operator.

Module map:

- ``dispersion``: scaled Dawson function, Psi_R/Psi_I, permittivity, and
  the principal-value quadrature oracle.
- ``kernel``: shielding integral J(x) (closed form, scaled form and
  quadrature oracle), angular weights w1/w2, xi projections, kernel
  assembly with fused exponentials, Landau comparison kernel.
- ``frequency``: collision-frequency eigenvalues lambda1/lambda2 with
  cached cumulative integrals, derivatives, sigma matrix/vector forms,
  and the 3-D k-space oracle.
- ``radial``: the discrete split L = -A - K on radial grids, weighted
  norms, projections, time evolution, coercivity probes.
- ``grid3d``: small 3-D grids, quadratic forms of L, the 3-D K oracle.
- ``verify``: check campaigns with a single tolerance manifest, JSON/CSV
  reports.
- ``cli``: the ``balescu`` command.
"""

from .config import (DEFAULT_CONFIG, DomainError, OverflowGuardError,
                     PlasmaConfig, QuadratureError, StepSizeError)
from .dispersion import DispersionValue, dawson_scaled, epsilon, psi, psi_r_pv_oracle
from .kernel import (KernelMatrix, RelVelFrame, WeightTable, jay, jay_oracle,
                     jay_scaled, kernel_B, kernel_B_times_mumu,
                     kernel_B_times_sqrt_mumu, kernel_from_weights,
                     landau_kernel, make_frame, weights_scaled_quadrature,
                     xi_matrices)
from .frequency import EigenvaluePair, FrequencyTable, lambda_pair, sigma_k_oracle
from .radial import (CoercivityReport, EvolveResult, MomentVector, RadialFunction,
                     RadialGrid, RadialOperator, WeightParams, maxwellian,
                     norm_sigma_radial, preset_profile, project_P, weight_w)
from .grid3d import (Grid3D, GridFunction3D, Operator3D, apply_K_oracle_3d,
                     norm_sigma_3d, project_P_3d)

__version__ = "0.1.0"
