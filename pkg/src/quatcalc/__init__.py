"""Numerical functional calculus for quaternionic matrices.

Quaternion scalars, right slice regular functions, the S-spectrum and right
S-resolvent of quaternionic matrices, quaternionic measures with their
bilateral Laplace-Stieltjes transform, and the two functional calculi they
induce (group integral and contour integral), all cross-verified against
each other and against closed forms.
"""

from .errors import (AdmissibilityError, CalcError, DomainError, QuadratureError,
                     RangeError, SingularityError, SlowConvergenceError,
                     SpectralProximityError, UnsupportedMeasureError)
from .quaternion import (E1, E2, E3, ONE, ZERO, Quaternion, SliceParts, Sphere,
                         decompose, orthogonal_unit, qexp, recompose,
                         unit_imaginary)
from .kernels import (cauchy_kernel_left, cauchy_kernel_right, kernel_power,
                      sphere_polynomial)
from .quadrature import (CircleContour, QuadResult, RayContour,
                         StripBoundaryContour, exp_tail_cut, integrate,
                         integrate_adaptive, integrate_periodic)
from .qlinalg import (GroupEnvelope, HYBoundReport, QMatrix, SSpectrum,
                      basis_column, group_envelope, hy_bound_check,
                      laplace_of_group, pseudo_resolvent, qexp_matrix,
                      qmat_inverse, s_resolvent_right, s_resolvent_right_power,
                      s_spectrum, scalar_embed, unembed)
from .measures import (AdmissibilityReport, Atom, DiscreteProductMeasure,
                       ExpDensity, QMeasure, admissible_for, apply_linear_factor,
                       combine, convolve, derivative_measure, dirac, exp_moment,
                       image_measure, kernel_measure, laplace_stieltjes,
                       product_measure, scale_left, scale_right, strip_limit)
from .slicefn import (AxialDomain, ExpKernel, IntrinsicReport,
                      KernelPowerFunction, RightPolynomial, SliceFunction,
                      StemFunction, TransformFunction, cauchy_reconstruct,
                      cr_residual, is_intrinsic, left_regularity_residual,
                      right_regularity_residual, splitting)
from .calculus import (CalcProblem, ComparisonReport, InversionRecord,
                       ResidueBreakdown, compare_calculi, f_of_T_group,
                       inverting_sequence_run, poly_apply, residue_oracle,
                       s_calc_bounded, strip_f_of_T, strip_group_reconstruction)

__version__ = "0.1.0"
