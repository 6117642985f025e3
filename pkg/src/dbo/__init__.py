"""Discrete bilinear operators on Z^d induced by infinite tensors.

Weighted sequence spaces, tensor families and their finite-difference
calculus, tensor norms and BT-class scans, operator application with
certified bounds, commutator compactness experiments and a torus FFT bridge.
"""

__version__ = "0.1.0"

from .lattice import (HolderTriple, LatticePoint, MultiIndex, WeightParams, WeightedSequence,
                      bracket, holder_triple, pointwise_multiply, power_weight, weighted_norm)
from .tensors import (ConvolutionType, DenseTruncated, DiagonalCutoff, MultiplicationType,
                      Separable, Tensor, TorusCoefficient, VariableCoefficient, finite_difference,
                      separable_tensor, shift_tensor, tensor_from_spec, transpose)
from .norms import (NormParams, bt_membership_scan, bt_seminorm, mixed_lebesgue_norm,
                    n0_threshold, norm_omega_n, norm_two_order, norm_zero_n, seminorm00)
from .operators import (BoundCertificate, HypothesisUnmet, apply, apply_linear,
                        cauchy_schwarz_bound, commutator, duality_pairing,
                        empirical_operator_norm, schur_upper_bound)
from .verification import (CompactnessExperiment, TailCurve, boundedness_experiment,
                           compactness_experiment, lemma_x_scan, negative_witness_scan,
                           v_phi_scan)
from .fourier import (TorusFunction, TorusGrid, bridge_check, from_fourier,
                      physical_derivative_product, to_fourier)
from .report import Report, ScanResult
