"""Orey-index tools for Gaussian processes: exact sampling, second-order
quadratic variations on arbitrary partitions, condition diagnostics and a
two-scale estimator."""

__version__ = "0.1.0"

from .errors import (AlignmentError, DegeneratePathError, DomainError, NestingError,
                     NotAvailableError, NumericalPSDError, OreyError, ParameterError,
                     ScaleSeparationError, SizeError)
from .models import (FAMILIES, BiFBm, FBm, FBridge, FracOU, OreyProfile, SubFBm,
                     covariance, covariance_matrix, family_name, g0_function,
                     incremental_variance, orey_profile, spec_from_dict, spec_to_dict)
from .partition import (MeshStats, Partition, RatioProfile, is_subpartition,
                        make_alternating, make_perturbed, make_regular, mesh_stats,
                        ratio_profile, subsample)
from .sampler import (Path, SeedPolicy, sample, sample_bridge, sample_ensemble,
                      sample_exact, sample_fbm_fast, sample_frac_ou)
from .quadvar import (DMatrix, d_matrix, diagnostics, eigen_bound, expected_qv,
                      g_function, limit_value, normalized_qv, raw_qv, regular_limit,
                      regular_qv, rowsum_diagnostic, second_increments)
from .estimator import (EstimateResult, MCSummary, estimate_from_variations, mc_study,
                        orey_estimate, sandwich)
from .conditions import (LogPower, Power, lambda_sweep, log_ratio_profile, paper_bound,
                         remark_check, remark_constant)
