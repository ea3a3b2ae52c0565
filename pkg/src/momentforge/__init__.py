"""Random moment spaces: coordinate transforms, product densities,
beta-ensemble spectral measures and moment central limit theorems."""
from .core import (Bounded, CanonicalMoments, HalfLine, InteriorCheck, MomentVector, RealLine,
                   RecurrenceCoefficients, ZVector, affine_transform_moments,
                   canonical_to_moments, canonical_to_recurrence, is_interior,
                   moments_to_canonical, moments_to_recurrence, moments_to_z, parse_support,
                   recurrence_to_moments, skibinsky_array, skibinsky_forward, z_to_recurrence)
from .distributions import (GeneralWeightFamily, MomentLawParams, RngStream, density_f,
                            density_g, density_h, limit_density_check, sample_canonical_bounded,
                            sample_moments_bounded, sample_moments_halfline,
                            sample_moments_realline)
from .ensembles import (EnsembleSpec, SpectralMeasure, TridiagonalMatrix, dense_oracle,
                        hermite_tridiagonal, jacobi_tridiagonal, laguerre_tridiagonal,
                        spectral_measure, spectral_moments)
from .asymptotics import (arcsine_moments, catalan, generalized_catalan, matrix_A, matrix_C,
                          matrix_D, mp_moments, semicircle_moments, u_array, u_closed_form)
from .statlab import (CltExperimentSpec, CltReport, clt_preset, empirical_cov, jacobian_fd,
                      ks_normal, run_clt, standardize, two_sample_ks)
from . import errors

__version__ = "0.1.0"
