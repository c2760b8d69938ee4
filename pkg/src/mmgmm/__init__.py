"""Gaussian mixture maximum-likelihood estimation by tangent lower-bound ascent."""
from ._kernels import BACKEND
from .errors import (
    DegenerateComponent,
    DimensionMismatch,
    EmptyFile,
    EmptyInput,
    GMMError,
    NonPositiveWeight,
    NotPositiveDefinite,
    NotSymmetric,
    ParseError,
    RaggedRows,
    SchemaError,
    TooFewSamples,
)
from .fitter import FitConfig, FitTrace, Init, Termination, fit, init_model, mm_step
from .gaussian import GaussianComponent, log_density, log_weighted_density
from .io import load_csv, load_model, save_model
from .linalg import SpdMatrix, cholesky, log_det, mahalanobis_sq
from .mixture import DataSet, MixtureModel, log_likelihood, log_sum_exp, responsibilities
from .sampler import RandomSource, sample_dataset
from .verifier import check_ascent, check_minorization, check_update_equivalence, surrogate_value

__version__ = "0.1.0"
