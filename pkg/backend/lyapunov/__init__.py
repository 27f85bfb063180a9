from .spectrum import (
    LyapunovSpectrum,
    finite_time_vector_exponent,
    max_exponent,
    period_eigenvalues,
    periodic_spectrum,
    qr_exponents,
    second_exponent,
    spectra_equal,
    top_exponent,
    vector_log_growth,
)
from .splitting import OseledecSplitting, oseledec_splitting_periodic, subspace_gap
from .metric import (
    LyapunovMetric,
    PesinCertificate,
    corrupt_metric,
    lyapunov_gram,
    lyapunov_operator_norm,
    pesin_certificate,
    series_norm_squared,
)
from .bounds import (
    cone_verify,
    exponential_closeness,
    shadowing_sweep,
    shadowing_verify,
    verify_norm_bounds,
)

__all__ = [
    "LyapunovSpectrum",
    "finite_time_vector_exponent",
    "max_exponent",
    "period_eigenvalues",
    "periodic_spectrum",
    "qr_exponents",
    "second_exponent",
    "spectra_equal",
    "top_exponent",
    "vector_log_growth",
    "OseledecSplitting",
    "oseledec_splitting_periodic",
    "subspace_gap",
    "LyapunovMetric",
    "PesinCertificate",
    "corrupt_metric",
    "lyapunov_gram",
    "lyapunov_operator_norm",
    "pesin_certificate",
    "series_norm_squared",
    "cone_verify",
    "exponential_closeness",
    "shadowing_sweep",
    "shadowing_verify",
    "verify_norm_bounds",
]
