from .matrix_cocycle import (
    CocycleProduct,
    HolderCertificate,
    MatrixCocycle,
    RunEvaluator,
    ScaledMatrix,
    birkhoff_average,
    finite_time_max_exponent,
    holder_certificate,
    log_norm_product,
    minimal_norm,
    operator_norm,
    product,
    running_log_norms,
)
from .exterior import compound_matrix, exterior_power, subset_indices

__all__ = [
    "CocycleProduct",
    "HolderCertificate",
    "MatrixCocycle",
    "RunEvaluator",
    "ScaledMatrix",
    "birkhoff_average",
    "finite_time_max_exponent",
    "holder_certificate",
    "log_norm_product",
    "minimal_norm",
    "operator_norm",
    "product",
    "running_log_norms",
    "compound_matrix",
    "exterior_power",
    "subset_indices",
]
