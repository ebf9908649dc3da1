"""Nearest-neighbour coupling coefficient between a categorical response and
covariates in a metric space, with an asymptotic independence test,
a conditional version for variable selection, exact population values for
finite distributions and a small simulation lab."""

__version__ = "0.1.0"

from .conditional import SelectionTrace, psi_conditional_hat, select_variables
from .errors import DegenerateInputError
from .estimator import (
    ContingencyCounts,
    LabelVector,
    PsiResult,
    contingency,
    estimate_psi,
    psi_hat,
    psi_hat_norm,
)
from .graph import NeighborGraph, build_neighbor_graph, gamma_d
from .independence import (
    TestReport,
    binary_statistic,
    chi2_sf,
    independence_statistic,
    independence_test,
    sigma_det_closed_form,
    sigma_factorized,
    sigma_matrix,
)
from .metric import PointCloud, ProductCloud, distance, product_distance
from .oracle import FiniteJoint, psi_population, psi_population_conditional

__all__ = [
    "__version__",
    "ContingencyCounts",
    "DegenerateInputError",
    "FiniteJoint",
    "LabelVector",
    "NeighborGraph",
    "PointCloud",
    "ProductCloud",
    "PsiResult",
    "SelectionTrace",
    "TestReport",
    "binary_statistic",
    "build_neighbor_graph",
    "chi2_sf",
    "contingency",
    "distance",
    "estimate_psi",
    "gamma_d",
    "independence_statistic",
    "independence_test",
    "product_distance",
    "psi_conditional_hat",
    "psi_hat",
    "psi_hat_norm",
    "psi_population",
    "psi_population_conditional",
    "select_variables",
    "sigma_det_closed_form",
    "sigma_factorized",
    "sigma_matrix",
]
