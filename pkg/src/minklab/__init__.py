"""Successive minima, reduced bases, Haar-random lattices and log-law experiments."""

from .errors import (
    DegenerateBasis,
    DimensionTooLarge,
    EnumerationBudgetExceeded,
    InsufficientMass,
    InvalidRange,
    MinklabError,
    NotUnimodular,
)
from .lattice import (
    GramMatrix,
    LatticeBasis,
    LatticeVector,
    covolume,
    dual,
    is_unimodular_integer_matrix,
    operator_norm,
    same_lattice,
)
from .minima import (
    MinimaProfile,
    brute_force_minima,
    minima_attaining_basis_search,
    successive_minima,
)
from .reduction import (
    minkowski_product_ratio,
    minkowski_reduce,
    project_off_shortest,
    quasi_minimal_basis,
)
from .haar import (
    IwasawaCoords,
    SampleEnsemble,
    SiegelSet,
    count_siegel_translates,
    haar_density,
    iwasawa_decompose,
    sample_exact_d2,
    sample_siegel,
    volume_constants,
)
from .distribution import ExperimentReport, estimate_phi, estimate_tail, siegel_set_box_measure
from .siegel import PrimitiveTuple, enumerate_primitive_tuples, f_hat_k, siegel_mc_check
from .flows import (
    FlowSpec,
    LogLawTrace,
    apply_flow,
    borel_cantelli_upper_check,
    hitting_time,
    log_law_trace,
)

__version__ = "0.1.0"
