"""Tensor-network models for high-order lagged polynomial dynamics.

Coefficient tensors of order-P lag-L polynomial maps live on two dual
lattices (replica sites vs time-lag sites); this package maps between
them, measures entanglement entropy across contiguous cuts, classifies
its growth, compresses tensors as tensor trains and binary trees, and
fits the compressed models to synthetic nonlinear series.
"""

__version__ = "0.1.0"

from .dense import SVDResult, contract, matricize, svd
from .dynamics import (
    CapacityPair,
    FitOptions,
    FitReport,
    SeriesDataset,
    capacity_comparison,
    fit_tt_model,
    forecast,
    generate_hnd,
    rmse,
)
from .entanglement import (
    EEProfile,
    PureState,
    ReducedDensityMatrix,
    ScalingClass,
    ScalingFit,
    classify_scaling,
    ee_profile,
    entropy,
    normalize,
    reduced_density_matrix,
    tt_cut_entropies,
)
from .errors import DivergenceError, NumericsError, SizeCapError, TnpolyError, ValidationError
from .nonlin import Nonlinearity
from .problem import (
    CoeffTensor,
    ProblemSpec,
    Representation,
    enumerate_multi_indices,
    enumerate_occupations,
    evaluate,
    evaluate_dual,
    evaluate_original,
    from_dual,
    full_dimension,
    inner_product,
    multinomial,
    occupation_of,
    symmetric_dimension,
    symmetrize,
    to_dual,
)
from .tensor_train import (
    TTState,
    canonicalize,
    is_canonical,
    random_dense_state,
    random_tt,
    tt_contract_history,
    tt_decompose,
    tt_decompose_with_error,
    tt_parameter_count,
    tt_reconstruct,
    tt_round,
)
from .tree_model import (
    FilterViolation,
    TcnWeights,
    TreeNetwork,
    check_symmetric_filters,
    lag_selector_inputs,
    power_inputs,
    random_tree,
    tcn_forward,
    tcn_tensors,
    tree_cut_bond_dims,
    tree_forward,
    tree_reconstruct,
)
