"""Tensor-ring decomposition: TR-SVD, TR-BALS, core arithmetic and benchmarks."""
from .algebra import add, frobenius_norm, hadamard, inner_product, multilinear_product, negate, scale
from .low_rank import TruncationResult, delta_rank, solve_least_squares, truncated_svd
from .nd_tensor import (
    Unfolding,
    circular_shift_dims,
    flatten,
    fold,
    permute_dims,
    read_csv_tensor,
    read_dtns,
    relative_error,
    tensorize,
    unfold_k,
    unfold_mode_k,
    write_dtns,
)
from .tr_bals import BalsConfig, BalsRecord, BalsTrace, tr_bals
from .tr_core import (
    TRTensor,
    avg_rank,
    circular_shift_cores,
    num_params,
    random_ring,
    read_trz,
    subchain,
    subchain_unfolding,
    to_dense,
    tr_element,
    write_trz,
)
from .tr_svd import SvdConfig, split_rank, tr_svd, tt_svd

__version__ = "0.1.0"
