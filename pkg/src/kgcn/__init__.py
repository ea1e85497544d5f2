"""Graph convolution in block Krylov form.

A numpy/scipy library for spectrum-free graph convolution built on block
Krylov features: densely stacked (snowball) and truncated-Krylov
architectures with exact manual gradients, a full-batch training harness,
rank-dynamics and spectrum experiments, and a portable dataset container.
"""

from .container import Dataset, load_container, row_normalize, write_container
from .errors import (
    BadConfig,
    EmptyMask,
    InsufficientLabels,
    InvalidEdge,
    KgcnError,
    MissingDataset,
    NotLinear,
    NumericalError,
    RangeWarning,
    ShapeError,
    TooLarge,
)
from .experiments import (
    RankTrace,
    SpectrumResult,
    benchmark_grid,
    rank_experiment,
    spectrum_experiment,
)
from .graph import (
    DiffusionOperator,
    Graph,
    SplitSpec,
    build_graph,
    connected_components,
    diffusion,
    erdos_renyi,
    make_split,
)
from .krylov import (
    KrylovGrade,
    block_krylov_matrix,
    classical_block_inner,
    krylov_grade,
)
from .linalg import (
    SparseMatrix,
    activation,
    activation_grad,
    gemm,
    numerical_rank,
    spectrum,
    spmm,
)
from .models import (
    ForwardTape,
    ModelParams,
    ModelSpec,
    backward,
    collapse_linear_snowball,
    extract_features,
    forward,
    forward_snowball,
    forward_truncated_krylov,
    forward_vanilla,
    init_params,
    load_params,
    save_params,
)
from .presets import get_preset, hyperparams_from_preset, spec_for_variant
from .training import (
    Hyperparams,
    TrainReport,
    adam_step,
    evaluate,
    masked_cross_entropy,
    rmsprop_step,
    train,
    train_single,
)

__version__ = "0.1.0"
