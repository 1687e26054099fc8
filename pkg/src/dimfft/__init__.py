"""Dimension-independent sparse Fourier transform toolkit."""

from .core import (
    Dims,
    SignalOracle,
    SparseSpectrum,
    convolve,
    dft,
    flatten,
    idft,
    read_signal,
    tensor,
    unflatten,
    write_signal,
)
from .estimate import EstimateReport, estimate
from .filters import (
    FilterDescriptor,
    IsolatingFilter,
    TimeFilter,
    build_isolating_filter,
    filter_frequency,
    filter_preprocess,
    filter_time,
    project_coordinate_tree,
)
from .harness import RunReport, run, sweep
from .pruning import (
    PruneTrace,
    build_hamming_tree,
    hamming_ball,
    prune,
    verify_lower_bound,
)
from .randsupport import (
    RandomSupportConfig,
    bernoulli_collision_stats,
    bucket_value,
    hashing,
    least_squares_solve,
    make_bucket,
    sparse_fft_random_support,
    test_buckets,
)
from .recover import (
    RecoveryConfig,
    RecoveryReport,
    SampleSet,
    make_sample_set,
    sparse_fft_random_phase,
    sparse_fft_worst_case,
    zero_test,
)
from .signals import SignalSpec, generate
from .tree import (
    SplittingTree,
    build_tree,
    frequency_cone,
    leaf_weight,
    min_weight_leaf,
    remove_leaf,
)

__version__ = "0.1.0"
