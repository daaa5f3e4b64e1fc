"""Backward SDE solver with signature-regression conditional expectations.

Pipeline: simulate a Brownian driving batch, push it through a forward model,
then run the backward Euler recursion where every conditional expectation is a
ridge regression on truncated signatures of the time-augmented driving path.
Benchmarks with closed-form solutions (linear, entropic, square-root
discounting, ambiguous-rate) quantify the path-space error.
"""

from .benchmarks import (
    Benchmark,
    RiskMeasurePath,
    ambiguous_benchmark,
    ambiguous_driver,
    cir_benchmark,
    constant_beta_reference,
    entropic_benchmark,
    linear_benchmark,
    make_benchmark,
    risk_measure_path,
)
from .conditional import CeConfig, conditional_expectation
from .errors import (
    RidgeError,
    ShapeError,
    SimulationError,
    SolverError,
    TrainingError,
)
from .experiments import (
    ErrorReport,
    ExperimentConfig,
    ScalingResult,
    run_experiment,
    scaling_study,
)
from .metrics import erl2
from .mlp import MlpParams, TrainConfig, clamp_rate, network_driver, train
from .signature import (
    AugmentedBatch,
    AugmentedPath,
    PrefixSignatures,
    SignatureFeatures,
    augment_time,
    feature_vector,
    prefix_signatures,
    segment_signature,
)
from .simulate import (
    PathBatch,
    TimeGrid,
    cir_full_truncation,
    euler_maruyama,
    sample_brownian,
)
from .solver import (
    BsdeSolution,
    DriverSpec,
    solve_explicit,
    solve_implicit,
)
from .tensoralg import (
    TruncatedTensor,
    Word,
    concat_product,
    dimension,
    exp_level1,
    inner_product,
    shuffle_product,
    unit,
    word_tensor,
)

__version__ = "0.1.0"
