"""SGD with a self-adjusting learning rate.

The learning rate is treated as the argument of the one-step loss
f(eta) = L(w - eta * g) and moved every iteration, either by gradient
descent on eta (first order) or by a finite-difference Newton step built
from a five-point stencil of probe losses (second order).  The package
bundles the optimizers, three small models, data plumbing, independent
verification oracles, and a CLI experiment harness.
"""

from .config import CONFIG_GRAMMAR, ExperimentConfig, parse_config
from .data import (
    BatchIterator,
    Dataset,
    SplitSpec,
    load_csv,
    load_idx,
    split,
    standardize,
    synthesize_classification,
    synthesize_regression,
    write_csv,
)
from .errors import (
    AlignmentError,
    AutolrError,
    ConfigError,
    ContractViolation,
    CsvParseError,
    DataError,
    DivergedProbeError,
    DivergenceError,
    IdxFormatError,
    SchemaError,
    SingularMatrixError,
    SplitSizeError,
)
from .harness import MetricsRow, compare_runs, prepare_experiment, run_experiment
from .models import (
    LinearRegressionModel,
    LogisticRegressionModel,
    MlpModel,
    build_linreg,
    build_logreg,
    build_mlp,
    least_squares_closed_form,
)
from .objective import CROSS_ENTROPY, SQUARE, Batch, Objective
from .optim import (
    FIRST_ORDER_BACKENDS,
    STRATEGIES,
    HyperParams,
    OptimizerState,
    StepReport,
    clamp_eta,
    init_state,
    make_step_fn,
    step_adam,
    step_basic,
    step_first_order,
    step_second_order,
    step_second_order_momentum,
    step_second_order_valprobe,
)
from .probe import (
    EtaProbe,
    StencilSample,
    analytic_derivative,
    collect_stencil,
    first_derivative,
    make_probe,
    probe_eval,
    second_derivative,
)
from .verify import GradCheckReport, LineSearchResult, gradcheck, line_search_oracle

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "AutolrError",
    "Batch",
    "BatchIterator",
    "CONFIG_GRAMMAR",
    "CROSS_ENTROPY",
    "ConfigError",
    "ContractViolation",
    "CsvParseError",
    "DataError",
    "Dataset",
    "DivergedProbeError",
    "DivergenceError",
    "EtaProbe",
    "ExperimentConfig",
    "FIRST_ORDER_BACKENDS",
    "GradCheckReport",
    "HyperParams",
    "IdxFormatError",
    "LineSearchResult",
    "LinearRegressionModel",
    "LogisticRegressionModel",
    "MetricsRow",
    "MlpModel",
    "Objective",
    "OptimizerState",
    "SQUARE",
    "STRATEGIES",
    "SchemaError",
    "SingularMatrixError",
    "SplitSizeError",
    "SplitSpec",
    "StencilSample",
    "StepReport",
    "analytic_derivative",
    "build_linreg",
    "build_logreg",
    "build_mlp",
    "clamp_eta",
    "collect_stencil",
    "compare_runs",
    "first_derivative",
    "gradcheck",
    "init_state",
    "least_squares_closed_form",
    "line_search_oracle",
    "load_csv",
    "load_idx",
    "make_probe",
    "make_step_fn",
    "parse_config",
    "prepare_experiment",
    "probe_eval",
    "run_experiment",
    "second_derivative",
    "split",
    "standardize",
    "step_adam",
    "step_basic",
    "step_first_order",
    "step_second_order",
    "step_second_order_momentum",
    "step_second_order_valprobe",
    "synthesize_classification",
    "synthesize_regression",
    "write_csv",
]
