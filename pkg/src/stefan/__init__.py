"""One-phase Stefan problem: direct front-fixing solver and influx recovery."""

from .errors import (
    ConfigurationError,
    DomainError,
    NumericalFault,
    StabilityError,
    StefanError,
    ValidationError,
)
from .problem import (
    ExactSolution,
    FreeBoundaryPath,
    StefanCase,
    TimeSignal,
    make_fixture,
    sample_path,
    validate_case,
)
from .direct import BimGrid, TemperatureField, bim_step, energy_residual, plan_grid, solve_direct
from .kernel import abel_forward, abel_inverse, heat_kernel, neumann_kernel
from .quadrature import PanelRule, integrate, rule_nodes
from .inverse import (
    LinearSystem,
    TikhonovConfig,
    TikhonovResult,
    assemble_system,
    condition_estimate,
    reconstruct_u,
    tikhonov_solve,
)
from .experiment import (
    ExperimentReport,
    NoiseSpec,
    add_noise,
    rel_l2_error,
    resample_path,
    run_pipeline,
    run_sweep,
    spawn_seeds,
    table_error_metrics,
)

__version__ = "0.1.0"
