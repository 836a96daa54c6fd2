"""Solver for the 2D nonlinear bond-based peridynamic wave equation.

Fourier spectral collocation in space (FFT circular convolution of the
micromodulus kernel) and the Newmark-beta method in time, with a
brute-force operator oracle, fictitious-domain volume penalization and a
convergence-study harness.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    GridMismatchError,
    GridTooLargeError,
    HorizonTooLargeError,
    ImaginaryResidueError,
    KrylovStallError,
    NewtonDivergenceError,
    NonFiniteFieldError,
    PeridynError,
    SnapshotFormatError,
    ValidationError,
)
from .grid import (
    Field,
    Grid2D,
    build_grid,
    constant_field,
    field_from_function,
    inner_product,
    l2_norm,
    max_norm,
    read_snapshot,
    relative_l2_error,
    relative_l2_error_sqrt,
    total_variation,
    write_csv,
    write_snapshot,
)
from .spectral import KernelSpectrum, Spectrum, build_kernel, forward_dft2, inverse_dft2
from .operator import OperatorSpec, apply_direct, apply_spectral, jvp
from .integrators import (
    IntegrationResult,
    State,
    TimeConfig,
    cg_solve,
    integrate,
    newmark_step,
    newton_solve,
    stormer_verlet_step,
)
from .penalization import (
    PenalizationConfig,
    extend_domain,
    penalized_rhs,
    restrict_to_interior,
)
from .experiments import (
    BenchmarkSpec,
    ComparisonTable,
    ConvergenceTable,
    PenalizationSettings,
    integrator_comparison,
    jump_benchmark,
    observed_rate,
    reference_solution,
    run_benchmark,
    smooth_benchmark,
    spatial_convergence_study,
    temporal_convergence_study,
)

__all__ = [
    "__version__",
    "BenchmarkSpec",
    "ComparisonTable",
    "ConfigError",
    "ConvergenceTable",
    "Field",
    "Grid2D",
    "GridMismatchError",
    "GridTooLargeError",
    "HorizonTooLargeError",
    "ImaginaryResidueError",
    "IntegrationResult",
    "KernelSpectrum",
    "KrylovStallError",
    "NewtonDivergenceError",
    "NonFiniteFieldError",
    "OperatorSpec",
    "PenalizationConfig",
    "PenalizationSettings",
    "PeridynError",
    "SnapshotFormatError",
    "Spectrum",
    "State",
    "TimeConfig",
    "ValidationError",
    "apply_direct",
    "apply_spectral",
    "build_grid",
    "build_kernel",
    "cg_solve",
    "constant_field",
    "field_from_function",
    "forward_dft2",
    "integrate",
    "integrator_comparison",
    "inner_product",
    "inverse_dft2",
    "jump_benchmark",
    "jvp",
    "l2_norm",
    "max_norm",
    "newmark_step",
    "newton_solve",
    "observed_rate",
    "penalized_rhs",
    "read_snapshot",
    "reference_solution",
    "relative_l2_error",
    "relative_l2_error_sqrt",
    "restrict_to_interior",
    "run_benchmark",
    "smooth_benchmark",
    "spatial_convergence_study",
    "stormer_verlet_step",
    "temporal_convergence_study",
    "total_variation",
    "write_csv",
    "write_snapshot",
]
