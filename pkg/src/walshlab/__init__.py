"""walshlab: dyadic Walsh analysis toolkit.

Grids on [0,1) sampled over dyadic intervals, the fast Walsh-Hadamard
transform and XOR convolution, Walsh-Paley kernels and partial sums, dyadic
martingale transforms and weighted Carleson-type maximal operators,
summability matrices with their kernel decomposition and Lebesgue constants,
weight-condition analyzers, and the divergence-witness constructions —
everything exactly checkable at desk scale, with a CLI experiment runner.
"""
from .config import (
    DEFAULT_RESOLUTION_CAP,
    ResolutionCapError,
    resolution_cap,
    set_resolution_cap,
)
from .grids import (
    DyadicGrid,
    GridNorms,
    distribution_scan,
    norms,
    read_grid_csv,
    weak_l1,
    write_grid_csv,
)
from .indexing import BitDigits, WalshIndex, bit_digits
from .transform import (
    SpectrumVector,
    active_backend,
    available_backends,
    fwht,
    inverse_fwht,
    use_backend,
    xor_convolve,
    xor_convolve_direct,
)
from .kernels import (
    FrequencyRangeError,
    dirichlet,
    fejer_kernel,
    fejer_sum,
    partial_sum,
    rademacher,
    walsh,
)
from .martingale import (
    IndexSet,
    TransformResult,
    carleson_kernel,
    carleson_max,
    cond_exp,
    doob_max,
    h1_norm,
    mdiff,
    mtransform,
    mtransform_dependence_set,
    ones_weight,
    square_function,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
