"""Tikhonov regularization of ill-posed tensor equations by Golub-Kahan bidiagonalization.

Tensors are plain float64 numpy arrays with 0-based modes. The main entry
points are :class:`SylvesterOperator` and :class:`SteinOperator` (or any
:class:`LinearTensorOperator`), the drivers :func:`algorithm3` and
:func:`algorithm4`, the condition-number bounds in :mod:`tensorgkb.conditioning`
and the deblurring helpers in :mod:`tensorgkb.imaging`.
"""

from .bidiag import Breakdown, GkbState, LowerBidiagonal, diagnostics, gkb_init, gkb_step, run_to
from .conditioning import (
    SpectralSummary,
    cond_report,
    cond_upper_prop21,
    contractive_upper_bound,
    diagonalizable_cond_bounds,
    gram_extreme_bounds,
    hermitian_part_radius_bound,
    inv_norm_upper_and_cond,
    kron_rayleigh_product,
    oracle_cond,
    spectral_summary,
    xu_lower_bound,
)
from .exceptions import (
    CapacityError,
    ContractError,
    ConvergenceError,
    FormatError,
    HypothesisError,
    NeedsLargerKError,
    NoSolutionError,
    ShapeError,
    SingularityError,
    StateError,
)
from .imaging import (
    BlurSpec,
    NoiseSpec,
    add_noise,
    build_blur_problem,
    collocation_matrix,
    gaussian_toeplitz,
    read_ppm,
    relative_error,
    synthetic_image,
    uniform_toeplitz,
    write_ppm,
)
from .operators import (
    LinearTensorOperator,
    MatrixFreeOperator,
    SteinOperator,
    SylvesterOperator,
    make_matrix_free,
    materialize,
    materialize_stein,
    materialize_sylvester,
    verify_adjoint,
)
from .regularization import (
    DiscrepancyConfig,
    TikhonovSolution,
    algorithm3,
    algorithm4,
    gauss_bound,
    newton_solve_nu,
    phi,
    radau_bound,
    solve_projected_ls,
    tikhonov_fixed_mu,
)
from .tensor import (
    contracted_product,
    devec,
    inner,
    matricize,
    mode_contract_vector,
    n_mode_product,
    norm,
    read_tensor,
    vec,
    write_tensor,
)

__version__ = "0.1.0"
