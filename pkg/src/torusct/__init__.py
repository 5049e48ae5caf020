"""d-plane Radon transforms of band-limited functions on the flat torus."""

from .errors import CoveringError, NumericError, SchemaError, TorusError, WeightError
from .grassmann import (
    Direction,
    DirectionSet,
    canonicalize,
    covering_directions,
    height,
    is_orthogonal,
    omega_k,
    orthocomplement_basis,
    transverse_frame,
)
from .radon import (
    Sinogram,
    adjoint,
    backprojection_sum,
    forward,
    forward_quadrature,
    invert_bp_sum,
    invert_filtered_adjoint,
    invert_slice,
    slice_invert,
    transverse_samples,
)
from .regular import (
    TikhonovConfig,
    rate_bound,
    regstrat_experiment,
    regularized_inverse,
    stability_report,
    tikhonov_objective,
    tikhonov_solve,
)
from .spectrum import (
    DataFunction,
    FreqBox,
    Spectrum,
    apply_multiplier,
    data_inner,
    data_norm,
    evaluate_grid,
    hs_inner,
    hs_norm,
    lp_bessel_norm,
)
from .weights import (
    NormalSymbol,
    Weight,
    constant_weight,
    good_weight,
    normal_multiplier,
    normalize,
    partition_weight,
    validate,
)

__version__ = "0.1.0"
