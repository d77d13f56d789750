"""Super-resolved inversion of band-limited Hankel transforms.

Data h = H_nu[f] known on [0, r] for f supported in [0, sigma] is inverted
beyond the diffraction scale pi/r by combining a prolate-spheroidal
regularized inverse of the finite Fourier operator with Radon-type
(Cormack or filtered-back-projection) inversion, with the truncation index
chosen by residual minimization.
"""

from .bandlimited import (
    SampledFunction1D,
    apply_Fc,
    invert_Fc_truncated,
    l2_norm,
    oversample_linear,
)
from .errors import HankelSRError, NumericalError, ValidationError
from .hankel import (
    HankelDataset,
    HankelOrder,
    hankel_bandlimited_forward,
    hankel_forward,
    naive_inverse,
    symmetrize,
)
from .pswf import PSWFBasis, build_basis, compute_mu, eval_psi, load_or_build
from .radon import (
    RadialProfile,
    Sinogram2D,
    angular_project,
    cormack2d_forward,
    cormack2d_invert,
    cormack3d_forward,
    cormack3d_invert,
    fbp2d,
)
from .reconstruct import (
    TWO_STEP_INTERVALS,
    ExperimentConfig,
    PhantomSpec,
    ReconstructionReport,
    add_noise,
    correlation,
    get_basis,
    make_dataset,
    make_phantom,
    reconstruct_fbp,
    reconstruct_naive,
    reconstruct_theorem,
    residual,
    run_experiment,
    select_m,
)

__version__ = "0.1.0"

__all__ = [
    "SampledFunction1D",
    "apply_Fc",
    "invert_Fc_truncated",
    "l2_norm",
    "oversample_linear",
    "HankelSRError",
    "NumericalError",
    "ValidationError",
    "HankelDataset",
    "HankelOrder",
    "hankel_bandlimited_forward",
    "hankel_forward",
    "naive_inverse",
    "symmetrize",
    "PSWFBasis",
    "build_basis",
    "compute_mu",
    "eval_psi",
    "load_or_build",
    "RadialProfile",
    "Sinogram2D",
    "angular_project",
    "cormack2d_forward",
    "cormack2d_invert",
    "cormack3d_forward",
    "cormack3d_invert",
    "fbp2d",
    "TWO_STEP_INTERVALS",
    "ExperimentConfig",
    "PhantomSpec",
    "ReconstructionReport",
    "add_noise",
    "correlation",
    "get_basis",
    "make_dataset",
    "make_phantom",
    "reconstruct_fbp",
    "reconstruct_naive",
    "reconstruct_theorem",
    "residual",
    "run_experiment",
    "select_m",
]
