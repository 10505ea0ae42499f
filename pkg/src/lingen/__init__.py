"""Memorisation, convergence and latent recovery in linear generative models.

Monte-Carlo estimators for the overlaps ``m``, ``q``, ``Q`` and ``Q*`` of
Gaussian generative models fitted to finite datasets, together with their
random-matrix predictions (Marchenko-Pastur, BBP, KL and max-sliced distances).
"""

from lingen.linalg import (
    EigenPair,
    GenerativeModel,
    correlation_matrix,
    empirical_covariance,
    leading_eigenpair,
    psd_sqrt,
    spectral_norm,
)
from lingen.models import (
    Dataset,
    PowerLawModel,
    SpikedModel,
    make_powerlaw_model,
    make_spiked_model,
    phase_randomize,
    powerlaw_amplitudes,
    sample_dataset,
)
from lingen.overlaps import (
    OverlapEstimate,
    combine_trials,
    convergence_overlap,
    finite_n_memorisation_oracle,
    memorisation_overlap,
    rotated_subspace_overlap,
    subspace_overlap,
)
from lingen.theory import (
    BBPResult,
    DivergenceError,
    KLResult,
    MPLaw,
    MSResult,
    bbp_overlap,
    kl_divergence,
    m_asymptotic,
    mp_density,
    mp_expectation,
    mp_law,
    ms_asymptotic,
    ms_distance,
    q_analytical,
    rescale_eigenvalue,
)

__version__ = "0.1.0"
