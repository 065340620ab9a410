"""Quantum state tomography toolkit: square-root measurements, classical
reconstruction (linear inversion, constrained least squares, maximum
likelihood), and feed-forward network estimators trained with Nadam."""

from .qcore import (
    gell_mann_basis,
    to_bloch,
    from_bloch,
    hs_distance,
    min_eigenvalue,
    positivize,
    purity,
    cholesky_to_state,
    state_to_cholesky,
    random_density_ginibre,
    random_haar_pure,
)
from .measurement import (
    Povm,
    FrequencyVector,
    square_root_measurement,
    born_probabilities,
    measurement_matrix,
    sample_frequencies,
    random_srm,
)
from .estimators import (
    SolverOptions,
    EstimatorReport,
    linear_inversion,
    psd_simplex_projection,
    constrained_ls,
    log_likelihood,
    mle,
)
from .neuralnet import (
    LayerSpec,
    MlpParams,
    TrainConfig,
    mlp_layers,
    init_params,
    forward,
    mse_loss,
    backward,
    nadam_state,
    nadam_step,
    train,
    predict_state_bloch,
    predict_state_cholesky,
)

__version__ = "0.1.0"
