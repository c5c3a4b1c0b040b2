"""Graph filtering under random edge sampling and random signals.

FIR and parallel ARMA graph filters run on sequences of randomly
edge-sampled graph realizations; the package provides their expected
behavior (recursions on the expected graph), variance bounds and exact
covariance tracking, streaming denoisers that exploit repeated noisy
observations, stochastically sparsified filtering, and a reproducible
Monte Carlo harness that checks all of it.
"""

__version__ = "0.1.0"

from .graphs import (
    Graph,
    LaplacianKind,
    LaplacianSpec,
    Spectrum,
    build_laplacian,
    expected_laplacian,
    generate_geometric_graph,
    gft,
    inverse_gft,
    read_graph,
    res_laplacian,
    sample_res,
    spectral_decompose,
    write_graph,
)
from .signals import (
    SignalProcess,
    sample_signal,
    synth_exp_decay_mean,
    synth_lowpass_mean,
)
from .filters import (
    FilterCoeffs,
    arma_coeffs,
    arma_init,
    arma_step,
    eval_2d_response,
    eval_response_arma,
    eval_response_fir,
    fir_apply_static,
    fir_coeffs,
    fir_init,
    fir_step_time_varying,
    mean_recursion_arma,
    mean_recursion_fir,
    steady_state_iters,
)
from .design import (
    ResponseTarget,
    arma_from_poles,
    design_arma1_tikhonov,
    design_arma_ls,
    design_fir_ls,
    read_coeffs,
    write_coeffs,
)
from .moments import (
    MomentState,
    StackedArmaSystem,
    arma_variance_bound,
    covariance_step,
    dirichlet_stats,
    expected_fluctuation_product,
    fir_variance_bound,
    mean_step,
    sparsified_variance_bound,
)
from .denoise import (
    DenoiseState,
    dad_step,
    denoise_init,
    jdmia_step,
    jdmioa_step,
    jdmoa_step,
    la_step,
    tikhonov_closed_form,
)
from .sparsify import (
    SparsifyConfig,
    rescale_arma,
    rescale_fir,
    run_sparsified,
    sparsify_report,
)
from .montecarlo import (
    ErrorStats,
    Scenario,
    TrajectoryBatch,
    error_stats,
    recursion_reference,
    run_scenario,
)
from .rng import substream
