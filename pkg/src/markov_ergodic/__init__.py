"""Ergodic analysis of finite Markov kernels.

Spectral splitting, ergodic decomposition with explicit Cesaro limits,
Doeblin/Harris checks, shock-driven economy models and trace chains.
"""

from .conditions import (
    Condition,
    ConditionReport,
    check_doeblin,
    check_harris,
    check_qscc_witness,
    check_uniform_integrability,
    replay,
)
from .decomposition import (
    ErgodicDecomposition,
    decompose,
    limit_kernel_error,
    limit_of_initial_measure,
    restricted_time_average,
)
from .economy import (
    EconomyModel,
    ErgodicityVerdict,
    TraceChain,
    check_theorem2,
    ergodicity_verdict,
    induce_kernel,
    iterate_law,
    trace_chain,
)
from .errors import (
    AmbiguousLimitError,
    InvalidInputError,
    MarkovError,
    NonReturningError,
    NumericalDegeneracyError,
)
from .kernel import (
    MarkovKernel,
    Observable,
    SignedMeasure,
    StateSpace,
    apply_measure,
    apply_observable,
    cesaro_average,
    duality_gap,
    kernel_distance,
    n_step,
)
from .simulation import (
    SimulationRun,
    convergence_profile,
    deterministic_time_average,
    empirical_stderr,
    empirical_time_average,
    simulate_path,
)
from .spectral import (
    SpectralSplit,
    cesaro_projection,
    compute_split,
    reconstruct_power,
    residual_decay_profile,
)

__version__ = "0.1.0"
