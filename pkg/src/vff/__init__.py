"""Variational fast-forwarding of spin-chain dynamics.

Trains a diagonal-form parameterized circuit V_t = W D(t) W^dag to match a
Trotterized short-time evolution using random product-state training data,
fast-forwards the learned evolution by rescaling the diagonal, evaluates
certified lower bounds on the average simulation fidelity, and verifies the
underlying Haar-integral identities by independent Monte Carlo.
"""

__version__ = "0.1.0"

from .ansatz import (
    GateSpec,
    ParamCircuit,
    VffAnsatz,
    apply_vff,
    build_ansatz,
    build_brickwork,
    build_diagonal,
    circuit_stats,
    givens_matrix,
    sym_matrix,
    vff_unitary,
)
from .bounds import (
    BoundInputs,
    BoundReport,
    bound_entangled_global,
    bound_nested_exact,
    bound_product_global,
    bound_product_local,
    generalization_term,
    remark_threshold,
    required_dataset_size,
)
from .costs import (
    CostValue,
    average_fidelity,
    cost_global_empirical,
    cost_hst,
    cost_local_empirical,
    expected_entangled_global,
    expected_product_global,
    expected_product_local_mc,
    tensor_power_cost_relation,
)
from .data import (
    Dataset,
    TrainingPair,
    generate_dataset,
    load_dataset,
    sample_haar_single_qubit,
    sample_stabilizer_single_qubit,
    save_dataset,
)
from .evaluation import (
    FastForwardPlan,
    PauliWeights,
    fidelity_from_weights,
    fidelity_series,
    pauli_decompose,
    pauli_reconstruct,
)
from .exceptions import ConfigError, NumericError, ResourceCapError
from .hamiltonians import (
    PauliSumHamiltonian,
    TrotterConfig,
    build_heisenberg_chain,
    build_xy_chain,
    trotter_error,
    trotter_unitary,
)
from .linalg import (
    PauliString,
    apply_gate,
    haar_random_unitary,
    hermitian_exp,
    partial_trace,
    schatten_norm,
    state_fidelity,
)
from .rng import make_rng
from .training import (
    GrowthConfig,
    TrainConfig,
    TrainResult,
    full_gradient,
    gradient_gamma,
    gradient_theta,
    reff_train,
    reff_train_grown,
    termination_threshold,
)
