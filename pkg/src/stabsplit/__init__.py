"""Stabilizer decomposition toolkit for collective spin Hamiltonians."""

from .adapt import (
    ADAPT_QUBIT_LIMIT,
    AdaptConfig,
    AdaptError,
    AdaptLayer,
    AdaptTrace,
    PoolOperator,
    apply_ansatz,
    gradient,
    pool,
    run_adapt,
)
from .evolve import (
    QITP_QUBIT_LIMIT,
    ItePlan,
    VariationalResult,
    deformed_hf,
    ite_curve,
    ite_evolve,
    parity_project,
    qitp_operators,
    qitp_postselect,
    qitp_unitary,
    variational_jz,
    variational_qitp_jz,
)
from .exact import (
    DickeVector,
    dense_ground_state,
    dicke_hamiltonian,
    dicke_hamiltonian_full,
    dicke_to_statevector,
    fidelity,
    ground_state,
    sector_ks,
    stab_state_dicke_amplitudes,
)
from .lmg import (
    HamiltonianSplit,
    LmgCandidate,
    LmgParams,
    best_family_energy,
    build_lmg,
    candidate_groups,
    pair_family_group,
    parity_string,
    preparation_circuit,
    prepare_stab_state,
    product_family_group,
    select_split,
    symmetry_breaking_energy,
)
from .metrics import (
    SRE_QUBIT_LIMIT,
    MetricsReport,
    metrics_report,
    n_tangle,
    n_tangle_dicke,
    one_spin_entropy,
    one_spin_entropy_dicke,
    parity_expectation,
    sre,
)
from .pauli import (
    PauliHamiltonian,
    PauliString,
    ResourceLimitError,
    canonical_phase,
    num_qubits,
)
from .tableau import (
    CliffordGate,
    GraphStateForm,
    StabilizerGroup,
    apply_circuit,
    apply_gate,
    conjugate_pauli,
    graph_state_group,
    prepare_graph_state,
)

__all__ = [
    "ADAPT_QUBIT_LIMIT",
    "AdaptConfig",
    "AdaptError",
    "AdaptLayer",
    "AdaptTrace",
    "CliffordGate",
    "DickeVector",
    "GraphStateForm",
    "HamiltonianSplit",
    "ItePlan",
    "LmgCandidate",
    "LmgParams",
    "MetricsReport",
    "PauliHamiltonian",
    "PauliString",
    "PoolOperator",
    "QITP_QUBIT_LIMIT",
    "ResourceLimitError",
    "SRE_QUBIT_LIMIT",
    "StabilizerGroup",
    "VariationalResult",
    "apply_ansatz",
    "apply_circuit",
    "apply_gate",
    "best_family_energy",
    "build_lmg",
    "candidate_groups",
    "canonical_phase",
    "conjugate_pauli",
    "deformed_hf",
    "dense_ground_state",
    "dicke_hamiltonian",
    "dicke_hamiltonian_full",
    "dicke_to_statevector",
    "fidelity",
    "gradient",
    "graph_state_group",
    "ground_state",
    "ite_curve",
    "ite_evolve",
    "metrics_report",
    "n_tangle",
    "n_tangle_dicke",
    "num_qubits",
    "one_spin_entropy",
    "one_spin_entropy_dicke",
    "pair_family_group",
    "parity_expectation",
    "parity_project",
    "parity_string",
    "pool",
    "preparation_circuit",
    "prepare_graph_state",
    "prepare_stab_state",
    "product_family_group",
    "qitp_operators",
    "qitp_postselect",
    "qitp_unitary",
    "run_adapt",
    "sector_ks",
    "select_split",
    "sre",
    "stab_state_dicke_amplitudes",
    "symmetry_breaking_energy",
    "variational_jz",
    "variational_qitp_jz",
]

__version__ = "0.1.0"
