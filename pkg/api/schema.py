"""
Public surface of threewave: the pure operations of every app (queries) and
the operations that write artifacts (mutations), gathered in one place.
"""

from apps.classical.mutations import export_linear_params, export_trajectory
from apps.classical.queries import (
    classical_growth_rate,
    classical_linear_params,
    classical_linear_solution,
    equal_daughter_solution,
    equilibrium_growth_rate,
    integrate_actions,
    integrate_amplitudes,
)
from apps.evolve.mutations import export_summary, export_timeseries
from apps.evolve.queries import (
    evolve_observables,
    fd_second_derivative,
    heisenberg_check,
    heisenberg_rhs_check,
    number_operator_rhs,
    propagate,
)
from apps.experiments.mutations import (
    export_sweep,
    load_preset,
    run,
    run_preset,
    sweep,
)
from apps.fock.queries import (
    basis_state,
    conservation_error,
    expectations,
    probabilities,
    snapshot,
    subspace_dimension,
    variance_n1,
)
from apps.hamiltonian.mutations import export_couplings
from apps.hamiltonian.queries import apply, build, complex_phase_matrix, coupling
from apps.linear.mutations import export_comparison, export_params
from apps.linear.queries import (
    compare_linear,
    determine_C1,
    divergence_time,
    initial_variance,
    quantum_growth_rate,
    quantum_linear_params,
    quantum_linear_solution,
    spread_state,
    variance_growth_bound,
    variance_slope,
)
from apps.spectral.mutations import (
    export_diagnostics,
    export_fidelity,
    export_lines,
    export_recurrence,
    export_spectrum,
    export_weights,
)
from apps.spectral.queries import (
    count_distinct_frequencies,
    eigen_weights,
    eigensystem,
    fidelity,
    reconstruct_n3,
    recurrence_time,
    spacing_diagnostic,
    spectral_lines_n3,
)

QUERIES = (
    # fock
    subspace_dimension,
    basis_state,
    probabilities,
    expectations,
    variance_n1,
    snapshot,
    conservation_error,
    # hamiltonian
    coupling,
    build,
    apply,
    complex_phase_matrix,
    # classical
    integrate_amplitudes,
    integrate_actions,
    classical_growth_rate,
    equilibrium_growth_rate,
    classical_linear_params,
    classical_linear_solution,
    equal_daughter_solution,
    # evolve
    propagate,
    evolve_observables,
    number_operator_rhs,
    fd_second_derivative,
    heisenberg_check,
    heisenberg_rhs_check,
    # linear
    spread_state,
    initial_variance,
    variance_growth_bound,
    variance_slope,
    quantum_growth_rate,
    determine_C1,
    quantum_linear_params,
    quantum_linear_solution,
    compare_linear,
    divergence_time,
    # spectral
    eigensystem,
    eigen_weights,
    spectral_lines_n3,
    reconstruct_n3,
    spacing_diagnostic,
    count_distinct_frequencies,
    fidelity,
    recurrence_time,
)

MUTATIONS = (
    export_couplings,
    export_trajectory,
    export_linear_params,
    export_timeseries,
    export_summary,
    export_params,
    export_comparison,
    export_spectrum,
    export_weights,
    export_lines,
    export_diagnostics,
    export_recurrence,
    export_fidelity,
    export_sweep,
    load_preset,
    run,
    run_preset,
    sweep,
)

__all__ = [f.__name__ for f in QUERIES + MUTATIONS] + ["QUERIES", "MUTATIONS"]
