"""Cavity-qubit ground-state structure and dissipative quench dynamics."""

__version__ = "0.1.0"

from .operators import (
    DensityMatrix,
    FockCutoff,
    ModelParams,
    OperatorMatrix,
    annihilation,
    build_hamiltonian,
    parity_operator,
    partial_trace,
    partial_transpose,
    qubit_operators,
    tensor_product,
)
from .spectrum import (
    DressedOperators,
    EigenSystem,
    critical_coupling,
    diagonalize,
    diagonalize_model,
    dressed_frequency_operators,
    dressed_operators,
    energy_gap,
)
from .observables import (
    QfiGenerator,
    WignerGrid,
    expectation,
    min_quadrature_variance,
    mutual_information,
    negativity_witness,
    quantum_fisher_information,
    von_neumann_entropy,
    wigner_function,
)
from .dynamics import (
    BathSpec,
    DressedGenerator,
    QuenchProtocol,
    QuenchResult,
    build_generator,
    detect_cusps,
    evolve,
    lindblad_rhs,
    relaxation_coefficients,
    return_rate,
    rk4_step,
    run_quench,
    thermal_occupation,
)
from .phase_diagram import (
    PhaseDiagramGrid,
    SweepSpec,
    compute_point,
    mean_field_occupation,
    run_sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]
