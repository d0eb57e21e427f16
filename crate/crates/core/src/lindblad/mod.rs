//! Full-space master-equation engine.

mod engine;
mod kernel;
mod state;

pub use engine::{
    emission_rates, evolve, evolve_fully_excited, evolve_observed, fmt_num, nonreciprocity_metrics, rates_from_correlators, total_emission_slope,
    EmissionTrajectory, Evolution, EvolutionDiagnostics, EvolveOptions, Method, NonreciprocityMetrics,
    POSITIVITY_WARN,
};
pub use kernel::{liouvillian_apply, single_excitation_block, Block, Liouvillian, PackedLayout};
pub use state::{basis_index, excitation_pattern, qubit_bit, DensityMatrix, MAX_QUBITS};

/// Alias kept for callers that think in terms of the operation name.
pub fn fully_excited_state(n: usize) -> crate::error::Result<DensityMatrix> {
    DensityMatrix::fully_excited(n)
}
