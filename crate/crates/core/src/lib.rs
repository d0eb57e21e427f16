pub mod bessel;
pub mod config;
pub mod coupling;
pub mod error;
pub mod ferro;
pub mod integrator;
pub mod lindblad;
pub mod modes;
pub mod runner;
pub mod two_qubit;
