//! Simulator and analytic calculator for the secret-bit guessing game.
//!
//! Bob guesses Alice's two secret bits with a decision-making machine that
//! runs two probabilistic operations on an ancilla bit. The classical
//! machine samples each operation as identity or NOT; the quantum machine
//! applies phase-steered 2×2 unitaries to a qubit and measures. Hints bias
//! the operation preferences, and the quantum machine additionally uses the
//! sign pattern of the hint to pick the relative phase between its gates.
//!
//! Modules, bottom-up:
//!
//! - [`qcore`]: 2×2 matrices, gates, the phase rule, dephasing, readout.
//! - [`game`]: secrets, guesses, scoring, operation pairs, hint quality.
//! - [`machines`]: sampled classical and quantum machines, seeded RNG.
//! - [`analytic`]: closed-form payoffs and a brute-force oracle.
//! - [`experiments`]: grid, symmetric-line and decoherence sweeps to CSV.

pub mod analytic;
pub mod error;
pub mod experiments;
pub mod game;
pub mod machines;
pub mod qcore;

pub use error::{Error, Result};
pub use game::{Guess, HintQuality, HintVector, Op, ScoreTable, SecretBits, TauCase};
pub use machines::{
    ClassicalMachine, DecisionMachine, GameResult, MachineConfig, MachineKind, QuantumMachine,
    RngStream,
};
pub use qcore::{ComplexMatrix2, DensityMatrix, PhaseDifference, StochasticGate, UnitaryGate};

/// Absolute tolerance for exact-math checks on 2×2 double-precision products.
pub const TOLERANCE: f64 = 1e-12;
