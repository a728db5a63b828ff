//! Statevector simulation and amplitude-amplification tuning of
//! multi-controlled-X networks that learn Boolean concepts from a quantum
//! example oracle.
//!
//! Qubit `q_i` is bit `i` of every basis index and of every [`BitString`].
//! With `n` inputs the register holds `q_0..q_{n-1}`, the output ancilla
//! `q_n` and the scaling ancilla `q_{n+1}`.

pub mod amplification;
pub mod anf;
pub mod error;
pub mod experiments;
pub mod learner;
pub mod oracle;
pub mod statevector;
pub mod tnn;
pub mod verify;

pub use amplification::{build_a, m_max, predicted_probability, AmplificationSetup, ThetaPair};
pub use anf::{parity_anf, Anf, BitString, TruthTable};
pub use error::{QpacError, Result};
pub use experiments::{run_grid, summarize, ConceptSelection, ExperimentConfig, ResultRow, SummaryRow};
pub use learner::{
    compute_n, learn, parity_update, posterior_confidence, sampling_phase, schedule_values, GroupedInputs, LearnParams,
    LearnRecord, ParityUpdate, SampleBatch, Schedule, UpdateStrategy,
};
pub use oracle::{Oracle, ProductDistribution};
pub use statevector::{Circuit, Gate, StateVector};
pub use tnn::TnnState;
