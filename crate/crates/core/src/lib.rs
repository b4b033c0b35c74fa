//! Simulator for a heat engine driven purely by quantum coherence.
//!
//! Qubits start in their Gibbs state and are charged one at a time by a
//! resonant Jaynes-Cummings interaction with a bosonic bath prepared in the
//! coherent Gibbs state `|γ_B⟩ ∝ Σ_n e^{-βω₀n/2}|n⟩`. Charging leaves the
//! populations thermal and only adds coherence between different energies.
//! `N` charged copies together carry internal coherence, which is the part
//! that can be turned into work.
//!
//! Modules, bottom up:
//!
//! * [`operator`]: dense states, partial traces, spectra, entropies.
//! * [`coherence`]: dephasing maps and coherence measures.
//! * [`charging`]: single-qubit charging, series and exact evolution.
//! * [`engine`]: N-copy activation, work, coherence flow, efficiency.
//! * [`collective`]: collective (Tavis-Cummings) charging for comparison.
//! * [`optimize`]: grid sweeps and simplex refinement.

pub mod charging;
pub mod coherence;
pub mod collective;
pub mod engine;
pub mod error;
pub mod operator;
pub mod optimize;

pub use error::{Error, Result};
