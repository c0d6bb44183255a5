//! Exact analysis of finite hidden-variable models of Bell-type experiments.
//!
//! A [`Scenario`] lists a finite hidden-variable space λ with rational prior
//! weights, measurements grouped by party, and for each context (one
//! measurement per party) the joint outcome table conditioned on every λ.
//! All probabilities are exact [`Rational`]s, so every check below is an
//! exact equality test:
//!
//! - [`analysis`]: determinism (every conditional is 0 or 1), Clauser–Horne
//!   factorability (joint = product of marginals at each λ), correlations
//!   and the CHSH value.
//! - [`determinize`]: an extra noise variable μ, independent of λ, making
//!   every context a deterministic function of γ = (λ, μ); integrating μ out
//!   gives back the original tables.
//! - [`factorize`]: independent per-party noises ξ_i making each measurement
//!   a deterministic function of (λ, ξ_i), built whenever the scenario is
//!   CH-factorizable; a failing entry of the product rule otherwise.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod demos;
pub mod determinize;
pub mod error;
pub mod factorize;
pub mod noise;
#[cfg(feature = "random")]
pub mod random;
pub mod rational;
pub mod scenario;
pub mod table;

pub use analysis::{
    analyze, chsh, chsh_patterns, correlation, is_ch_factorizable, is_deterministic,
    AnalysisReport, ChWitness, ChshPattern, DeterminismWitness, Verdict,
};
pub use demos::build_demo;
pub use determinize::{
    determinize, determinize_all, is_gamma_factorizable, marginalize, AugmentedScenario,
};
pub use error::{Error, Result};
pub use factorize::{
    build_shared_noise, factorize_independent, marginalize_model, reconstruct, verify_lemma_iii,
    Factorization, FactorizedModel,
};
pub use noise::{NoisePartition, ResponseTable};
pub use rational::{parse_rational, Rational, RationalError};
pub use scenario::{Context, LambdaPoint, LambdaSpace, Measurement, Scenario, ValidationReport};
pub use table::JointTable;
