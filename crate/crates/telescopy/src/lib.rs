//! Numerical workbench for random-party pre-processing in long-baseline
//! quantum telescopy.
//!
//! An array of `M` telescopes receives faint stellar light whose first-order
//! coherence `g_XY` between apertures `X` and `Y` encodes a Fourier component
//! of the source intensity. This crate models the truncated (at most one
//! stellar photon) state of the array, the local weak measurements that
//! collapse it onto a random pair of telescopes, and the interferometric
//! measurement schemes that consume bipartite resources distributed by a
//! central server. It provides:
//!
//! - [`state`]: stellar-state construction from coherence data or a source
//!   intensity model, and weak-measurement Kraus updates;
//! - [`povm`]: POVM families for every measurement scheme, with completeness
//!   and positivity verification, and Born-rule outcome distributions;
//! - [`distill`]: survival products, distillation yields `γ_D`/`β_D`, closed
//!   forms, and numerical schedule optimization;
//! - [`fisher`]: Fisher-information matrices, closed-form and via finite
//!   differences, plus scheme-to-scheme ratios;
//! - [`montecarlo`]: an independent stochastic oracle that simulates the
//!   round-by-round protocol with reproducible counter-based RNG streams;
//! - [`cli`]: a command-line front end emitting CSV tables with provenance
//!   headers.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod cli;
pub mod distill;
pub mod error;
pub mod fisher;
pub mod montecarlo;
pub mod pairs;
pub mod povm;
pub mod quad;
pub mod rng;
pub mod state;

pub use error::{Error, Result};
