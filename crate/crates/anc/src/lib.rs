//! Adaptive noise cancellation toolkit.
//!
//! A two-microphone noise canceller and the tooling around it: WAV/PCM audio
//! handling, deterministic test-scenario synthesis, adaptive filters
//! (LMS/NLMS/RLS plus a Q15 fixed-point LMS), offline filter-weight optimizers
//! (PSO, JAYA, simulated annealing), delay-and-sum beamforming, a simulated
//! double-buffered streaming pipeline, and an evaluation harness producing
//! SNR, convergence, and runtime reports.
//!
//! The canceller setup: a primary microphone picks up speech plus noise
//! `d[n]`, a second microphone facing the noise source picks up a reference
//! `x[n]`. An adaptive FIR filter shapes `x` into an estimate `y` of the
//! noise component of `d`; the error `e = d - y` is the denoised output.

pub mod audio;
pub mod beamforming;
pub mod config;
pub mod error;
pub mod filters;
pub mod metaheuristics;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod synth;

pub use audio::AudioClip;
pub use error::{Error, Result};
pub use filters::{FilterConfig, FilterKind, FilterState};
pub use synth::{Scenario, ScenarioSpec};
