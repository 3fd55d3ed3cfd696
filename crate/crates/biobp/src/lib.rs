//! # biobp — a credit-assignment laboratory
//!
//! This crate trains multilayer perceptrons under four interchangeable
//! backward rules and compares them on equal footing:
//!
//! * **vbp** — vanilla backprop: transpose-weight transport, true sigmoid
//!   derivative.
//! * **fba** — feedback alignment: fixed random backward matrices drawn once
//!   and never updated.
//! * **itd-y** — feedback alignment whose derivative is replaced by the
//!   temporal difference of batch-mean activations between consecutive
//!   training steps.
//! * **itd-dy** — same, but the surrogate is the secant slope
//!   `dybar/dzbar`, clamped to the sigmoid's slope range.
//!
//! Everything is deterministic: a run is a pure function of its
//! configuration, so metrics files and checkpoints reproduce byte for byte.
//!
//! ## Module map
//!
//! - [`numerics`] — dense matrices, the seeded RNG, alignment angles.
//! - [`data`] — IDX parsing/writing, MNIST loading, synthetic datasets,
//!   minibatching.
//! - [`model`] — the MLP, its forward trace, loss and accuracy, checkpoints.
//! - [`rules`] — the four backward rules and the temporal state.
//! - [`trainer`] — the SGD loop, evaluation, gradient checking, the
//!   four-way comparison.
//! - [`metrics`] — metrics rows and their CSV serialization.
//!
//! ## Quick taste
//!
//! ```
//! use biobp::data::synth_train_test;
//! use biobp::rules::RuleKind;
//! use biobp::trainer::{train, DataSource, TrainConfig};
//!
//! let (train_ds, test_ds) = synth_train_test(7, 60, 30, 8, 3)?;
//! let config = TrainConfig {
//!     rule: RuleKind::ItdY,
//!     steps: 20,
//!     batch: 10,
//!     sizes: vec![8, 6, 3],
//!     eval_every: 10,
//!     align_every: 10,
//!     data: DataSource::Synth,
//!     ..TrainConfig::default()
//! };
//! let outcome = train(&config, &train_ds, &test_ds)?;
//! assert_eq!(outcome.metrics.first().unwrap().step, 0);
//! # Ok::<(), biobp::Error>(())
//! ```

pub mod data;
mod error;
pub mod metrics;
pub mod model;
pub mod numerics;
pub mod rules;
pub mod trainer;

pub use error::{Error, Result};
pub use metrics::MetricsRow;
pub use model::{ForwardTrace, Mlp};
pub use numerics::{Matrix, Rng};
pub use rules::{FeedbackWeights, RuleKind, TemporalState, UpdateSet};
pub use trainer::{TrainConfig, TrainOutcome};

// The guide chapters double as doctests: every fenced Rust block in
// book/src/*.md compiles and runs under `cargo test --doc`, which keeps the
// book in sync with the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/determinism.md")]
    mod determinism {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/rules.md")]
    mod rules {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
