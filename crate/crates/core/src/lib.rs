//! Iterative model weight averaging (IMWA) for class-imbalanced classification.
//!
//! `M` models start from shared weights and train on independent data orders
//! for one episode, then their weights are averaged and the average becomes the
//! next episode's starting point. The crate bundles everything needed to study
//! this at desk scale:
//!
//! - [`nn`]: a small MLP over a flat [`WeightVector`] with analytic gradients
//!   and momentum SGD.
//! - [`data`]: long-tailed class-count profiles, a Gaussian-mixture generator,
//!   CSV ingest/export and seeded per-model loaders.
//! - [`imwa`]: weight averaging, EMA shadows and the episode loop.
//! - [`metrics`]: top-1, per-class and many/medium/few accuracy.
//! - [`harness`]: paired-seed experiment plans and ablation sweeps.
//! - [`checkpoint`], [`results`]: on-disk formats.

pub mod checkpoint;
pub mod data;
pub mod error;
pub mod harness;
pub mod imwa;
pub mod metrics;
pub mod nn;
pub mod results;
mod serde_nan;

pub use data::{Dataset, LoaderState, LongTailSpec};
pub use error::{Error, Result};
pub use imwa::{ImwaSchedule, TrainerConfig};
pub use metrics::EvalReport;
pub use nn::{Batch, LayerLayout, WeightVector};
