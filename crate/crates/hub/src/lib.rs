//! Model registry, feedback log, review queue and the retrain-and-swap loop.
//!
//! [`Hub`] ties the pieces together: it routes a comment to the serving
//! model of its language, records the result in the [`FeedbackStore`],
//! hands low-confidence records to moderators through the review queue,
//! and retrains on the base corpus plus resolved feedback before swapping
//! the new version into the [`ModelRegistry`].

pub mod classifier;
pub mod error;
pub mod feedback;
mod hub;
pub mod registry;

pub use classifier::{train_classifier, Classifier, ModelKind, Prediction, TrainOptions};
pub use error::{Error, Result};
pub use feedback::{CompactStats, FeedbackRecord, FeedbackStore, Verdict};
pub use hub::{bias_guard, check_text, Hub, HubSettings, RetrainOutcome, RetrainPolicy, Scored, MAX_TEXT_CHARS};
pub use registry::{Manifest, ModelHandle, ModelInfo, ModelRegistry, VersionEntry};
