//! Feature-space engine for few-shot visual relationship co-localization.
//!
//! Given bags of images represented as region features, the crate learns a
//! relationship-similarity metric episodically and infers, per image, the
//! subject-object region pair connected by the bag's latent common predicate.
//!
//! The main pieces, bottom to top:
//!
//! - [`datamodel`]: region/bag/manifest types, IoU and NMS utilities, label
//!   sets, ground-truth matching, bag sampling, and the on-disk manifest
//!   format.
//! - [`embedder`]: raw region features and the translation / concatenation
//!   relationship embeddings, plus predicate-classification pretraining.
//! - [`similarity`]: the gated relation network, cosine baseline, pairwise
//!   costs, analytic gradients, and a finite-difference checker.
//! - [`trainer`]: episodic metric training with a binary logistic loss.
//! - [`solver`]: exact brute-force and greedy labeling inference, plus the
//!   subject-fixed and one-annotated weak-supervision variants.
//! - [`metrics`]: per-image correctness and the two CorLoc aggregates.
//! - [`synthgen`]: synthetic worlds with known latent predicate structure.

pub mod checkpoint;
pub mod datamodel;
pub mod embedder;
pub mod error;
pub mod gradcheck;
pub mod linalg;
pub mod metrics;
pub mod optim;
pub mod records;
pub mod rng;
pub mod similarity;
pub mod solver;
pub mod synthgen;
pub mod trainer;

pub use error::{Error, Result};
