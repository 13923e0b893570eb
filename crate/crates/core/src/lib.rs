//! Combustor health monitoring from exhaust thermocouple profiles.
//!
//! Features are learned from mean-normalized profiles by a stacked
//! denoising autoencoder ([`sdae`]) and classified by a class-weighted
//! extreme learning machine ([`elm`]). A handcrafted baseline
//! ([`features_hand`]), a fault-injecting simulator ([`simdata`]) and a
//! repeated stratified cross-validation harness ([`eval`]) support
//! comparing the two feature sets.

pub mod cli;
pub mod dae;
pub mod elm;
pub mod eval;
pub mod features_hand;
pub mod linalg;
pub mod profiles;
pub mod rng;
pub mod sdae;
pub mod simdata;
pub mod pipeline;
