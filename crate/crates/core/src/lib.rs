//! Core of the Lode Encoder level editor: a from-scratch dense network
//! engine, the level pipeline, the variational autoencoder, the suggestion
//! engine, the constrained editing session and a static reachability check.

pub mod editor;
pub mod level;
pub mod nn;
pub mod par;
pub mod playability;
pub mod suggest;
pub mod synth;
pub mod vae;
