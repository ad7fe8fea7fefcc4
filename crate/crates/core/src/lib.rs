//! Peeling-process sampler for the uniform infinite planar triangulation
//! (type II: multiple edges allowed, no loops).
//!
//! The crate is layered bottom-up: exact laws in [`combinatorics`], the
//! boundary-size Markov chain in [`chain`], the half-edge substrate in
//! [`mesh`], samplers in [`peeling`], colored peeling in [`percolation`], and
//! statistical post-processing in [`stats`] and [`experiments`].

pub mod chain;
pub mod combinatorics;
pub mod error;
pub mod experiments;
pub mod mesh;
pub mod peeling;
pub mod percolation;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
