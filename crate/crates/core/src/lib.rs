//! Numerical toolkit for quasiconformal analysis on the first Heisenberg group.
//!
//! The crate is `no_std` with `alloc` by default. Enable `std` for `std::error::Error`
//! impls and `parallel` to spread per-sample work over a rayon pool; neither changes
//! any numerical result, since every random draw is keyed by `(seed, tag, index)`.
//!
//! Layout:
//!
//! - [`geometry`]: group law, dilations, Korányi gauge, sub-Riemannian geodesics, balls, curves.
//! - [`domain`]: region oracles (membership, boundary distance, interior sampling).
//! - [`maps`]: catalog of quasiconformal maps, an expression DSL, horizontal differentials.
//! - [`integrate`]: ball averages, average derivative, BMO and weight audits.
//! - [`covering`]: greedy disjoint subcovers and Whitney decompositions.
//! - [`modulus`]: ring curve families and bounds on the 4-modulus.
//! - [`experiments`]: end-to-end audits (Koebe, quasisymmetry, curve diameter, ...).
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod covering;
pub mod domain;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod integrate;
pub mod maps;
pub mod modulus;
pub mod par;
pub mod rng;
pub mod spatial;
pub mod stats;

pub use domain::Domain;
pub use error::{Error, Result};
pub use geometry::{Ball, Curve, Metric, Point};
pub use maps::SmoothMap;
