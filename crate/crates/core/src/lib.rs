//! Block structure of hashing with linear probing, in the car-parking picture:
//! `n` cars pick first tries among `m` circular places and probe forward until
//! they find an empty place.
//!
//! The crate has three layers:
//!
//! * exact discrete objects — parking schemes, profiles, block decompositions,
//!   the empirical-process coupling, bijections with labeled trees and Pavlov
//!   forests, and the discrete additive-coalescent chains built from all three
//!   constructions ([`parking`], [`coupling`], [`bijections`], [`coalescent`]);
//! * exact distributions — the first-block law phi(m, n, k), the block-count
//!   identity, joint birth-ordered block laws, and the largest-block limit CDF
//!   evaluated by quadrature ([`exact`]);
//! * lattice simulation of the scaling limit — empirical bridges, Vervaat
//!   excursions, the drift-reflection operator `psi`, excursion widths,
//!   sampled blocks, the stable-1/2 subordinator, and the path decomposition
//!   ([`lattice`], [`limit`]).
//!
//! Everything discrete is integer-exact, including zero detection on lattice
//! paths; statistical contracts are checked with the goodness-of-fit helpers
//! in [`stats`].

pub mod bijections;
pub mod coalescent;
pub mod coupling;
pub mod error;
pub mod exact;
pub mod lattice;
pub mod limit;
pub mod parking;
pub mod quad;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use parking::{arrival_trajectory, BlockDecomposition, ParkingScheme, Profile};
