//! Exact computations in Lipschitz free p-spaces over `R^d` and `[0,1]^d`.
//!
//! The crate is organized bottom-up:
//!
//! - [`dyadic`] and [`grid`]: exact dyadic rationals, points, hypercube tessellations.
//! - [`interpolation`]: the multilinear partition of unity on the vertex lattice.
//! - [`molecule`]: finitely supported elements of the free space and the retraction,
//!   clamp and projection operators acting on them.
//! - [`pnorm`]: exact free p-norms over finite pointed ground sets (`0 < p <= 1`).
//! - [`basis_cube`] and [`basis_rd`]: the explicit Schauder bases of the free p-spaces over
//!   `[0,1]^d` and `R^d`, with exact expansion and reconstruction.
//! - [`retraction`]: Lipschitz probes of the lattice retraction on finite cube patches.
//! - [`verify`]: the property suites behind `lipfree verify`.
//! - [`wire`]: the JSON formats used by the CLI.
//!
//! Runnable walkthroughs of each capability live under `examples/`.

pub mod basis_cube;
pub mod basis_rd;
pub mod constants;
pub mod dyadic;
pub mod error;
pub mod grid;
pub mod interpolation;
pub mod molecule;
pub mod pnorm;
pub mod retraction;
pub mod verify;
pub mod wire;

pub use dyadic::{Dyadic, Rational};
pub use error::{Error, Result};
pub use grid::{cubes_containing, grid_snap, l1_dist, sup_dist, Cube, GridSpec, Point};
pub use interpolation::{hat, lambda, lambda_weights, WeightMap};
pub use molecule::{MapRule, Molecule, SpaceDescriptor, SpaceKind, TabulatedMap};
pub use pnorm::{exact_norm, norm_sandwich, GroundSet, Metric, NormMethod, NormOptions, NormResult};
