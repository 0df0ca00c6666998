//! Numerical kernels for weighted logarithmic Sobolev, logarithmic Hardy and
//! logarithmic Lorentz–Sobolev inequalities on `R^N`.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of immutable inputs: radial quadrature grids and sampled test
//! functions ([`grid`]), decreasing rearrangements and Lorentz norms
//! ([`rearrange`]), p-capacity and Maz'ya capacity norms ([`capacity`]),
//! closed sets, covering numbers and Assouad dimension ([`geometry`],
//! [`assouad`]), inequality reports ([`inequality`]) and the best-constant
//! search ([`optimize`]).
//!
//! IO, configuration and the command line live in the `logsob` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod assouad;
pub mod capacity;
pub mod cylinder;
mod error;
mod float;
pub mod geometry;
pub mod grid;
pub mod inequality;
pub mod math;
pub mod optimize;

pub mod params;
pub mod rearrange;
pub mod sphere;
pub mod weight;

pub use error::{Error, Result};
pub use grid::{Flags, GridFunction, GridSpec, Quadrature, RadialGrid};
pub use params::Params;
