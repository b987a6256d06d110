//! Linear, weakly nonlinear and fully nonlinear analysis of follower-force
//! flutter in a planar Cosserat rod with Stokes drag.

pub mod error;
pub mod grid;
pub mod model;
pub mod params;
pub mod sim;
pub mod spectrum;
pub mod weakly_nonlinear;

pub use error::{Error, Result};
pub use grid::Grid;
pub use params::{make_params, RodParams};
