pub mod costs;
pub mod error;
pub mod fd;
pub mod geometry;
pub mod linalg;
pub mod objective;
pub mod optim;
pub mod par;
pub mod potential;
pub mod rng;
pub mod solvers;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{Matrix, Point};
