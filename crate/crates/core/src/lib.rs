pub mod cone;
pub mod dirichlet;
pub mod dissipativity;
pub mod error;
pub mod halfnorm;
pub mod numerics;
pub mod report;
pub mod representation;
pub mod sampling;
pub mod semigroup;

pub use error::{Error, Result};
