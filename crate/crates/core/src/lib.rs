pub mod combinators;
pub mod config;
pub mod distribution;
pub mod error;
pub mod harness;
pub mod orders;
pub mod quadrature;
pub mod transform;
pub mod verdict;

pub use config::ToleranceConfig;
pub use distribution::{Density, Distribution, GridCdf, Provenance};
pub use error::{Error, Result};
pub use verdict::{Location, OrderVerdict, Status, Witness};
