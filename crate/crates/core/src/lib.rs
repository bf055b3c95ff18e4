pub mod bounds;
pub mod error;
pub mod exponents;
pub mod harness;
pub mod oracle;
pub mod quadrature;
pub mod radial_calculus;
pub mod scaling;
pub mod special;

pub use error::{Error, Result};
pub use quadrature::{Estimate, Tolerance};
