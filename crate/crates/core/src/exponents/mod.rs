//! Characteristic exponents, Lévy densities, Bernstein functions and the
//! built-in example catalog.

mod bernstein;
mod cantor;
mod catalog;
mod density;
mod levy;
mod mixed;

pub use bernstein::{exponent_from_bernstein, AtomSeries, BernsteinFunction, Measure};
pub use cantor::CantorMeasure;
pub use catalog::{
    atom_subordinator, cantor_subordinator, catalog_list, stable_density, stable_levy_constant,
    CatalogEntry, ExpectedScaling, DEFAULT_IDS,
};
#[allow(unused_imports)]
pub(crate) use density::one_minus_omega;
pub use density::{exponent_from_density, UnimodalLevyDensity};
pub use levy::{LevyExponent, Provenance};
pub use mixed::{mixed_power, MixedTail};
