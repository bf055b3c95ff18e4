//! Sweeps that put the envelopes, the oracle and the certificates side by
//! side, and the configuration they run from.

mod config;
mod verify;

pub use config::{Axis, Format, RunConfig};
pub use verify::{
    entry_certificates, entry_levy_density, plot_columns, verify_doubling, verify_nu,
    verify_sandwich, verify_surrogate, CertificateSummary, CsvRecord, DiagonalRecord,
    DoublingRecord, DoublingReport, DoublingSummary, NuRecord, NuReport, NuSummary, SandwichRecord,
    SandwichReport, SandwichSummary, SurrogateRecord, SurrogateReport, SurrogateSummary, Validity,
    Verdict, VerificationReport, DIAGONAL_TOLERANCE, SCHEMA, SURROGATE_SPREAD,
};
