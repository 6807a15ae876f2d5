//! Outside-view benchmarking of forecasts.
//!
//! Builds empirical accuracy distributions (actual / forecast) from reference
//! classes of completed projects, compares a forecast under review against
//! them, and runs the eight-step due-diligence procedure down to a verdict.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, rendering and
//! the command-line front end live in the `outsideview` crate.

#![no_std]

extern crate alloc;

pub mod diligence;
pub mod display;
pub mod empirics;
mod error;
pub mod forecast;
pub mod refclass;

pub use error::{Error, Result};

pub use diligence::{
    run_due_diligence, BenchmarkInput, DiligenceOptions, DueDiligenceReport, Verdict,
};
pub use empirics::{BenchmarkDistribution, Interval, Source};
pub use forecast::{DownsideClaim, ForecastUnderReview};
pub use refclass::{
    Direction, Funding, OutlierPolicy, ProjectRecord, RampUpObservation, RecordFilter,
    ReferenceClass,
};
