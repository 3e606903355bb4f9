//! A desk-scale numerical laboratory for star-multiplication operators
//! between Orlicz spaces over finite measure spaces.
//!
//! Everything lives on a finite set of points with positive weights, so each
//! analytic object has an exact finite-dimensional counterpart:
//!
//! * [`measure`] — weighted point spaces, partitions, and conditional
//!   expectation as the weighted block mean;
//! * [`young`] — Young functions (powers, an entropy-type function, convex
//!   polylines) with numeric inverse and convex conjugate;
//! * [`orlicz`] — modulars and Luxemburg norms by guarded bisection;
//! * [`lambert`] — the star product, the induced multiplication operators,
//!   their matrices, and norm bounds (a computable proxy norm, brute-force
//!   net search, and coordinate-ascent sampling);
//! * [`criteria`] — closed-range and Fredholm diagnostics built from block
//!   data: support thresholds, level bands, kernel dimensions.
//!
//! The crate deliberately stays in plain `f64` with explicit tolerances; all
//! solvers report their residuals so callers can judge the numbers they get.

pub mod criteria;
pub mod error;
pub mod lambert;
pub mod measure;
pub mod orlicz;
pub mod young;

pub use criteria::{
    bounded_below_constant, closed_range_check, fredholm_check, BlockWitness, ClosedRangeReport,
    FredholmReport,
};
pub use error::Error;
pub use lambert::{
    assemble_operator, kstar_norm, operator_norm_bruteforce, operator_norm_sample, sandwich_check,
    star, OperatorMatrix, SandwichReport, SearchMode, BRUTE_FORCE_MAX_POINTS,
};
pub use measure::{
    conditional_expectation, essential_sup, integrate, support, FiniteMeasureSpace, MeasurableFn,
    Partition,
};
pub use orlicz::{indicator_norm, luxemburg_norm, modular, NormResult, DEFAULT_NORM_TOL};
pub use young::{ConjugatePair, YoungFunction};
