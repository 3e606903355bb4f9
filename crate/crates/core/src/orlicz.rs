//! Modulars and Luxemburg norms on finite weighted spaces.
//!
//! The modular of `f` is ∫ Φ(|f|) dμ, a plain weighted sum here.  The
//! Luxemburg norm is the scaling threshold
//!
//! ```text
//! ‖f‖_Φ = inf { ε > 0 : ∫ Φ(|f| / ε) dμ ≤ 1 },
//! ```
//!
//! computed by bisection on ε.  The modular is continuous and strictly
//! decreasing in ε wherever it is positive (the catalog of Young functions is
//! strictly increasing), so the threshold is a genuine root of
//! `modular(f/ε) = 1` whenever `f ≠ 0`, and every solve reports its residual.

use crate::error::Error;
use crate::measure::{FiniteMeasureSpace, MeasurableFn};
use crate::young::YoungFunction;

/// Default relative tolerance for the Luxemburg bisection.
pub const DEFAULT_NORM_TOL: f64 = 1e-10;

/// Outcome of a norm solve: the value plus convergence evidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormResult {
    /// The computed norm.
    pub value: f64,
    /// Bisection steps taken.
    pub iterations: u32,
    /// `|modular(f / value) − 1|` at the accepted value; 0 for the zero
    /// function.  At most the solver tolerance whenever `value > 0`, unless
    /// the bracket collapsed to floating-point resolution first.
    pub residual: f64,
}

/// ∫ Φ(|f|) dμ.
pub fn modular(
    f: &MeasurableFn,
    phi: &YoungFunction,
    space: &FiniteMeasureSpace,
) -> Result<f64, Error> {
    if f.len() != space.len() {
        return Err(Error::DimensionMismatch {
            expected: space.len(),
            got: f.len(),
        });
    }
    Ok(f.values()
        .iter()
        .zip(space.weights())
        .map(|(&v, &w)| phi.eval(v) * w)
        .sum())
}

fn modular_scaled(
    f: &MeasurableFn,
    phi: &YoungFunction,
    space: &FiniteMeasureSpace,
    eps: f64,
) -> f64 {
    f.values()
        .iter()
        .zip(space.weights())
        .map(|(&v, &w)| phi.eval(v / eps) * w)
        .sum()
}

/// The Luxemburg norm of `f`, by bisection on the scaling parameter.
///
/// The bracket starts at ε₀ = max|f| and is widened geometrically until it
/// straddles the unit-modular level; bisection then runs until the bracket
/// width drops below `tol·max(1, ε)` *and* the reported residual is within
/// `tol`, or until the bracket reaches floating-point resolution.
pub fn luxemburg_norm(
    f: &MeasurableFn,
    phi: &YoungFunction,
    space: &FiniteMeasureSpace,
    tol: f64,
) -> Result<NormResult, Error> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Invalid(format!(
            "luxemburg_norm needs tol > 0, got {tol}"
        )));
    }
    if f.len() != space.len() {
        return Err(Error::DimensionMismatch {
            expected: space.len(),
            got: f.len(),
        });
    }
    let peak = f.values().iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if peak == 0.0 {
        return Ok(NormResult {
            value: 0.0,
            iterations: 0,
            residual: 0.0,
        });
    }

    // Establish lo (modular > 1) and hi (modular ≤ 1) around ε₀ = max|f|.
    let mut iterations = 0u32;
    let mut hi = peak;
    while modular_scaled(f, phi, space, hi) > 1.0 {
        hi *= 2.0;
        iterations += 1;
        if !hi.is_finite() {
            return Err(Error::Numeric(
                "luxemburg bracket grew past f64 range".into(),
            ));
        }
    }
    let mut lo = hi / 2.0;
    while lo > 0.0 && modular_scaled(f, phi, space, lo) <= 1.0 {
        hi = lo;
        lo /= 2.0;
        iterations += 1;
        if lo < f64::MIN_POSITIVE {
            // Modular stays ≤ 1 down to denormal scalings: the norm is 0 only
            // for the zero function, which was handled above, so this means
            // catastrophic underflow in Φ.
            return Err(Error::Numeric(
                "luxemburg bracket shrank past f64 range".into(),
            ));
        }
    }

    const MAX_ITER: u32 = 400;
    loop {
        let mid = 0.5 * (lo + hi);
        let residual = (modular_scaled(f, phi, space, mid) - 1.0).abs();
        let width = hi - lo;
        if width <= tol * mid.max(1.0) && residual <= tol {
            return Ok(NormResult {
                value: mid,
                iterations,
                residual,
            });
        }
        if width <= 4.0 * f64::EPSILON * mid {
            // The bracket cannot shrink further; report the honest residual
            // rather than spinning (possible when the modular jumps across 1
            // between adjacent floats).
            return Ok(NormResult {
                value: mid,
                iterations,
                residual,
            });
        }
        if modular_scaled(f, phi, space, mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
        if iterations > MAX_ITER {
            return Err(Error::Numeric(
                "luxemburg bisection did not converge".into(),
            ));
        }
    }
}

/// Closed-form Luxemburg norm of an indicator: ‖χ_Q‖_Φ = 1 / Φ⁻¹(1/μ(Q)).
pub fn indicator_norm(
    q: &std::collections::BTreeSet<usize>,
    phi: &YoungFunction,
    space: &FiniteMeasureSpace,
) -> Result<f64, Error> {
    if q.is_empty() {
        return Err(Error::EmptySet);
    }
    let mq = space.measure_of(q)?;
    let inv = phi.inverse(1.0 / mq, 1e-13)?;
    Ok(1.0 / inv)
}
