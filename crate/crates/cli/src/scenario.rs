//! Scenario files: JSON descriptions of one experiment — the measure space,
//! the partition, the Young function, the multiplier, and the checks to run.
//!
//! A scenario is deliberately declarative: everything needed to reproduce a
//! run is in the file.  `Scenario::build` resolves the description into live
//! objects and reports descriptive errors for anything malformed.

use serde::{Deserialize, Serialize};
use starmul::{FiniteMeasureSpace, MeasurableFn, Partition, YoungFunction};

use crate::CliError;

/// One experiment description, as read from a scenario file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub space: SpaceSpec,
    pub partition: PartitionSpec,
    pub young: YoungSpec,
    pub multiplier: MultiplierSpec,
    pub checks: Vec<CheckSpec>,
}

/// The underlying measure space: either explicit atoms or a midpoint
/// discretization of an interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceSpec {
    /// Midpoint grid on `[interval[0], interval[1]]` with uniform cell
    /// weights.  `symmetric` asks for a grid whose points mirror exactly
    /// (requires a symmetric interval and an even point count), which is what
    /// the mirror-pair partition and the parity-based checks need.
    Grid {
        interval: [f64; 2],
        n_points: usize,
        #[serde(default)]
        symmetric: bool,
    },
    /// Explicit atoms: a coordinate and a positive weight per point.
    Explicit { points: Vec<f64>, weights: Vec<f64> },
}

/// Partition of the space into blocks.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PartitionSpec {
    Named(PartitionName),
    Blocks(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionName {
    /// Pair each point k with its mirror n−1−k (even point count required).
    SymmetricPairs,
    /// One block containing everything.
    Trivial,
    /// Every point its own block.
    Discrete,
}

/// Young function selection.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum YoungSpec {
    Power {
        p: f64,
    },
    Entropy,
    PiecewiseLinear {
        breakpoints: Vec<f64>,
        slopes: Vec<f64>,
    },
}

impl YoungSpec {
    pub fn build(&self) -> Result<YoungFunction, CliError> {
        let phi = match self {
            YoungSpec::Power { p } => YoungFunction::power(*p),
            YoungSpec::Entropy => return Ok(YoungFunction::entropy()),
            YoungSpec::PiecewiseLinear {
                breakpoints,
                slopes,
            } => YoungFunction::piecewise_linear(breakpoints.clone(), slopes.clone()),
        };
        phi.map_err(|e| CliError::Parse(format!("young function: {e}")))
    }
}

/// The multiplier: either one value per point or a closed-form expression
/// evaluated at the point coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MultiplierSpec {
    Values(Vec<f64>),
    Expression(Expression),
}

/// Polynomial plus sine/cosine terms: `Σ poly[k]·x^k + sin·sin(x) + cos·cos(x)`.
/// This small catalog covers the built-in worked example and splits cleanly
/// into even and odd parts, which the parity-based checks rely on.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expression {
    /// Polynomial coefficients, ascending: `poly[k]` multiplies `x^k`.
    #[serde(default)]
    pub poly: Vec<f64>,
    /// Coefficient of `sin(x)`.
    #[serde(default)]
    pub sin: f64,
    /// Coefficient of `cos(x)`.
    #[serde(default)]
    pub cos: f64,
}

impl Expression {
    pub fn eval(&self, x: f64) -> f64 {
        let p = self.poly.iter().rev().fold(0.0, |acc, c| acc * x + c);
        p + self.sin * x.sin() + self.cos * x.cos()
    }

    /// Even part: even-degree polynomial terms plus the cosine term.
    pub fn even_part(&self, x: f64) -> f64 {
        let x2 = x * x;
        let even = self
            .poly
            .iter()
            .step_by(2)
            .rev()
            .fold(0.0, |acc, c| acc * x2 + c);
        even + self.cos * x.cos()
    }

    /// Odd part: odd-degree polynomial terms plus the sine term.
    pub fn odd_part(&self, x: f64) -> f64 {
        let x2 = x * x;
        let odd = self
            .poly
            .iter()
            .skip(1)
            .step_by(2)
            .rev()
            .fold(0.0, |acc, c| acc * x2 + c);
        x * odd + self.sin * x.sin()
    }
}

/// One check to run.  Every check produces exactly one entry in the report,
/// in scenario order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum CheckSpec {
    /// Two-sided comparison of the operator norm against the proxy norm
    /// Φ⁻¹(sup E(Φ(|u|))): proxy ≤ ‖T_u‖ ≤ 3·proxy, searched by brute force
    /// on small spaces.
    Sandwich {
        #[serde(default = "default_net")]
        net: u32,
        /// Rebuild the scenario on a coarse grid with this many points before
        /// searching (grid scenarios with expression multipliers only), so
        /// the brute-force search stays tractable.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid_points: Option<usize>,
    },
    /// Positive floor of E(Φ(|u|)) on the support of E(u), probed at a
    /// threshold.
    ClosedRange { threshold: f64 },
    /// Level-band decomposition of E(Φ(|u|)), kernel/cokernel dimensions, and
    /// the necessary condition min|E(u)| > 0.
    Fredholm {
        #[serde(default = "default_band_cap")]
        n_max: u32,
    },
    /// E(u) must equal the even part of the multiplier expression at every
    /// grid point (mirror-pair scenarios with expression multipliers).
    EuIdentity {
        #[serde(default = "default_tight_tol")]
        tol: f64,
    },
    /// The assembled operator matrix must decompose per mirror pair into
    /// even(x) + odd(x)/2 on the diagonal and odd(x)/2 across the pair.
    TuCoefficients {
        #[serde(default = "default_tight_tol")]
        tol: f64,
    },
    /// min|E(u)| must be at least the stated floor.
    MinAbsEu { at_least: f64 },
    /// Doubling estimate sup Φ(2x)/Φ(x) on (0, x_max] must be finite.
    Delta2 {
        #[serde(default = "default_delta2_x_max")]
        x_max: f64,
        #[serde(default = "default_delta2_grid")]
        n_grid: usize,
    },
    /// Run the seeded randomized self-check suite as a scenario check.
    Properties {
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_props_cases")]
        cases: u32,
    },
}

fn default_net() -> u32 {
    16
}

fn default_band_cap() -> u32 {
    32
}

fn default_tight_tol() -> f64 {
    1e-12
}

fn default_delta2_x_max() -> f64 {
    10.0
}

fn default_delta2_grid() -> usize {
    200
}

fn default_props_cases() -> u32 {
    50
}

/// Grid geometry, kept alongside the built space for checks that re-sample.
#[derive(Debug, Clone, Copy)]
pub struct GridInfo {
    pub interval: [f64; 2],
    pub n_points: usize,
    pub symmetric: bool,
    /// Uniform cell width (b − a)/n.
    pub h: f64,
}

/// A scenario resolved into live objects.
pub struct Instance {
    pub space: FiniteMeasureSpace,
    pub partition: Partition,
    pub phi: YoungFunction,
    pub multiplier: MeasurableFn,
    /// Point coordinates (always present: explicit or generated by the grid).
    pub points: Vec<f64>,
    /// The symbolic form of the multiplier, when one was given.
    pub expression: Option<Expression>,
    /// Grid geometry, when the space came from a grid.
    pub grid: Option<GridInfo>,
    /// True when the partition pairs each point with its index mirror.
    pub mirror_pairs: bool,
}

/// Points, weights, and grid metadata (when the space is a grid).
pub type RealizedSpace = (Vec<f64>, Vec<f64>, Option<GridInfo>);

impl SpaceSpec {
    /// Point coordinates and weights for this space.
    pub fn realize(&self) -> Result<RealizedSpace, CliError> {
        match self {
            SpaceSpec::Grid {
                interval,
                n_points,
                symmetric,
            } => {
                let [a, b] = *interval;
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(CliError::Parse(format!(
                        "grid interval must be finite with {a} < {b}"
                    )));
                }
                let n = *n_points;
                if n == 0 {
                    return Err(CliError::Parse("grid needs at least one point".into()));
                }
                if *symmetric && (a != -b || !n.is_multiple_of(2)) {
                    return Err(CliError::Parse(
                        "a symmetric grid needs a symmetric interval and an even point count"
                            .into(),
                    ));
                }
                let h = (b - a) / n as f64;
                let points: Vec<f64> = if *symmetric {
                    // Mirror the positive half so x[n−1−k] == −x[k] holds
                    // bit for bit; midpoint positions are unchanged.
                    let half: Vec<f64> = (0..n / 2).map(|j| (j as f64 + 0.5) * h).collect();
                    let mut pts: Vec<f64> = half.iter().rev().map(|x| -x).collect();
                    pts.extend(&half);
                    pts
                } else {
                    (0..n).map(|k| a + (k as f64 + 0.5) * h).collect()
                };
                let info = GridInfo {
                    interval: *interval,
                    n_points: n,
                    symmetric: *symmetric,
                    h,
                };
                Ok((points, vec![h; n], Some(info)))
            }
            SpaceSpec::Explicit { points, weights } => {
                if points.len() != weights.len() {
                    return Err(CliError::Parse(format!(
                        "explicit space has {} points but {} weights",
                        points.len(),
                        weights.len()
                    )));
                }
                Ok((points.clone(), weights.clone(), None))
            }
        }
    }
}

impl PartitionSpec {
    pub fn build(&self, n: usize) -> Result<(Partition, bool), CliError> {
        match self {
            PartitionSpec::Named(PartitionName::Trivial) => Ok((Partition::trivial(n), false)),
            PartitionSpec::Named(PartitionName::Discrete) => Ok((Partition::discrete(n), false)),
            PartitionSpec::Named(PartitionName::SymmetricPairs) => {
                if !n.is_multiple_of(2) {
                    return Err(CliError::Parse(
                        "mirror pairs need an even number of points".into(),
                    ));
                }
                let blocks = (0..n / 2).map(|k| vec![k, n - 1 - k]).collect();
                let part = Partition::new(n, blocks)
                    .map_err(|e| CliError::Parse(format!("partition: {e}")))?;
                Ok((part, true))
            }
            PartitionSpec::Blocks(blocks) => {
                let part = Partition::new(n, blocks.clone())
                    .map_err(|e| CliError::Parse(format!("partition: {e}")))?;
                Ok((part, false))
            }
        }
    }
}

impl Scenario {
    /// Resolve the description into live objects.
    pub fn build(&self) -> Result<Instance, CliError> {
        let (points, weights, grid) = self.space.realize()?;
        let labels = points.iter().map(|x| format!("{x}")).collect();
        let space = FiniteMeasureSpace::new(labels, weights)
            .map_err(|e| CliError::Parse(format!("space: {e}")))?;
        let (partition, mirror_pairs) = self.partition.build(space.len())?;
        let phi = self.young.build()?;
        let (multiplier, expression) = match &self.multiplier {
            MultiplierSpec::Values(values) => {
                if values.len() != space.len() {
                    return Err(CliError::Parse(format!(
                        "multiplier has {} values for {} points",
                        values.len(),
                        space.len()
                    )));
                }
                let f = MeasurableFn::new(values.clone())
                    .map_err(|e| CliError::Parse(format!("multiplier: {e}")))?;
                (f, None)
            }
            MultiplierSpec::Expression(expr) => {
                let values: Vec<f64> = points.iter().map(|x| expr.eval(*x)).collect();
                let f = MeasurableFn::new(values)
                    .map_err(|e| CliError::Parse(format!("multiplier: {e}")))?;
                (f, Some(expr.clone()))
            }
        };
        Ok(Instance {
            space,
            partition,
            phi,
            multiplier,
            points,
            expression,
            grid,
            mirror_pairs,
        })
    }
}
