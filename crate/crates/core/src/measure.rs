//! Finite measure spaces, partitions, and the conditional expectation they
//! induce.
//!
//! Everything downstream lives on a finite set of points carrying strictly
//! positive weights.  A partition of the points stands in for a
//! sub-σ-algebra: on a finite space with the full power set as σ-algebra,
//! every complete subalgebra is generated by a partition, so this
//! representation is exact rather than an approximation.  The conditional
//! expectation with respect to a partition replaces a function by its
//! weighted mean over each block.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::Error;

/// A finite set of labelled points, each carrying a strictly positive weight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteMeasureSpace {
    labels: Vec<String>,
    weights: Vec<f64>,
}

impl FiniteMeasureSpace {
    /// Builds a space from labels and weights of equal length.
    ///
    /// Labels must be unique; weights must be strictly positive and finite.
    pub fn new(labels: Vec<String>, weights: Vec<f64>) -> Result<Self, Error> {
        if labels.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                got: weights.len(),
            });
        }
        for &w in &weights {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::Invalid(format!(
                    "weights must be strictly positive and finite, got {w}"
                )));
            }
        }
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::Invalid(format!("duplicate point label {label:?}")));
            }
        }
        Ok(Self { labels, weights })
    }

    /// Builds a space with auto-generated labels `p0, p1, ...`.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self, Error> {
        let labels = (0..weights.len()).map(|i| format!("p{i}")).collect();
        Self::new(labels, weights)
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    /// True when the space has no points.
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Point weights, in point order.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Point labels, in point order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Total measure of the space.
    pub fn total_measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Measure of a set of point indices.
    pub fn measure_of(&self, set: &BTreeSet<usize>) -> Result<f64, Error> {
        let mut total = 0.0;
        for &i in set {
            let w = self.weights.get(i).ok_or(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            })?;
            total += w;
        }
        Ok(total)
    }
}

/// A partition of the point indices into disjoint nonempty blocks.
///
/// Each block is an atom of the sub-σ-algebra the partition represents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    n_points: usize,
    blocks: Vec<Vec<usize>>,
    #[serde(skip)]
    block_of: Vec<usize>,
}

impl Partition {
    /// Builds a partition of `0..n_points` and validates that the blocks are
    /// nonempty, disjoint, in range, and jointly exhaustive.
    pub fn new(n_points: usize, blocks: Vec<Vec<usize>>) -> Result<Self, Error> {
        let mut block_of = vec![usize::MAX; n_points];
        let mut covered = 0usize;
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::Invalid(format!("block {b} is empty")));
            }
            for &i in block {
                if i >= n_points {
                    return Err(Error::IndexOutOfRange {
                        index: i,
                        len: n_points,
                    });
                }
                if block_of[i] != usize::MAX {
                    return Err(Error::Invalid(format!("point {i} appears in two blocks")));
                }
                block_of[i] = b;
                covered += 1;
            }
        }
        if covered != n_points {
            return Err(Error::Invalid(format!(
                "blocks cover {covered} of {n_points} points"
            )));
        }
        // Canonical form: each block sorted, blocks ordered by first element.
        let mut blocks: Vec<Vec<usize>> = blocks;
        for block in &mut blocks {
            block.sort_unstable();
        }
        blocks.sort_by_key(|b| b[0]);
        let mut block_of = vec![usize::MAX; n_points];
        for (b, block) in blocks.iter().enumerate() {
            for &i in block {
                block_of[i] = b;
            }
        }
        Ok(Self {
            n_points,
            blocks,
            block_of,
        })
    }

    /// The coarsest partition: one block containing every point.
    pub fn trivial(n_points: usize) -> Self {
        if n_points == 0 {
            return Self {
                n_points,
                blocks: Vec::new(),
                block_of: Vec::new(),
            };
        }
        Self::new(n_points, vec![(0..n_points).collect()]).expect("trivial partition is valid")
    }

    /// The finest partition: every point its own block.
    pub fn discrete(n_points: usize) -> Self {
        Self::new(n_points, (0..n_points).map(|i| vec![i]).collect())
            .expect("discrete partition is valid")
    }

    /// Number of points partitioned.
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// The blocks, each sorted, ordered by first element.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Index of the block containing point `i`.
    pub fn block_of(&self, i: usize) -> Result<usize, Error> {
        self.block_of.get(i).copied().ok_or(Error::IndexOutOfRange {
            index: i,
            len: self.n_points,
        })
    }
}

/// A real-valued function given by one finite value per point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurableFn {
    values: Vec<f64>,
}

impl MeasurableFn {
    /// Wraps a value vector, rejecting non-finite entries.
    pub fn new(values: Vec<f64>) -> Result<Self, Error> {
        for &v in &values {
            if !v.is_finite() {
                return Err(Error::Invalid(format!(
                    "function values must be finite, got {v}"
                )));
            }
        }
        Ok(Self { values })
    }

    /// Builds a function by evaluating `f` at each point index.
    pub fn from_fn(n: usize, f: impl Fn(usize) -> f64) -> Result<Self, Error> {
        Self::new((0..n).map(f).collect())
    }

    /// The constant function `c`.
    pub fn constant(n: usize, c: f64) -> Result<Self, Error> {
        Self::new(vec![c; n])
    }

    /// The indicator of an index set.
    pub fn indicator(n: usize, set: &BTreeSet<usize>) -> Result<Self, Error> {
        let mut values = vec![0.0; n];
        for &i in set {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, len: n });
            }
            values[i] = 1.0;
        }
        Ok(Self { values })
    }

    /// The values, in point order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of values.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// True when the function has no values (empty space).
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The function scaled pointwise by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self, Error> {
        Self::new(self.values.iter().map(|v| c * v).collect())
    }
}

fn check_dims(expected: usize, got: usize) -> Result<(), Error> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Conditional expectation of `f` with respect to the partition: on each
/// block the result is the weighted mean of `f` over that block, so the
/// averaging identity `∫_A f dμ = ∫_A E(f) dμ` holds per block by
/// construction.
pub fn conditional_expectation(
    f: &MeasurableFn,
    part: &Partition,
    sp: &FiniteMeasureSpace,
) -> Result<MeasurableFn, Error> {
    check_dims(sp.len(), f.len())?;
    check_dims(sp.len(), part.n_points())?;
    let mut out = vec![0.0; sp.len()];
    for block in part.blocks() {
        let mut num = 0.0;
        let mut den = 0.0;
        for &i in block {
            num += f.values()[i] * sp.weights()[i];
            den += sp.weights()[i];
        }
        let mean = num / den;
        for &i in block {
            out[i] = mean;
        }
    }
    MeasurableFn::new(out)
}

/// Maximum of `f` over the points.  Because every point has strictly
/// positive mass, this is the essential supremum.
pub fn essential_sup(f: &MeasurableFn, sp: &FiniteMeasureSpace) -> Result<f64, Error> {
    check_dims(sp.len(), f.len())?;
    if sp.is_empty() {
        return Err(Error::EmptySpace);
    }
    Ok(f.values().iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// Indices where `|f| > tol`.  With `tol = 0` this is the exact support;
/// computed inputs should pass a small positive tolerance such as
/// `1e-12 · max|f|` to absorb round-off.
pub fn support(
    f: &MeasurableFn,
    sp: &FiniteMeasureSpace,
    tol: f64,
) -> Result<BTreeSet<usize>, Error> {
    check_dims(sp.len(), f.len())?;
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::Invalid(format!(
            "support tolerance must be ≥ 0, got {tol}"
        )));
    }
    Ok(f.values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > tol)
        .map(|(i, _)| i)
        .collect())
}

/// The integral `Σ f(x) μ(x)`.
pub fn integrate(f: &MeasurableFn, sp: &FiniteMeasureSpace) -> Result<f64, Error> {
    check_dims(sp.len(), f.len())?;
    Ok(f.values()
        .iter()
        .zip(sp.weights())
        .map(|(v, w)| v * w)
        .sum())
}
