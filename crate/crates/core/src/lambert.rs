//! The star product, the multiplication operators it induces, and norm
//! estimation for those operators.
//!
//! For a fixed partition (standing in for a sub-σ-algebra) with conditional
//! expectation E, the star product of two functions is
//!
//! ```text
//! f ∗ g = f·E(g) + g·E(f) − E(f)·E(g),
//! ```
//!
//! and each multiplier `u` induces the linear operator `T_u f = u ∗ f`.  This
//! module assembles `T_u` as an explicit matrix, computes the computable
//! proxy norm Φ⁻¹(‖E(Φ(|u|))‖_∞), and estimates the true operator norm two
//! ways: an exhaustive net search over directions (small spaces, certified
//! two-sided) and a seeded coordinate ascent (any size, lower bound only).
//! The two norms obey a two-sided comparison — proxy ≤ operator norm ≤
//! 3·proxy — which [`sandwich_check`] verifies instance by instance.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Error;
use crate::measure::{
    conditional_expectation, essential_sup, FiniteMeasureSpace, MeasurableFn, Partition,
};
use crate::orlicz::{luxemburg_norm, DEFAULT_NORM_TOL};
use crate::young::YoungFunction;

/// Largest space the exhaustive net search accepts; beyond this the
/// enumeration cost (≈ net^(n−1) directions) stops being desk-scale.
pub const BRUTE_FORCE_MAX_POINTS: usize = 6;

/// The star product f ∗ g = f·E(g) + g·E(f) − E(f)·E(g).
///
/// The term order is fixed so that swapping `f` and `g` produces bitwise
/// identical results: IEEE addition and multiplication are commutative, so
/// `f_i·Eg_i + g_i·Ef_i` and the product `Ef_i·Eg_i` are invariant under the
/// swap.
pub fn star(
    f: &MeasurableFn,
    g: &MeasurableFn,
    part: &Partition,
    sp: &FiniteMeasureSpace,
) -> Result<MeasurableFn, Error> {
    let ef = conditional_expectation(f, part, sp)?;
    let eg = conditional_expectation(g, part, sp)?;
    let values = (0..sp.len())
        .map(|i| {
            let (fi, gi) = (f.values()[i], g.values()[i]);
            let (efi, egi) = (ef.values()[i], eg.values()[i]);
            fi * egi + gi * efi - efi * egi
        })
        .collect();
    MeasurableFn::new(values)
}

/// A star-multiplication operator assembled as a dense matrix on point
/// values, tagged with the Young functions of its domain and codomain.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    n: usize,
    /// Row-major entries.
    entries: Vec<f64>,
    domain: YoungFunction,
    codomain: YoungFunction,
}

impl OperatorMatrix {
    /// Wraps explicit row-major entries (`entries.len() == n²`, all finite).
    pub fn from_entries(
        n: usize,
        entries: Vec<f64>,
        domain: YoungFunction,
        codomain: YoungFunction,
    ) -> Result<Self, Error> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: entries.len(),
            });
        }
        for &e in &entries {
            if !e.is_finite() {
                return Err(Error::Invalid(format!(
                    "matrix entries must be finite, got {e}"
                )));
            }
        }
        Ok(Self {
            n,
            entries,
            domain,
            codomain,
        })
    }

    /// Side length of the matrix (= number of points).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry at row `i`, column `j`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Young function of the domain space.
    pub fn domain(&self) -> &YoungFunction {
        &self.domain
    }

    /// Young function of the codomain space.
    pub fn codomain(&self) -> &YoungFunction {
        &self.codomain
    }

    /// Matrix–vector action.
    pub fn apply(&self, f: &MeasurableFn) -> Result<MeasurableFn, Error> {
        if f.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: f.len(),
            });
        }
        let mut out = vec![0.0; self.n];
        for (i, out_i) in out.iter_mut().enumerate() {
            let row = &self.entries[i * self.n..(i + 1) * self.n];
            *out_i = row.iter().zip(f.values()).map(|(a, b)| a * b).sum();
        }
        MeasurableFn::new(out)
    }

    /// The composition `self ∘ other` (apply `other` first), with domain
    /// taken from `other` and codomain from `self`.
    pub fn compose(&self, other: &Self) -> Result<Self, Error> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let n = self.n;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += self.entries[i * n + j] * other.entries[j * n + k];
                }
                entries[i * n + k] = acc;
            }
        }
        Ok(Self {
            n,
            entries,
            domain: other.domain.clone(),
            codomain: self.codomain.clone(),
        })
    }
}

/// Assembles T_u as a matrix: column j is u ∗ e_j, so applying the matrix to
/// any f reproduces u ∗ f up to round-off in the dot products.
pub fn assemble_operator(
    u: &MeasurableFn,
    part: &Partition,
    sp: &FiniteMeasureSpace,
    phi_dom: YoungFunction,
    phi_cod: YoungFunction,
) -> Result<OperatorMatrix, Error> {
    let n = sp.len();
    if u.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: u.len(),
        });
    }
    let mut entries = vec![0.0; n * n];
    let mut basis = vec![0.0; n];
    for j in 0..n {
        basis[j] = 1.0;
        let ej = MeasurableFn::new(basis.clone())?;
        let col = star(u, &ej, part, sp)?;
        for i in 0..n {
            entries[i * n + j] = col.values()[i];
        }
        basis[j] = 0.0;
    }
    Ok(OperatorMatrix {
        n,
        entries,
        domain: phi_dom,
        codomain: phi_cod,
    })
}

/// The computable proxy norm Φ⁻¹(‖E(Φ(|u|))‖_∞).
pub fn kstar_norm(
    u: &MeasurableFn,
    phi: &YoungFunction,
    part: &Partition,
    sp: &FiniteMeasureSpace,
) -> Result<f64, Error> {
    let phi_u = MeasurableFn::new(u.values().iter().map(|&v| phi.eval(v)).collect())?;
    let e_phi_u = conditional_expectation(&phi_u, part, sp)?;
    let sup = essential_sup(&e_phi_u, sp)?;
    phi.inverse(sup, 1e-13)
}

/// All ways of writing `total` as an ordered sum of `parts` nonnegative
/// integers.  Shared by the norm searches here and in the bounded-below
/// estimate.
pub(crate) fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    if parts == 0 {
        return out;
    }
    let mut cur = vec![0u32; parts];
    fn rec(i: usize, remaining: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i + 1 == cur.len() {
            cur[i] = remaining;
            out.push(cur.clone());
            return;
        }
        for c in 0..=remaining {
            cur[i] = c;
            rec(i + 1, remaining - c, cur, out);
        }
    }
    rec(0, total, &mut cur, &mut out);
    out
}

/// Visits every sign pattern of `g` restricted to its nonzero coordinates,
/// with the first nonzero coordinate held positive (the objective functions
/// used here are invariant under a global sign flip).
pub(crate) fn for_each_sign_pattern(
    g: &[f64],
    mut visit: impl FnMut(&[f64]) -> Result<(), Error>,
) -> Result<(), Error> {
    let nonzero: Vec<usize> = (0..g.len()).filter(|&j| g[j] != 0.0).collect();
    if nonzero.is_empty() {
        return visit(g);
    }
    let free = nonzero.len() - 1;
    let mut signed = g.to_vec();
    for mask in 0u32..(1u32 << free) {
        signed.copy_from_slice(g);
        for (bit, &pos) in nonzero[1..].iter().enumerate() {
            if (mask >> bit) & 1 == 1 {
                signed[pos] = -signed[pos];
            }
        }
        visit(&signed)?;
    }
    Ok(())
}

struct ColumnData {
    /// ‖e_j‖ in the domain norm, per column.
    dom: Vec<f64>,
    /// ‖T e_j‖ in the codomain norm, per column.
    cod: Vec<f64>,
}

fn column_norms(t: &OperatorMatrix, sp: &FiniteMeasureSpace) -> Result<ColumnData, Error> {
    let n = t.n();
    let mut dom = vec![0.0; n];
    let mut cod = vec![0.0; n];
    let mut basis = vec![0.0; n];
    for j in 0..n {
        basis[j] = 1.0;
        let ej = MeasurableFn::new(basis.clone())?;
        dom[j] = luxemburg_norm(&ej, t.domain(), sp, DEFAULT_NORM_TOL)?.value;
        cod[j] = luxemburg_norm(&t.apply(&ej)?, t.codomain(), sp, DEFAULT_NORM_TOL)?.value;
        basis[j] = 0.0;
    }
    Ok(ColumnData { dom, cod })
}

/// Exhaustive two-sided estimate of the operator norm on spaces with at most
/// [`BRUTE_FORCE_MAX_POINTS`] points.
///
/// Directions are the ℓ¹-simplex points with coordinates `c_j/net`
/// (compositions of `net` into n parts) under every sign pattern.  The best
/// ratio ‖Tf‖/‖f‖ over the net is a certified lower bound.  Two upper bounds
/// are combined:
///
/// * a Lipschitz bound: the net covers the ℓ¹ sphere to radius η = n/net,
///   and `f ↦ ‖Tf‖` (resp. `f ↦ ‖f‖`) is Lipschitz on ℓ¹ with constant
///   `max_j ‖Te_j‖` (resp. `max_j ‖e_j‖`), so each net ratio controls its
///   whole patch whenever the denominator stays positive across the patch;
/// * a column bound: ‖Tf‖ ≤ Σ_j |f_j|·‖Te_j‖ together with the lattice
///   inequality ‖f‖ ≥ |f_j|·‖e_j‖ gives ‖T‖ ≤ n·max_j ‖Te_j‖/‖e_j‖, valid
///   for any net.
///
/// The reported upper bound is the smaller of the two, inflated by a hair to
/// absorb the norm-solver tolerance.
pub fn operator_norm_bruteforce(
    t: &OperatorMatrix,
    sp: &FiniteMeasureSpace,
    net: usize,
) -> Result<(f64, f64), Error> {
    let n = t.n();
    if sp.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: sp.len(),
        });
    }
    if n > BRUTE_FORCE_MAX_POINTS {
        return Err(Error::DimensionTooLarge {
            n,
            max: BRUTE_FORCE_MAX_POINTS,
        });
    }
    if net == 0 {
        return Err(Error::Invalid("net resolution must be ≥ 1".into()));
    }
    if n == 0 {
        return Ok((0.0, 0.0));
    }

    let cols = column_norms(t, sp)?;
    let lipschitz_t = cols.cod.iter().cloned().fold(0.0, f64::max);
    let lipschitz_i = cols.dom.iter().cloned().fold(0.0, f64::max);
    let best_column_ratio = (0..n)
        .map(|j| cols.cod[j] / cols.dom[j])
        .fold(0.0, f64::max);
    let column_upper = n as f64 * best_column_ratio;
    let eta = n as f64 / net as f64;

    let mut lower = best_column_ratio;
    let mut net_upper = 0.0f64;
    let mut net_upper_valid = true;
    for parts in compositions(net as u32, n) {
        let g: Vec<f64> = parts.iter().map(|&c| c as f64 / net as f64).collect();
        // The domain norm only sees |f|, so one denominator serves every
        // sign pattern of this composition.
        let den = luxemburg_norm(
            &MeasurableFn::new(g.clone())?,
            t.domain(),
            sp,
            DEFAULT_NORM_TOL,
        )?
        .value;
        let mut best_num = 0.0f64;
        for_each_sign_pattern(&g, |signed| {
            let tf = t.apply(&MeasurableFn::new(signed.to_vec())?)?;
            let num = luxemburg_norm(&tf, t.codomain(), sp, DEFAULT_NORM_TOL)?.value;
            best_num = best_num.max(num);
            Ok(())
        })?;
        lower = lower.max(best_num / den);
        if den > lipschitz_i * eta {
            net_upper = net_upper.max((best_num + lipschitz_t * eta) / (den - lipschitz_i * eta));
        } else {
            // Some patch of the sphere has no usable denominator bound; the
            // Lipschitz upper estimate is void for this net resolution.
            net_upper_valid = false;
        }
    }

    let mut upper = column_upper;
    if net_upper_valid {
        upper = upper.min(net_upper);
    }
    // Absorb the solver tolerance of the individual norm evaluations.
    upper = (upper * (1.0 + 1e-9) + 1e-12).max(lower);
    Ok((lower, upper))
}

/// Lower bound on the operator norm by seeded multi-start coordinate ascent.
///
/// Every block indicator of `part` is a mandatory starting point (the
/// extremal inputs of the comparison theorems are indicator-shaped), followed
/// by `restarts` pseudo-random starts drawn reproducibly from `seed`.  The
/// result is the best ratio ‖Tf‖/‖f‖ observed, hence always a valid lower
/// bound.
pub fn operator_norm_sample(
    t: &OperatorMatrix,
    sp: &FiniteMeasureSpace,
    part: &Partition,
    seed: u64,
    restarts: usize,
) -> Result<f64, Error> {
    let n = t.n();
    if sp.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: sp.len(),
        });
    }
    if part.n_points() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: part.n_points(),
        });
    }
    if restarts == 0 {
        return Err(Error::Invalid(
            "operator_norm_sample needs restarts ≥ 1".into(),
        ));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let tol = 1e-9;
    let ratio = |values: &[f64]| -> Result<f64, Error> {
        let f = MeasurableFn::new(values.to_vec())?;
        let den = luxemburg_norm(&f, t.domain(), sp, tol)?.value;
        if den == 0.0 {
            return Ok(0.0);
        }
        let num = luxemburg_norm(&t.apply(&f)?, t.codomain(), sp, tol)?.value;
        Ok(num / den)
    };

    let mut starts: Vec<Vec<f64>> = part
        .blocks()
        .iter()
        .map(|block| {
            let mut v = vec![0.0; n];
            for &i in block {
                v[i] = 1.0;
            }
            v
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..restarts {
        starts.push((0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect());
    }

    let mut best = 0.0f64;
    for mut f in starts {
        let peak = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if peak == 0.0 {
            continue;
        }
        for v in &mut f {
            *v /= peak;
        }
        let mut current = ratio(&f)?;
        best = best.max(current);
        let mut step = 0.25;
        let mut sweeps = 0;
        while step >= 1e-6 && sweeps < 500 {
            let mut improved = false;
            for j in 0..n {
                for delta in [step, -step] {
                    let mut cand = f.clone();
                    cand[j] += delta;
                    let peak = cand.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    if peak == 0.0 {
                        continue;
                    }
                    for v in &mut cand {
                        *v /= peak;
                    }
                    let r = ratio(&cand)?;
                    if r > current * (1.0 + 1e-12) {
                        f = cand;
                        current = r;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
            sweeps += 1;
        }
        best = best.max(current);
    }
    Ok(best)
}

/// How the operator-norm estimate in a [`SandwichReport`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SearchMode {
    /// Exhaustive net search with a certified upper bound.
    #[serde(rename = "brute-force")]
    BruteForce,
    /// Coordinate-ascent sampling only; no upper bound available.
    #[serde(rename = "sample-only")]
    SampleOnly,
}

/// Outcome of comparing the proxy norm against the operator norm.
///
/// The comparison being verified is the two-sided bound
/// `kstar ≤ ‖T_u‖ ≤ 3·kstar`, with `‖T_u‖` replaced by the interval
/// `[norm_lower, norm_upper_bruteforce]` (brute-force mode) or by the lower
/// estimate alone (sample-only mode, where only the `3·kstar` side can be
/// tested).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    /// The proxy norm Φ⁻¹(‖E(Φ(|u|))‖_∞).
    pub kstar: f64,
    /// Best certified lower bound on the operator norm.
    pub norm_lower: f64,
    /// Net-search upper bound; `None` in sample-only mode.
    pub norm_upper_bruteforce: Option<f64>,
    /// Three times the proxy norm.
    pub bound_3x: f64,
    /// Which estimator produced the norm bounds.
    pub mode: SearchMode,
    /// Verdict of the two-sided comparison at tolerance `1e-6·max(1, kstar)`.
    pub pass: bool,
}

/// Runs the two-sided norm comparison for the operator induced by `u` on the
/// space with Young function `phi` (same on both sides).
///
/// Spaces with at most [`BRUTE_FORCE_MAX_POINTS`] points get the exhaustive
/// net search with resolution `net`; larger spaces fall back to sampling
/// (seed 0, 24 restarts), flagged by [`SearchMode::SampleOnly`].
pub fn sandwich_check(
    u: &MeasurableFn,
    phi: &YoungFunction,
    part: &Partition,
    sp: &FiniteMeasureSpace,
    net: usize,
) -> Result<SandwichReport, Error> {
    let kstar = kstar_norm(u, phi, part, sp)?;
    let t = assemble_operator(u, part, sp, phi.clone(), phi.clone())?;
    let bound_3x = 3.0 * kstar;
    let tol = 1e-6 * kstar.max(1.0);
    if sp.len() <= BRUTE_FORCE_MAX_POINTS {
        let (lower, upper) = operator_norm_bruteforce(&t, sp, net)?;
        let pass = kstar <= upper + tol && lower <= bound_3x + tol;
        Ok(SandwichReport {
            kstar,
            norm_lower: lower,
            norm_upper_bruteforce: Some(upper),
            bound_3x,
            mode: SearchMode::BruteForce,
            pass,
        })
    } else {
        let lower = operator_norm_sample(&t, sp, part, 0, 24)?;
        let pass = lower <= bound_3x + tol;
        Ok(SandwichReport {
            kstar,
            norm_lower: lower,
            norm_upper_bruteforce: None,
            bound_3x,
            mode: SearchMode::SampleOnly,
            pass,
        })
    }
}
