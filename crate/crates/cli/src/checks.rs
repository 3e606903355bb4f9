//! Check execution: run every check a scenario requests and assemble the
//! report.  Each check yields exactly one `CheckResult`, in scenario order;
//! malformed scenarios fail fast, while checks that cannot run on a valid
//! scenario (missing prerequisites, solver failures) simply fail with an
//! explanatory detail.

use serde_json::Value;
use starmul::{
    assemble_operator, closed_range_check, conditional_expectation, fredholm_check, sandwich_check,
};

use crate::props;
use crate::report::{CheckResult, Report, REPORT_SCHEMA};
use crate::scenario::{
    CheckSpec, Expression, Instance, MultiplierSpec, PartitionName, PartitionSpec, Scenario,
    SpaceSpec, YoungSpec,
};
use crate::CliError;

/// Run a scenario: build it, run every check, and assemble the report.
pub fn run_scenario(scenario: &Scenario) -> Result<Report, CliError> {
    let instance = scenario.build()?;
    let checks: Vec<CheckResult> = scenario
        .checks
        .iter()
        .map(|check| run_check(check, scenario, &instance))
        .collect();
    let pass = checks.iter().all(|c| c.pass);
    Ok(Report {
        schema: REPORT_SCHEMA,
        scenario: scenario.name.clone(),
        checks,
        pass,
    })
}

/// The built-in worked example: entropy-type Young function on a symmetric
/// midpoint grid over [−3, 3], mirror-pair partition, u(x) = x⁴ + sin x + 3.
pub fn example_scenario(grid_points: usize) -> Scenario {
    Scenario {
        name: "paper-example".into(),
        space: SpaceSpec::Grid {
            interval: [-3.0, 3.0],
            n_points: grid_points,
            symmetric: true,
        },
        partition: PartitionSpec::Named(PartitionName::SymmetricPairs),
        young: YoungSpec::Entropy,
        multiplier: MultiplierSpec::Expression(Expression {
            poly: vec![3.0, 0.0, 0.0, 0.0, 1.0],
            sin: 1.0,
            cos: 0.0,
        }),
        checks: vec![
            CheckSpec::EuIdentity { tol: 1e-12 },
            CheckSpec::TuCoefficients { tol: 1e-12 },
            CheckSpec::MinAbsEu { at_least: 3.0 },
            CheckSpec::Delta2 {
                x_max: 10.0,
                n_grid: 200,
            },
            CheckSpec::Sandwich {
                net: 16,
                grid_points: Some(4),
            },
        ],
    }
}

/// Run the built-in worked example at the given resolution.
pub fn example_paper(grid_points: usize) -> Result<Report, CliError> {
    if grid_points < 4 || !grid_points.is_multiple_of(2) {
        return Err(CliError::Parse(
            "grid-points must be even and at least 4".into(),
        ));
    }
    run_scenario(&example_scenario(grid_points))
}

fn run_check(check: &CheckSpec, scenario: &Scenario, inst: &Instance) -> CheckResult {
    match check {
        CheckSpec::Sandwich { net, grid_points } => {
            check_sandwich(scenario, inst, *net, *grid_points)
        }
        CheckSpec::ClosedRange { threshold } => check_closed_range(inst, *threshold),
        CheckSpec::Fredholm { n_max } => check_fredholm(inst, *n_max),
        CheckSpec::EuIdentity { tol } => check_eu_identity(inst, *tol),
        CheckSpec::TuCoefficients { tol } => check_tu_coefficients(inst, *tol),
        CheckSpec::MinAbsEu { at_least } => check_min_abs_eu(inst, *at_least),
        CheckSpec::Delta2 { x_max, n_grid } => check_delta2(inst, *x_max, *n_grid),
        CheckSpec::Properties { seed, cases } => check_properties(*seed, *cases),
    }
}

fn check_sandwich(
    scenario: &Scenario,
    inst: &Instance,
    net: u32,
    grid_points: Option<usize>,
) -> CheckResult {
    let coarse;
    let (run_inst, n_used) = match grid_points {
        None => (inst, inst.space.len()),
        Some(gp) => match rebuild_on_coarse_grid(scenario, gp) {
            Ok(rebuilt) => {
                coarse = rebuilt;
                (&coarse, gp)
            }
            Err(msg) => return CheckResult::fail("sandwich", msg),
        },
    };
    match sandwich_check(
        &run_inst.multiplier,
        &run_inst.phi,
        &run_inst.partition,
        &run_inst.space,
        net as usize,
    ) {
        Ok(rep) => {
            let mut result = CheckResult::new("sandwich");
            result.put_f64("kstar", rep.kstar);
            result.put_f64("norm_lower", rep.norm_lower);
            match rep.norm_upper_bruteforce {
                Some(v) => result.put_f64("norm_upper_bruteforce", v),
                None => result.put("norm_upper_bruteforce", Value::Null),
            }
            result.put_f64("bound_3x", rep.bound_3x);
            result.put(
                "mode",
                serde_json::to_value(rep.mode).expect("mode serializes"),
            );
            result.put("n_points", n_used as u64);
            result.put("net", u64::from(net));
            result.pass = rep.pass;
            result
        }
        Err(e) => CheckResult::fail("sandwich", format!("search failed: {e}")),
    }
}

/// Re-express a grid scenario on a coarser grid so the brute-force search is
/// tractable: same interval, same named partition, same symbolic multiplier.
fn rebuild_on_coarse_grid(scenario: &Scenario, grid_points: usize) -> Result<Instance, String> {
    let SpaceSpec::Grid {
        interval,
        symmetric,
        ..
    } = &scenario.space
    else {
        return Err("coarse re-gridding needs a grid scenario".into());
    };
    if !matches!(scenario.multiplier, MultiplierSpec::Expression(_)) {
        return Err("coarse re-gridding needs an expression multiplier".into());
    }
    if !matches!(scenario.partition, PartitionSpec::Named(_)) {
        return Err("coarse re-gridding needs a named partition".into());
    }
    let coarse = Scenario {
        name: scenario.name.clone(),
        space: SpaceSpec::Grid {
            interval: *interval,
            n_points: grid_points,
            symmetric: *symmetric,
        },
        partition: scenario.partition.clone(),
        young: scenario.young.clone(),
        multiplier: scenario.multiplier.clone(),
        checks: vec![],
    };
    coarse.build().map_err(|e| format!("coarse grid: {e}"))
}

fn check_closed_range(inst: &Instance, threshold: f64) -> CheckResult {
    match closed_range_check(
        &inst.multiplier,
        &inst.phi,
        &inst.partition,
        &inst.space,
        threshold,
    ) {
        Ok(rep) => {
            let mut result = CheckResult::new("closed-range");
            result.put_f64("threshold", threshold);
            result.put(
                "support",
                Value::Array(rep.support.iter().map(|i| Value::from(*i as u64)).collect()),
            );
            // delta_star is +∞ exactly when the support is empty; JSON has
            // no infinity, so the value goes to null and the flag says why.
            result.put_f64("delta_star", rep.delta_star);
            result.put("delta_star_infinite", rep.delta_star.is_infinite());
            result.put("verdict", rep.verdict);
            if let Some(w) = &rep.witness {
                result.put("witness_block_index", w.block_index as u64);
                result.put_f64("witness_t_indicator_norm", w.t_indicator_norm);
                result.put_f64("witness_comparison_bound", w.comparison_bound);
                result.put("witness_observed_strict", w.observed_strict);
            }
            if let Some(gap) = rep.reciprocal_gap {
                result.put_f64("reciprocal_gap", gap);
            }
            result.pass = rep.verdict;
            result
        }
        Err(e) => CheckResult::fail("closed-range", format!("probe failed: {e}")),
    }
}

fn check_fredholm(inst: &Instance, n_max: u32) -> CheckResult {
    match fredholm_check(
        &inst.multiplier,
        &inst.phi,
        &inst.partition,
        &inst.space,
        n_max,
    ) {
        Ok(rep) => {
            let mut result = CheckResult::new("fredholm");
            result.put_f64("min_abs_eu", rep.min_abs_eu);
            result.put_f64("zero_set_measure", rep.zero_set_measure);
            result.put("kernel_dim", rep.kernel_dim as u64);
            result.put("cokernel_dim", rep.cokernel_dim as u64);
            result.put("rank", rep.rank as u64);
            result.put("band_cap", u64::from(rep.band_cap));
            result.put(
                "bands",
                Value::Array(
                    rep.bands
                        .iter()
                        .map(|(n, m)| {
                            Value::Array(vec![Value::from(u64::from(*n)), float_value(*m)])
                        })
                        .collect(),
                ),
            );
            result.put(
                "h_set",
                Value::Array(
                    rep.h_set
                        .iter()
                        .map(|n| Value::from(u64::from(*n)))
                        .collect(),
                ),
            );
            result.put_f64("residual_band_measure", rep.residual_band_measure);
            result.put_f64("sup_e_phi_u", rep.sup_e_phi_u);
            // The necessary condition at desk scale: |E(u)| bounded away
            // from zero (equivalently an empty zero set and trivial kernel).
            result.pass = rep.min_abs_eu > 0.0;
            result
        }
        Err(e) => CheckResult::fail("fredholm", format!("diagnostic failed: {e}")),
    }
}

/// Shared prerequisites of the parity-based checks: a symbolic multiplier on
/// a space whose points mirror exactly, partitioned into mirror pairs with
/// equal weights.
fn mirror_prerequisites(inst: &Instance) -> Result<&Expression, String> {
    let expr = inst
        .expression
        .as_ref()
        .ok_or("needs an expression multiplier")?;
    if !inst.mirror_pairs {
        return Err("needs the mirror-pair partition".into());
    }
    let n = inst.space.len();
    for k in 0..n / 2 {
        let (i, j) = (k, n - 1 - k);
        if inst.points[j] != -inst.points[i] {
            return Err(format!("points {i} and {j} are not mirror images"));
        }
        if inst.space.weights()[i] != inst.space.weights()[j] {
            return Err(format!("points {i} and {j} carry different weights"));
        }
    }
    Ok(expr)
}

fn check_eu_identity(inst: &Instance, tol: f64) -> CheckResult {
    if !(tol.is_finite() && tol > 0.0) {
        return CheckResult::fail("eu-identity", "tolerance must be positive and finite");
    }
    let expr = match mirror_prerequisites(inst) {
        Ok(expr) => expr,
        Err(msg) => return CheckResult::fail("eu-identity", msg),
    };
    let eu = match conditional_expectation(&inst.multiplier, &inst.partition, &inst.space) {
        Ok(eu) => eu,
        Err(e) => return CheckResult::fail("eu-identity", format!("averaging failed: {e}")),
    };
    let mut deviation = 0.0f64;
    for (value, x) in eu.values().iter().zip(&inst.points) {
        deviation = deviation.max((value - expr.even_part(*x)).abs());
    }
    let mut result = CheckResult::new("eu-identity");
    result.put_f64("max_abs_deviation", deviation);
    result.put_f64("tol", tol);
    result.pass = deviation <= tol;
    result
}

fn check_tu_coefficients(inst: &Instance, tol: f64) -> CheckResult {
    if !(tol.is_finite() && tol > 0.0) {
        return CheckResult::fail("tu-coefficients", "tolerance must be positive and finite");
    }
    let expr = match mirror_prerequisites(inst) {
        Ok(expr) => expr,
        Err(msg) => return CheckResult::fail("tu-coefficients", msg),
    };
    let matrix = match assemble_operator(
        &inst.multiplier,
        &inst.partition,
        &inst.space,
        inst.phi.clone(),
        inst.phi.clone(),
    ) {
        Ok(m) => m,
        Err(e) => return CheckResult::fail("tu-coefficients", format!("assembly failed: {e}")),
    };
    let n = inst.space.len();
    // Per mirror pair {i, j} the operator acts by even(x)+odd(x)/2 on the
    // diagonal and odd(x)/2 across the pair; everything else is zero.
    let mut coefficient_dev = 0.0f64;
    let mut off_pair = 0.0f64;
    for k in 0..n / 2 {
        let (i, j) = (k, n - 1 - k);
        for &(row, col) in &[(i, i), (j, j)] {
            let x = inst.points[row];
            let want = expr.even_part(x) + 0.5 * expr.odd_part(x);
            coefficient_dev = coefficient_dev.max((matrix.entry(row, col) - want).abs());
        }
        for &(row, col) in &[(i, j), (j, i)] {
            let want = 0.5 * expr.odd_part(inst.points[row]);
            coefficient_dev = coefficient_dev.max((matrix.entry(row, col) - want).abs());
        }
        for row in 0..n {
            if row != i && row != j {
                off_pair = off_pair.max(matrix.entry(row, i).abs());
                off_pair = off_pair.max(matrix.entry(row, j).abs());
            }
        }
    }
    let mut result = CheckResult::new("tu-coefficients");
    result.put_f64("max_abs_deviation", coefficient_dev);
    result.put_f64("max_off_pair_entry", off_pair);
    result.put_f64("tol", tol);
    result.pass = coefficient_dev <= tol && off_pair <= tol;
    result
}

fn check_min_abs_eu(inst: &Instance, at_least: f64) -> CheckResult {
    if !at_least.is_finite() {
        return CheckResult::fail("min-abs-eu", "floor must be finite");
    }
    let eu = match conditional_expectation(&inst.multiplier, &inst.partition, &inst.space) {
        Ok(eu) => eu,
        Err(e) => return CheckResult::fail("min-abs-eu", format!("averaging failed: {e}")),
    };
    let min = eu
        .values()
        .iter()
        .fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let mut result = CheckResult::new("min-abs-eu");
    result.put_f64("min_abs_eu", min);
    result.put_f64("at_least", at_least);
    result.pass = min >= at_least;
    result
}

fn check_delta2(inst: &Instance, x_max: f64, n_grid: usize) -> CheckResult {
    if !(x_max.is_finite() && x_max > 0.0) {
        return CheckResult::fail("delta2", "x_max must be positive and finite");
    }
    if n_grid < 2 {
        return CheckResult::fail("delta2", "n_grid must be at least 2");
    }
    let estimate = inst.phi.delta2_estimate(x_max, n_grid);
    let mut result = CheckResult::new("delta2");
    result.put_f64("estimate", estimate);
    result.put_f64("x_max", x_max);
    result.put("n_grid", n_grid as u64);
    result.pass = estimate.is_finite();
    result
}

fn check_properties(seed: u64, cases: u32) -> CheckResult {
    if cases == 0 {
        return CheckResult::fail("properties", "cases must be at least 1");
    }
    let outcome = props::run_suite(seed, cases, None);
    let mut result = CheckResult::new("properties");
    result.put("seed", seed);
    result.put("cases", u64::from(cases));
    result.put("invariants_run", outcome.invariants.len() as u64);
    result.put("total_failures", outcome.total_failures() as u64);
    let failing: Vec<Value> = outcome
        .invariants
        .iter()
        .filter(|inv| !inv.failures.is_empty())
        .map(|inv| Value::from(inv.name))
        .collect();
    if !failing.is_empty() {
        result.put("failing_invariants", Value::Array(failing));
        result.detail = Some(
            "one or more invariants failed; run the props command for replayable instances".into(),
        );
    }
    result.pass = outcome.pass;
    result
}

fn float_value(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}
