//! Acceptance suite: one test per headline guarantee, each printing a single
//! pass line with the quantity it verified and the tolerance it used.
//!
//! These tests exercise the released surface end to end — the binary for the
//! worked example and the deterministic suite, the library for the numerical
//! guarantees — on instances drawn from fixed seeds so every run is
//! reproducible.

use std::collections::{BTreeMap, BTreeSet};
use std::process::{Command, Output};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use starmul::{
    fredholm_check, indicator_norm, luxemburg_norm, sandwich_check, star, Error,
    FiniteMeasureSpace, MeasurableFn, Partition, YoungFunction,
};
use starmul_cli::{run_suite, CONDITIONAL_EXPECTATION_SUITE};

fn starmul_bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_starmul"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn random_space(rng: &mut ChaCha8Rng, n: usize) -> FiniteMeasureSpace {
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.25..2.5)).collect();
    FiniteMeasureSpace::from_weights(weights).unwrap()
}

fn random_partition(rng: &mut ChaCha8Rng, n: usize) -> Partition {
    let mut grouping: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        grouping.entry(rng.gen_range(0..4u8)).or_default().push(i);
    }
    Partition::new(n, grouping.into_values().collect()).unwrap()
}

fn random_fn(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> MeasurableFn {
    MeasurableFn::new((0..n).map(|_| rng.gen_range(lo..hi)).collect()).unwrap()
}

const POWERS: [f64; 4] = [1.0, 1.5, 2.0, 3.0];

/// The worked example at full resolution: the binary exits clean in under
/// five seconds and the averaged multiplier matches its even part to 1e-12.
#[test]
fn acceptance_01_worked_example_full_resolution() {
    let started = Instant::now();
    let out = starmul_bin(&["example-paper", "--grid-points", "1000"]);
    let elapsed = started.elapsed();
    assert_eq!(out.status.code(), Some(0));
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "took {:?}, budget is 5 s",
        elapsed
    );
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["pass"], true);

    let checks = report["checks"].as_array().unwrap();
    let by_name = |name: &str| -> &Value {
        checks
            .iter()
            .find(|c| c["name"] == name)
            .unwrap_or_else(|| panic!("missing check {name}"))
    };

    let eu_dev = by_name("eu-identity")["values"]["max_abs_deviation"]
        .as_f64()
        .unwrap();
    assert!(eu_dev <= 1e-12, "averaging deviation {eu_dev}");

    let tu = &by_name("tu-coefficients")["values"];
    let tu_dev = tu["max_abs_deviation"].as_f64().unwrap();
    let cross = tu["max_off_pair_entry"].as_f64().unwrap();
    assert!(tu_dev <= 1e-12, "coefficient deviation {tu_dev}");
    assert!(cross <= 1e-12, "off-pair leakage {cross}");

    // min |E(u)| over the grid is u's even part at the innermost points:
    // (h/2)^4 + 3 with h = 6/1000.
    let min_eu = by_name("min-abs-eu")["values"]["min_abs_eu"]
        .as_f64()
        .unwrap();
    let expected = 3.0 + 0.003f64.powi(4);
    assert!(min_eu >= 3.0);
    assert!(
        (min_eu - expected).abs() <= 1e-12,
        "min |E(u)| = {min_eu}, expected {expected}"
    );

    assert_eq!(by_name("delta2")["pass"], true);
    assert_eq!(by_name("sandwich")["pass"], true);

    println!(
        "[acceptance] worked example, n = 1000: deviations ≤ 1e-12, min |E(u)| = 3 + 0.003⁴, {:?}: PASS",
        elapsed
    );
}

/// The two-sided operator-norm estimate on power laws: k* never exceeds the
/// brute-force upper bound and the certified lower bound never exceeds 3k*,
/// across 50 seeded instances.
#[test]
fn acceptance_02_norm_sandwich_on_power_laws() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5a3d);
    for case in 0..50u32 {
        let n = rng.gen_range(2..=4usize);
        let sp = random_space(&mut rng, n);
        let part = random_partition(&mut rng, n);
        let u = random_fn(&mut rng, n, -3.0, 3.0);
        let p = POWERS[(case % 4) as usize];
        let phi = YoungFunction::power(p).unwrap();
        let report = sandwich_check(&u, &phi, &part, &sp, 16).unwrap();
        let upper = report
            .norm_upper_bruteforce
            .expect("small spaces are searched exhaustively");
        assert!(
            report.kstar <= upper + 1e-9,
            "case {case}: k* = {} above the upper bound {upper}",
            report.kstar
        );
        assert!(
            report.norm_lower <= report.bound_3x + 1e-6,
            "case {case}: observed norm {} above 3k* = {}",
            report.norm_lower,
            report.bound_3x
        );
        assert!(report.pass, "case {case}: sandwich reported failure");
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0);
    println!(
        "[acceptance] norm sandwich k* ≤ ‖T‖ ≤ 3k* on 50 seeded power-law instances, {:?}: PASS",
        elapsed
    );
}

/// Luxemburg norms of power laws collapse to the classical weighted p-norm,
/// to 1e-9, on 200 seeded instances.
#[test]
fn acceptance_03_power_norm_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xbead);
    for case in 0..200u32 {
        let n = rng.gen_range(2..=5usize);
        let sp = random_space(&mut rng, n);
        let f = random_fn(&mut rng, n, -3.0, 3.0);
        let p = POWERS[(case % 4) as usize];
        let phi = YoungFunction::power(p).unwrap();
        let solved = luxemburg_norm(&f, &phi, &sp, 1e-12).unwrap().value;
        let closed: f64 = f
            .values()
            .iter()
            .zip(sp.weights())
            .map(|(x, w)| w * x.abs().powf(p))
            .sum::<f64>()
            .powf(1.0 / p);
        assert!(
            (solved - closed).abs() <= 1e-9 * closed.max(1.0),
            "case {case}, p = {p}: {solved} vs {closed}"
        );
    }
    println!("[acceptance] Luxemburg = weighted p-norm to 1e-9 on 200 seeded instances: PASS");
}

/// Indicator norms match 1/Φ⁻¹(1/μ(Q)) to 1e-9 on 100 seeded instances,
/// alternating power laws and the entropy-type function.
#[test]
fn acceptance_04_indicator_norm_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xfeed);
    for case in 0..100u32 {
        let n = rng.gen_range(2..=6usize);
        let sp = random_space(&mut rng, n);
        let mut q: BTreeSet<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if q.is_empty() {
            q.insert(rng.gen_range(0..n));
        }
        let phi = if case % 2 == 0 {
            YoungFunction::power(POWERS[(case % 8 / 2) as usize]).unwrap()
        } else {
            YoungFunction::entropy()
        };
        let chi = MeasurableFn::indicator(n, &q).unwrap();
        let solved = luxemburg_norm(&chi, &phi, &sp, 1e-12).unwrap().value;
        let closed = indicator_norm(&q, &phi, &sp).unwrap();
        let mu: f64 = sp.measure_of(&q).unwrap();
        let direct = 1.0 / phi.inverse(1.0 / mu, 1e-13).unwrap();
        assert!(
            (solved - closed).abs() <= 1e-9 * closed.max(1.0),
            "case {case}: solved {solved} vs closed {closed}"
        );
        assert!(
            (closed - direct).abs() <= 1e-9 * closed.max(1.0),
            "case {case}: closed {closed} vs direct {direct}"
        );
    }
    println!("[acceptance] indicator norm = 1/Φ⁻¹(1/μ(Q)) to 1e-9 on 100 seeded instances: PASS");
}

/// The averaging-operator invariants stay clean over a long deterministic
/// run: 500 cases of each, seed 0, zero failures.
#[test]
fn acceptance_05_averaging_suite_long_run() {
    let outcome = run_suite(0, 500, Some(CONDITIONAL_EXPECTATION_SUITE));
    assert_eq!(
        outcome.invariants.len(),
        CONDITIONAL_EXPECTATION_SUITE.len()
    );
    for invariant in &outcome.invariants {
        assert_eq!(invariant.cases, 500);
        assert!(
            invariant.failures.is_empty(),
            "{} failed {} of 500 cases; first: {}",
            invariant.name,
            invariant.failures.len(),
            invariant.failures[0].message
        );
    }
    assert!(outcome.pass);
    println!(
        "[acceptance] averaging invariants: {} × 500 seeded cases, zero failures: PASS",
        outcome.invariants.len()
    );
}

/// Conjugate Young functions: the computed conjugate of a power law matches
/// its closed form to 1e-6, the p = 1 conjugate is 0 on [0, 1] and unbounded
/// beyond, and the defining inequality xy ≤ Φ(x) + Ψ(y) holds on a dense
/// grid for every catalog member.
#[test]
fn acceptance_06_conjugate_closed_form_and_product_inequality() {
    // Closed form for p > 1.
    for p in [1.5, 2.0, 3.0] {
        let phi = YoungFunction::power(p).unwrap();
        for k in 0..=100 {
            let y = f64::from(k) * 0.1;
            let computed = phi.complementary(y, 1e-10).unwrap();
            let closed = (p - 1.0) / p * y * (y / p).powf(1.0 / (p - 1.0));
            assert!(
                (computed - closed).abs() <= 1e-6 * closed.max(1.0),
                "p = {p}, y = {y}: {computed} vs {closed}"
            );
        }
    }

    // p = 1: zero up to the limiting slope, unbounded past it.
    let phi1 = YoungFunction::power(1.0).unwrap();
    for k in 0..=10 {
        let y = f64::from(k) * 0.1;
        let computed = phi1.complementary(y, 1e-10).unwrap();
        assert!(
            computed.abs() <= 1e-9,
            "conjugate of |x| at {y} should vanish, got {computed}"
        );
    }
    for y in [1.0 + 1e-6, 2.0, 10.0] {
        match phi1.complementary(y, 1e-10) {
            Err(Error::UnboundedConjugate { .. }) => {}
            other => panic!("conjugate of |x| at {y} should be unbounded, got {other:?}"),
        }
    }

    // The product inequality on a 100 × 100 grid for every catalog member.
    let catalog: Vec<YoungFunction> = POWERS
        .iter()
        .map(|p| YoungFunction::power(*p).unwrap())
        .chain([YoungFunction::entropy()])
        .collect();
    for phi in &catalog {
        for i in 0..100 {
            for j in 0..100 {
                let x = f64::from(i) * 0.1;
                let y = f64::from(j) * 0.1;
                let psi = match phi.complementary(y, 1e-10) {
                    Ok(v) => v,
                    Err(Error::UnboundedConjugate { .. }) => continue,
                    Err(e) => panic!("{e}"),
                };
                assert!(
                    phi.eval(x) + psi >= x * y - 1e-9 * (x * y).max(1.0),
                    "xy > Φ(x) + Ψ(y) at ({x}, {y})"
                );
            }
        }
    }
    println!(
        "[acceptance] conjugates: closed form to 1e-6, product inequality on 100×100 grids: PASS"
    );
}

/// Band decompositions partition the space exactly, and silencing whole
/// blocks of the multiplier produces exactly that much kernel.
#[test]
fn acceptance_07_band_partition_and_kernel_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xcafe);

    // Bands + residual + zero set reassemble the total measure.
    for _ in 0..30 {
        let n = rng.gen_range(3..=8usize);
        let sp = random_space(&mut rng, n);
        let part = random_partition(&mut rng, n);
        let u = random_fn(&mut rng, n, -3.0, 3.0);
        let phi = YoungFunction::power(2.0).unwrap();
        let report = fredholm_check(&u, &phi, &part, &sp, 32).unwrap();
        let total: f64 = report.bands.iter().map(|(_, m)| m).sum::<f64>()
            + report.residual_band_measure
            + report.zero_set_measure;
        assert!(
            (total - sp.total_measure()).abs() <= 1e-12 * sp.total_measure(),
            "bands reassemble to {total}, space has measure {}",
            sp.total_measure()
        );
    }

    // Designed kernels: zero the multiplier on chosen blocks.
    for case in 0..20 {
        let n = rng.gen_range(3..=8usize);
        let sp = random_space(&mut rng, n);
        let part = random_partition(&mut rng, n);
        let blocks = part.blocks().to_vec();
        let n_dead = if blocks.len() >= 2 && case % 2 == 1 {
            2
        } else {
            1
        };
        let n_dead = n_dead.min(blocks.len());
        let mut u_vals: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..3.0)).collect();
        let mut dead_points = 0usize;
        for block in blocks.iter().take(n_dead) {
            for &i in block {
                u_vals[i] = 0.0;
            }
            dead_points += block.len();
        }
        let u = MeasurableFn::new(u_vals).unwrap();
        let phi = YoungFunction::power(2.0).unwrap();
        let report = fredholm_check(&u, &phi, &part, &sp, 32).unwrap();
        assert_eq!(
            report.kernel_dim, dead_points,
            "case {case}: {dead_points} silenced points must give that much kernel"
        );
        assert_eq!(report.cokernel_dim, dead_points);
        assert_eq!(report.rank, n - dead_points);

        // An explicit function supported on a silenced block is annihilated
        // exactly, not merely to rounding.
        let mut f_vals = vec![0.0; n];
        for &i in &blocks[0] {
            f_vals[i] = rng.gen_range(-2.0..2.0);
        }
        let f = MeasurableFn::new(f_vals).unwrap();
        let image = star(&u, &f, &part, &sp).unwrap();
        for v in image.values() {
            assert_eq!(*v, 0.0, "case {case}: silenced block leaked");
        }
    }
    println!(
        "[acceptance] band partition to 1e-12 on 30 instances; designed kernels exact on 20: PASS"
    );
}

/// The property suite is deterministic at the byte level and fast: two runs
/// of 100 cases per invariant exit clean with identical output.
#[test]
fn acceptance_08_deterministic_property_runs() {
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let started = Instant::now();
        let out = starmul_bin(&["props", "--seed", "0", "--cases", "100"]);
        let elapsed = started.elapsed();
        assert_eq!(out.status.code(), Some(0));
        assert!(
            elapsed.as_secs_f64() < 60.0,
            "took {:?}, budget is 60 s",
            elapsed
        );
        outputs.push(out.stdout);
    }
    assert_eq!(outputs[0], outputs[1], "byte-level determinism");
    let outcome: Value = serde_json::from_slice(&outputs[0]).unwrap();
    assert_eq!(outcome["pass"], true);
    assert_eq!(outcome["invariants"].as_array().unwrap().len(), 28);
    println!("[acceptance] property suite: 28 invariants × 100 cases, twice, byte-identical, clean: PASS");
}
