//! End-to-end acceptance gates. Each test exercises one pinned
//! criterion against an independent oracle, prints a single pass/fail
//! line, and enforces the runtime budget where one applies. Tests
//! serialize on a lock so the timings are not skewed by each other.

use std::sync::Mutex;
use std::time::Instant;

use polarred::catalog::{build_model, MODEL_NAMES};
use polarred::verify::{
    check_c_invariance, check_character_orthonormality, check_constraint_solution,
    check_convergence_slope, check_flow_equivalence, check_measure_constant,
    check_measure_two_path, check_quadrature_monte_carlo, check_section_axioms,
    check_spectrum_ladder, check_sutherland_derivation, check_vertical_energy, report_json,
    run_all, CheckResult,
};

static GATE: Mutex<()> = Mutex::new(());

const SEED: u64 = 7;

fn report(results: &[CheckResult], elapsed: f64, budget: Option<f64>) {
    for r in results {
        println!(
            "[{}] {}: statistic {:.3e}, threshold {:.3e}, {:.2}s",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.statistic,
            r.threshold,
            elapsed
        );
        assert!(r.passed, "{}: statistic {:.6e} over {:.1e}", r.name, r.statistic, r.threshold);
    }
    if let Some(b) = budget {
        assert!(elapsed < b, "runtime {elapsed:.2}s over the {b}s budget");
    }
}

fn gated(budget: Option<f64>, checks: &[fn() -> polarred::Result<CheckResult>]) {
    let _guard = GATE.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let results: Vec<CheckResult> = checks.iter().map(|c| c().expect("check ran")).collect();
    report(&results, start.elapsed().as_secs_f64(), budget);
}

#[test]
fn constraint_solutions_satisfy_the_pairing_equations() {
    gated(Some(5.0), &[|| check_constraint_solution(SEED)]);
}

#[test]
fn vertical_energy_identity_holds_on_every_model() {
    gated(Some(5.0), &[|| check_vertical_energy(SEED)]);
}

#[test]
fn reduced_flow_matches_the_geodesic_oracle() {
    gated(Some(60.0), &[check_flow_equivalence]);
}

#[test]
fn reduction_reproduces_the_inverse_sine_squared_potential() {
    gated(Some(10.0), &[|| check_sutherland_derivation(SEED)]);
}

#[test]
fn radial_spectrum_matches_the_character_ladder_at_second_order() {
    gated(Some(30.0), &[check_spectrum_ladder, check_convergence_slope]);
}

#[test]
fn measure_term_is_constant_and_path_independent() {
    gated(Some(2.0), &[check_measure_constant, || check_measure_two_path(SEED)]);
}

#[test]
fn radial_quadrature_agrees_with_haar_monte_carlo() {
    gated(Some(60.0), &[check_character_orthonormality, || {
        check_quadrature_monte_carlo(SEED, 1_000_000)
    }]);
}

#[test]
fn assembled_operator_ignores_density_normalization() {
    gated(None, &[check_c_invariance]);
}

#[test]
fn section_axioms_hold_for_every_catalog_model() {
    gated(None, &[|| check_section_axioms(SEED)]);
    // Sections are abelian: commuting directions make the chart flat.
    for name in MODEL_NAMES {
        let model = build_model(name).unwrap();
        for (i, a) in model.section.directions.iter().enumerate() {
            for b in &model.section.directions[i + 1..] {
                let c = model.target.bracket(a, b).norm();
                assert!(c < 1e-12, "{name}: section bracket norm {c:.3e}");
            }
        }
    }
}

#[test]
fn verification_suite_is_green_and_deterministic() {
    let _guard = GATE.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let first = run_all(SEED).expect("suite ran");
    let second = run_all(SEED).expect("suite ran");
    let elapsed = start.elapsed().as_secs_f64();
    report(&first, elapsed, None);
    assert_eq!(
        report_json(SEED, &first).to_string_pretty(),
        report_json(SEED, &second).to_string_pretty(),
        "verification report changed between identically seeded runs"
    );
    // Budget covers one suite run; the determinism pass doubles the work.
    assert!(elapsed < 600.0, "two suite runs took {elapsed:.1}s, budget is 300s each");
}
