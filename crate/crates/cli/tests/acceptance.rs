//! End-to-end acceptance checks. Each check prints one `PASS`/`FAIL` line
//! to the real stdout (bypassing the test harness capture) with the
//! measured quantities and the pinned tolerance.
//!
//! Check 8 compares the Haar mean of `real(ψ)` with `1/(d+1)`. The exact
//! value is `2/(d+1)`, so that check is expected to report FAIL; it is
//! recorded but not asserted. Every other check is asserted.

use std::io::Write;
use std::time::{Duration, Instant};

use acornlab::commit::{self, HarnessAdversary, HarnessMode, HarnessParams};
use acornlab::pipeline::{self, SimulationConfig};
use acornlab::purify::{self, VerifyOptions};
use acornlab::qcore::{RandomSource, StateVector};
use acornlab::realitytest::{self as rt, AccessMode};
use acornlab::{acorn, reflect, schurweyl};

const ACORN_TOL: f64 = 1e-10;
const ACORN_MAX_RUNTIME: Duration = Duration::from_secs(120);
const MC_DRAWS: usize = 10_000;
const BOOTSTRAP_RESAMPLES: usize = 200;
const SLOPE_RANGE: (f64, f64) = (-1.25, -0.8);
const QPCA_DELTA: f64 = 0.05;
const QPCA_C: f64 = 4.0;
const SCHUR_TOL: f64 = 1e-9;
const PURIFY_FORMULA_TOL: f64 = 1e-8;
const PURIFY_MARGINAL_TOL: f64 = 1e-9;
const PURIFY_MC_SAMPLES: usize = 20_000;
const PURIFY_SHAPE_DRAWS: usize = 10_000;
const PIPELINE_EPS: f64 = 0.1;
const PIPELINE_SEEDS: usize = 200;
const STATE_PREP_TRIALS: usize = 100;
const STATE_PREP_TOL: f64 = 1e-10;
const PIPELINE_MAX_RUNTIME: Duration = Duration::from_secs(300);
const REALITY_TOL: f64 = 1e-10;
const TWO_SHOT_MAX_ERROR: f64 = 1.0 / 3.0;
const CONJUGATE_MIN_SUCCESS: f64 = 0.65;
const SAMPLE_MAX_SUCCESS: f64 = 0.60;
const DISTINGUISH_TRIALS: usize = 2000;
const HAAR_SAMPLES: usize = 10_000;
const HAAR_DIM: usize = 8;
const COMMIT_TOL: f64 = 1e-10;
const PROJECTOR_TOL: f64 = 1e-8;
const PROJECTOR_MIN_IN_RANGE: usize = 45;
const INDEPENDENT_MAX_PASS: f64 = 0.15;

fn report(id: usize, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "acceptance {id:>2}: {verdict} {detail}");
    let _ = out.flush();
}

fn acorn_equality() -> bool {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in 1..=4 {
        for d in [2, 3] {
            let r = acorn::verify(n, d, 20, &RandomSource::new(1000 + 10 * n as u64 + d as u64)).unwrap();
            worst = worst.max(r.max_marginal_distance).max(r.max_output_error);
        }
    }
    let elapsed = start.elapsed();
    let pass = worst <= ACORN_TOL && elapsed <= ACORN_MAX_RUNTIME;
    report(1, pass, format!("max marginal distance {worst:.2e} (tol {ACORN_TOL:e}), runtime {:.2}s", elapsed.as_secs_f64()));
    pass
}

fn conditional_sample_monte_carlo() -> bool {
    let mut pass = true;
    let mut detail = Vec::new();
    for n in 1..=3 {
        for d in [2, 3] {
            let mut rng = RandomSource::new(2000 + 10 * n as u64 + d as u64);
            let psi = StateVector::from_amplitudes("psi", rng.haar_state(d).iter().copied().collect()).unwrap();
            let c = acorn::monte_carlo_check(&psi, n, MC_DRAWS, BOOTSTRAP_RESAMPLES, &mut rng).unwrap();
            pass &= c.pass;
            detail.push(format!("(n={n},d={d}) {:.4} vs {:.4}+3·{:.4}", c.observed, c.bootstrap_mean, c.bootstrap_sd));
        }
    }
    report(2, pass, format!("{MC_DRAWS} draws, distance vs bootstrap bound: {}", detail.join("; ")));
    pass
}

fn qpca_scaling() -> bool {
    let ns = [16, 32, 64, 128, 256];
    let s = reflect::sweep(2, &ns, 5, QPCA_DELTA, QPCA_C, &RandomSource::new(3000)).unwrap();
    let in_range = (SLOPE_RANGE.0..=SLOPE_RANGE.1).contains(&s.state_slope);
    let pass = in_range && s.calibrated_error <= QPCA_DELTA;
    report(
        3,
        pass,
        format!(
            "slope {:.3} in [{}, {}], choi slope {:.3}; c={QPCA_C} δ={QPCA_DELTA}: n={} error {:.4}",
            s.state_slope, SLOPE_RANGE.0, SLOPE_RANGE.1, s.choi_slope, s.calibrated_copies, s.calibrated_error
        ),
    );
    pass
}

fn schur_weyl_blocks() -> bool {
    let mut pass = true;
    let mut worst = 0.0f64;
    for (n, d) in [(2, 2), (3, 2), (4, 2), (2, 3), (3, 3)] {
        let r = schurweyl::verify(n, d, 20, &mut RandomSource::new(4000 + 10 * n as u64 + d as u64)).unwrap();
        worst = worst.max(r.max_permutation_off_block).max(r.max_gl_off_block);
        pass &= r.dimension_identity && r.dimension_sum == d.pow(n as u32);
    }
    pass &= worst <= SCHUR_TOL;
    report(4, pass, format!("max off-block residual {worst:.2e} (tol {SCHUR_TOL:e}), dimension identity exact"));
    pass
}

fn purification_channel() -> bool {
    let mut pass = true;
    let mut detail = Vec::new();
    for (n, d, r) in [(1, 2, 2), (2, 2, 2), (3, 2, 2), (2, 3, 2)] {
        let opts = VerifyOptions { mc_samples: PURIFY_MC_SAMPLES, shape_draws: PURIFY_SHAPE_DRAWS, resamples: BOOTSTRAP_RESAMPLES };
        let rep = purify::verify(n, d, r, &opts, &mut RandomSource::new(5000 + 100 * n as u64 + 10 * d as u64 + r as u64)).unwrap();
        let mc = rep.monte_carlo.as_ref().unwrap();
        let shapes_ok = rep.shape_frequencies.as_ref().unwrap().iter().all(|s| s.within_3sigma);
        let ok = rep.formula_residual <= PURIFY_FORMULA_TOL && rep.marginal_residual <= PURIFY_MARGINAL_TOL && mc.pass && shapes_ok;
        pass &= ok;
        detail.push(format!(
            "({n},{d},{r}) formula {:.1e} marginal {:.1e} mc {} shapes {}",
            rep.formula_residual, rep.marginal_residual, mc.pass, shapes_ok
        ));
    }
    report(5, pass, detail.join("; "));
    pass
}

fn pipeline_simulation() -> bool {
    let start = Instant::now();
    let c = pipeline::probe_circuit(4).unwrap();
    let sigma = purify::random_density(2, 2, &mut RandomSource::new(6000));
    let input = StateVector::basis(c.layout().clone(), 0).unwrap();
    let cfg = SimulationConfig::new(PIPELINE_EPS);
    let rep = pipeline::paired_comparison(&c, &input, &sigma, &cfg, PIPELINE_SEEDS, &RandomSource::new(6001)).unwrap();
    let base = RandomSource::new(6002);
    let passes = (0..STATE_PREP_TRIALS)
        .filter(|&i| {
            let s = pipeline::sample_reflection_oracle(&sigma, 2, 4, &mut base.child(i as u64)).unwrap();
            s.oracle.state_prep_residual().unwrap() <= STATE_PREP_TOL
        })
        .count();
    let elapsed = start.elapsed();
    let pass = c.query_count() == 2
        && rep.averaged_distance <= PIPELINE_EPS
        && passes == STATE_PREP_TRIALS
        && elapsed <= PIPELINE_MAX_RUNTIME;
    report(
        6,
        pass,
        format!(
            "q=2, {PIPELINE_SEEDS} seeds, n={} copies: distance {:.4} (tol {PIPELINE_EPS}); state-prep {passes}/{STATE_PREP_TRIALS}; runtime {:.2}s",
            rep.copies,
            rep.averaged_distance,
            elapsed.as_secs_f64()
        ),
    );
    pass
}

fn reality_testing() -> bool {
    let base = RandomSource::new(7000);
    let (mut swap_err, mut transpose_err, mut close_err) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..20 {
        let psi = base.child(i).haar_state(6);
        let oracle = rt::pure_state_oracle(&psi).unwrap();
        let real = rt::real_measure(&psi);
        swap_err = swap_err.max((rt::swap_test_probability(&oracle).unwrap() - (0.5 + 0.5 * real)).abs());
        transpose_err = transpose_err.max((rt::transpose_test_reality(&oracle).unwrap() - real).abs());
        let c = rt::closeness_check(&psi);
        close_err = close_err.max((c.max_real_overlap - c.predicted).abs());
    }
    let far_error = 1.0 - rt::two_shot_far_probability(rt::FAR_THRESHOLD);
    let exact_ok = swap_err <= REALITY_TOL && transpose_err <= REALITY_TOL && close_err <= REALITY_TOL && far_error <= TWO_SHOT_MAX_ERROR;
    let conj = rt::phase_vs_haar_experiment(16, AccessMode::Conjugate, DISTINGUISH_TRIALS, &RandomSource::new(7100)).unwrap();
    let sample = rt::phase_vs_haar_experiment(16, AccessMode::Sample { copies: 1 }, DISTINGUISH_TRIALS, &RandomSource::new(7200)).unwrap();
    let gap = rt::helstrom_gap_sweep(&[4, 8, 16, 32], 2).unwrap();
    let pass = exact_ok && conj.success_rate >= CONJUGATE_MIN_SUCCESS && sample.success_rate <= SAMPLE_MAX_SUCCESS && gap.monotone;
    report(
        7,
        pass,
        format!(
            "swap {swap_err:.1e} transpose {transpose_err:.1e} closeness {close_err:.1e} (tol {REALITY_TOL:e}); two-shot far error {far_error:.4} (≤ 1/3); conjugate d=16 {:.4} (≥ {CONJUGATE_MIN_SUCCESS}); sample k=1 {:.4} (≤ {SAMPLE_MAX_SUCCESS}); helstrom k=2 {:?} monotone {}",
            conj.success_rate,
            sample.success_rate,
            gap.values.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>(),
            gap.monotone
        ),
    );
    pass
}

fn haar_mean() -> bool {
    let h = rt::haar_mean_real(HAAR_DIM, HAAR_SAMPLES, &RandomSource::new(8000));
    let target = 1.0 / (HAAR_DIM as f64 + 1.0);
    let pass = (h.mean - target).abs() <= 3.0 * h.std_error;
    report(
        8,
        pass,
        format!(
            "d={HAAR_DIM}, {HAAR_SAMPLES} states: mean {:.4} ± {:.4} vs target {target:.4} (exact moment 2/(d+1) = {:.4}, within 3σ: {})",
            h.mean, h.std_error, h.exact, h.within_3sigma_exact
        ),
    );
    pass
}

fn commitments() -> bool {
    let rng = RandomSource::new(9000);
    let hiding = commit::hiding_experiment(&[2, 4, 8, 16], 20, &rng.child(0)).unwrap();
    let attack = commit::attack_experiment(16, 20, &rng.child(1)).unwrap();
    let proj = commit::projector_experiment(32, 4, 50, &rng.child(2)).unwrap();
    let hp = HarnessParams { d: 32, ell: 32, t: 2, q: 2, exact_oracles: false };
    let ind = commit::swap_distinguish_harness(&hp, HarnessMode::Independent, HarnessAdversary::ConjugateAccess, DISTINGUISH_TRIALS, &rng.child(3)).unwrap();
    let sweep = commit::advantage_sweep(&[4, 8, 16, 32], 32, 2, 2, HarnessAdversary::ConjugateAccess, DISTINGUISH_TRIALS, &rng.child(4)).unwrap();
    let attacks_ok = attack.min_conjugate_fidelity >= 1.0 - COMMIT_TOL && attack.min_transpose_fidelity >= 1.0 - COMMIT_TOL;
    let pass = hiding.max_residual <= COMMIT_TOL
        && attacks_ok
        && proj.max_prediction_error <= PROJECTOR_TOL
        && proj.in_range >= PROJECTOR_MIN_IN_RANGE
        && ind.empirical_pass_rate <= INDEPENDENT_MAX_PASS
        && sweep.non_increasing_in_d;
    report(
        9,
        pass,
        format!(
            "hiding {:.1e}; attacks {:.12}/{:.12}; projector error {:.1e}, λ0 in range {}/50; independent pass {:.4} (≤ {INDEPENDENT_MAX_PASS}); advantage over d {:?} non-increasing {}",
            hiding.max_residual,
            attack.min_conjugate_fidelity,
            attack.min_transpose_fidelity,
            proj.max_prediction_error,
            proj.in_range,
            ind.empirical_pass_rate,
            sweep.points.iter().map(|p| (p.advantage * 1e4).round() / 1e4).collect::<Vec<_>>(),
            sweep.non_increasing_in_d
        ),
    );
    pass
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let mut argv = vec!["acornlab", "--seed", "42"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = acornlab_cli::run(argv, &mut out, &mut err);
    (code, out)
}

fn cli_determinism() -> bool {
    let commands: &[&[&str]] = &[
        &["acorn-verify", "--n", "2", "--d", "2", "--mc-draws", "500"],
        &["reflect-sweep"],
        &["schur-verify", "--n", "3", "--d", "2"],
        &["purify-verify", "--n", "2", "--d", "2", "--r", "2", "--mc-samples", "1000", "--shape-draws", "1000"],
        &["pipeline-sim", "--seeds", "50"],
        &["reality", "--experiment", "distinguish", "--trials", "500"],
        &["reality", "--experiment", "distinguish", "--mode", "sample", "--trials", "500"],
        &["reality", "--experiment", "exact"],
        &["reality", "--experiment", "helstrom-gap", "--dims", "4,8,16"],
        &["reality", "--experiment", "haar-mean", "--samples", "2000"],
        &["commit", "--experiment", "hiding"],
        &["commit", "--experiment", "attack"],
        &["commit", "--experiment", "projector"],
        &["commit", "--experiment", "distinguish", "--trials", "300"],
    ];
    let mut mismatched = Vec::new();
    for args in commands {
        let (code_a, a) = run_cli(args);
        let (code_b, b) = run_cli(args);
        let json_ok = serde_json::from_slice::<serde_json::Value>(&a).is_ok();
        if code_a != code_b || a != b || a.is_empty() || !json_ok || code_a == 2 {
            mismatched.push(args.join(" "));
        }
    }
    let pass = mismatched.is_empty();
    report(10, pass, format!("{} command runs compared, mismatches: {mismatched:?}", commands.len()));
    pass
}

#[test]
fn acceptance_suite() {
    let results = [
        (1, acorn_equality()),
        (2, conditional_sample_monte_carlo()),
        (3, qpca_scaling()),
        (4, schur_weyl_blocks()),
        (5, purification_channel()),
        (6, pipeline_simulation()),
        (7, reality_testing()),
        (8, haar_mean()),
        (9, commitments()),
        (10, cli_determinism()),
    ];
    let failed: Vec<usize> = results.iter().filter(|(_, ok)| !ok).map(|(id, _)| *id).collect();
    let unexpected: Vec<usize> = failed.iter().copied().filter(|&id| id != 8).collect();
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "acceptance summary: {}/10 pass, failing {failed:?} (8 is a known reference mismatch)", 10 - failed.len());
    assert!(unexpected.is_empty(), "acceptance checks failed: {unexpected:?}");
}
