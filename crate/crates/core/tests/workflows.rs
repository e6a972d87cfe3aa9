use acornlab::acorn;
use acornlab::pipeline::{self, OracleDirection, QueryCircuit, SimulationConfig};
use acornlab::purify;
use acornlab::qcore::linalg;
use acornlab::qcore::{trace_distance_matrices, RandomSource, RegisterLayout, StateVector};
use acornlab::schurweyl::{self, cache, SchurTransform};

#[test]
fn text_circuit_runs_exactly_and_from_copies() {
    let text = "\
# swap-test style probe: two oracle calls around a Hadamard on the system
LAYOUT anc:4 sys:2 flag:2
ORACLE FORWARD 0,1
GATE H 2
GATE X 1 2
ORACLE INVERSE 0,1
KEEP sys flag
";
    let c = pipeline::parse_circuit(text).unwrap();
    assert_eq!(c.query_count(), 2);
    let sigma = purify::random_density(2, 2, &mut RandomSource::new(3));
    let input = StateVector::basis(c.layout().clone(), 0).unwrap();
    let cfg = SimulationConfig::new(0.1);
    let rep = pipeline::paired_comparison(&c, &input, &sigma, &cfg, 20, &RandomSource::new(4)).unwrap();
    assert_eq!(rep.state_prep_passes, 20);
    assert_eq!(rep.additivity_violations, 0);
    assert!(rep.averaged_distance <= 0.1, "{rep:?}");
}

#[test]
fn exact_execution_matches_matrix_product() {
    // FORWARD, H on the system, INVERSE: output = U†(I⊗H)U|0⟩.
    let sigma = purify::random_density(2, 2, &mut RandomSource::new(5));
    let s = pipeline::sample_reflection_oracle(&sigma, 2, 4, &mut RandomSource::new(6)).unwrap();
    let c = pipeline::probe_circuit(4).unwrap();
    let input = StateVector::basis(c.layout().clone(), 0).unwrap();
    let out = c.exact_execute(&s.oracle, &input).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let had = linalg::ComplexMatrix::from_row_slice(2, 2, &[linalg::c64(h, 0.0), linalg::c64(h, 0.0), linalg::c64(h, 0.0), linalg::c64(-h, 0.0)]);
    let u = s.oracle.matrix();
    let total = u.adjoint() * linalg::kron(&linalg::identity(4), &had) * u;
    let v = total.column(0).into_owned();
    assert!(linalg::frobenius(&(out.matrix() - linalg::outer(&v, &v))) < 1e-10);
}

#[test]
fn pure_target_acceptance_within_budget() {
    let psi = RandomSource::new(7).haar_state(2);
    let sigma = linalg::outer(&psi, &psi);
    let layout = RegisterLayout::single("anc", 2).with("sys", 2, 1);
    let mut c = QueryCircuit::new(layout.clone());
    c.push_oracle(OracleDirection::Forward, vec![0, 1]).unwrap();
    c.set_keep(&["sys"]).unwrap();
    let cfg = SimulationConfig::new(0.1);
    let input = StateVector::basis(layout, 0).unwrap();
    for seed in 0..10 {
        let run = pipeline::simulate_with_copies(&c, &input, cfg.required_copies(1), &sigma, 1, &cfg, &mut RandomSource::new(seed)).unwrap();
        let acc = psi.dotc(&(run.output.matrix() * &psi)).re;
        assert!((acc - 1.0).abs() <= 0.1);
    }
}

#[test]
fn purification_then_acorn_gives_conditional_samples() {
    // A sampled purification ϱ of σ fed to the acorn gadget: the C,O
    // marginal is the θ-average of conditional samples of ϱ.
    let sigma = purify::random_density(2, 1, &mut RandomSource::new(8));
    let rho = purify::sample_purification(&sigma, 1, &mut RandomSource::new(9)).unwrap();
    let psi = StateVector::from_amplitudes("psi", rho.iter().copied().collect()).unwrap();
    let circuit = acorn::acorn_circuit(2, 2).unwrap();
    let out = circuit.apply(&acorn::acorn_input(&psi, 2).unwrap()).unwrap();
    let marginal = out.reduced_density(&["C", "O"]).unwrap();
    let target = acorn::average_conditional_density(&psi, 2).unwrap();
    assert!(trace_distance_matrices(marginal.matrix(), target.matrix()).unwrap() < 1e-10);
}

#[test]
fn schur_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let built = cache::load_or_build(dir.path(), 3, 2).unwrap();
    assert!(cache::cache_path(dir.path(), 3, 2).exists());
    let loaded = cache::load_or_build(dir.path(), 3, 2).unwrap();
    assert_eq!(built.matrix(), loaded.matrix());
    let fresh = SchurTransform::build(3, 2).unwrap();
    assert!(linalg::frobenius(&(fresh.matrix() - loaded.matrix())) < 1e-12);
    let r = schurweyl::verify(3, 2, 5, &mut RandomSource::new(1)).unwrap();
    assert!(r.pass);
}
