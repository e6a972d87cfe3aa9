use serde::Serialize;

use crate::error::{Error, Result};
use crate::purify;
use crate::qcore::linalg::{self, ComplexMatrix};
use crate::qcore::{trace_distance_matrices, DensityMatrix, RandomSource, StateVector};
use crate::reflect::{approx_reflection_on, reflection_unitary};

use super::oracle::{sample_reflection_oracle, ReflectionSample};
use super::query::{conjugate_by_local, QueryCircuit, Step};

pub const DEFAULT_C0: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationConfig {
    /// Copies constant in `n = ⌈c₀·q²/ε⌉`.
    pub c0: f64,
    pub eps: f64,
}

impl SimulationConfig {
    pub fn new(eps: f64) -> Self {
        Self { c0: DEFAULT_C0, eps }
    }

    pub fn required_copies(&self, q: usize) -> usize {
        (self.c0 * (q * q) as f64 / self.eps).ceil() as usize
    }
}

#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub output: DensityMatrix,
    pub sample: ReflectionSample,
    /// Trace distance between the approximate and exact reflection applied
    /// to the same simulated state, per oracle call.
    pub per_call_errors: Vec<f64>,
    pub copies_per_call: usize,
    pub copies_used: usize,
}

/// Oracle block `(d̂, d)` read off the circuit's first call site.
fn oracle_dims(c: &QueryCircuit) -> Result<(usize, usize)> {
    let dims = c.layout().dims();
    c.steps()
        .iter()
        .find_map(|s| match s {
            Step::Oracle { targets, .. } => {
                let (b, anc) = targets.split_last()?;
                Some((anc.iter().map(|&t| dims[t]).product(), dims[*b]))
            }
            _ => None,
        })
        .ok_or_else(|| Error::InvalidArgument("circuit has no oracle calls".into()))
}

/// Replaces every oracle call by an approximate reflection about a fresh
/// conditional sample, `⌊n/q⌋` copies per call, and returns the kept
/// marginal. `r` bounds the rank of σ.
pub fn simulate_with_copies(
    c: &QueryCircuit,
    input: &StateVector,
    n: usize,
    sigma: &ComplexMatrix,
    r: usize,
    cfg: &SimulationConfig,
    rng: &mut RandomSource,
) -> Result<SimulationRun> {
    let q = c.query_count();
    let needed = cfg.required_copies(q);
    if n < needed {
        return Err(Error::Budget { needed, available: n });
    }
    let (dhat, d) = oracle_dims(c)?;
    c.check_oracle(dhat, d)?;
    let sample = sample_reflection_oracle(sigma, r, dhat, rng)?;
    let per_call = if q == 0 { 0 } else { n / q };
    let exact_v = reflection_unitary(&sample.varsigma);
    let mut errors = Vec::with_capacity(q);
    let output = c.execute_mixed(&input.to_density()?, |_, _, targets, rho, dims| {
        // V is Hermitian, so forward and inverse calls coincide.
        let approx = approx_reflection_on(rho, dims, targets, &sample.varsigma, per_call);
        let exact = conjugate_by_local(rho, &exact_v, dims, targets);
        errors.push(trace_distance_matrices(&approx, &exact)?);
        Ok(approx)
    })?;
    Ok(SimulationRun { output, sample, per_call_errors: errors, copies_per_call: per_call, copies_used: per_call * q })
}

#[derive(Debug, Clone, Serialize)]
pub struct PairedReport {
    pub seeds: usize,
    pub q: usize,
    pub d: usize,
    pub ancilla_dim: usize,
    pub eps: f64,
    pub c0: f64,
    pub copies: usize,
    pub copies_per_call: usize,
    /// Trace distance between the seed-averaged simulated and exact outputs.
    pub averaged_distance: f64,
    pub max_seed_distance: f64,
    pub max_error_sum: f64,
    /// Seeds whose end-to-end distance exceeds their summed per-call errors.
    pub additivity_violations: usize,
    pub max_state_prep_residual: f64,
    pub state_prep_passes: usize,
    pub pass: bool,
}

/// Runs `seeds` paired trials: trial `s` draws one (purification, θ) from
/// `rng.child(s)`, simulates with copies and executes exactly with the same
/// V, then compares the two seed-averaged outputs.
pub fn paired_comparison(
    c: &QueryCircuit,
    input: &StateVector,
    sigma: &ComplexMatrix,
    cfg: &SimulationConfig,
    seeds: usize,
    rng: &RandomSource,
) -> Result<PairedReport> {
    let q = c.query_count();
    let (dhat, d) = oracle_dims(c)?;
    let r = purify::numerical_rank(sigma).max(1);
    let n = cfg.required_copies(q);
    let mut sim_sum: Option<ComplexMatrix> = None;
    let mut exact_sum: Option<ComplexMatrix> = None;
    let (mut max_seed, mut max_sum, mut violations) = (0.0f64, 0.0f64, 0);
    let (mut max_res, mut passes) = (0.0f64, 0);
    let mut per_call = 0;
    for s in 0..seeds {
        let mut child = rng.child(s as u64);
        let run = simulate_with_copies(c, input, n, sigma, r, cfg, &mut child)?;
        per_call = run.copies_per_call;
        let exact = c.exact_execute(&run.sample.oracle, input)?;
        let res = run.sample.oracle.state_prep_residual()?;
        max_res = max_res.max(res);
        if res <= super::oracle::STATE_PREP_TOLERANCE {
            passes += 1;
        }
        let dist = trace_distance_matrices(run.output.matrix(), exact.matrix())?;
        let sum: f64 = run.per_call_errors.iter().sum();
        if dist > sum + 1e-12 {
            violations += 1;
        }
        max_seed = max_seed.max(dist);
        max_sum = max_sum.max(sum);
        accumulate(&mut sim_sum, run.output.matrix());
        accumulate(&mut exact_sum, exact.matrix());
    }
    let k = seeds.max(1) as f64;
    let averaged = match (sim_sum, exact_sum) {
        (Some(a), Some(b)) => trace_distance_matrices(&a.unscale(k), &b.unscale(k))?,
        _ => 0.0,
    };
    Ok(PairedReport {
        seeds,
        q,
        d,
        ancilla_dim: dhat,
        eps: cfg.eps,
        c0: cfg.c0,
        copies: n,
        copies_per_call: per_call,
        averaged_distance: averaged,
        max_seed_distance: max_seed,
        max_error_sum: max_sum,
        additivity_violations: violations,
        max_state_prep_residual: max_res,
        state_prep_passes: passes,
        pass: averaged <= cfg.eps && passes == seeds && violations == 0,
    })
}

fn accumulate(acc: &mut Option<ComplexMatrix>, m: &ComplexMatrix) {
    match acc {
        Some(a) => *a += m,
        None => *acc = Some(m.clone()),
    }
}

/// Probability that measuring `rho` projects onto `psi`.
pub fn acceptance(rho: &ComplexMatrix, psi: &linalg::ComplexVector) -> f64 {
    psi.dotc(&(rho * psi)).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::query::{probe_circuit, OracleDirection};
    use crate::purify::random_density;
    use crate::qcore::RegisterLayout;

    #[test]
    fn budget_is_enforced() {
        let c = probe_circuit(4).unwrap();
        let sigma = random_density(2, 2, &mut RandomSource::new(1));
        let cfg = SimulationConfig::new(0.1);
        assert_eq!(cfg.required_copies(2), 320);
        let input = StateVector::basis(c.layout().clone(), 0).unwrap();
        let err = simulate_with_copies(&c, &input, 319, &sigma, 2, &cfg, &mut RandomSource::new(2));
        assert!(matches!(err, Err(Error::Budget { needed: 320, available: 319 })));
    }

    #[test]
    fn rank_violation_propagates() {
        let c = probe_circuit(4).unwrap();
        let sigma = random_density(2, 2, &mut RandomSource::new(3));
        let input = StateVector::basis(c.layout().clone(), 0).unwrap();
        let r = simulate_with_copies(&c, &input, 1000, &sigma, 1, &SimulationConfig::new(0.1), &mut RandomSource::new(4));
        assert!(r.is_err());
    }

    #[test]
    fn pure_target_single_call_accepts() {
        let psi = RandomSource::new(5).haar_state(2);
        let sigma = linalg::outer(&psi, &psi);
        let l = RegisterLayout::single("anc", 2).with("sys", 2, 1);
        let mut c = QueryCircuit::new(l.clone());
        c.push_oracle(OracleDirection::Forward, vec![0, 1]).unwrap();
        c.set_keep(&["sys"]).unwrap();
        let cfg = SimulationConfig::new(0.1);
        let input = StateVector::basis(l, 0).unwrap();
        let run = simulate_with_copies(&c, &input, cfg.required_copies(1), &sigma, 1, &cfg, &mut RandomSource::new(6)).unwrap();
        assert!((acceptance(run.output.matrix(), &psi) - 1.0).abs() <= 0.1);
        assert_eq!(run.copies_used, 80);
    }

    #[test]
    fn paired_comparison_small() {
        let c = probe_circuit(4).unwrap();
        let sigma = random_density(2, 2, &mut RandomSource::new(7));
        let input = StateVector::basis(c.layout().clone(), 0).unwrap();
        let rep = paired_comparison(&c, &input, &sigma, &SimulationConfig::new(0.1), 10, &RandomSource::new(8)).unwrap();
        assert_eq!(rep.state_prep_passes, 10);
        assert_eq!(rep.additivity_violations, 0);
        assert!(rep.averaged_distance <= 0.1, "{rep:?}");
    }
}
