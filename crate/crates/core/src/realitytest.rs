//! Testing whether a state is close to real: the `real(ψ)` functional, the
//! swap test with a conjugate oracle, the transpose test with a tidy oracle
//! and the phase-state versus Haar separation.

use serde::Serialize;

use crate::circuits::Gate;
use crate::error::{Error, Result};
use crate::pipeline::oracle::{tidiness_residual, StatePrepOracle};
use crate::qcore::linalg::{self, c64, ComplexMatrix, ComplexVector, ONE, ZERO};
use crate::qcore::state::apply_local_slice;
use crate::qcore::RandomSource;
use crate::schurweyl::{permutation_action, Permutation};
use crate::stats;

/// `real(ψ)` at or above which a state counts as real.
pub const REAL_THRESHOLD: f64 = 1.0;
/// `real(ψ)` below which a state counts as far from real.
pub const FAR_THRESHOLD: f64 = 0.1;
/// Success probability asked of a reality tester.
pub const TESTER_SUCCESS: f64 = 2.0 / 3.0;
/// Success asked of a phase-versus-Haar distinguisher.
pub const DISTINGUISHER_SUCCESS: f64 = 0.65;
/// Success a copies-only distinguisher should not exceed.
pub const SAMPLE_ACCESS_CEILING: f64 = 0.60;
pub const EXACT_TOLERANCE: f64 = 1e-10;

/// `|Σᵢ ψᵢ²|²`.
pub fn real_measure(psi: &ComplexVector) -> f64 {
    let s: num_complex::Complex64 = psi.iter().map(|z| z * z).sum();
    s.norm_sqr().min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Closeness {
    /// `max_φ real |⟨φ|ψ⟩|²`, the top eigenvalue of `|a⟩⟨a| + |b⟩⟨b|`.
    pub max_real_overlap: f64,
    /// `½ + ½√real(ψ)`.
    pub predicted: f64,
}

pub fn closeness_check(psi: &ComplexVector) -> Closeness {
    let a: ComplexVector = psi.map(|z| c64(z.re, 0.0));
    let b: ComplexVector = psi.map(|z| c64(z.im, 0.0));
    let m = linalg::outer(&a, &a) + linalg::outer(&b, &b);
    let top = linalg::hermitian_eigenvalues(&m).last().copied().unwrap_or(0.0);
    Closeness { max_real_overlap: top, predicted: 0.5 + 0.5 * real_measure(psi).sqrt() }
}

/// A state-preparation oracle with a one-level ancilla whose first column
/// is ψ.
pub fn pure_state_oracle(psi: &ComplexVector) -> Result<StatePrepOracle> {
    let d = psi.len();
    StatePrepOracle::new(linalg::unitary_with_first_column(psi), 1, d, linalg::outer(psi, psi))
}

fn require_pure(oracle: &StatePrepOracle) -> Result<()> {
    let t = oracle.target();
    let purity = linalg::trace(&(t * t)).re;
    if (purity - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("oracle prepares a mixed state (purity {purity})")));
    }
    Ok(())
}

/// Exact `P(0)` of the swap test between `U|00⟩` and `Ū|00⟩` on registers
/// `(c, Â₁, B₁, Â₂, B₂)`.
pub fn swap_test_probability(oracle: &StatePrepOracle) -> Result<f64> {
    require_pure(oracle)?;
    let (a, d) = (oracle.ancilla_dim(), oracle.system_dim());
    let dims = [2, a, d, a, d];
    let mut amps = vec![ZERO; 2 * a * a * d * d];
    amps[0] = ONE;
    apply_local_slice(&mut amps, &dims, &[1, 2], oracle.matrix(), None);
    apply_local_slice(&mut amps, &dims, &[3, 4], &linalg::conjugate(oracle.matrix()), None);
    Gate::hadamard(0).apply_to_slice(&mut amps, &dims);
    Gate::cswap(0, 2, 4, d).apply_to_slice(&mut amps, &dims);
    Gate::hadamard(0).apply_to_slice(&mut amps, &dims);
    Ok(amps[..amps.len() / 2].iter().map(|z| z.norm_sqr()).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Decision {
    Real,
    Far,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealityVerdict {
    /// `2·freq₀ − 1` clamped to [0, 1].
    pub estimate: f64,
    /// Two-shot rule: REAL iff the first two outcomes are both 0.
    pub decision: Decision,
    pub shots: usize,
    pub p0: f64,
}

/// Samples `shots ≥ 2` swap-test outcomes.
pub fn swap_test_reality(oracle: &StatePrepOracle, shots: usize, rng: &mut RandomSource) -> Result<RealityVerdict> {
    if shots < 2 {
        return Err(Error::InvalidArgument("the two-shot rule needs at least 2 shots".into()));
    }
    let p0 = swap_test_probability(oracle)?;
    let outcomes: Vec<bool> = (0..shots).map(|_| rng.uniform() < p0).collect();
    let zeros = outcomes.iter().filter(|&&z| z).count();
    let decision = if outcomes[0] && outcomes[1] { Decision::Real } else { Decision::Far };
    let estimate = (2.0 * zeros as f64 / shots as f64 - 1.0).clamp(0.0, 1.0);
    Ok(RealityVerdict { estimate, decision, shots, p0 })
}

/// Probability that the two-shot rule answers FAR.
pub fn two_shot_far_probability(real: f64) -> f64 {
    let p0 = 0.5 + 0.5 * real;
    1.0 - p0 * p0
}

/// Shots for a `±eps` estimate of `real(ψ)` with failure probability about
/// 5%: `⌈2/eps²⌉`.
pub fn estimation_shots(eps: f64) -> usize {
    (2.0 / (eps * eps)).ceil() as usize
}

/// `|⟨00|UᵀU|00⟩|²` for a tidy oracle.
pub fn transpose_test_reality(oracle: &StatePrepOracle) -> Result<f64> {
    let res = tidiness_residual(oracle);
    if res > EXACT_TOLERANCE {
        return Err(Error::Precondition(format!("oracle is not tidy (ancilla weight {res:e})")));
    }
    let u = oracle.matrix();
    let mut amps: Vec<_> = u.column(0).iter().copied().collect();
    let dims = [oracle.ancilla_dim(), oracle.system_dim()];
    apply_local_slice(&mut amps, &dims, &[0, 1], &u.transpose(), None);
    Ok(amps[0].norm_sqr())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AccessMode {
    #[serde(rename = "CONJUGATE_ACCESS")]
    Conjugate,
    #[serde(rename = "SAMPLE_ACCESS")]
    Sample { copies: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub d: usize,
    pub mode: AccessMode,
    pub trials: usize,
    pub success_rate: f64,
    pub ci95: f64,
    /// Optimal success for SAMPLE_ACCESS, computed from the ensemble averages.
    pub helstrom_value: Option<f64>,
}

/// `E_f[|ψ_f⟩⟨ψ_f|^{⊗k}]` over uniformly random sign functions: entry
/// `(I, J)` is `d^{−k}` when every index occurs an even number of times in
/// `I ∪ J`.
pub fn phase_ensemble_average(d: usize, k: usize) -> Result<ComplexMatrix> {
    let dim = d.checked_pow(k as u32).ok_or(Error::Capacity { requested: usize::MAX, cap: crate::qcore::dim_cap() })?;
    crate::qcore::check_capacity(dim * dim)?;
    let digits = |mut x: usize| {
        let mut v = vec![0; k];
        for s in (0..k).rev() {
            v[s] = x % d;
            x /= d;
        }
        v
    };
    let w = 1.0 / dim as f64;
    let mut m = ComplexMatrix::zeros(dim, dim);
    let mut counts = vec![0u8; d];
    for i in 0..dim {
        let di = digits(i);
        for j in 0..dim {
            counts.iter_mut().for_each(|c| *c = 0);
            for &x in di.iter().chain(digits(j).iter()) {
                counts[x] ^= 1;
            }
            if counts.iter().all(|&c| c == 0) {
                m[(i, j)] = c64(w, 0.0);
            }
        }
    }
    Ok(m)
}

/// `E_Haar[|ψ⟩⟨ψ|^{⊗k}] = Π_sym / dim Sym^k`.
pub fn haar_ensemble_average(d: usize, k: usize) -> Result<ComplexMatrix> {
    let mut sum: Option<ComplexMatrix> = None;
    for pi in Permutation::all(k) {
        let p = permutation_action(d, &pi)?;
        sum = Some(match sum {
            Some(s) => s + p,
            None => p,
        });
    }
    let s = sum.ok_or_else(|| Error::InvalidArgument("k must be positive".into()))?;
    let tr = linalg::trace(&s).re;
    Ok(s.unscale(tr))
}

#[derive(Debug, Clone)]
pub struct Helstrom {
    /// Projector onto the positive part of `ρ_phase − ρ_Haar`; outcome
    /// "phase".
    pub projector: ComplexMatrix,
    /// `½ + ¼‖ρ_phase − ρ_Haar‖₁`.
    pub value: f64,
}

pub fn helstrom(d: usize, k: usize) -> Result<Helstrom> {
    let diff = phase_ensemble_average(d, k)? - haar_ensemble_average(d, k)?;
    let (vals, vecs) = linalg::hermitian_eigen(&diff);
    let dim = diff.nrows();
    let mut projector = ComplexMatrix::zeros(dim, dim);
    let mut norm = 0.0;
    for (i, &l) in vals.iter().enumerate() {
        norm += l.abs();
        if l > 1e-12 {
            let v = vecs.column(i).into_owned();
            projector += linalg::outer(&v, &v);
        }
    }
    Ok(Helstrom { projector, value: 0.5 + 0.25 * norm })
}

fn tensor_power_vec(psi: &ComplexVector, k: usize) -> ComplexVector {
    let mut out = ComplexVector::from_element(1, ONE);
    for _ in 0..k {
        out = ComplexVector::from_iterator(out.len() * psi.len(), out.iter().flat_map(|a| psi.iter().map(move |b| a * b)));
    }
    out
}

/// Fraction of trials in which the hidden bit (phase state or Haar state,
/// uniformly) is guessed correctly. Trial `t` uses `rng.child(t)`.
pub fn phase_vs_haar_experiment(d: usize, mode: AccessMode, trials: usize, rng: &RandomSource) -> Result<ExperimentResult> {
    if d > 64 {
        return Err(Error::InvalidArgument(format!("d = {d} exceeds the exact-simulation limit 64")));
    }
    let meas = match mode {
        AccessMode::Sample { copies } => Some(helstrom(d, copies)?),
        AccessMode::Conjugate => None,
    };
    let mut correct = 0usize;
    for t in 0..trials {
        let mut r = rng.child(t as u64);
        let haar = r.coin();
        let psi = if haar { r.haar_state(d) } else { r.random_phase_state(d) };
        let guess_haar = match (&mode, &meas) {
            (AccessMode::Conjugate, _) => {
                let v = swap_test_reality(&pure_state_oracle(&psi)?, 2, &mut r)?;
                v.decision == Decision::Far
            }
            (AccessMode::Sample { copies }, Some(h)) => {
                let v = tensor_power_vec(&psi, *copies);
                let p_phase = v.dotc(&(&h.projector * &v)).re;
                r.uniform() >= p_phase
            }
            _ => unreachable!("measurement built for sample access"),
        };
        if guess_haar == haar {
            correct += 1;
        }
    }
    let p = correct as f64 / trials.max(1) as f64;
    Ok(ExperimentResult {
        d,
        mode,
        trials,
        success_rate: p,
        ci95: 1.96 * stats::binomial_sd(p, trials.max(1)),
        helstrom_value: meas.map(|h| h.value),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HelstromGap {
    pub copies: usize,
    pub dims: Vec<usize>,
    pub values: Vec<f64>,
    /// Advantage over ½ does not increase along `dims`.
    pub monotone: bool,
}

pub fn helstrom_gap_sweep(dims: &[usize], copies: usize) -> Result<HelstromGap> {
    let values = dims.iter().map(|&d| helstrom(d, copies).map(|h| h.value)).collect::<Result<Vec<_>>>()?;
    let monotone = values.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    Ok(HelstromGap { copies, dims: dims.to_vec(), values, monotone })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HaarMean {
    pub d: usize,
    pub samples: usize,
    pub mean: f64,
    pub std_error: f64,
    /// Reference value `1/(d+1)` the check is made against.
    pub reference: f64,
    /// `2/(d+1)`, from `E|ψᵢ|⁴ = 2/(d(d+1))` and vanishing cross terms.
    pub exact: f64,
    pub within_3sigma_reference: bool,
    pub within_3sigma_exact: bool,
}

pub fn haar_mean_real(d: usize, samples: usize, rng: &RandomSource) -> HaarMean {
    let xs: Vec<f64> = (0..samples).map(|s| real_measure(&rng.child(s as u64).haar_state(d))).collect();
    let mean = stats::mean(&xs);
    let se = stats::std_error(&xs);
    let reference = 1.0 / (d as f64 + 1.0);
    let exact = 2.0 / (d as f64 + 1.0);
    HaarMean {
        d,
        samples,
        mean,
        std_error: se,
        reference,
        exact,
        within_3sigma_reference: (mean - reference).abs() <= 3.0 * se,
        within_3sigma_exact: (mean - exact).abs() <= 3.0 * se,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::oracle::{sample_reflection_oracle, tidy_gadget};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn plus_i() -> ComplexVector {
        ComplexVector::from_vec(vec![c64(FRAC_1_SQRT_2, 0.0), c64(0.0, FRAC_1_SQRT_2)])
    }

    #[test]
    fn real_measure_examples() {
        assert_eq!(real_measure(&ComplexVector::from_vec(vec![ONE, ZERO])), 1.0);
        assert!(real_measure(&plus_i()) < 1e-15);
        let mut rng = RandomSource::new(1);
        let v: ComplexVector = ComplexVector::from_iterator(5, (0..5).map(|_| c64(rng.normal(), 0.0))).normalize();
        for _ in 0..100 {
            let a = rng.uniform() * 7.0;
            let w = &v * c64(a.cos(), a.sin());
            assert!((real_measure(&w) - 1.0).abs() < 1e-12);
        }
        for _ in 0..100 {
            let psi = rng.haar_state(6);
            let a = rng.uniform() * 7.0;
            let x = real_measure(&psi);
            assert!((0.0..=1.0).contains(&x));
            assert!((real_measure(&(&psi * c64(a.cos(), a.sin()))) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn closeness_examples() {
        let c = closeness_check(&ComplexVector::from_vec(vec![c64(0.6, 0.0), c64(0.8, 0.0)]));
        assert!((c.max_real_overlap - 1.0).abs() < 1e-12 && (c.predicted - 1.0).abs() < 1e-12);
        let c = closeness_check(&plus_i());
        assert!((c.max_real_overlap - 0.5).abs() < 1e-12 && (c.predicted - 0.5).abs() < 1e-7);
        let mut rng = RandomSource::new(2);
        for k in 0..20 {
            let c = closeness_check(&rng.haar_state(2 + k % 7));
            assert!((c.max_real_overlap - c.predicted).abs() < 1e-10);
        }
    }

    #[test]
    fn swap_test_probability_matches_real() {
        let mut rng = RandomSource::new(3);
        for _ in 0..20 {
            let psi = rng.haar_state(5);
            let p = swap_test_probability(&pure_state_oracle(&psi).unwrap()).unwrap();
            assert!((p - 0.5 - 0.5 * real_measure(&psi)).abs() < 1e-10);
        }
    }

    #[test]
    fn swap_test_with_wide_ancilla() {
        // A reflection oracle of a pure state carries a two-level ancilla.
        let psi = RandomSource::new(4).haar_state(3);
        let s = sample_reflection_oracle(&linalg::outer(&psi, &psi), 1, 2, &mut RandomSource::new(5)).unwrap();
        let p = swap_test_probability(&s.oracle).unwrap();
        assert!((p - 0.5 - 0.5 * real_measure(&psi)).abs() < 1e-10);
    }

    #[test]
    fn swap_test_rejects_mixed() {
        let sigma = crate::purify::random_density(2, 2, &mut RandomSource::new(6));
        let s = sample_reflection_oracle(&sigma, 2, 4, &mut RandomSource::new(7)).unwrap();
        assert!(swap_test_probability(&s.oracle).is_err());
    }

    #[test]
    fn two_shot_rule() {
        let real = pure_state_oracle(&ComplexVector::from_vec(vec![c64(0.6, 0.0), c64(0.8, 0.0)])).unwrap();
        let mut rng = RandomSource::new(8);
        for _ in 0..50 {
            assert_eq!(swap_test_reality(&real, 2, &mut rng).unwrap().decision, Decision::Real);
        }
        assert!((two_shot_far_probability(0.0) - 0.75).abs() < 1e-15);
        assert!(1.0 - two_shot_far_probability(FAR_THRESHOLD) < 1.0 / 3.0);
        assert!((1.0 - two_shot_far_probability(FAR_THRESHOLD) - 0.55f64.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn swap_test_frequency_within_binomial_bounds() {
        let psi = RandomSource::new(9).haar_state(4);
        let o = pure_state_oracle(&psi).unwrap();
        let shots = 20_000;
        let v = swap_test_reality(&o, shots, &mut RandomSource::new(10)).unwrap();
        let freq = (v.estimate + 1.0) / 2.0;
        assert!((freq - v.p0).abs() <= 3.0 * stats::binomial_sd(v.p0, shots) + 1e-12);
    }

    #[test]
    fn transpose_test() {
        let real = ComplexVector::from_vec(vec![c64(0.6, 0.0), c64(0.8, 0.0)]);
        assert!((transpose_test_reality(&pure_state_oracle(&real).unwrap()).unwrap() - 1.0).abs() < 1e-12);
        assert!(transpose_test_reality(&pure_state_oracle(&plus_i()).unwrap()).unwrap() < 1e-12);
        let mut rng = RandomSource::new(11);
        for _ in 0..20 {
            let psi = rng.haar_state(4);
            let s = sample_reflection_oracle(&linalg::outer(&psi, &psi), 1, 3, &mut rng).unwrap();
            let tidy = tidy_gadget(&s.oracle).unwrap();
            assert!((transpose_test_reality(&tidy).unwrap() - real_measure(&psi)).abs() < 1e-10);
            // ⟨00|Uᵀ = (U|00⟩)ᵀ, so the amplitude is Σₖ U_k0².
            let direct: num_complex::Complex64 = tidy.matrix().column(0).iter().map(|z| z * z).sum();
            assert!((direct.norm_sqr() - real_measure(&psi)).abs() < 1e-10);
            assert!(transpose_test_reality(&s.oracle).is_err());
        }
    }

    #[test]
    fn ensemble_averages_are_states() {
        for (d, k) in [(3, 1), (3, 2), (4, 2), (3, 3)] {
            for m in [phase_ensemble_average(d, k).unwrap(), haar_ensemble_average(d, k).unwrap()] {
                assert!((linalg::trace(&m).re - 1.0).abs() < 1e-12);
                assert!(linalg::hermitian_eigenvalues(&m)[0] > -1e-12);
            }
        }
    }

    #[test]
    fn phase_average_matches_enumeration() {
        let (d, k) = (3, 2);
        let mut avg = ComplexMatrix::zeros(9, 9);
        for f in 0..(1 << d) {
            let psi = ComplexVector::from_iterator(d, (0..d).map(|i| c64(if f >> i & 1 == 1 { -1.0 } else { 1.0 }, 0.0) / (d as f64).sqrt()));
            let v = tensor_power_vec(&psi, k);
            avg += linalg::outer(&v, &v);
        }
        avg /= c64((1 << d) as f64, 0.0);
        assert!(linalg::frobenius(&(avg - phase_ensemble_average(d, k).unwrap())) < 1e-12);
    }

    #[test]
    fn haar_average_matches_sampling() {
        let (d, k) = (2, 2);
        let exact = haar_ensemble_average(d, k).unwrap();
        let mut rng = RandomSource::new(12);
        let n = 20_000;
        let mut avg = ComplexMatrix::zeros(4, 4);
        for _ in 0..n {
            let v = tensor_power_vec(&rng.haar_state(d), k);
            avg += linalg::outer(&v, &v);
        }
        avg /= c64(n as f64, 0.0);
        assert!(linalg::frobenius(&(avg - exact)) < 0.02);
    }

    #[test]
    fn single_copy_helstrom_is_chance() {
        assert!((helstrom(8, 1).unwrap().value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn conjugate_access_beats_threshold_small() {
        let r = phase_vs_haar_experiment(8, AccessMode::Conjugate, 400, &RandomSource::new(13)).unwrap();
        assert!(r.success_rate >= DISTINGUISHER_SUCCESS, "{r:?}");
    }

    #[test]
    fn haar_mean_is_two_over_d_plus_one() {
        let h = haar_mean_real(4, 4000, &RandomSource::new(14));
        assert!(h.within_3sigma_exact, "{h:?}");
        assert!(!h.within_3sigma_reference, "{h:?}");
    }
}
