//! The EPR commitment `|ψ_b⟩ = (I ⊗ U^b)|EPR⟩` on registers (D, C): perfect
//! hiding, the exact break with conjugate or transpose access, and the
//! gadgets behind binding with forward and inverse access only.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::linalg::{self, c64, ComplexMatrix, ComplexVector, ONE};
use crate::qcore::state::apply_local_slice;
use crate::qcore::{trace_distance_matrices, DensityMatrix, RandomSource, RegisterLayout, StateVector};
use crate::reflect::{approx_reflection_on, reflection_unitary};
use crate::stats;

pub const EXACT_TOLERANCE: f64 = 1e-10;
pub const PROJECTOR_TOLERANCE: f64 = 1e-8;
/// Band in which the sub-unit eigenvalue of the iterated projector should
/// land.
pub const LAMBDA0_RANGE: (f64, f64) = (0.3, 0.7);

fn dc_layout(d: usize) -> RegisterLayout {
    RegisterLayout::single("D", d).with("C", d, 1)
}

/// `Σᵢ|ii⟩/√d`, index `i·d + j` for (D, C).
pub fn epr(d: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(d * d);
    let a = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        v[i * d + i] = c64(a, 0.0);
    }
    v
}

#[derive(Debug, Clone)]
pub struct Commitment {
    pub bit: u8,
    /// Joint state on (D, C).
    pub joint: ComplexVector,
    pub oracle: ComplexMatrix,
}

impl Commitment {
    pub fn d(&self) -> usize {
        self.oracle.nrows()
    }
}

/// `|ψ_b⟩` for oracle `U`.
pub fn commitment_state(bit: u8, u: &ComplexMatrix) -> ComplexVector {
    let d = u.nrows();
    let mut v = epr(d);
    if bit == 1 {
        apply_local_slice(v.as_mut_slice(), &[d, d], &[1], u, None);
    }
    v
}

pub fn commit_state(bit: u8, u: &ComplexMatrix) -> Result<Commitment> {
    if bit > 1 {
        return Err(Error::InvalidArgument(format!("bit must be 0 or 1, got {bit}")));
    }
    if u.nrows() != u.ncols() {
        return Err(Error::DimensionMismatch { expected: u.nrows(), found: u.ncols() });
    }
    let res = linalg::unitarity_residual(u);
    if res > EXACT_TOLERANCE {
        return Err(Error::InvalidArgument(format!("oracle is not unitary (residual {res:e})")));
    }
    Ok(Commitment { bit, joint: commitment_state(bit, u), oracle: u.clone() })
}

/// Probability that the opening projector for `claimed_bit` accepts the
/// joint state `state`.
pub fn open_probability(state: &ComplexVector, claimed_bit: u8, u: &ComplexMatrix) -> Result<f64> {
    let target = commitment_state(claimed_bit, u);
    if state.len() != target.len() {
        return Err(Error::DimensionMismatch { expected: target.len(), found: state.len() });
    }
    Ok(target.dotc(state).norm_sqr())
}

/// Samples the receiver's projective check.
pub fn verify_open(state: &ComplexVector, claimed_bit: u8, u: &ComplexMatrix, rng: &mut RandomSource) -> Result<bool> {
    Ok(rng.uniform() < open_probability(state, claimed_bit, u)?)
}

/// Trace distance between the C-marginals of the two commitments.
pub fn hiding_check(u: &ComplexMatrix) -> Result<f64> {
    let d = u.nrows();
    let marginal = |bit| -> Result<DensityMatrix> {
        StateVector::new(dc_layout(d), commitment_state(bit, u))?.reduced_density(&["C"])
    };
    trace_distance_matrices(marginal(0)?.matrix(), marginal(1)?.matrix())
}

/// Distance of the C-marginal of `|ψ_b⟩` from `I/d`.
pub fn marginal_mixedness(u: &ComplexMatrix, bit: u8) -> Result<f64> {
    let d = u.nrows();
    let m = StateVector::new(dc_layout(d), commitment_state(bit, u))?.reduced_density(&["C"])?;
    trace_distance_matrices(m.matrix(), &linalg::identity(d).unscale(d as f64))
}

/// `|tr U / d|²`, the chance that an untouched 0-commitment opens as 1.
pub fn null_adversary_advantage(u: &ComplexMatrix) -> f64 {
    (linalg::trace(u) / u.nrows() as f64).norm_sqr()
}

fn act_on_d(c: &Commitment, m: &ComplexMatrix, bit: u8) -> Commitment {
    let d = c.d();
    let mut joint = c.joint.clone();
    apply_local_slice(joint.as_mut_slice(), &[d, d], &[0], m, None);
    Commitment { bit, joint, oracle: c.oracle.clone() }
}

/// `(U* ⊗ I)|ψ₁⟩ = |ψ₀⟩`: one conjugate query on D turns a 1-commitment
/// into a 0-commitment.
pub fn conjugate_attack(c: &Commitment) -> Result<Commitment> {
    if c.bit != 1 {
        return Err(Error::Precondition("the conjugate attack starts from a 1-commitment".into()));
    }
    Ok(act_on_d(c, &linalg::conjugate(&c.oracle), 0))
}

/// `(Uᵀ ⊗ I)|ψ₀⟩ = |ψ₁⟩`: one transpose query on D turns a 0-commitment
/// into a 1-commitment.
pub fn transpose_attack(c: &Commitment) -> Result<Commitment> {
    if c.bit != 0 {
        return Err(Error::Precondition("the transpose attack starts from a 0-commitment".into()));
    }
    Ok(act_on_d(c, &c.oracle.transpose(), 1))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HidingReport {
    pub dims: Vec<usize>,
    pub samples: usize,
    pub max_residual: f64,
    pub max_marginal_mixedness: f64,
    /// Largest `|open(1) − |tr U/d|²|` for an untouched 0-commitment.
    pub max_null_adversary_error: f64,
    pub mean_null_adversary_advantage: f64,
    pub pass: bool,
}

pub fn hiding_experiment(dims: &[usize], samples: usize, rng: &RandomSource) -> Result<HidingReport> {
    let (mut res, mut mixed, mut null_err, mut null_sum, mut count) = (0.0f64, 0.0f64, 0.0f64, 0.0, 0);
    for (k, &d) in dims.iter().enumerate() {
        let mut r = rng.child(k as u64);
        for _ in 0..samples {
            let u = r.haar_unitary(d);
            res = res.max(hiding_check(&u)?);
            mixed = mixed.max(marginal_mixedness(&u, 0)?).max(marginal_mixedness(&u, 1)?);
            let c = commit_state(0, &u)?;
            let adv = null_adversary_advantage(&u);
            null_err = null_err.max((open_probability(&c.joint, 1, &u)? - adv).abs());
            null_sum += adv;
            count += 1;
        }
    }
    Ok(HidingReport {
        dims: dims.to_vec(),
        samples,
        max_residual: res,
        max_marginal_mixedness: mixed,
        max_null_adversary_error: null_err,
        mean_null_adversary_advantage: null_sum / count.max(1) as f64,
        pass: res <= EXACT_TOLERANCE && mixed <= EXACT_TOLERANCE && null_err <= EXACT_TOLERANCE,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackReport {
    pub d: usize,
    pub samples: usize,
    pub min_conjugate_fidelity: f64,
    pub min_transpose_fidelity: f64,
    /// `min |tr(U²)/d|²`: applying U* to D of a 0-commitment instead.
    pub max_misapplied_fidelity: f64,
    pub pass: bool,
}

pub fn attack_experiment(d: usize, samples: usize, rng: &RandomSource) -> Result<AttackReport> {
    let (mut conj, mut trans, mut wrong) = (1.0f64, 1.0f64, 0.0f64);
    for s in 0..samples {
        let u = rng.child(s as u64).haar_unitary(d);
        let one = commit_state(1, &u)?;
        conj = conj.min(open_probability(&conjugate_attack(&one)?.joint, 0, &u)?);
        let zero = commit_state(0, &u)?;
        trans = trans.min(open_probability(&transpose_attack(&zero)?.joint, 1, &u)?);
        let mis = act_on_d(&zero, &linalg::conjugate(&u), 1);
        wrong = wrong.max(open_probability(&mis.joint, 1, &u)?);
    }
    Ok(AttackReport {
        d,
        samples,
        min_conjugate_fidelity: conj,
        min_transpose_fidelity: trans,
        max_misapplied_fidelity: wrong,
        pass: conj >= 1.0 - EXACT_TOLERANCE && trans >= 1.0 - EXACT_TOLERANCE,
    })
}

/// `V = I − (|φ₀⟩−|φ₁⟩)(⟨φ₀|−⟨φ₁|)`, which swaps φ₀ and φ₁ and fixes
/// everything orthogonal to both.
#[derive(Debug, Clone)]
pub struct SubspaceSwapOracle {
    pub phi0: ComplexVector,
    pub phi1: ComplexVector,
    pub matrix: ComplexMatrix,
}

impl SubspaceSwapOracle {
    pub fn new(phi0: ComplexVector, phi1: ComplexVector) -> Result<Self> {
        let gram = (phi0.norm() - 1.0).abs() + (phi1.norm() - 1.0).abs() + phi0.dotc(&phi1).norm();
        if gram > EXACT_TOLERANCE {
            return Err(Error::InvalidArgument("φ₀, φ₁ must be orthonormal".into()));
        }
        let diff = &phi0 - &phi1;
        let matrix = linalg::identity(phi0.len()) - linalg::outer(&diff, &diff);
        Ok(Self { phi0, phi1, matrix })
    }

    /// Random 2-dimensional subspace with a random orthonormal basis.
    pub fn random(d: usize, rng: &mut RandomSource) -> Result<Self> {
        let u = rng.haar_unitary(d);
        Self::new(u.column(0).into_owned(), u.column(1).into_owned())
    }

    pub fn subspace_projector(&self) -> ComplexMatrix {
        linalg::outer(&self.phi0, &self.phi0) + linalg::outer(&self.phi1, &self.phi1)
    }
}

/// Projector onto the span of the first `k` columns of a Haar unitary.
pub fn random_projector(d: usize, k: usize, rng: &mut RandomSource) -> ComplexMatrix {
    let u = rng.haar_unitary(d);
    let cols = u.columns(0, k);
    &cols * cols.adjoint()
}

/// Survival probability of `t` rounds, each rejecting `T′` then rejecting
/// `S`, simulated projector by projector. With `X` the round product,
/// `X†X = M^{2t−1}`.
pub fn iterated_projector(tprime: &ComplexMatrix, s: &ComplexMatrix, t: usize, input: &ComplexVector) -> Result<f64> {
    let d = input.len();
    if tprime.nrows() != d || s.nrows() != d {
        return Err(Error::DimensionMismatch { expected: d, found: tprime.nrows() });
    }
    let (not_t, not_s) = (linalg::identity(d) - tprime, linalg::identity(d) - s);
    let mut v = input.clone();
    for _ in 0..t {
        v = &not_t * &v;
        v = &not_s * &v;
    }
    Ok(v.norm_squared())
}

/// `M = (I−T′)(I−S)(I−T′)`.
pub fn projector_sandwich(tprime: &ComplexMatrix, s: &ComplexMatrix) -> ComplexMatrix {
    let d = s.nrows();
    let not_t = linalg::identity(d) - tprime;
    &not_t * (linalg::identity(d) - s) * &not_t
}

/// `⟨τ|M^{2t−1}|τ⟩` from the eigendecomposition of M.
pub fn predicted_acceptance(m: &ComplexMatrix, t: usize, input: &ComplexVector) -> f64 {
    let (vals, vecs) = linalg::hermitian_eigen(m);
    let p = (2 * t).saturating_sub(1) as i32;
    vals.iter()
        .enumerate()
        .map(|(i, &l)| vecs.column(i).dotc(input).norm_sqr() * l.max(0.0).powi(p))
        .sum()
}

/// Largest eigenvalue of M below `1 − 1e-9`, with its eigenvector.
pub fn lambda0(m: &ComplexMatrix) -> (f64, ComplexVector) {
    let (vals, vecs) = linalg::hermitian_eigen(m);
    let k = (0..vals.len()).rev().find(|&i| vals[i] < 1.0 - 1e-9).unwrap_or(0);
    (vals[k], vecs.column(k).into_owned())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectorReport {
    pub d: usize,
    pub t: usize,
    pub draws: usize,
    pub lambda0: Vec<f64>,
    pub in_range: usize,
    /// Eigenvalues strictly inside (0, 1) per draw.
    pub interior_eigenvalues: Vec<usize>,
    /// Survival of a vector in T; should be 1.
    pub min_t_acceptance: f64,
    pub max_prediction_error: f64,
    pub pass: bool,
}

/// `draws` instances of S (dimension 2) and T′ (dimension d/2 − 1).
pub fn projector_experiment(d: usize, t: usize, draws: usize, rng: &RandomSource) -> Result<ProjectorReport> {
    if d < 4 {
        return Err(Error::InvalidArgument("need d ≥ 4".into()));
    }
    let (mut lams, mut interior) = (Vec::new(), Vec::new());
    let (mut min_t, mut max_err) = (1.0f64, 0.0f64);
    for k in 0..draws {
        let mut r = rng.child(k as u64);
        let s = SubspaceSwapOracle::random(d, &mut r)?.subspace_projector();
        let tp = random_projector(d, d / 2 - 1, &mut r);
        let m = projector_sandwich(&tp, &s);
        let vals = linalg::hermitian_eigenvalues(&m);
        interior.push(vals.iter().filter(|&&l| l > 1e-9 && l < 1.0 - 1e-9).count());
        let (l0, tau) = lambda0(&m);
        lams.push(l0);
        let direct = iterated_projector(&tp, &s, t, &tau)?;
        max_err = max_err.max((direct - l0.powi((2 * t - 1) as i32)).abs());
        let probe = r.haar_state(d);
        max_err = max_err.max((iterated_projector(&tp, &s, t, &probe)? - predicted_acceptance(&m, t, &probe)).abs());
        // A vector of T: the eigenvalue-1 eigenvector.
        let (all, vecs) = linalg::hermitian_eigen(&m);
        let top = all.len() - 1;
        if all[top] > 1.0 - 1e-9 {
            min_t = min_t.min(iterated_projector(&tp, &s, t, &vecs.column(top).into_owned())?);
        }
    }
    let in_range = lams.iter().filter(|&&l| (LAMBDA0_RANGE.0..=LAMBDA0_RANGE.1).contains(&l)).count();
    Ok(ProjectorReport {
        d,
        t,
        draws,
        in_range,
        interior_eigenvalues: interior,
        lambda0: lams,
        min_t_acceptance: min_t,
        max_prediction_error: max_err,
        pass: max_err <= PROJECTOR_TOLERANCE && (1.0 - min_t) <= PROJECTOR_TOLERANCE && in_range * 10 >= draws * 9,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HarnessMode {
    /// The second oracle swaps |0⟩ with φ₁*.
    Conjugate,
    /// The second oracle swaps |0⟩ with an independent Haar state.
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HarnessAdversary {
    /// Holds the conjugate oracle `SWAP_{φ₁}* = SWAP_{φ₁*}` exactly.
    ConjugateAccess,
    /// Only forward queries to `SWAP_{φ₁}`; outputs its best guess φ₁.
    ForwardOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarnessParams {
    pub d: usize,
    /// Copies of each `|φ−⟩`.
    pub ell: usize,
    pub t: usize,
    pub q: usize,
    /// Apply both oracles exactly instead of from copies.
    pub exact_oracles: bool,
}

impl HarnessParams {
    /// Queries to the first oracle.
    pub fn queries(&self) -> usize {
        self.q * self.t
    }

    /// Copies of `|φ₁−⟩` per simulated query.
    pub fn copies_per_query(&self) -> Result<usize> {
        let qt = self.queries();
        if qt == 0 || qt > self.ell {
            return Err(Error::Budget { needed: qt.max(1), available: self.ell });
        }
        Ok(self.ell / qt)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarnessResult {
    pub params: HarnessParams,
    pub mode: HarnessMode,
    pub adversary: HarnessAdversary,
    pub trials: usize,
    /// Mean over trials of the exact per-oracle pass probability.
    pub mean_pass_probability: f64,
    pub per_oracle_sd: f64,
    /// Fraction of sampled final checks that passed.
    pub empirical_pass_rate: f64,
    pub ci95: f64,
}

/// Haar state orthogonal to `|0⟩`.
fn haar_orthogonal_to_zero(d: usize, rng: &mut RandomSource) -> ComplexVector {
    let v = rng.haar_state(d - 1);
    let mut out = ComplexVector::zeros(d);
    out.rows_mut(1, d - 1).copy_from(&v);
    out
}

fn minus_state(phi: &ComplexVector) -> ComplexVector {
    let mut v = -phi.clone();
    v[0] += ONE;
    v.unscale(2f64.sqrt())
}

/// Pass probability of one harness trial. Work happens in the span of
/// `|0⟩, φ₁, φ₁*, φ′`, which every step preserves.
fn harness_trial(p: &HarnessParams, mode: HarnessMode, adv: HarnessAdversary, rng: &mut RandomSource) -> Result<f64> {
    let d = p.d;
    let phi1 = haar_orthogonal_to_zero(d, rng);
    let independent = haar_orthogonal_to_zero(d, rng);
    let phi1_conj = phi1.map(|z| z.conj());
    let second = match mode {
        HarnessMode::Conjugate => phi1_conj.clone(),
        HarnessMode::Independent => independent,
    };
    let mut e0 = ComplexVector::zeros(d);
    e0[0] = ONE;
    let basis = linalg::orthonormal_span([e0.clone(), phi1.clone(), phi1_conj.clone(), second.clone()], 1e-12);
    let q = ComplexMatrix::from_columns(&basis);
    let reduce = |v: &ComplexVector| q.adjoint() * v;
    let k = basis.len();
    let dims = [k];
    let first_minus = reduce(&minus_state(&phi1));
    let second_minus = reduce(&minus_state(&second));
    let per_query = p.copies_per_query()?;
    let first_query = |rho: &ComplexMatrix| -> ComplexMatrix {
        if p.exact_oracles {
            let v = reflection_unitary(&first_minus);
            &v * rho * v.adjoint()
        } else {
            approx_reflection_on(rho, &dims, &[0], &first_minus, per_query)
        }
    };
    let z = reduce(&e0);
    let mut rho = linalg::outer(&z, &z);
    // Main move: |0⟩ → φ₁* (exact conjugate query) or |0⟩ → φ₁.
    let mut used = 0;
    match adv {
        HarnessAdversary::ConjugateAccess => {
            let v = reflection_unitary(&reduce(&minus_state(&phi1_conj)));
            rho = &v * &rho * v.adjoint();
        }
        HarnessAdversary::ForwardOnly => {
            rho = first_query(&rho);
            used += 1;
        }
    }
    // Remaining first-oracle queries in canceling pairs.
    while used + 2 <= p.queries() {
        rho = first_query(&first_query(&rho));
        used += 2;
    }
    rho = if p.exact_oracles {
        let v = reflection_unitary(&second_minus);
        &v * &rho * v.adjoint()
    } else {
        approx_reflection_on(&rho, &dims, &[0], &second_minus, p.ell)
    };
    Ok(z.dotc(&(&rho * &z)).re.clamp(0.0, 1.0))
}

/// Runs the swap-oracle distinguisher: build φ₁ ⟂ |0⟩, let the adversary
/// move |0⟩ towards φ₁*, send the result through the second oracle and
/// check for |0⟩. Trial `s` uses `rng.child(s)`, so both modes see the same
/// φ₁ per trial.
pub fn swap_distinguish_harness(
    p: &HarnessParams,
    mode: HarnessMode,
    adv: HarnessAdversary,
    trials: usize,
    rng: &RandomSource,
) -> Result<HarnessResult> {
    if p.d < 2 || p.d > 64 {
        return Err(Error::InvalidArgument(format!("d = {} outside 2..=64", p.d)));
    }
    p.copies_per_query()?;
    let mut probs = Vec::with_capacity(trials);
    let mut passes = 0usize;
    for s in 0..trials {
        let mut r = rng.child(s as u64);
        let prob = harness_trial(p, mode, adv, &mut r)?;
        if r.uniform() < prob {
            passes += 1;
        }
        probs.push(prob);
    }
    let rate = passes as f64 / trials.max(1) as f64;
    Ok(HarnessResult {
        params: *p,
        mode,
        adversary: adv,
        trials,
        mean_pass_probability: stats::mean(&probs),
        per_oracle_sd: if trials > 1 { stats::std_dev(&probs) } else { 0.0 },
        empirical_pass_rate: rate,
        ci95: 1.96 * stats::binomial_sd(rate, trials.max(1)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdvantagePoint {
    pub d: usize,
    pub conjugate: HarnessResult,
    pub independent: HarnessResult,
    /// Difference of mean per-oracle pass probabilities.
    pub advantage: f64,
    /// Difference of empirical pass rates.
    pub empirical_advantage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdvantageSweep {
    pub ell: usize,
    pub t: usize,
    pub q: usize,
    pub adversary: HarnessAdversary,
    pub points: Vec<AdvantagePoint>,
    pub non_increasing_in_d: bool,
}

pub fn advantage(p: &HarnessParams, adv: HarnessAdversary, trials: usize, rng: &RandomSource) -> Result<AdvantagePoint> {
    let conjugate = swap_distinguish_harness(p, HarnessMode::Conjugate, adv, trials, rng)?;
    let independent = swap_distinguish_harness(p, HarnessMode::Independent, adv, trials, rng)?;
    Ok(AdvantagePoint {
        d: p.d,
        advantage: conjugate.mean_pass_probability - independent.mean_pass_probability,
        empirical_advantage: conjugate.empirical_pass_rate - independent.empirical_pass_rate,
        conjugate,
        independent,
    })
}

pub fn advantage_sweep(dims: &[usize], ell: usize, t: usize, q: usize, adv: HarnessAdversary, trials: usize, rng: &RandomSource) -> Result<AdvantageSweep> {
    let points = dims
        .iter()
        .map(|&d| advantage(&HarnessParams { d, ell, t, q, exact_oracles: false }, adv, trials, rng))
        .collect::<Result<Vec<_>>>()?;
    let non_increasing_in_d = points.windows(2).all(|w| w[1].advantage <= w[0].advantage + 1e-12);
    Ok(AdvantageSweep { ell, t, q, adversary: adv, points, non_increasing_in_d })
}
