use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::purify;
use crate::qcore::linalg::{self, c64, ComplexMatrix, ComplexVector, ONE};
use crate::qcore::{RandomSource, RegisterLayout, StateVector};

pub const STATE_PREP_TOLERANCE: f64 = 1e-10;

/// A unitary on `Â ⊗ B` (index `â·d + b`) that prepares `target` on B from
/// `|0⟩|0⟩`.
#[derive(Debug, Clone)]
pub struct StatePrepOracle {
    matrix: ComplexMatrix,
    ancilla_dim: usize,
    system_dim: usize,
    target: ComplexMatrix,
    /// Ancilla levels `[0, k)` and `[k, 2k)` are the flag-0 and flag-1
    /// halves of an embedded flag qubit; higher levels are padding.
    flag_half: Option<usize>,
}

/// `tr_Â(U|00⟩⟨00|U†)`.
pub fn prepared_state(u: &ComplexMatrix, ancilla_dim: usize, system_dim: usize) -> Result<ComplexMatrix> {
    let out = StateVector::new(
        RegisterLayout::single("anc", ancilla_dim).with("sys", system_dim, 1),
        u.column(0).into_owned(),
    )?;
    Ok(out.reduced_density(&["sys"])?.into_matrix())
}

impl StatePrepOracle {
    /// Wraps `matrix`, checking unitarity and the state-preparation property.
    pub fn new(matrix: ComplexMatrix, ancilla_dim: usize, system_dim: usize, target: ComplexMatrix) -> Result<Self> {
        let dim = ancilla_dim * system_dim;
        if matrix.nrows() != dim || matrix.ncols() != dim || target.nrows() != system_dim {
            return Err(Error::DimensionMismatch { expected: dim, found: matrix.nrows() });
        }
        let unit = linalg::unitarity_residual(&matrix);
        if unit > STATE_PREP_TOLERANCE {
            return Err(Error::Construction(format!("oracle is not unitary (residual {unit:e})")));
        }
        let oracle = Self { matrix, ancilla_dim, system_dim, target, flag_half: None };
        let res = oracle.state_prep_residual()?;
        if res > STATE_PREP_TOLERANCE {
            return Err(Error::Construction(format!("oracle does not prepare its target (residual {res:e})")));
        }
        Ok(oracle)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn target(&self) -> &ComplexMatrix {
        &self.target
    }

    pub fn flag_half(&self) -> Option<usize> {
        self.flag_half
    }

    /// `‖tr_Â(U|00⟩⟨00|U†) − σ‖_F`.
    pub fn state_prep_residual(&self) -> Result<f64> {
        Ok(linalg::frobenius(&(prepared_state(&self.matrix, self.ancilla_dim, self.system_dim)? - &self.target)))
    }
}

/// A sampled reflection oracle together with its ingredients.
#[derive(Debug, Clone)]
pub struct ReflectionSample {
    pub theta: f64,
    /// Purification on (A, A′), index `a·r + a′`.
    pub purification: ComplexVector,
    /// Conditional sample on (Â, B) with Â = flag ⊗ A′ padded to `d̂`.
    pub varsigma: ComplexVector,
    pub oracle: StatePrepOracle,
}

/// `(e^{iθ}|0⟩|0⟩ + |1⟩|ϱ⟩)/√2` re-indexed to (Â, B): the flag and A′ form
/// ancilla level `f·r + a′` inside `Â` of dimension `dhat ≥ 2r`, and A is B.
pub fn conditional_sample_on_oracle_registers(purification: &ComplexVector, theta: f64, d: usize, r: usize, dhat: usize) -> Result<ComplexVector> {
    if purification.len() != d * r {
        return Err(Error::DimensionMismatch { expected: d * r, found: purification.len() });
    }
    if dhat < 2 * r {
        return Err(Error::InvalidArgument(format!("ancilla dimension {dhat} < 2r = {}", 2 * r)));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = ComplexVector::zeros(dhat * d);
    v[0] = c64(theta.cos() * h, theta.sin() * h);
    for a in 0..d {
        for ap in 0..r {
            let anc = r + ap;
            v[anc * d + a] += purification[a * r + ap] * h;
        }
    }
    Ok(v)
}

/// `2|ς⟩⟨ς| − I` as a state-preparation oracle for `sigma`.
pub fn reflection_as_state_prep(varsigma: &ComplexVector, dhat: usize, d: usize, r: usize, sigma: &ComplexMatrix) -> Result<StatePrepOracle> {
    if varsigma.len() != dhat * d {
        return Err(Error::DimensionMismatch { expected: dhat * d, found: varsigma.len() });
    }
    let v = linalg::outer(varsigma, varsigma).scale(2.0) - linalg::identity(dhat * d);
    let mut oracle = StatePrepOracle::new(v, dhat, d, sigma.clone())?;
    oracle.flag_half = Some(r);
    Ok(oracle)
}

/// Haar-random purification of σ with rank bound r, a uniform phase, and
/// the resulting reflection oracle.
pub fn sample_reflection_oracle(sigma: &ComplexMatrix, r: usize, dhat: usize, rng: &mut RandomSource) -> Result<ReflectionSample> {
    let d = sigma.nrows();
    let purification = purify::sample_purification(sigma, r, rng)?;
    let theta = rng.uniform() * TAU;
    let varsigma = conditional_sample_on_oracle_registers(&purification, theta, d, r, dhat)?;
    let oracle = reflection_as_state_prep(&varsigma, dhat, d, r, sigma)?;
    Ok(ReflectionSample { theta, purification, varsigma, oracle })
}

/// `X` on the embedded flag qubit of Â, identity on padding levels.
pub fn flag_flip(dhat: usize, half: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dhat, dhat);
    for a in 0..dhat {
        let b = if a < half {
            a + half
        } else if a < 2 * half {
            a - half
        } else {
            a
        };
        m[(b, a)] = ONE;
    }
    m
}

/// `(X_flag ⊗ I)·V`, which maps `|0⟩|0⟩` to `e^{iθ}|0⟩|ψ⟩` when V flips
/// the flag deterministically.
pub fn tidy_gadget(oracle: &StatePrepOracle) -> Result<StatePrepOracle> {
    let half = oracle
        .flag_half
        .ok_or_else(|| Error::Precondition("oracle has no embedded flag qubit".into()))?;
    let (dhat, d) = (oracle.ancilla_dim, oracle.system_dim);
    let col = oracle.matrix.column(0);
    let stray: f64 = (0..dhat * d).filter(|k| !(half..2 * half).contains(&(k / d))).map(|k| col[k].norm_sqr()).sum();
    if stray > STATE_PREP_TOLERANCE {
        return Err(Error::Precondition(format!("flag is not deterministically 1 (weight {stray:e} elsewhere)")));
    }
    let x = linalg::kron(&flag_flip(dhat, half), &linalg::identity(d));
    let mut tidy = StatePrepOracle::new(&x * &oracle.matrix, dhat, d, oracle.target.clone())?;
    tidy.flag_half = Some(half);
    Ok(tidy)
}

/// Weight of `U|00⟩` outside the flag-0 half of Â (outside level 0 when
/// there is no flag).
pub fn tidiness_residual(oracle: &StatePrepOracle) -> f64 {
    let d = oracle.system_dim;
    let keep = oracle.flag_half.unwrap_or(1) * d;
    oracle.matrix.column(0).iter().skip(keep).map(|z| z.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::linalg::ZERO;

    fn random_sigma(d: usize, r: usize, seed: u64) -> ComplexMatrix {
        purify::random_density(d, r, &mut RandomSource::new(seed))
    }

    #[test]
    fn reflection_prepares_flag_one_branch() {
        for seed in 0..10 {
            let sigma = random_sigma(2, 2, seed);
            let mut rng = RandomSource::new(100 + seed);
            let s = sample_reflection_oracle(&sigma, 2, 4, &mut rng).unwrap();
            // V|00⟩ = e^{−iθ}|1⟩|ϱ⟩
            let expected = conditional_sample_on_oracle_registers(&s.purification, 0.0, 2, 2, 4).unwrap();
            let mut branch = expected.clone();
            branch[0] = ZERO;
            let branch = branch.scale(2f64.sqrt()) * c64((-s.theta).cos(), (-s.theta).sin());
            let col = s.oracle.matrix().column(0).into_owned();
            assert!((col - branch).norm() < 1e-10);
            assert!(s.oracle.state_prep_residual().unwrap() < 1e-10);
        }
    }

    #[test]
    fn pure_target() {
        let mut sigma = ComplexMatrix::zeros(2, 2);
        sigma[(0, 0)] = ONE;
        let s = sample_reflection_oracle(&sigma, 1, 2, &mut RandomSource::new(1)).unwrap();
        assert!(s.oracle.state_prep_residual().unwrap() < 1e-12);
    }

    #[test]
    fn phases_change_oracle_not_marginal() {
        let sigma = random_sigma(2, 2, 3);
        let p = purify::sample_purification(&sigma, 2, &mut RandomSource::new(4)).unwrap();
        let a = reflection_as_state_prep(&conditional_sample_on_oracle_registers(&p, 0.0, 2, 2, 4).unwrap(), 4, 2, 2, &sigma).unwrap();
        let b = reflection_as_state_prep(
            &conditional_sample_on_oracle_registers(&p, std::f64::consts::PI / 3.0, 2, 2, 4).unwrap(),
            4,
            2,
            2,
            &sigma,
        )
        .unwrap();
        assert!(linalg::frobenius(&(a.matrix() - b.matrix())) > 0.1);
        let (ma, mb) = (prepared_state(a.matrix(), 4, 2).unwrap(), prepared_state(b.matrix(), 4, 2).unwrap());
        assert!(linalg::frobenius(&(ma - mb)) < 1e-12);
    }

    #[test]
    fn padded_oracle_still_prepares() {
        let sigma = random_sigma(2, 2, 5);
        for dhat in [4, 5, 8] {
            let s = sample_reflection_oracle(&sigma, 2, dhat, &mut RandomSource::new(6)).unwrap();
            assert!(s.oracle.state_prep_residual().unwrap() < 1e-10);
        }
        assert!(sample_reflection_oracle(&sigma, 2, 3, &mut RandomSource::new(6)).is_err());
    }

    #[test]
    fn tidy_gadget_resets_flag() {
        let sigma = random_sigma(2, 2, 7);
        let s = sample_reflection_oracle(&sigma, 2, 5, &mut RandomSource::new(8)).unwrap();
        let tidy = tidy_gadget(&s.oracle).unwrap();
        assert!(tidiness_residual(&tidy) < 1e-10);
        assert!(tidy.state_prep_residual().unwrap() < 1e-10);
    }

    #[test]
    fn tidy_gadget_on_pure_state_gives_phase_times_psi() {
        let psi = RandomSource::new(11).haar_state(3);
        let sigma = linalg::outer(&psi, &psi);
        let s = sample_reflection_oracle(&sigma, 1, 2, &mut RandomSource::new(12)).unwrap();
        let tidy = tidy_gadget(&s.oracle).unwrap();
        let out = tidy.matrix().column(0).into_owned();
        // out = e^{iθ'}|0⟩|ψ⟩ for some phase: ancilla level 0 only, and
        // collinear with ψ
        assert!(tidiness_residual(&tidy) < 1e-10);
        let overlap = psi.dotc(&out.rows(0, 3).into_owned());
        assert!((overlap.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tidy_ancilla_is_reusable() {
        // anc, b1, b2: prepare ψ on b1, then on b2 with the same ancilla.
        let psi = RandomSource::new(13).haar_state(3);
        let sigma = linalg::outer(&psi, &psi);
        let s = sample_reflection_oracle(&sigma, 1, 2, &mut RandomSource::new(14)).unwrap();
        let tidy = tidy_gadget(&s.oracle).unwrap();
        let dims = [2, 3, 3];
        let mut amps = vec![ZERO; 18];
        amps[0] = ONE;
        crate::qcore::state::apply_local_slice(&mut amps, &dims, &[0, 1], tidy.matrix(), None);
        crate::qcore::state::apply_local_slice(&mut amps, &dims, &[0, 2], tidy.matrix(), None);
        let stray: f64 = amps[9..].iter().map(|z| z.norm_sqr()).sum();
        assert!(stray < 1e-10);
        let overlap: num_complex::Complex64 = (0..9).map(|k| (psi[k / 3] * psi[k % 3]).conj() * amps[k]).sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tidy_gadget_needs_deterministic_flag() {
        let sigma = random_sigma(2, 2, 9);
        let s = sample_reflection_oracle(&sigma, 2, 4, &mut RandomSource::new(10)).unwrap();
        let twice = StatePrepOracle { matrix: s.oracle.matrix() * s.oracle.matrix(), ..s.oracle.clone() };
        assert!(tidy_gadget(&twice).is_err());
    }
}
