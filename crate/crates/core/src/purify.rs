//! Conversion of `ρ^{⊗n}` into n copies of a Haar-random purification of ρ,
//! computed branch-exactly in the double Schur basis.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::linalg::{self, c64, ComplexMatrix, ComplexVector, ZERO};
use crate::qcore::{check_capacity, DensityMatrix, RandomSource, RegisterLayout, StateVector};
use crate::schurweyl::{permutation_action, Partition, Permutation, SchurTransform};

pub const RANK_TOLERANCE: f64 = 1e-10;
pub const RANK_VIOLATION_MASS: f64 = 1e-6;
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;

/// `(1/√dim λ) Σ_S |S⟩|S⟩` over registers P and P′.
pub fn epr_specht(lam: &Partition) -> Result<StateVector> {
    let k = lam.dim_specht();
    let mut amps = ComplexVector::zeros(k * k);
    let a = 1.0 / (k as f64).sqrt();
    for s in 0..k {
        amps[s * k + s] = c64(a, 0.0);
    }
    StateVector::new(RegisterLayout::single("P", k).with("P'", k, 1), amps)
}

/// Per-copy layout `A1, A'1, …, An, A'n`.
pub fn copies_layout(n: usize, d: usize, r: usize) -> RegisterLayout {
    let mut layout = RegisterLayout::new();
    for i in 1..=n {
        layout.push(&format!("A{i}"), d, 1).expect("fresh names");
        layout.push(&format!("A'{i}"), r, 1).expect("fresh names");
    }
    layout
}

fn a_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("A{i}")).collect()
}

/// Number of eigenvalues above [`RANK_TOLERANCE`].
pub fn numerical_rank(rho: &ComplexMatrix) -> usize {
    linalg::hermitian_eigenvalues(rho).iter().filter(|&&l| l > RANK_TOLERANCE).count()
}

/// The two Schur transforms used on the system (dim d) and ancilla
/// (dim r) copies.
#[derive(Debug, Clone)]
pub struct DoubleSchur {
    pub system: SchurTransform,
    pub ancilla: SchurTransform,
}

impl DoubleSchur {
    pub fn build(n: usize, d: usize, r: usize) -> Result<Self> {
        let total = d.pow(n as u32) * r.pow(n as u32);
        check_capacity(total.saturating_mul(total))?;
        Ok(Self { system: SchurTransform::build(n, d)?, ancilla: SchurTransform::build(n, r)? })
    }

    fn n(&self) -> usize {
        self.system.n()
    }

    /// `Σ_λ |λλ⟩⟨λλ| ⊗ |EPR_λ⟩⟨EPR_λ| ⊗ Q_λ ⊗ Q′_λ` in the double Schur
    /// basis, index `a·D_r + a′`.
    pub fn assemble(&self, terms: &[(Partition, ComplexMatrix, ComplexMatrix)]) -> Result<ComplexMatrix> {
        let (dd, dr) = (self.system.dim(), self.ancilla.dim());
        let mut z = ComplexMatrix::zeros(dd * dr, dd * dr);
        for (lam, q, qp) in terms {
            let bs = self.system.block_of(lam).ok_or_else(|| Error::InvalidArgument(format!("{lam} not in system transform")))?;
            let ba = self.ancilla.block_of(lam).ok_or_else(|| Error::InvalidArgument(format!("{lam} not in ancilla transform")))?;
            let (k, m, mr) = (bs.dim_specht, bs.dim_gl, ba.dim_gl);
            if q.nrows() != m || qp.nrows() != mr {
                return Err(Error::DimensionMismatch { expected: m, found: q.nrows() });
            }
            let epr = 1.0 / k as f64;
            for s in 0..k {
                for t in 0..k {
                    for i in 0..m {
                        for j in 0..m {
                            let qij = q[(i, j)] * epr;
                            if qij == ZERO {
                                continue;
                            }
                            let a = bs.offset + s * m + i;
                            let b = bs.offset + t * m + j;
                            for ip in 0..mr {
                                for jp in 0..mr {
                                    let ap = ba.offset + s * mr + ip;
                                    let bp = ba.offset + t * mr + jp;
                                    z[(a * dr + ap, b * dr + bp)] += qij * qp[(ip, jp)];
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(z)
    }

    /// `(U_d ⊗ U_r)† Z (U_d ⊗ U_r)`, reordered to per-copy layout.
    pub fn to_computational(&self, z: &ComplexMatrix) -> Result<DensityMatrix> {
        let n = self.n();
        let (d, r) = (self.system.d(), self.ancilla.d());
        let u = linalg::kron(self.system.matrix(), self.ancilla.matrix());
        let w = u.adjoint() * z * &u;
        let grouped = RegisterLayout::new().with("A", d, n).with("A'", r, n);
        let order: Vec<usize> = (0..n).flat_map(|i| [i, n + i]).collect();
        DensityMatrix::new(grouped, w)?.permute_subsystems(&order, copies_layout(n, d, r))
    }
}

#[derive(Debug, Clone)]
pub struct PurificationOutcome {
    pub lambda: Partition,
    pub probability: f64,
    pub post_state: DensityMatrix,
}

fn check_permutation_invariant(rho_copies: &ComplexMatrix, d: usize, n: usize) -> Result<()> {
    for k in 0..n.saturating_sub(1) {
        let p = permutation_action(d, &Permutation::transposition(n, k, k + 1))?;
        let res = linalg::frobenius(&(&p * rho_copies * p.adjoint() - rho_copies));
        if res > SYMMETRY_TOLERANCE {
            return Err(Error::Precondition(format!("input is not permutation invariant (residual {res:e})")));
        }
    }
    Ok(())
}

/// Every measurement branch: λ, its probability and the normalized output
/// state after re-preparing the EPR pair on P,P′ and a maximally mixed Q′.
pub fn purification_branches(rho_copies: &DensityMatrix, ds: &DoubleSchur) -> Result<Vec<PurificationOutcome>> {
    let (n, d, r) = (ds.n(), ds.system.d(), ds.ancilla.d());
    if rho_copies.dim() != ds.system.dim() {
        return Err(Error::DimensionMismatch { expected: ds.system.dim(), found: rho_copies.dim() });
    }
    check_permutation_invariant(rho_copies.matrix(), d, n)?;
    let x = ds.system.conjugate(rho_copies.matrix());
    let mut out = Vec::new();
    for block in ds.system.blocks() {
        let full = ds.system.diagonal_block(&x, block);
        let p = linalg::trace(&full).re;
        if block.partition.len() > r {
            if p > RANK_VIOLATION_MASS {
                return Err(Error::Precondition(format!(
                    "mass {p:e} on {} exceeds ancilla rank {r}",
                    block.partition
                )));
            }
            continue;
        }
        if p <= 0.0 {
            continue;
        }
        // tr_P of the block
        let m = block.dim_gl;
        let mut q = ComplexMatrix::zeros(m, m);
        for s in 0..block.dim_specht {
            q += full.view((s * m, s * m), (m, m));
        }
        let mr = ds.ancilla.block_of(&block.partition).expect("ℓ(λ) ≤ r").dim_gl;
        let qp = linalg::identity(mr).unscale(mr as f64);
        let z = ds.assemble(&[(block.partition.clone(), q.unscale(p), qp)])?;
        out.push(PurificationOutcome { lambda: block.partition.clone(), probability: p, post_state: ds.to_computational(&z)? });
    }
    Ok(out)
}

/// Deterministic channel output `Σ_λ p_λ · post_state_λ`.
pub fn purification_channel(rho_copies: &DensityMatrix, ds: &DoubleSchur) -> Result<DensityMatrix> {
    let branches = purification_branches(rho_copies, ds)?;
    let (n, d, r) = (ds.n(), ds.system.d(), ds.ancilla.d());
    let dim = (d * r).pow(n as u32);
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for b in &branches {
        acc += b.post_state.matrix().scale(b.probability);
    }
    DensityMatrix::new(copies_layout(n, d, r), acc)
}

/// `Σ_{ℓ(λ)≤r} dim(λ)·|λλ⟩⟨λλ| ⊗ |EPR_λ⟩⟨EPR_λ| ⊗ ν_λ(ρ) ⊗ I/dim V_λ^r`
/// mapped back to the computational basis.
pub fn mixture_formula(rho: &ComplexMatrix, ds: &DoubleSchur) -> Result<DensityMatrix> {
    let r = ds.ancilla.d();
    let rank = numerical_rank(rho);
    if rank > r {
        return Err(Error::Precondition(format!("rank {rank} exceeds r = {r}")));
    }
    let mut terms = Vec::new();
    for block in ds.system.blocks().iter().filter(|b| b.partition.len() <= r) {
        let nu = ds.system.nu(block, rho)?;
        let mr = ds.ancilla.block_of(&block.partition).expect("ℓ(λ) ≤ r").dim_gl;
        let qp = linalg::identity(mr).unscale(mr as f64);
        terms.push((block.partition.clone(), nu.scale(block.dim_specht as f64), qp));
    }
    ds.to_computational(&ds.assemble(&terms)?)
}

/// Draws a branch by inverse CDF over λ in partition order.
pub fn sample_purification_branch(rho_copies: &DensityMatrix, ds: &DoubleSchur, rng: &mut RandomSource) -> Result<PurificationOutcome> {
    let branches = purification_branches(rho_copies, ds)?;
    let weights: Vec<f64> = branches.iter().map(|b| b.probability).collect();
    let k = rng.categorical(&weights);
    Ok(branches.into_iter().nth(k).expect("index from weights"))
}

/// `Σ_i √α_i |u_i⟩ ⊗ V|i⟩` for the top-r eigenpairs of ρ and Haar V on C^r,
/// laid out as (A, A′).
pub fn sample_purification(rho: &ComplexMatrix, r: usize, rng: &mut RandomSource) -> Result<ComplexVector> {
    let d = rho.nrows();
    let rank = numerical_rank(rho);
    if rank > r {
        return Err(Error::Precondition(format!("rank {rank} exceeds r = {r}")));
    }
    let (vals, vecs) = linalg::hermitian_eigen(rho);
    let v = rng.haar_unitary(r);
    let mut out = ComplexVector::zeros(d * r);
    for i in 0..r.min(d) {
        let k = d - 1 - i; // descending eigenvalues
        let alpha = vals[k].max(0.0).sqrt();
        if alpha == 0.0 {
            continue;
        }
        let u = vecs.column(k);
        for a in 0..d {
            for b in 0..r {
                out[a * r + b] += u[a] * v[(b, i)] * alpha;
            }
        }
    }
    Ok(out)
}

/// `dim(λ)·s_λ(ρ)` for every λ with ℓ(λ) ≤ d, in partition order.
pub fn shape_probabilities(rho: &ComplexMatrix, st: &SchurTransform) -> Result<Vec<(Partition, f64)>> {
    st.blocks()
        .iter()
        .map(|b| Ok((b.partition.clone(), b.dim_specht as f64 * st.schur_polynomial(&b.partition, rho)?)))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct PurifyReport {
    pub n: usize,
    pub d: usize,
    pub r: usize,
    /// Frobenius distance between channel output and mixture formula.
    pub formula_residual: f64,
    pub formula_trace_distance: f64,
    /// `‖tr_{A′}(output) − ρ^{⊗n}‖_F`.
    pub marginal_residual: f64,
    pub probability_sum: f64,
    pub monte_carlo: Option<crate::stats::MixtureCheck>,
    pub shape_frequencies: Option<Vec<ShapeFrequency>>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShapeFrequency {
    pub lambda: String,
    pub expected: f64,
    pub observed: f64,
    pub sigma: f64,
    pub within_3sigma: bool,
}

/// Random full-rank-r density matrix on C^d.
pub fn random_density(d: usize, r: usize, rng: &mut RandomSource) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, r, |_, _| rng.complex_normal());
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m).re;
    m.unscale(tr)
}

pub struct VerifyOptions {
    pub mc_samples: usize,
    pub shape_draws: usize,
    pub resamples: usize,
}

pub fn verify(n: usize, d: usize, r: usize, opts: &VerifyOptions, rng: &mut RandomSource) -> Result<PurifyReport> {
    let ds = DoubleSchur::build(n, d, r)?;
    let rho = random_density(d, r.min(d), rng);
    let copies = DensityMatrix::new(
        RegisterLayout::new().with("A", d, n),
        crate::schurweyl::tensor_power_matrix(&rho, n),
    )?;
    let branches = purification_branches(&copies, &ds)?;
    let probability_sum: f64 = branches.iter().map(|b| b.probability).sum();
    let out = purification_channel(&copies, &ds)?;
    let formula = mixture_formula(&rho, &ds)?;
    let formula_residual = linalg::frobenius(&(out.matrix() - formula.matrix()));
    let formula_trace_distance = crate::qcore::trace_distance(&out, &formula)?;
    let marginal = out.partial_trace(&a_names(n))?;
    let marginal_residual = linalg::frobenius(&(marginal.matrix() - copies.matrix()));

    let monte_carlo = if opts.mc_samples > 0 {
        let samples: Vec<ComplexVector> = (0..opts.mc_samples)
            .map(|_| {
                let p = sample_purification(&rho, r, rng)?;
                let mut acc = p.clone();
                for _ in 1..n {
                    acc = acc.kronecker(&p);
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        Some(crate::stats::mixture_check(&samples, out.matrix(), opts.resamples, rng)?)
    } else {
        None
    };

    let shape_frequencies = if opts.shape_draws > 0 {
        let probs: Vec<f64> = branches.iter().map(|b| b.probability).collect();
        let mut counts = vec![0usize; probs.len()];
        for _ in 0..opts.shape_draws {
            counts[rng.categorical(&probs)] += 1;
        }
        let expected = shape_probabilities(&rho, &ds.system)?;
        Some(
            branches
                .iter()
                .zip(&counts)
                .map(|(b, &c)| {
                    let e = expected.iter().find(|(l, _)| *l == b.lambda).map(|(_, p)| *p).unwrap_or(0.0);
                    let observed = c as f64 / opts.shape_draws as f64;
                    let sigma = crate::stats::binomial_sd(e, opts.shape_draws);
                    ShapeFrequency {
                        lambda: b.lambda.to_string(),
                        expected: e,
                        observed,
                        sigma,
                        within_3sigma: (observed - e).abs() <= 3.0 * sigma + 1e-12,
                    }
                })
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };

    let pass = formula_residual <= 1e-8
        && marginal_residual <= 1e-9
        && (probability_sum - 1.0).abs() <= 1e-9
        && monte_carlo.as_ref().is_none_or(|m| m.pass)
        && shape_frequencies.as_ref().is_none_or(|f| f.iter().all(|s| s.within_3sigma));
    Ok(PurifyReport {
        n,
        d,
        r,
        formula_residual,
        formula_trace_distance,
        marginal_residual,
        probability_sum,
        monte_carlo,
        shape_frequencies,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schurweyl::tensor_power_matrix;

    fn copies(rho: &ComplexMatrix, n: usize) -> DensityMatrix {
        DensityMatrix::new(RegisterLayout::new().with("A", rho.nrows(), n), tensor_power_matrix(rho, n)).unwrap()
    }

    #[test]
    fn epr_examples() {
        let single = epr_specht(&Partition::new(vec![3]).unwrap()).unwrap();
        assert_eq!(single.dim(), 1);
        let e = epr_specht(&Partition::new(vec![2, 1]).unwrap()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e.amplitudes()[0] - c64(h, 0.0)).norm() < 1e-15 && (e.amplitudes()[3] - c64(h, 0.0)).norm() < 1e-15);
        let marginal = e.reduced_density(&["P"]).unwrap();
        assert!(linalg::frobenius(&(marginal.matrix() - linalg::identity(2).unscale(2.0))) < 1e-15);
    }

    #[test]
    fn single_copy_maximally_mixed() {
        let ds = DoubleSchur::build(1, 2, 2).unwrap();
        let out = purification_channel(&copies(&linalg::identity(2).unscale(2.0), 1), &ds).unwrap();
        assert!(linalg::frobenius(&(out.matrix() - linalg::identity(4).unscale(4.0))) < 1e-12);
    }

    #[test]
    fn single_copy_pure_state_rank_one() {
        let psi = RandomSource::new(1).haar_state(2);
        let rho = linalg::outer(&psi, &psi);
        let ds = DoubleSchur::build(1, 2, 1).unwrap();
        let out = purification_channel(&copies(&rho, 1), &ds).unwrap();
        assert!(linalg::frobenius(&(out.partial_trace(&["A1"]).unwrap().matrix() - &rho)) < 1e-12);
        assert!(linalg::frobenius(&(out.matrix() - &rho)) < 1e-12);
    }

    #[test]
    fn channel_matches_formula_and_marginal() {
        let mut rng = RandomSource::new(2);
        for (n, d, r) in [(1, 2, 2), (2, 2, 2), (3, 2, 2), (2, 3, 2)] {
            let ds = DoubleSchur::build(n, d, r).unwrap();
            let rho = random_density(d, r, &mut rng);
            let out = purification_channel(&copies(&rho, n), &ds).unwrap();
            let formula = mixture_formula(&rho, &ds).unwrap();
            assert!(linalg::frobenius(&(out.matrix() - formula.matrix())) < 1e-8, "({n},{d},{r})");
            let marginal = out.partial_trace(&a_names(n)).unwrap();
            assert!(linalg::frobenius(&(marginal.matrix() - tensor_power_matrix(&rho, n))) < 1e-9);
            out.check_physical(1e-9).unwrap();
        }
    }

    #[test]
    fn maximally_mixed_two_copies() {
        let ds = DoubleSchur::build(2, 2, 2).unwrap();
        let rho = linalg::identity(2).unscale(2.0);
        let out = purification_channel(&copies(&rho, 2), &ds).unwrap();
        let formula = mixture_formula(&rho, &ds).unwrap();
        assert!(linalg::frobenius(&(out.matrix() - formula.matrix())) < 1e-10);
        let probs = shape_probabilities(&rho, &ds.system).unwrap();
        assert!((probs[0].1 - 0.75).abs() < 1e-12 && (probs[1].1 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn pure_input_always_symmetric() {
        let psi = RandomSource::new(3).haar_state(2);
        let ds = DoubleSchur::build(2, 2, 2).unwrap();
        let mut rng = RandomSource::new(4);
        for _ in 0..20 {
            let b = sample_purification_branch(&copies(&linalg::outer(&psi, &psi), 2), &ds, &mut rng).unwrap();
            assert_eq!(b.lambda.parts(), &[2]);
        }
    }

    #[test]
    fn rank_violation_is_reported() {
        let ds = DoubleSchur::build(2, 2, 1).unwrap();
        let rho = linalg::identity(2).unscale(2.0);
        assert!(matches!(purification_channel(&copies(&rho, 2), &ds), Err(Error::Precondition(_))));
        assert!(matches!(mixture_formula(&rho, &ds), Err(Error::Precondition(_))));
    }

    #[test]
    fn non_symmetric_input_is_rejected() {
        let ds = DoubleSchur::build(2, 2, 2).unwrap();
        let mut m = ComplexMatrix::zeros(4, 4);
        m[(1, 1)] = linalg::ONE; // |01⟩⟨01|
        let rho = DensityMatrix::new(RegisterLayout::new().with("A", 2, 2), m).unwrap();
        assert!(purification_channel(&rho, &ds).is_err());
    }

    #[test]
    fn output_symmetries() {
        let mut rng = RandomSource::new(5);
        let (n, d, r) = (3, 2, 2);
        let ds = DoubleSchur::build(n, d, r).unwrap();
        let rho = random_density(d, r, &mut rng);
        let out = purification_channel(&copies(&rho, n), &ds).unwrap();
        // grouped order (A…, A′…) for the symmetry operators
        let order: Vec<usize> = (0..n).map(|i| 2 * i).chain((0..n).map(|i| 2 * i + 1)).collect();
        let grouped = out
            .permute_subsystems(&order, RegisterLayout::new().with("A", d, n).with("A'", r, n))
            .unwrap();
        for _ in 0..5 {
            let pi = Permutation::random(n, &mut rng);
            let p = linalg::kron(&permutation_action(d, &pi).unwrap(), &permutation_action(r, &pi).unwrap());
            let moved = &p * grouped.matrix() * p.adjoint();
            assert!(linalg::frobenius(&(moved - grouped.matrix())) < 1e-9);
            let v = rng.haar_unitary(r);
            let q = linalg::kron(&linalg::identity(d.pow(n as u32)), &tensor_power_matrix(&v, n));
            let moved = &q * grouped.matrix() * q.adjoint();
            assert!(linalg::frobenius(&(moved - grouped.matrix())) < 1e-8);
        }
    }

    #[test]
    fn permutation_average_is_epr_projector() {
        let (n, d, r) = (3, 2, 2);
        let ds = DoubleSchur::build(n, d, r).unwrap();
        let perms = Permutation::all(n);
        let mut avg = ComplexMatrix::zeros(64, 64);
        for pi in &perms {
            avg += linalg::kron(&permutation_action(d, pi).unwrap(), &permutation_action(r, pi).unwrap());
        }
        avg = avg.unscale(perms.len() as f64);
        let u = linalg::kron(ds.system.matrix(), ds.ancilla.matrix());
        let conj = &u * avg * u.adjoint();
        let terms: Vec<_> = ds
            .system
            .blocks()
            .iter()
            .map(|b| {
                let mr = ds.ancilla.block_of(&b.partition).unwrap().dim_gl;
                (b.partition.clone(), linalg::identity(b.dim_gl), linalg::identity(mr))
            })
            .collect();
        // assemble divides by dim λ for the EPR normalization
        let expected = ds.assemble(&terms).unwrap();
        assert!(linalg::frobenius(&(conj - expected)) < 1e-9);
    }

    #[test]
    fn monte_carlo_and_shapes_small() {
        let mut rng = RandomSource::new(6);
        let opts = VerifyOptions { mc_samples: 3000, shape_draws: 3000, resamples: 30 };
        let report = verify(2, 2, 2, &opts, &mut rng).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn sampled_purification_is_a_purification() {
        let mut rng = RandomSource::new(7);
        let rho = random_density(3, 2, &mut rng);
        let v = sample_purification(&rho, 2, &mut rng).unwrap();
        let s = StateVector::new(RegisterLayout::single("A", 3).with("R", 2, 1), v).unwrap();
        let m = s.reduced_density(&["A"]).unwrap();
        assert!(linalg::frobenius(&(m.matrix() - &rho)) < 1e-12);
    }
}
