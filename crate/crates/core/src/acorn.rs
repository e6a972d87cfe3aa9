//! Reference-phase circuit: n copies of |ψ⟩ become n conditional samples
//! sharing one uniformly random phase.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::circuits::{add1_gate, counter_width, shift_gate, Circuit, Gate};
use crate::error::{Error, Result};
use crate::qcore::linalg::{self, c64, ComplexMatrix, ComplexVector};
use crate::qcore::{check_capacity, DensityMatrix, RandomSource, RegisterLayout, StateVector};
use crate::stats::{self, MixtureCheck};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalSampleSpec {
    pub n: usize,
    pub d: usize,
    pub theta: f64,
}

impl ConditionalSampleSpec {
    pub fn new(n: usize, d: usize, theta: f64) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidArgument("n and d must be positive".into()));
        }
        Ok(Self { n, d, theta: theta.rem_euclid(TAU) })
    }
}

fn check_normalized(psi: &StateVector) -> Result<()> {
    if (psi.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition(format!("ψ has norm {}", psi.norm())));
    }
    Ok(())
}

/// `(e^{iθ}|0⟩|0⟩ + |1⟩|ψ⟩)/√2` over registers `c` (qubit) and `o` (dim d).
pub fn conditional_sample(psi: &StateVector, theta: f64) -> Result<StateVector> {
    check_normalized(psi)?;
    let d = psi.dim();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = ComplexVector::zeros(2 * d);
    amps[0] = c64(theta.cos() * h, theta.sin() * h);
    for a in 0..d {
        amps[d + a] = psi.amplitudes()[a] * h;
    }
    StateVector::new(RegisterLayout::single("c", 2).with("o", d, 1), amps)
}

fn co_layout(n: usize, d: usize) -> RegisterLayout {
    RegisterLayout::new().with("C", 2, n).with("O", d, n)
}

/// Unnormalized `|ψ(k)⟩ = Σ_{|x|=k} |ψ^{x₁}⟩⋯|ψ^{xₙ}⟩` with `|ψ⁰⟩ = |0⟩|0⟩`
/// and `|ψ¹⟩ = |1⟩|ψ⟩`, laid out as registers C (n qubits) then O.
pub fn psi_k(psi: &StateVector, n: usize, k: usize) -> Result<StateVector> {
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds n = {n}")));
    }
    let d = psi.dim();
    let on = d.checked_pow(n as u32).ok_or(Error::Capacity { requested: usize::MAX, cap: crate::qcore::dim_cap() })?;
    let total = (1usize << n) * on;
    check_capacity(total)?;
    let mut amps = ComplexVector::zeros(total);
    let a = psi.amplitudes();
    for x in 0usize..(1 << n) {
        if x.count_ones() as usize != k {
            continue;
        }
        // positions with x_i = 1, most significant first
        let ones: Vec<usize> = (0..n).filter(|i| (x >> (n - 1 - i)) & 1 == 1).collect();
        for assign in 0..d.pow(k as u32) {
            let mut rem = assign;
            let mut digits = vec![0usize; n];
            let mut amp = linalg::ONE;
            for &pos in ones.iter().rev() {
                digits[pos] = rem % d;
                rem /= d;
                amp *= a[digits[pos]];
            }
            let o = digits.iter().fold(0, |acc, v| acc * d + v);
            amps[x * on + o] += amp;
        }
    }
    StateVector::new(co_layout(n, d), amps)
}

/// Circuit over C (n qubits), O (n qudits), S (n qudits) and the K
/// counter, made of n gadgets: H on C_i, then controlled on C_i a swap of
/// O_i with S_1, a shift of S and an increment of K.
pub fn acorn_circuit(n: usize, d: usize) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::InvalidArgument("acorn circuit needs n ≥ 1".into()));
    }
    let w = counter_width(n);
    let layout = RegisterLayout::new().with("C", 2, n).with("O", d, n).with("S", d, n).with("K", 2, w);
    let (c, o, s, k) = (0, n, 2 * n, 3 * n);
    let s_targets: Vec<usize> = (s..s + n).collect();
    let k_targets: Vec<usize> = (k..k + w).collect();
    let mut circuit = Circuit::new(layout);
    for i in 0..n {
        circuit.push(Gate::hadamard(c + i))?;
        circuit.push(Gate::cswap(c + i, o + i, s, d))?;
        circuit.push(shift_gate(n, d).on(&s_targets).controlled_by(c + i))?;
        circuit.push(add1_gate(w).on(&k_targets).controlled_by(c + i))?;
    }
    Ok(circuit)
}

/// `|0⟩_C |0⟩_O |ψ⟩^{⊗n}_S |0⟩_K`.
pub fn acorn_input(psi: &StateVector, n: usize) -> Result<StateVector> {
    check_normalized(psi)?;
    let d = psi.dim();
    let zeros = StateVector::basis(RegisterLayout::new().with("C", 2, n).with("O", d, n), 0)?;
    let s = psi.tensor_power(n)?.with_layout(RegisterLayout::new().with("S", d, n))?;
    let k = StateVector::basis(RegisterLayout::new().with("K", 2, counter_width(n)), 0)?;
    zeros.tensor(&s)?.tensor(&k)
}

/// `2^{-n/2} Σ_k |ψ(k)⟩_CO ⊗ (|ψ⟩^{⊗n−k}|0⟩^{⊗k})_S ⊗ |k⟩_K`, built
/// directly from its definition.
pub fn expected_output(psi: &StateVector, n: usize) -> Result<StateVector> {
    check_normalized(psi)?;
    let d = psi.dim();
    let w = counter_width(n);
    let zero = StateVector::basis(RegisterLayout::single("z", d), 0)?;
    let mut total: Option<ComplexVector> = None;
    let mut layout = None;
    for k in 0..=n {
        let factors = std::iter::repeat_n(psi, n - k).chain(std::iter::repeat_n(&zero, k));
        let mut s: Option<StateVector> = None;
        for f in factors {
            s = Some(match s {
                None => f.clone(),
                Some(acc) => acc.tensor(f)?,
            });
        }
        let s = s.expect("n ≥ 1 factors");
        let s = s.with_layout(RegisterLayout::new().with("S", d, n))?;
        let kreg = StateVector::basis(RegisterLayout::new().with("K", 2, w), k)?;
        let term = psi_k(psi, n, k)?.tensor(&s)?.tensor(&kreg)?;
        layout.get_or_insert_with(|| term.layout().clone());
        let amps = term.into_amplitudes();
        total = Some(match total {
            None => amps,
            Some(t) => t + amps,
        });
    }
    let scale = (2f64).powi(n as i32).sqrt();
    StateVector::new(layout.expect("n ≥ 0 gives a term"), total.expect("at least one term").unscale(scale))
}

/// Closed-form `(1/2^n) Σ_k |ψ(k)⟩⟨ψ(k)|` on CO.
pub fn average_conditional_density(psi: &StateVector, n: usize) -> Result<DensityMatrix> {
    check_normalized(psi)?;
    let d = psi.dim();
    let dim = (1usize << n) * d.pow(n as u32);
    check_capacity(dim * dim)?;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for k in 0..=n {
        let v = psi_k(psi, n, k)?.into_amplitudes();
        m += linalg::outer(&v, &v);
    }
    DensityMatrix::new(co_layout(n, d), m.unscale((1u64 << n) as f64))
}

/// `|ψ(θ)⟩^{⊗n}` reordered from per-copy pairs to the C…O… layout.
pub fn conditional_sample_power(psi: &StateVector, n: usize, theta: f64) -> Result<StateVector> {
    let single = conditional_sample(psi, theta)?;
    let power = single.tensor_power(n)?;
    let order: Vec<usize> = (0..n).map(|i| 2 * i).chain((0..n).map(|i| 2 * i + 1)).collect();
    power.permute_subsystems(&order, co_layout(n, psi.dim()))
}

/// Runs the circuit and returns the reduced state on C and O.
pub fn circuit_marginal(psi: &StateVector, n: usize) -> Result<DensityMatrix> {
    let out = acorn_circuit(n, psi.dim())?.apply(&acorn_input(psi, n)?)?;
    out.reduced_density(&["C", "O"])
}

/// Distribution of the Hamming weight of C in a circuit output.
pub fn control_weight_distribution(output: &StateVector, n: usize) -> Vec<f64> {
    let block = output.dim() >> n;
    let mut weights = vec![0.0; n + 1];
    for (idx, z) in output.amplitudes().iter().enumerate() {
        weights[(idx / block).count_ones() as usize] += z.norm_sqr();
    }
    weights
}

/// Monte Carlo comparison of the θ-average with the closed form.
pub fn monte_carlo_check(
    psi: &StateVector,
    n: usize,
    draws: usize,
    resamples: usize,
    rng: &mut RandomSource,
) -> Result<MixtureCheck> {
    let samples: Vec<ComplexVector> = (0..draws)
        .map(|_| {
            let theta = rng.uniform() * TAU;
            conditional_sample_power(psi, n, theta).map(StateVector::into_amplitudes)
        })
        .collect::<Result<_>>()?;
    let target = average_conditional_density(psi, n)?;
    stats::mixture_check(&samples, target.matrix(), resamples, rng)
}

#[derive(Debug, Clone, Serialize)]
pub struct AcornReport {
    pub n: usize,
    pub d: usize,
    pub trials: usize,
    /// Max over trials of `‖circuit output − expected output‖₂`.
    pub max_output_error: f64,
    /// Max over trials of the CO-marginal trace distance to the mixture.
    pub max_marginal_distance: f64,
    pub gate_count: usize,
    pub elementary_gate_count: usize,
    pub pass: bool,
}

pub const ACORN_TOLERANCE: f64 = 1e-10;

/// Simulates the circuit on `trials` Haar-random ψ and compares against
/// both the closed-form output state and the closed-form mixture.
pub fn verify(n: usize, d: usize, trials: usize, rng: &RandomSource) -> Result<AcornReport> {
    let circuit = acorn_circuit(n, d)?;
    let (mut max_out, mut max_marg) = (0.0f64, 0.0f64);
    for t in 0..trials {
        let mut child = rng.child(t as u64);
        let psi = StateVector::from_amplitudes("psi", child.haar_state(d).iter().copied().collect())?;
        let out = circuit.apply(&acorn_input(&psi, n)?)?;
        let expected = expected_output(&psi, n)?;
        max_out = max_out.max((out.amplitudes() - expected.amplitudes()).norm());
        let marginal = out.reduced_density(&["C", "O"])?;
        let target = average_conditional_density(&psi, n)?;
        max_marg = max_marg.max(crate::qcore::trace_distance(&marginal, &target)?);
    }
    Ok(AcornReport {
        n,
        d,
        trials,
        max_output_error: max_out,
        max_marginal_distance: max_marg,
        gate_count: circuit.gates().len(),
        elementary_gate_count: circuit.elementary_gate_count(),
        pass: max_out <= ACORN_TOLERANCE && max_marg <= ACORN_TOLERANCE,
    })
}
