//! Density-matrix exponentiation by repeated partial swaps, and the
//! approximate reflection about a pure state built from it.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::layout::offsets;
use crate::qcore::linalg::{self, c64, ComplexMatrix, ComplexVector, I, ZERO};
use crate::qcore::metrics::trace_distance_matrices;
use crate::qcore::{channel_distance, DensityMatrix, RandomSource, RegisterLayout, Superoperator};
use crate::stats;

/// Constant in `n = ⌈c·t²/δ⌉`, calibrated by the acceptance suite.
pub const DEFAULT_COPY_CONSTANT: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentiationPlan {
    pub t: f64,
    pub n_copies: usize,
    pub delta_t: f64,
}

impl ExponentiationPlan {
    pub fn new(t: f64, n_copies: usize) -> Result<Self> {
        if n_copies == 0 {
            return Err(Error::InvalidArgument("need at least one copy".into()));
        }
        Ok(Self { t, n_copies, delta_t: t / n_copies as f64 })
    }

    /// Plan meeting error budget `delta` with `n = ⌈c·t²/δ⌉`.
    pub fn for_error(t: f64, delta: f64, c: f64) -> Result<Self> {
        if !(delta > 0.0) || !(c > 0.0) {
            return Err(Error::InvalidArgument("δ and c must be positive".into()));
        }
        Self::new(t, ((c * t * t / delta).ceil() as usize).max(1))
    }
}

/// `e^{−iSΔt} = cos Δt · I − i sin Δt · S` on `C^d ⊗ C^d`.
pub fn partial_swap_unitary(d: usize, dt: f64) -> ComplexMatrix {
    let mut u = linalg::identity(d * d).scale(dt.cos());
    for a in 0..d {
        for b in 0..d {
            u[(b * d + a, a * d + b)] += c64(0.0, -dt.sin());
        }
    }
    u
}

/// `tr₂[e^{−iSΔt}(σ⊗ρ)e^{iSΔt}]`, simulated on the joint space.
pub fn partial_swap_step(sigma: &DensityMatrix, rho: &DensityMatrix, dt: f64) -> Result<DensityMatrix> {
    let d = sigma.dim();
    if rho.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: rho.dim() });
    }
    let joint = sigma
        .clone()
        .with_layout(RegisterLayout::single("sys", d))?
        .tensor(&rho.clone().with_layout(RegisterLayout::single("copy", d))?)?;
    let evolved = joint.conjugate_by(&partial_swap_unitary(d, dt))?;
    evolved.partial_trace(&["sys"])?.with_layout(sigma.layout().clone())
}

/// Linear form of one step:
/// `X ↦ cos²·X + sin²·tr(X)·ρ − i·cos·sin·[ρ, X]`.
pub fn partial_swap_map(x: &ComplexMatrix, rho: &ComplexMatrix, dt: f64) -> ComplexMatrix {
    let (c, s) = (dt.cos(), dt.sin());
    let commutator = rho * x - x * rho;
    x.scale(c * c) + rho * (linalg::trace(x) * (s * s)) - commutator * (I * (c * s))
}

/// `n` partial-swap steps with `Δt = t/n`, each consuming a fresh copy of ρ.
pub fn density_exponentiation(sigma: &DensityMatrix, rho: &DensityMatrix, t: f64, n: usize) -> Result<DensityMatrix> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), found: rho.dim() });
    }
    let plan = ExponentiationPlan::new(t, n)?;
    let mut x = sigma.matrix().clone();
    for _ in 0..plan.n_copies {
        x = partial_swap_map(&x, rho.matrix(), plan.delta_t);
    }
    DensityMatrix::new(sigma.layout().clone(), x)
}

/// `e^{−iρt} σ e^{iρt}`.
pub fn exact_evolution(sigma: &DensityMatrix, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    sigma.conjugate_by(&linalg::exp_hermitian(rho.matrix(), t))
}

/// `2|ψ⟩⟨ψ| − I`.
pub fn reflection_unitary(psi: &ComplexVector) -> ComplexMatrix {
    linalg::outer(psi, psi).scale(2.0) - linalg::identity(psi.len())
}

/// Approximate reflection about |ψ⟩ from `n` copies (t = π).
pub fn approx_reflection(n: usize, sigma_in: &DensityMatrix, psi: &ComplexVector) -> Result<DensityMatrix> {
    let rho = DensityMatrix::new(sigma_in.layout().clone(), linalg::outer(psi, psi))?;
    density_exponentiation(sigma_in, &rho, PI, n)
}

pub fn exact_reflection(sigma_in: &DensityMatrix, psi: &ComplexVector) -> Result<DensityMatrix> {
    sigma_in.conjugate_by(&reflection_unitary(psi))
}

/// The `n`-copy approximate reflection as a superoperator.
pub fn approx_reflection_channel(n: usize, psi: &ComplexVector) -> Result<Superoperator> {
    let d = psi.len();
    let rho = linalg::outer(psi, psi);
    let dt = PI / n.max(1) as f64;
    let step = Superoperator::from_map(d, d, |x| Ok(partial_swap_map(x, &rho, dt)))?;
    let mut acc = Superoperator::identity(d);
    let mut base = step;
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            acc = base.compose(&acc)?;
        }
        k >>= 1;
        if k > 0 {
            base = base.compose(&base)?;
        }
    }
    Ok(acc)
}

pub fn exact_reflection_channel(psi: &ComplexVector) -> Superoperator {
    Superoperator::from_unitary(&reflection_unitary(psi))
}

/// One partial-swap step between the flat subsystems `subs` of `rho` and a
/// fresh copy of `tau`:
/// `c²ρ + s²(tr_X ρ ⊗ τ) − ics[(I⊗τ)ρ − ρ(I⊗τ)]` with X = `subs`.
pub fn partial_swap_on_subsystems(rho: &ComplexMatrix, dims: &[usize], subs: &[usize], tau: &ComplexMatrix, dt: f64) -> ComplexMatrix {
    let rest: Vec<usize> = (0..dims.len()).filter(|s| !subs.contains(s)).collect();
    let x_off = offsets(dims, subs);
    let e_off = offsets(dims, &rest);
    let (c, s) = (dt.cos(), dt.sin());
    let dim = rho.nrows();
    let dx = x_off.len();

    // (I⊗τ)ρ: act with τ on the X digits of each column.
    let mut left = rho.clone();
    for mut col in left.column_iter_mut() {
        crate::qcore::state::apply_local_slice(col.as_mut_slice(), dims, subs, tau, None);
    }
    // ρ(I⊗τ) = ((I⊗τ)ρ)† for Hermitian ρ and τ; compute directly to avoid
    // relying on Hermiticity of intermediate iterates.
    let mut right = rho.adjoint();
    let tau_dag = tau.adjoint();
    for mut col in right.column_iter_mut() {
        crate::qcore::state::apply_local_slice(col.as_mut_slice(), dims, subs, &tau_dag, None);
    }
    let right = right.adjoint();

    let mut out = rho.scale(c * c) - (left - right) * (I * (c * s));
    if s != 0.0 {
        for (ei, &e1) in e_off.iter().enumerate() {
            for &e2 in &e_off[..] {
                let mut red = ZERO;
                for &x in &x_off {
                    red += rho[(e1 + x, e2 + x)];
                }
                if red == ZERO {
                    continue;
                }
                let w = red * (s * s);
                for a in 0..dx {
                    for b in 0..dx {
                        out[(e1 + x_off[a], e2 + x_off[b])] += w * tau[(a, b)];
                    }
                }
            }
            let _ = ei;
        }
    }
    debug_assert_eq!(out.nrows(), dim);
    out
}

/// Approximate reflection about |ψ⟩ on the subsystems `subs`, `n` copies.
pub fn approx_reflection_on(rho: &ComplexMatrix, dims: &[usize], subs: &[usize], psi: &ComplexVector, n: usize) -> ComplexMatrix {
    let tau = linalg::outer(psi, psi);
    let dt = PI / n.max(1) as f64;
    let mut x = rho.clone();
    for _ in 0..n {
        x = partial_swap_on_subsystems(&x, dims, subs, &tau, dt);
    }
    x
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub n: usize,
    /// Worst trace distance over the probe inputs.
    pub state_error: f64,
    /// Choi-state distance to the exact reflection channel.
    pub choi_distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReflectSweep {
    pub d: usize,
    pub t: f64,
    pub instances: usize,
    pub points: Vec<SweepPoint>,
    pub state_slope: f64,
    pub choi_slope: f64,
    pub delta: f64,
    pub copy_constant: f64,
    pub calibrated_copies: usize,
    pub calibrated_error: f64,
    pub pass: bool,
}

pub const SLOPE_RANGE: (f64, f64) = (-1.25, -0.8);

/// Probe inputs for an instance: a Haar state, a state orthogonal to ψ, and
/// the equal superposition of ψ with it.
fn probes(psi: &ComplexVector, rng: &mut RandomSource) -> Vec<ComplexVector> {
    let d = psi.len();
    let mut phi = rng.haar_state(d);
    let o = psi.dotc(&phi);
    phi.axpy(-o, psi, linalg::ONE);
    let phi = phi.unscale(phi.norm());
    let sup = (psi + &phi).unscale(2f64.sqrt());
    vec![rng.haar_state(d), phi, sup]
}

/// Worst trace distance over probe inputs and instances for `n` copies.
fn sweep_point(instances: &[(ComplexVector, Vec<ComplexVector>)], n: usize) -> Result<SweepPoint> {
    let (mut worst, mut worst_choi) = (0.0f64, 0.0f64);
    for (psi, inputs) in instances {
        let layout = RegisterLayout::single("q", psi.len());
        for v in inputs {
            let sigma = DensityMatrix::new(layout.clone(), linalg::outer(v, v))?;
            let approx = approx_reflection(n, &sigma, psi)?;
            let exact = exact_reflection(&sigma, psi)?;
            worst = worst.max(trace_distance_matrices(approx.matrix(), exact.matrix())?);
        }
        let choi = channel_distance(&approx_reflection_channel(n, psi)?, &exact_reflection_channel(psi))?;
        worst_choi = worst_choi.max(choi);
    }
    Ok(SweepPoint { n, state_error: worst, choi_distance: worst_choi })
}

/// Error-versus-copies sweep for the t = π reflection.
pub fn sweep(d: usize, ns: &[usize], instances: usize, delta: f64, c: f64, rng: &RandomSource) -> Result<ReflectSweep> {
    let inst: Vec<(ComplexVector, Vec<ComplexVector>)> = (0..instances)
        .map(|k| {
            let mut r = rng.child(k as u64);
            let psi = r.haar_state(d);
            let p = probes(&psi, &mut r);
            (psi, p)
        })
        .collect();
    let points: Vec<SweepPoint> = ns.iter().map(|&n| sweep_point(&inst, n)).collect::<Result<_>>()?;
    let xs: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
    let state_slope = stats::log_log_slope(&xs, &points.iter().map(|p| p.state_error).collect::<Vec<_>>())?;
    let choi_slope = stats::log_log_slope(&xs, &points.iter().map(|p| p.choi_distance).collect::<Vec<_>>())?;
    let plan = ExponentiationPlan::for_error(PI, delta, c)?;
    let calibrated = sweep_point(&inst, plan.n_copies)?;
    let in_range = |s: f64| s >= SLOPE_RANGE.0 && s <= SLOPE_RANGE.1;
    Ok(ReflectSweep {
        d,
        t: PI,
        instances,
        pass: in_range(state_slope) && in_range(choi_slope) && calibrated.state_error <= delta,
        points,
        state_slope,
        choi_slope,
        delta,
        copy_constant: c,
        calibrated_copies: plan.n_copies,
        calibrated_error: calibrated.state_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dm(v: &ComplexVector) -> DensityMatrix {
        DensityMatrix::new(RegisterLayout::single("q", v.len()), linalg::outer(v, v)).unwrap()
    }

    fn ket(v: &[f64]) -> ComplexVector {
        ComplexVector::from_iterator(v.len(), v.iter().map(|x| c64(*x, 0.0)))
    }

    fn random_density(d: usize, rng: &mut RandomSource) -> DensityMatrix {
        let g = ComplexMatrix::from_fn(d, d, |_, _| rng.complex_normal());
        let m = &g * g.adjoint();
        let tr = linalg::trace(&m).re;
        DensityMatrix::new(RegisterLayout::single("q", d), m.unscale(tr)).unwrap()
    }

    #[test]
    fn zero_step_is_identity() {
        let mut rng = RandomSource::new(1);
        let (s, r) = (random_density(3, &mut rng), random_density(3, &mut rng));
        let out = partial_swap_step(&s, &r, 0.0).unwrap();
        assert!(linalg::frobenius(&(out.matrix() - s.matrix())) < 1e-14);
    }

    #[test]
    fn fixed_point() {
        let z = dm(&ket(&[1.0, 0.0]));
        let out = partial_swap_step(&z, &z, 0.7).unwrap();
        assert!(linalg::frobenius(&(out.matrix() - z.matrix())) < 1e-14);
    }

    #[test]
    fn quarter_turn_swaps_fully() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let out = partial_swap_step(&dm(&ket(&[h, h])), &dm(&ket(&[1.0, 0.0])), PI / 2.0).unwrap();
        assert!(linalg::frobenius(&(out.matrix() - dm(&ket(&[1.0, 0.0])).matrix())) < 1e-14);
    }

    #[test]
    fn closed_form_matches_joint_simulation() {
        let mut rng = RandomSource::new(4);
        for d in 2..6 {
            let (s, r) = (random_density(d, &mut rng), random_density(d, &mut rng));
            let dt = rng.uniform() * PI;
            let joint = partial_swap_step(&s, &r, dt).unwrap();
            let closed = partial_swap_map(s.matrix(), r.matrix(), dt);
            assert!(linalg::frobenius(&(joint.matrix() - closed)) < 1e-13);
        }
    }

    #[test]
    fn commuting_case_is_static() {
        let diag = |a: f64| {
            DensityMatrix::new(
                RegisterLayout::single("q", 2),
                ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![c64(a, 0.0), c64(1.0 - a, 0.0)])),
            )
            .unwrap()
        };
        // Commuting inputs never pick up coherences; the populations drift
        // only by the O(t²/n) exponentiation error.
        let (t, n) = (1.3, 17);
        let out = density_exponentiation(&diag(0.3), &diag(0.8), t, n).unwrap();
        assert!(out.matrix()[(0, 1)].norm() < 1e-15 && out.matrix()[(1, 0)].norm() < 1e-15);
        let drift = trace_distance_matrices(out.matrix(), diag(0.3).matrix()).unwrap();
        assert!(drift <= t * t / n as f64, "drift {drift}");
        let finer = density_exponentiation(&diag(0.3), &diag(0.8), t, 8 * n).unwrap();
        assert!(trace_distance_matrices(finer.matrix(), diag(0.3).matrix()).unwrap() < drift / 4.0);
    }

    #[test]
    fn eigenstate_is_exact() {
        let psi = RandomSource::new(2).haar_state(3);
        let out = density_exponentiation(&dm(&psi), &dm(&psi), PI, 5).unwrap();
        assert!(linalg::frobenius(&(out.matrix() - dm(&psi).matrix())) < 1e-13);
    }

    #[test]
    fn error_halves_when_copies_double() {
        let mut rng = RandomSource::new(12);
        let (psi, sig) = (rng.haar_state(2), rng.haar_state(2));
        let (rho, sigma) = (dm(&psi), dm(&sig));
        let exact = exact_evolution(&sigma, &rho, PI).unwrap();
        let err = |n| {
            let approx = density_exponentiation(&sigma, &rho, PI, n).unwrap();
            trace_distance_matrices(approx.matrix(), exact.matrix()).unwrap()
        };
        for n in [32, 64, 128] {
            let ratio = err(n) / err(2 * n);
            assert!((ratio - 2.0).abs() < 0.25, "ratio {ratio} at n={n}");
        }
    }

    #[test]
    fn reflection_fixes_axis_and_orthogonal_states() {
        let mut rng = RandomSource::new(3);
        let psi = rng.haar_state(2);
        let out = approx_reflection(8, &dm(&psi), &psi).unwrap();
        assert!(linalg::frobenius(&(out.matrix() - dm(&psi).matrix())) < 1e-13);
        let perp = ComplexVector::from_vec(vec![-psi[1].conj(), psi[0].conj()]);
        let out = approx_reflection(512, &dm(&perp), &psi).unwrap();
        assert!(trace_distance_matrices(out.matrix(), dm(&perp).matrix()).unwrap() <= PI * PI / 512.0);
    }

    #[test]
    fn exact_reflection_identity() {
        // e^{iπ|φ⟩⟨φ|} = −(2|φ⟩⟨φ| − I)
        let psi = RandomSource::new(8).haar_state(3);
        let e = linalg::exp_hermitian(&linalg::outer(&psi, &psi), -PI);
        assert!(linalg::frobenius(&(e + reflection_unitary(&psi))) < 1e-12);
    }

    #[test]
    fn channel_power_matches_iteration() {
        let mut rng = RandomSource::new(5);
        let psi = rng.haar_state(2);
        let sigma = random_density(2, &mut rng);
        let via_channel = approx_reflection_channel(13, &psi).unwrap().apply(sigma.matrix()).unwrap();
        let via_steps = approx_reflection(13, &sigma, &psi).unwrap();
        assert!(linalg::frobenius(&(via_channel - via_steps.matrix())) < 1e-12);
    }

    #[test]
    fn subsystem_version_matches_joint_simulation() {
        let mut rng = RandomSource::new(6);
        let layout = RegisterLayout::new().with("e", 2, 1).with("x", 3, 1).with("f", 2, 1);
        let dims = layout.dims();
        let g = ComplexMatrix::from_fn(12, 12, |_, _| rng.complex_normal());
        let m = &g * g.adjoint();
        let rho = m.unscale(linalg::trace(&m).re);
        let phi = rng.haar_state(3);
        let tau = linalg::outer(&phi, &phi);
        let dt = 0.37;
        let fast = partial_swap_on_subsystems(&rho, &dims, &[1], &tau, dt);
        // reference: append the copy, swap x with it, trace it out
        let joint = DensityMatrix::new(layout.clone(), rho.clone())
            .unwrap()
            .tensor(&DensityMatrix::new(RegisterLayout::single("copy", 3), tau.clone()).unwrap())
            .unwrap();
        let u = partial_swap_unitary(3, dt);
        let evolved = joint.apply_local(&[1, 3], &u).unwrap();
        let reference = evolved.partial_trace(&["e", "x", "f"]).unwrap();
        assert!(linalg::frobenius(&(fast - reference.matrix())) < 1e-13);
    }

    #[test]
    fn plan_copies() {
        let p = ExponentiationPlan::for_error(PI, 0.05, 4.0).unwrap();
        assert_eq!(p.n_copies, (4.0 * PI * PI / 0.05f64).ceil() as usize);
        assert!(ExponentiationPlan::new(1.0, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn step_is_trace_and_positivity_preserving(seed in any::<u64>(), d in 2usize..7, dt in 0.0f64..3.2) {
            let mut rng = RandomSource::new(seed);
            let (s, r) = (random_density(d, &mut rng), random_density(d, &mut rng));
            let out = DensityMatrix::new(s.layout().clone(), partial_swap_map(s.matrix(), r.matrix(), dt)).unwrap();
            prop_assert!(out.check_physical(1e-10).is_ok());
        }

        #[test]
        fn error_is_monotone_in_copies(seed in any::<u64>()) {
            let mut rng = RandomSource::new(seed);
            let psi = rng.haar_state(2);
            let sig = rng.haar_state(2);
            let exact = exact_reflection(&dm(&sig), &psi).unwrap();
            let mut prev = f64::INFINITY;
            for n in [16, 32, 64, 128, 256] {
                let e = trace_distance_matrices(approx_reflection(n, &dm(&sig), &psi).unwrap().matrix(), exact.matrix()).unwrap();
                prop_assert!(e <= prev + 1e-12);
                prev = e;
            }
        }
    }
}
