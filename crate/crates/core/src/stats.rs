//! Small statistics helpers for Monte Carlo checks.

use crate::error::{Error, Result};
use crate::qcore::linalg::{self, ComplexMatrix, ComplexVector};
use crate::qcore::metrics::trace_distance_matrices;
use crate::qcore::RandomSource;
use serde::Serialize;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n − 1 denominator).
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

pub fn std_error(xs: &[f64]) -> f64 {
    std_dev(xs) / (xs.len() as f64).sqrt()
}

/// Standard deviation of a binomial proportion estimate.
pub fn binomial_sd(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Least-squares line `y = slope·x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument("linear fit needs two or more paired points".into()));
    }
    let (mx, my) = (mean(xs), mean(ys));
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.iter().chain(ys).any(|v| *v <= 0.0) {
        return Err(Error::InvalidArgument("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    Ok(linear_fit(&lx, &ly)?.0)
}

/// Outcome of comparing an empirical mixture of pure states with a target.
#[derive(Debug, Clone, Serialize)]
pub struct MixtureCheck {
    pub samples: usize,
    /// Trace distance between the empirical average and the target.
    pub observed: f64,
    /// Bootstrap distribution of the distance between a resampled average
    /// and the empirical average.
    pub bootstrap_mean: f64,
    pub bootstrap_sd: f64,
    pub pass: bool,
}

/// Compares `(1/N) Σ |v_s⟩⟨v_s|` with `target`, passing when the observed
/// distance is within three bootstrap standard deviations above the
/// bootstrap mean. All work is done in the span of the samples and the
/// target's support, which is exact for trace distances.
pub fn mixture_check(
    samples: &[ComplexVector],
    target: &ComplexMatrix,
    resamples: usize,
    rng: &mut RandomSource,
) -> Result<MixtureCheck> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    let dim = target.nrows();
    if samples.iter().any(|s| s.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: samples[0].len() });
    }
    let mut basis: Vec<ComplexVector> = Vec::new();
    let extend = |v: &ComplexVector, basis: &mut Vec<ComplexVector>| {
        if basis.len() >= dim {
            return;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for b in basis.iter() {
                let o = b.dotc(&w);
                w.axpy(-o, b, linalg::ONE);
            }
        }
        let norm = w.norm();
        if norm > 1e-10 * v.norm().max(1e-300) {
            basis.push(w.unscale(norm));
        }
    };
    let (evals, evecs) = linalg::hermitian_eigen(target);
    for (k, l) in evals.iter().enumerate() {
        if l.abs() > 1e-14 {
            extend(&evecs.column(k).into_owned(), &mut basis);
        }
    }
    for s in samples {
        extend(s, &mut basis);
    }
    let q = ComplexMatrix::from_columns(&basis);
    let reduced = q.adjoint() * ComplexMatrix::from_columns(samples);
    let target_r = q.adjoint() * target * &q;
    // Σ_s w_s |v_s⟩⟨v_s| as V·diag(w)·V†
    let weighted_sum = |weights: &[f64]| {
        let mut scaled = reduced.clone();
        for (mut col, w) in scaled.column_iter_mut().zip(weights) {
            col.scale_mut(*w);
        }
        scaled * reduced.adjoint()
    };
    let uniform = vec![1.0 / n as f64; n];
    let empirical = weighted_sum(&uniform);
    let observed = trace_distance_matrices(&empirical, &target_r)?;
    let mut boots = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut weights = vec![0.0; n];
        for _ in 0..n {
            weights[rng.below(n)] += 1.0 / n as f64;
        }
        boots.push(trace_distance_matrices(&weighted_sum(&weights), &empirical)?);
    }
    let (bm, bs) = (mean(&boots), std_dev(&boots));
    Ok(MixtureCheck {
        samples: n,
        observed,
        bootstrap_mean: bm,
        bootstrap_sd: bs,
        pass: observed <= bm + 3.0 * bs,
    })
}
