//! Rotationally invariant Hermitian ensembles and the Monte Carlo side of the
//! Rayleigh-moment concentration check.
//!
//! A trial samples a matrix, extracts its spectrum and the spectrum of the
//! principal submatrix (last row and column deleted), verifies Cauchy
//! interlacing, and hands the empirical Rayleigh moments to the transform
//! layer. Determinism rule: trial `t` of an experiment with seed `s` draws
//! from ChaCha12 seeded with `s` on stream `t`, so trials are independent,
//! reproducible, and insensitive to thread count; aggregation is a serial
//! fold over the per-trial values in trial order.
//!
//! Interlacing holds exactly for Hermitian matrices, so a violation beyond
//! eigensolver tolerance is treated as a defect: the experiment aborts
//! rather than skipping the sample.

use crate::transform::{
    moments_to_cumulants, rayleigh_moment_limit, rayleigh_moments, FreeCumulantSequence,
    MomentSequence, SequenceKind, TransformError,
};
use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Largest moment order an experiment will estimate.
pub const MAX_SIM_KMAX: usize = 8;

/// Fewest trials for which the variance estimates are taken seriously.
pub const MIN_TRIALS: u64 = 30;

/// Max-entry deviation from `X = X*` accepted by [`eigen_hermitian`].
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Relative eigenpair residual accepted by [`eigen_hermitian_checked`].
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid ensemble or run parameters: {0}")]
    InvalidSpec(String),
    #[error("matrix is not Hermitian (max deviation {max_dev:.3e})")]
    NotHermitian { max_dev: f64 },
    #[error("eigensolver failure: {0}")]
    EigenFailure(String),
    #[error("interlacing violated at trial {trial}: {detail}")]
    Interlacing { trial: u64, detail: String },
    #[error("numerical self-check failed at trial {trial}: {detail}")]
    Numerical { trial: u64, detail: String },
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// The ensemble families. All are invariant in law under unitary conjugation.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum EnsembleFamily {
    /// Hermitian Gaussian with `E|X_ij|² = 1/N` off the diagonal and real
    /// `N(0, 1/N)` on it; spectrum converges to the semicircle on `[−2, 2]`.
    Gue,
    /// `U diag(spectrum) U*` with `U` Haar; the spectrum is exactly the given
    /// list in every sample.
    FixedSpectrumRotated { spectrum: Vec<f64> },
    /// `G G*/N` for an `N × samples` matrix of standard complex Gaussians
    /// (`E|G_ij|² = 1`). The spectrum converges to Marchenko–Pastur with
    /// ratio `c = samples/N`, whose free cumulants are all equal to `c`.
    Wishart { samples: usize },
}

impl EnsembleFamily {
    pub fn label(&self) -> &'static str {
        match self {
            EnsembleFamily::Gue => "gue",
            EnsembleFamily::FixedSpectrumRotated { .. } => "fixed",
            EnsembleFamily::Wishart { .. } => "wishart",
        }
    }
}

/// A fully resolved ensemble: family, dimension, and base seed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleSpec {
    pub family: EnsembleFamily,
    pub n: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(family: EnsembleFamily, n: usize, seed: u64) -> Result<Self, SimError> {
        if n < 2 {
            return Err(SimError::InvalidSpec(format!(
                "dimension must be at least 2, got {n}"
            )));
        }
        match &family {
            EnsembleFamily::FixedSpectrumRotated { spectrum } => {
                if spectrum.len() != n {
                    return Err(SimError::InvalidSpec(format!(
                        "spectrum has {} entries for dimension {n}",
                        spectrum.len()
                    )));
                }
                if spectrum.iter().any(|x| !x.is_finite()) {
                    return Err(SimError::InvalidSpec(
                        "spectrum entries must be finite".into(),
                    ));
                }
            }
            EnsembleFamily::Wishart { samples } => {
                if *samples == 0 {
                    return Err(SimError::InvalidSpec(
                        "Wishart needs at least one sample column".into(),
                    ));
                }
            }
            EnsembleFamily::Gue => {}
        }
        Ok(EnsembleSpec { family, n, seed })
    }

    /// `samples/N` for Wishart, the common value of all limiting free
    /// cumulants; `None` for the other families.
    pub fn wishart_ratio(&self) -> Option<f64> {
        match &self.family {
            EnsembleFamily::Wishart { samples } => Some(*samples as f64 / self.n as f64),
            _ => None,
        }
    }
}

/// One trial's spectra. `lambda` has `N` points, `lambda_tilde` the `N − 1`
/// eigenvalues of the principal submatrix, both ascending.
#[derive(Clone, Debug)]
pub struct SpectrumSample {
    pub lambda: Vec<f64>,
    pub lambda_tilde: Vec<f64>,
    pub interlacing_ok: bool,
    pub seed_used: u64,
    pub trial: u64,
}

/// Per-order statistics of an experiment. `mean`, `var`, `stderr` describe
/// the `M_k(κ_N)` samples; `mean_sq`/`stderr_sq` the squared samples;
/// predictions are the deterministic limits for `ℓ = 1, 2` and the z-scores
/// compare against them.
#[derive(Clone, Debug, Serialize)]
pub struct MomentRow {
    pub k: usize,
    pub mean: f64,
    pub var: f64,
    pub stderr: f64,
    pub mean_sq: f64,
    pub stderr_sq: f64,
    pub pred_l1: f64,
    pub pred_l2: f64,
    pub z1: f64,
    pub z2: f64,
}

/// Full outcome of a concentration experiment, embedding the resolved spec
/// (including the seed) so a run can be reproduced from its own output.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentResult {
    pub spec: EnsembleSpec,
    pub k_max: usize,
    pub trials: u64,
    pub rows: Vec<MomentRow>,
    /// Always zero in a returned result: any violation aborts the run.
    pub interlacing_violations: u64,
}

impl ExperimentResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain data serializes")
    }

    pub fn max_abs_z(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| [r.z1.abs(), r.z2.abs()])
            .fold(0.0, f64::max)
    }
}

fn standard_normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Haar-distributed unitary via QR of a standard complex Gaussian matrix,
/// with the phase convention that the triangular factor has positive real
/// diagonal (which makes the factorization, and hence the law, unique).
pub fn sample_haar_unitary(n: usize, rng: &mut impl Rng) -> DMatrix<Complex<f64>> {
    let g = DMatrix::from_fn(n, n, |_, _| {
        Complex::new(standard_normal(rng), standard_normal(rng))
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let norm = d.norm();
        let phase = if norm > 0.0 {
            d / norm
        } else {
            Complex::new(1.0, 0.0)
        };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

fn hermitize(mut x: DMatrix<Complex<f64>>) -> DMatrix<Complex<f64>> {
    let n = x.nrows();
    for i in 0..n {
        x[(i, i)] = Complex::new(x[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (x[(i, j)] + x[(j, i)].conj()) * 0.5;
            x[(i, j)] = avg;
            x[(j, i)] = avg.conj();
        }
    }
    x
}

/// One Hermitian draw from the ensemble. The RNG consumption order is fixed
/// (upper triangle row by row for GUE; Gaussian matrix then QR otherwise),
/// so a given generator state yields one specific matrix.
pub fn sample_matrix(spec: &EnsembleSpec, rng: &mut impl Rng) -> DMatrix<Complex<f64>> {
    let n = spec.n;
    match &spec.family {
        EnsembleFamily::Gue => {
            let mut x = DMatrix::zeros(n, n);
            let off = 1.0 / (2.0 * n as f64).sqrt();
            let diag = 1.0 / (n as f64).sqrt();
            for i in 0..n {
                x[(i, i)] = Complex::new(standard_normal(rng) * diag, 0.0);
                for j in (i + 1)..n {
                    let z = Complex::new(
                        standard_normal(rng) * off,
                        standard_normal(rng) * off,
                    );
                    x[(i, j)] = z;
                    x[(j, i)] = z.conj();
                }
            }
            x
        }
        EnsembleFamily::FixedSpectrumRotated { spectrum } => {
            let u = sample_haar_unitary(n, rng);
            let mut scaled = u.clone();
            for (j, &d) in spectrum.iter().enumerate() {
                let mut col = scaled.column_mut(j);
                col *= Complex::new(d, 0.0);
            }
            hermitize(scaled * u.adjoint())
        }
        EnsembleFamily::Wishart { samples } => {
            let g = DMatrix::from_fn(n, *samples, |_, _| {
                let scale = std::f64::consts::FRAC_1_SQRT_2;
                Complex::new(
                    standard_normal(rng) * scale,
                    standard_normal(rng) * scale,
                )
            });
            let w = &g * g.adjoint();
            hermitize(w.map(|z| z / n as f64))
        }
    }
}

fn hermiticity_deviation(x: &DMatrix<Complex<f64>>) -> f64 {
    let n = x.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        dev = dev.max(x[(i, i)].im.abs());
        for j in (i + 1)..n {
            dev = dev.max((x[(i, j)] - x[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Eigenvalues of a Hermitian matrix, ascending. Rejects non-square or
/// non-Hermitian input (tolerance [`HERMITICITY_TOL`], which also catches
/// non-finite entries) and non-finite solver output.
pub fn eigen_hermitian(x: &DMatrix<Complex<f64>>) -> Result<Vec<f64>, SimError> {
    if x.nrows() != x.ncols() || x.nrows() == 0 {
        return Err(SimError::InvalidSpec(format!(
            "expected a nonempty square matrix, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    let dev = hermiticity_deviation(x);
    if !(dev <= HERMITICITY_TOL) {
        return Err(SimError::NotHermitian { max_dev: dev });
    }
    let mut vals: Vec<f64> = x.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(SimError::EigenFailure(
            "solver produced non-finite eigenvalues".into(),
        ));
    }
    vals.sort_unstable_by(f64::total_cmp);
    Ok(vals)
}

/// Like [`eigen_hermitian`], but also validates every eigenpair:
/// `‖Xv − λv‖₂ ≤ tol·‖X‖` with `‖X‖` the spectral norm (max `|λ|`) and
/// `tol =` [`EIGEN_RESIDUAL_TOL`]. Meant for validation runs, not hot loops.
pub fn eigen_hermitian_checked(x: &DMatrix<Complex<f64>>) -> Result<Vec<f64>, SimError> {
    let dev = hermiticity_deviation(x);
    if !(dev <= HERMITICITY_TOL) {
        return Err(SimError::NotHermitian { max_dev: dev });
    }
    let decomp = x.clone().symmetric_eigen();
    let scale = decomp
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    for (idx, &lam) in decomp.eigenvalues.iter().enumerate() {
        let v = decomp.eigenvectors.column(idx);
        let residual = (x * v - v * Complex::new(lam, 0.0)).norm();
        if !(residual <= EIGEN_RESIDUAL_TOL * scale) {
            return Err(SimError::EigenFailure(format!(
                "eigenpair {idx} residual {residual:.3e} exceeds {:.3e}",
                EIGEN_RESIDUAL_TOL * scale
            )));
        }
    }
    let mut vals: Vec<f64> = decomp.eigenvalues.iter().copied().collect();
    vals.sort_unstable_by(f64::total_cmp);
    Ok(vals)
}

/// The matrix with its last row and column deleted.
pub fn principal_submatrix(x: &DMatrix<Complex<f64>>) -> Result<DMatrix<Complex<f64>>, SimError> {
    let n = x.nrows();
    if x.ncols() != n || n < 2 {
        return Err(SimError::InvalidSpec(format!(
            "principal submatrix needs a square matrix of size >= 2, got {}x{}",
            n,
            x.ncols()
        )));
    }
    Ok(x.view((0, 0), (n - 1, n - 1)).into_owned())
}

/// Default interlacing tolerance for a spectrum: `1e−8·(1 + max|λ_i|)`.
pub fn interlacing_tol(lambda: &[f64]) -> f64 {
    1e-8 * (1.0 + lambda.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// `λ_i ≤ λ̃_i + tol` and `λ̃_i ≤ λ_{i+1} + tol` for all `i`; both inputs
/// ascending with lengths `N` and `N − 1`.
pub fn check_interlacing(lambda: &[f64], lambda_tilde: &[f64], tol: f64) -> Result<bool, SimError> {
    if lambda_tilde.len() + 1 != lambda.len() {
        return Err(SimError::InvalidSpec(format!(
            "interlacing check needs lengths N and N-1, got {} and {}",
            lambda.len(),
            lambda_tilde.len()
        )));
    }
    for i in 0..lambda_tilde.len() {
        if lambda[i] > lambda_tilde[i] + tol || lambda_tilde[i] > lambda[i + 1] + tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Run one trial: sample, take both spectra, and check interlacing. Also
/// verifies the trace telescope `M₁(κ) = X_NN` (sum of eigenvalues minus sum
/// of submatrix eigenvalues equals the deleted diagonal entry), which pins
/// the eigensolver's absolute accuracy every single sample.
pub fn sample_spectra(spec: &EnsembleSpec, trial: u64) -> Result<SpectrumSample, SimError> {
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    rng.set_stream(trial);
    let x = sample_matrix(spec, &mut rng);
    let lambda = eigen_hermitian(&x)?;
    let sub = principal_submatrix(&x)?;
    let lambda_tilde = eigen_hermitian(&sub)?;

    let m1: f64 = lambda.iter().sum::<f64>() - lambda_tilde.iter().sum::<f64>();
    let corner = x[(spec.n - 1, spec.n - 1)].re;
    let scale = 1.0 + lambda.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if (m1 - corner).abs() > 1e-10 * scale * (spec.n as f64).sqrt() {
        return Err(SimError::Numerical {
            trial,
            detail: format!(
                "trace telescope: sum difference {m1:.15e} vs corner entry {corner:.15e}"
            ),
        });
    }

    let ok = check_interlacing(&lambda, &lambda_tilde, interlacing_tol(&lambda))?;
    Ok(SpectrumSample {
        lambda,
        lambda_tilde,
        interlacing_ok: ok,
        seed_used: spec.seed,
        trial,
    })
}

/// The deterministic limiting free cumulants an experiment is compared
/// against: semicircle (`fc₂ = 1`) for GUE, the constant `c = samples/N` for
/// Wishart, and the cumulants of the empirical spectral distribution for a
/// fixed rotated spectrum.
pub fn prediction_cumulants(
    spec: &EnsembleSpec,
    k_max: usize,
) -> Result<FreeCumulantSequence<f64>, SimError> {
    if k_max == 0 || k_max > MAX_SIM_KMAX {
        return Err(SimError::InvalidSpec(format!(
            "k_max must be in 1..={MAX_SIM_KMAX}, got {k_max}"
        )));
    }
    let fc = match &spec.family {
        EnsembleFamily::Gue => {
            let mut v = vec![0.0; k_max];
            if k_max >= 2 {
                v[1] = 1.0;
            }
            FreeCumulantSequence::new(v)?
        }
        EnsembleFamily::Wishart { .. } => {
            let c = spec.wishart_ratio().expect("wishart family");
            FreeCumulantSequence::new(vec![c; k_max])?
        }
        EnsembleFamily::FixedSpectrumRotated { spectrum } => {
            let n = spectrum.len() as f64;
            let mut eed = Vec::with_capacity(k_max);
            for k in 1..=k_max {
                eed.push(spectrum.iter().map(|x| x.powi(k as i32)).sum::<f64>() / n);
            }
            let m = MomentSequence::new(SequenceKind::Transition, eed)?;
            moments_to_cumulants(&m)?
        }
    };
    Ok(fc)
}

/// Monte Carlo estimate of `E[M_k(κ_N)]` and `E[M_k(κ_N)²]` for
/// `k = 1..k_max`, with the `ℓ = 1, 2` limit predictions and z-scores.
/// Aborts on the first interlacing violation.
pub fn run_concentration_experiment(
    spec: &EnsembleSpec,
    k_max: usize,
    trials: u64,
) -> Result<ExperimentResult, SimError> {
    if trials < MIN_TRIALS {
        return Err(SimError::InvalidSpec(format!(
            "need at least {MIN_TRIALS} trials for stable variance estimates, got {trials}"
        )));
    }
    let fc = prediction_cumulants(spec, k_max)?;

    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<Vec<f64>, SimError> {
            let s = sample_spectra(spec, t)?;
            if !s.interlacing_ok {
                return Err(SimError::Interlacing {
                    trial: t,
                    detail: describe_interlacing_failure(&s),
                });
            }
            Ok(rayleigh_moments(&s.lambda, &s.lambda_tilde, k_max)?
                .values()
                .to_vec())
        })
        .collect::<Result<_, _>>()?;

    let t = trials as f64;
    let mut rows = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let xs: Vec<f64> = per_trial.iter().map(|m| m[k - 1]).collect();
        let mean = xs.iter().sum::<f64>() / t;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (t - 1.0);
        let stderr = (var / t).sqrt();
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let mean_sq = sq.iter().sum::<f64>() / t;
        let var_sq = sq.iter().map(|x| (x - mean_sq) * (x - mean_sq)).sum::<f64>() / (t - 1.0);
        let stderr_sq = (var_sq / t).sqrt();

        let pred_l1 = rayleigh_moment_limit(&fc, k, 1)?;
        let pred_l2 = rayleigh_moment_limit(&fc, k, 2)?;
        rows.push(MomentRow {
            k,
            mean,
            var,
            stderr,
            mean_sq,
            stderr_sq,
            pred_l1,
            pred_l2,
            z1: gated_z(mean, pred_l1, stderr),
            z2: gated_z(mean_sq, pred_l2, stderr_sq),
        });
    }
    Ok(ExperimentResult {
        spec: spec.clone(),
        k_max,
        trials,
        rows,
        interlacing_violations: 0,
    })
}

/// `(value − prediction)/stderr` with the standard error floored at
/// `1e−12·(1 + |prediction|)` so exactly-deterministic ensembles (where the
/// sample variance vanishes) produce finite z-scores instead of 0/0.
fn gated_z(value: f64, prediction: f64, stderr: f64) -> f64 {
    let floor = 1e-12 * (1.0 + prediction.abs());
    (value - prediction) / stderr.max(floor)
}

fn describe_interlacing_failure(s: &SpectrumSample) -> String {
    let tol = interlacing_tol(&s.lambda);
    for i in 0..s.lambda_tilde.len() {
        if s.lambda[i] > s.lambda_tilde[i] + tol {
            return format!(
                "lambda[{i}] = {:.15e} exceeds lambda_tilde[{i}] = {:.15e} (tol {tol:.3e})",
                s.lambda[i], s.lambda_tilde[i]
            );
        }
        if s.lambda_tilde[i] > s.lambda[i + 1] + tol {
            return format!(
                "lambda_tilde[{i}] = {:.15e} exceeds lambda[{}] = {:.15e} (tol {tol:.3e})",
                s.lambda_tilde[i],
                i + 1,
                s.lambda[i + 1]
            );
        }
    }
    "unlocalized".into()
}

/// Empirical `E[M_k(κ_N)²]` with its standard error, prediction, and z-score.
#[derive(Clone, Debug, Serialize)]
pub struct SecondMomentEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub prediction: f64,
    pub z: f64,
}

pub fn estimate_second_moment(
    spec: &EnsembleSpec,
    k: usize,
    trials: u64,
) -> Result<SecondMomentEstimate, SimError> {
    let result = run_concentration_experiment(spec, k, trials)?;
    let row = result.rows.last().expect("k >= 1 produces rows");
    Ok(SecondMomentEstimate {
        mean: row.mean_sq,
        stderr: row.stderr_sq,
        prediction: row.pred_l2,
        z: row.z2,
    })
}

/// Monte Carlo mean and standard error.
#[derive(Clone, Debug)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

/// Monte Carlo estimate of `Re E Tr[(A₁ U B₁ U*) ⋯ (A_k U B_k U*)]` over
/// Haar `U`, the sampled counterpart of the exact Weingarten expansion.
/// Same per-trial stream discipline as the experiments.
pub fn haar_trace_moment_mc(
    a: &[DMatrix<Complex<f64>>],
    b: &[DMatrix<Complex<f64>>],
    trials: u64,
    seed: u64,
) -> Result<McEstimate, SimError> {
    let k = a.len();
    if k == 0 || b.len() != k {
        return Err(SimError::InvalidSpec(format!(
            "need matching nonempty factor lists, got {} and {}",
            k,
            b.len()
        )));
    }
    let n = a[0].nrows();
    if a.iter().chain(b.iter()).any(|m| m.nrows() != n || m.ncols() != n) {
        return Err(SimError::InvalidSpec(
            "all factors must be square of one common size".into(),
        ));
    }
    if trials < 2 {
        return Err(SimError::InvalidSpec("need at least 2 draws".into()));
    }
    let values: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(t);
            let u = sample_haar_unitary(n, &mut rng);
            let u_adj = u.adjoint();
            let mut prod = DMatrix::<Complex<f64>>::identity(n, n);
            for i in 0..k {
                prod = prod * &a[i] * &u * &b[i] * &u_adj;
            }
            prod.trace().re
        })
        .collect();
    let t = trials as f64;
    let mean = values.iter().sum::<f64>() / t;
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (t - 1.0);
    Ok(McEstimate {
        mean,
        stderr: (var / t).sqrt(),
        trials,
    })
}
