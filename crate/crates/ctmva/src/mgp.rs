//! Multivariate Gaussian process sampling and the correlation-recovery
//! experiment.
//!
//! Curves are drawn from a matrix-variate normal with Kronecker covariance
//! `Σ ⊗ Γ`: `Γ` is a squared-exponential autocorrelation over time with
//! `Γ(t,t) = 1`, `Σ` the between-curve covariance. Sampling factors the two
//! matrices separately, `X = 1μᵀ + L_Γ Z L_Σᵀ`, avoiding the np×np matrix.

use crate::basis::{make_basis, BasisKind, Interval};
use crate::ctstats::{cor_from_cov, ct_cor};
use crate::smoothing::{smooth_dataset, Lambda, LambdaPolicy, LongSeries};
use crate::{maybe_par_map_indexed, Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Gaussian-process generator: constant mean, squared-exponential temporal
/// kernel with unit variance, between-curve covariance `sigma`.
#[derive(Debug, Clone)]
pub struct MgpSpec {
    pub mu: DVector<f64>,
    pub sigma: DMatrix<f64>,
    pub ell: f64,
}

impl MgpSpec {
    pub fn new(mu: DVector<f64>, sigma: DMatrix<f64>, ell: f64) -> Result<Self> {
        let p = mu.len();
        if sigma.nrows() != p || sigma.ncols() != p {
            return Err(Error::Dimension(format!(
                "sigma is {}x{}, mu has length {p}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        if (sigma.transpose() - &sigma).amax() > 1e-12 * sigma.amax().max(1.0) {
            return Err(Error::Covariance("sigma must be symmetric".into()));
        }
        if !(ell > 0.0) {
            return Err(Error::Domain(format!("length parameter must be positive, got {ell}")));
        }
        Ok(Self { mu, sigma, ell })
    }

    /// Pair spec with correlation `rho`: p = 2, zero mean, unit variances.
    pub fn pair(rho: f64, ell: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&rho) {
            return Err(Error::Domain(format!("rho must be in [-1, 1], got {rho}")));
        }
        Self::new(
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]),
            ell,
        )
    }

    pub fn p(&self) -> usize {
        self.mu.len()
    }
}

/// Simulation experiment configuration.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub mgp: MgpSpec,
    /// Number of common observation times.
    pub n: usize,
    /// Observation noise standard deviation.
    pub sigma: f64,
    pub n_reps: usize,
    /// Spline basis dimension used by the smoothing step.
    pub k_basis: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(mgp: MgpSpec, n: usize, sigma: f64, n_reps: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("need at least 2 observation times, got {n}")));
        }
        if sigma < 0.0 {
            return Err(Error::Domain(format!("negative noise sd {sigma}")));
        }
        if n_reps < 1 {
            return Err(Error::Domain("need at least 1 replicate".into()));
        }
        Ok(Self {
            mgp,
            n,
            sigma,
            n_reps,
            k_basis: 40,
            seed,
        })
    }
}

/// One replicate's outcome: realized continuous-time correlation of the true
/// curves, ordinary Pearson correlation of the noisy samples, and the
/// smoothing-based continuous-time estimate.
#[derive(Debug, Clone, Copy)]
pub struct SimRecord {
    pub r_star: f64,
    pub r_hat: f64,
    pub r_hat_star: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SimSummary {
    pub median_abs_err_ordinary: f64,
    pub median_abs_err_ct: f64,
    /// RMSE(smoothed CT estimate) / RMSE(ordinary correlation).
    pub rmse_ratio: f64,
}

fn se_kernel(ell: f64, s: f64, t: f64) -> f64 {
    let d = (s - t) / ell;
    (-0.5 * d * d).exp()
}

/// Cholesky factor of the kernel Gram matrix, with escalating diagonal
/// jitter from 1e-10 to 1e-6. Squared-exponential Gram matrices on dense
/// grids are severely ill conditioned without it.
fn kernel_chol(ell: f64, times: &[f64]) -> Result<Cholesky<f64, Dyn>> {
    let n = times.len();
    let mut g = DMatrix::from_fn(n, n, |i, j| se_kernel(ell, times[i], times[j]));
    let mut jitter = 1e-10;
    loop {
        if let Some(chol) = g.clone().cholesky() {
            return Ok(chol);
        }
        if jitter > 1e-6 {
            return Err(Error::Covariance(format!(
                "kernel gram matrix not positive definite even with jitter 1e-6 (ell = {ell})"
            )));
        }
        for i in 0..n {
            g[(i, i)] += jitter;
        }
        jitter *= 10.0;
    }
}

fn sigma_chol(sigma: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    let p = sigma.nrows();
    let mut s = sigma.clone();
    let scale = s.amax().max(f64::MIN_POSITIVE);
    let mut jitter = 1e-12 * scale;
    loop {
        if let Some(chol) = s.clone().cholesky() {
            return Ok(chol);
        }
        if jitter > 1e-6 * scale {
            return Err(Error::Covariance("between-curve covariance is not positive semidefinite".into()));
        }
        for i in 0..p {
            s[(i, i)] += jitter;
        }
        jitter *= 10.0;
    }
}

fn draw_matrix(rng: &mut ChaCha8Rng, nrows: usize, ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(nrows, ncols, |_, _| rng.sample(StandardNormal))
}

fn sample_with(
    spec: &MgpSpec,
    lg: &Cholesky<f64, Dyn>,
    ls: &Cholesky<f64, Dyn>,
    rng: &mut ChaCha8Rng,
) -> DMatrix<f64> {
    let n = lg.l_dirty().nrows();
    let p = spec.p();
    let z = draw_matrix(rng, n, p);
    let mut x = lg.l() * z * ls.l().transpose();
    for u in 0..p {
        x.column_mut(u).add_scalar_mut(spec.mu[u]);
    }
    x
}

/// Draw one realization of the process at the given times; row q is `x(t_q)ᵀ`.
pub fn sample_mgp(spec: &MgpSpec, times: &[f64], seed: u64) -> Result<DMatrix<f64>> {
    for w in times.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Domain("sample times must be strictly increasing".into()));
        }
    }
    let lg = kernel_chol(spec.ell, times)?;
    let ls = sigma_chol(&spec.sigma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample_with(spec, &lg, &ls, &mut rng))
}

/// Add i.i.d. Gaussian noise of standard deviation `sigma` to every entry.
pub fn observe_noisy(x: &DMatrix<f64>, sigma: f64, seed: u64) -> Result<DMatrix<f64>> {
    if sigma < 0.0 {
        return Err(Error::Domain(format!("negative noise sd {sigma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = draw_matrix(&mut rng, x.nrows(), x.ncols());
    Ok(x + noise * sigma)
}

/// Correlation matrix of densely sampled curves, with time integrals taken
/// by the trapezoidal rule on the (equally spaced) sample grid.
pub fn realized_cor(x_dense: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = x_dense.nrows();
    let p = x_dense.ncols();
    if n < 100 {
        return Err(Error::Domain(format!(
            "realized_cor needs at least 100 grid points for quadrature accuracy, got {n}"
        )));
    }
    // trapezoid weights on a unit-length grid
    let h = 1.0 / (n - 1) as f64;
    let weight = |g: usize| if g == 0 || g == n - 1 { 0.5 * h } else { h };
    let mut mean = DVector::zeros(p);
    for g in 0..n {
        mean += x_dense.row(g).transpose() * weight(g);
    }
    let mut cov = DMatrix::zeros(p, p);
    for g in 0..n {
        let d = x_dense.row(g).transpose() - &mean;
        cov.syger(weight(g), &d, &d, 1.0);
    }
    for i in 0..p {
        for j in (i + 1)..p {
            cov[(i, j)] = cov[(j, i)];
        }
    }
    let names: Vec<String> = (0..p).map(|i| format!("curve{}", i + 1)).collect();
    cor_from_cov(&cov, &mean, &names)
}

const DENSE_GRID: usize = 4096;

/// Run the correlation-recovery experiment: per replicate, draw a curve pair
/// on a dense grid, observe a noisy subset, and compare the ordinary Pearson
/// estimate against the smoothing-based continuous-time estimate, both
/// scored against the realized correlation of the true curves.
pub fn run_correlation_experiment(config: &SimConfig) -> Result<(Vec<SimRecord>, SimSummary)> {
    if config.mgp.p() != 2 {
        return Err(Error::Dimension(format!(
            "the experiment compares one pair of curves; got p = {}",
            config.mgp.p()
        )));
    }
    let grid: Vec<f64> = (0..DENSE_GRID)
        .map(|g| g as f64 / (DENSE_GRID - 1) as f64)
        .collect();
    // Observation times are a subset of the dense grid, so one realization
    // serves both the r* oracle and the noisy-sample estimators, and the
    // kernel factorization is shared by all replicates.
    let obs_idx: Vec<usize> = (0..config.n)
        .map(|i| (i as f64 * (DENSE_GRID - 1) as f64 / (config.n - 1) as f64).round() as usize)
        .collect();
    let lg = kernel_chol(config.mgp.ell, &grid)?;
    let ls = sigma_chol(&config.mgp.sigma)?;
    let basis = make_basis(
        BasisKind::BSpline,
        Interval::new(0.0, 1.0)?,
        config.k_basis,
        4,
    )?;

    let records = maybe_par_map_indexed(config.n_reps, |rep| -> Result<SimRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(rep as u64 + 1);
        let x_dense = sample_with(&config.mgp, &lg, &ls, &mut rng);
        let r_star = realized_cor(&x_dense)?[(0, 1)];
        // noisy observations at the subset
        let noise = draw_matrix(&mut rng, config.n, 2) * config.sigma;
        let mut y = DMatrix::zeros(config.n, 2);
        for (q, &g) in obs_idx.iter().enumerate() {
            for u in 0..2 {
                y[(q, u)] = x_dense[(g, u)] + noise[(q, u)];
            }
        }
        let r_hat = pearson(y.column(0).as_slice(), y.column(1).as_slice());
        // smoothing-based continuous-time estimate
        let series: Vec<LongSeries> = (0..2)
            .map(|u| {
                let obs: Vec<(f64, f64)> =
                    obs_idx.iter().enumerate().map(|(q, &g)| (grid[g], y[(q, u)])).collect();
                LongSeries::new(format!("curve{}", u + 1), obs)
            })
            .collect();
        let ds = smooth_dataset(&series, &basis, LambdaPolicy::PerSeries, Lambda::Auto)
            .map_err(|e| Error::Series {
                name: format!("replicate {rep}"),
                source: Box::new(e),
            })?;
        let r_hat_star = ct_cor(&ds)?[(0, 1)].clamp(-1.0, 1.0);
        Ok(SimRecord {
            r_star,
            r_hat,
            r_hat_star,
        })
    });
    let records: Vec<SimRecord> = records.into_iter().collect::<Result<_>>()?;

    let mut err_ord: Vec<f64> = records.iter().map(|r| (r.r_hat - r.r_star).abs()).collect();
    let mut err_ct: Vec<f64> = records.iter().map(|r| (r.r_hat_star - r.r_star).abs()).collect();
    err_ord.sort_by(|a, b| a.partial_cmp(b).unwrap());
    err_ct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rmse = |errs: &[f64]| (errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt();
    let summary = SimSummary {
        median_abs_err_ordinary: median_sorted(&err_ord),
        median_abs_err_ct: median_sorted(&err_ct),
        rmse_ratio: rmse(&err_ct) / rmse(&err_ord),
    };
    Ok((records, summary))
}

fn median_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return 0.0;
    }
    (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
}
