//! Continuous-time mean, covariance, correlation, centering, detrending,
//! and overlap-aware pairwise correlation of irregular series.
//!
//! All statistics reduce to the basis moments of a region: `x̄* = Cᵀφ̄_S`,
//! `S* = CᵀQ_S C`, `R* = D⁻¹ᐟ² S* D⁻¹ᐟ²`.

use crate::basis::{
    constant_rep_vector, make_basis, region_moments, BasisKind, Interval, Region,
};
use crate::smoothing::{smooth_series, FDataset, Lambda, LongSeries};
use crate::{maybe_par_map, Error, Result};
use nalgebra::{DMatrix, DVector};

/// CT mean over the full interval: `Cᵀφ̄`.
pub fn ct_mean(data: &FDataset) -> Result<DVector<f64>> {
    ct_mean_region(data, &Region::full(data.basis().interval()))
}

/// CT mean over a region: `Cᵀφ̄_S`.
pub fn ct_mean_region(data: &FDataset, region: &Region) -> Result<DVector<f64>> {
    let mc = region_moments(data.basis(), region)?;
    Ok(data.coef().transpose() * mc.phi_bar())
}

/// CT covariance over the full interval: `S* = CᵀQC`.
pub fn ct_cov(data: &FDataset) -> Result<DMatrix<f64>> {
    ct_cov_region(data, &Region::full(data.basis().interval()))
}

/// CT covariance over a region: `CᵀQ_S C`.
pub fn ct_cov_region(data: &FDataset, region: &Region) -> Result<DMatrix<f64>> {
    let mc = region_moments(data.basis(), region)?;
    let s = data.coef().transpose() * mc.q() * data.coef();
    Ok(symmetrize(s))
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let mt = m.transpose();
    (m + mt) * 0.5
}

/// CT correlation matrix `R* = D⁻¹ᐟ² S* D⁻¹ᐟ²`.
///
/// A curve whose CT variance is below `1e-14` times the largest variance, or
/// below `1e-14` times its own squared CT mean, is treated as constant and
/// rejected by name.
pub fn ct_cor(data: &FDataset) -> Result<DMatrix<f64>> {
    let s = ct_cov(data)?;
    let m = ct_mean(data)?;
    cor_from_cov(&s, &m, data.names())
}

pub(crate) fn cor_from_cov(
    s: &DMatrix<f64>,
    mean: &DVector<f64>,
    names: &[String],
) -> Result<DMatrix<f64>> {
    let p = s.nrows();
    let max_var = (0..p).map(|i| s[(i, i)]).fold(0.0_f64, f64::max);
    let mut d = DVector::zeros(p);
    for i in 0..p {
        let tol = 1e-14 * (max_var + mean[i] * mean[i]).max(f64::MIN_POSITIVE);
        if s[(i, i)] <= tol {
            let name = names.get(i).cloned().unwrap_or_else(|| format!("#{i}"));
            return Err(Error::DegenerateVariance(name));
        }
        d[i] = 1.0 / s[(i, i)].sqrt();
    }
    let mut r = DMatrix::zeros(p, p);
    for i in 0..p {
        r[(i, i)] = 1.0;
        for j in (i + 1)..p {
            let v = s[(i, j)] * (d[i] * d[j]);
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    Ok(r)
}

/// Coefficient-level centering: replaces `C` by `(I_K - wφ̄ᵀ)C`, making the
/// CT mean of every curve zero.
pub fn center(data: &FDataset) -> Result<FDataset> {
    let mc = region_moments(data.basis(), &Region::full(data.basis().interval()))?;
    let w = constant_rep_vector(data.basis());
    // C - w (φ̄ᵀ C)
    let mean_row = mc.phi_bar().transpose() * data.coef();
    let coef = data.coef() - w * mean_row;
    Ok(data.with_coef(coef))
}

/// Remove the cross-sectional mean curve: each column of `C` becomes
/// `c_u - c̄` so the average of the detrended curves is identically zero.
pub fn detrend_common(data: &FDataset) -> Result<FDataset> {
    let p = data.p();
    if p < 2 {
        return Err(Error::Domain("detrend_common requires at least 2 curves".into()));
    }
    let k = data.coef().nrows();
    let mut cbar = DVector::zeros(k);
    for u in 0..p {
        cbar += data.coef().column(u);
    }
    cbar /= p as f64;
    let mut coef = data.coef().clone();
    for mut col in coef.column_iter_mut() {
        col -= &cbar;
    }
    Ok(data.with_coef(coef))
}

/// Pointwise R² of fitting every curve by the cross-sectional mean curve,
/// evaluated on an equally spaced grid. Values near 1 indicate a strong
/// common trend worth removing before correlation analysis.
pub fn trend_r2(data: &FDataset, grid_size: usize) -> Result<f64> {
    let p = data.p();
    if p < 2 {
        return Err(Error::Domain("trend_r2 requires at least 2 curves".into()));
    }
    let iv = data.basis().interval();
    let times: Vec<f64> = (0..grid_size)
        .map(|i| iv.lo() + iv.length() * i as f64 / (grid_size - 1) as f64)
        .collect();
    let x = data.eval(&times)?; // grid x p
    let grand = x.iter().sum::<f64>() / (x.len() as f64);
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for g in 0..times.len() {
        let row_mean = x.row(g).sum() / p as f64;
        for u in 0..p {
            ss_res += (x[(g, u)] - row_mean).powi(2);
            ss_tot += (x[(g, u)] - grand).powi(2);
        }
    }
    if ss_tot <= 0.0 {
        return Err(Error::DegenerateVariance("all curves identical and constant".into()));
    }
    Ok(1.0 - ss_res / ss_tot)
}

/// Outcome of an overlap-gated pairwise CT correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairStatus {
    Ok,
    InsufficientOverlap,
    InsufficientObs,
}

impl std::fmt::Display for PairStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PairStatus::Ok => write!(f, "ok"),
            PairStatus::InsufficientOverlap => write!(f, "insufficient_overlap"),
            PairStatus::InsufficientObs => write!(f, "insufficient_obs"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PairCorResult {
    pub r: Option<f64>,
    pub overlap: Option<Interval>,
    pub n_u: usize,
    pub n_v: usize,
    pub status: PairStatus,
}

/// Gating and basis-sizing rules for pairwise correlation screening.
#[derive(Debug, Clone, Copy)]
pub struct PairCorConfig {
    /// Minimum observations per series inside the overlap window.
    pub min_obs: usize,
    /// Minimum length of the overlap window.
    pub min_overlap: f64,
    /// Cap on the B-spline dimension built on the overlap window.
    pub max_k: usize,
}

impl Default for PairCorConfig {
    fn default() -> Self {
        Self {
            min_obs: 8,
            min_overlap: 12.0,
            max_k: 40,
        }
    }
}

/// Correlation of two irregular series over the overlap of their time
/// ranges. Soft failure statuses (rather than errors) support batch
/// screening of many pairs.
pub fn pairwise_ct_cor(u: &LongSeries, v: &LongSeries, cfg: &PairCorConfig) -> Result<PairCorResult> {
    let (ulo, uhi) = u
        .time_range()
        .ok_or_else(|| Error::Domain(format!("series '{}' is empty", u.name)))?;
    let (vlo, vhi) = v
        .time_range()
        .ok_or_else(|| Error::Domain(format!("series '{}' is empty", v.name)))?;
    let lo = ulo.max(vlo);
    let hi = uhi.min(vhi);
    if hi - lo < cfg.min_overlap {
        return Ok(PairCorResult {
            r: None,
            overlap: None,
            n_u: 0,
            n_v: 0,
            status: PairStatus::InsufficientOverlap,
        });
    }
    let window = Interval::new(lo, hi)?;
    let clip = |s: &LongSeries| -> Vec<(f64, f64)> {
        s.obs
            .iter()
            .copied()
            .filter(|&(t, _)| t >= lo && t <= hi)
            .collect()
    };
    let u_obs = clip(u);
    let v_obs = clip(v);
    if u_obs.len() < cfg.min_obs || v_obs.len() < cfg.min_obs {
        return Ok(PairCorResult {
            r: None,
            overlap: Some(window),
            n_u: u_obs.len(),
            n_v: v_obs.len(),
            status: PairStatus::InsufficientObs,
        });
    }
    let n_min = u_obs.len().min(v_obs.len());
    let k = (n_min / 2).clamp(8, cfg.max_k);
    let basis = make_basis(BasisKind::BSpline, window, k, 4)?;
    let fu = smooth_series(&LongSeries::new(u.name.clone(), u_obs.clone()), &basis, Lambda::Auto)?;
    let fv = smooth_series(&LongSeries::new(v.name.clone(), v_obs.clone()), &basis, Lambda::Auto)?;
    let mut coef = DMatrix::zeros(k, 2);
    coef.column_mut(0).copy_from(&fu.coef);
    coef.column_mut(1).copy_from(&fv.coef);
    let ds = FDataset::new(basis, coef, vec![u.name.clone(), v.name.clone()])?;
    let r = ct_cor(&ds)?[(0, 1)];
    Ok(PairCorResult {
        r: Some(r.clamp(-1.0, 1.0)),
        overlap: Some(window),
        n_u: u_obs.len(),
        n_v: v_obs.len(),
        status: PairStatus::Ok,
    })
}

/// All-pairs batch of [`pairwise_ct_cor`]; pairs are processed in parallel
/// when available, output ordered by (i, j).
pub fn pairwise_ct_cor_batch(
    series: &[LongSeries],
    cfg: &PairCorConfig,
) -> Vec<(usize, usize, Result<PairCorResult>)> {
    let mut pairs = Vec::new();
    for i in 0..series.len() {
        for j in (i + 1)..series.len() {
            pairs.push((i, j));
        }
    }
    maybe_par_map(pairs, |(i, j)| {
        (i, j, pairwise_ct_cor(&series[i], &series[j], cfg))
    })
}
