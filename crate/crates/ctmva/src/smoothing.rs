//! Penalized least-squares smoothing of noisy, irregular series.
//!
//! Each series is fitted by minimizing `Σᵢ (zᵢ - cᵀφ(tᵢ))² + λ cᵀPc` with the
//! curvature penalty `P = ∫ φ''φ''ᵀ`. The smoothing parameter may be fixed or
//! selected by generalized cross-validation over a log-spaced grid.

use crate::basis::{eval_basis, penalty_matrix, BasisSystem};
use crate::{maybe_par_map, Error, Result};
use nalgebra::{DMatrix, DVector};

/// One variable's observations in long format. Times need not be equally
/// spaced nor shared across variables.
#[derive(Debug, Clone)]
pub struct LongSeries {
    pub name: String,
    /// (time, value) pairs.
    pub obs: Vec<(f64, f64)>,
}

impl LongSeries {
    pub fn new(name: impl Into<String>, obs: Vec<(f64, f64)>) -> Self {
        Self { name: name.into(), obs }
    }

    pub fn time_range(&self) -> Option<(f64, f64)> {
        if self.obs.is_empty() {
            return None;
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &(t, _) in &self.obs {
            lo = lo.min(t);
            hi = hi.max(t);
        }
        Some((lo, hi))
    }
}

/// Smoothing parameter: fixed, or selected by GCV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda {
    Auto,
    Fixed(f64),
}

/// Whether `smooth_dataset` picks one λ jointly or one per series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaPolicy {
    Shared,
    PerSeries,
}

/// Result of smoothing a single series.
#[derive(Debug, Clone)]
pub struct SmoothFit {
    pub coef: DVector<f64>,
    pub lambda: f64,
    pub gcv: f64,
    /// Effective degrees of freedom, tr(H).
    pub dof: f64,
    pub resid_var: f64,
}

/// A basis system together with a K×p coefficient matrix: `x(t) = Cᵀφ(t)`.
#[derive(Debug, Clone)]
pub struct FDataset {
    basis: BasisSystem,
    coef: DMatrix<f64>,
    names: Vec<String>,
}

impl FDataset {
    pub fn new(basis: BasisSystem, coef: DMatrix<f64>, names: Vec<String>) -> Result<Self> {
        if coef.nrows() != basis.k() {
            return Err(Error::Dimension(format!(
                "coefficient matrix has {} rows, basis dimension is {}",
                coef.nrows(),
                basis.k()
            )));
        }
        if names.len() != coef.ncols() {
            return Err(Error::Dimension(format!(
                "{} names for {} coefficient columns",
                names.len(),
                coef.ncols()
            )));
        }
        if coef.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite coefficient".into()));
        }
        Ok(Self { basis, coef, names })
    }

    pub fn basis(&self) -> &BasisSystem {
        &self.basis
    }

    pub fn coef(&self) -> &DMatrix<f64> {
        &self.coef
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Number of curves.
    pub fn p(&self) -> usize {
        self.coef.ncols()
    }

    /// Evaluate all curves at the given times; row q holds `x(t_q)ᵀ`.
    pub fn eval(&self, times: &[f64]) -> Result<DMatrix<f64>> {
        Ok(eval_basis(&self.basis, times)? * &self.coef)
    }

    /// Replace the coefficient matrix, keeping basis and names.
    pub fn with_coef(&self, coef: DMatrix<f64>) -> Self {
        Self {
            basis: self.basis.clone(),
            coef,
            names: self.names.clone(),
        }
    }
}

/// Precomputed normal-equation pieces for one series.
struct NormalEq {
    xtx: DMatrix<f64>,
    xtz: DVector<f64>,
    z_sq: f64,
    n: usize,
}

fn normal_eq(series: &LongSeries, basis: &BasisSystem) -> Result<NormalEq> {
    if series.obs.is_empty() {
        return Err(Error::Domain(format!("series '{}' has no observations", series.name)));
    }
    let times: Vec<f64> = series.obs.iter().map(|&(t, _)| t).collect();
    for &t in &times {
        if !basis.interval().contains(t) {
            return Err(Error::Domain(format!(
                "series '{}': observation time {t} outside basis interval",
                series.name
            )));
        }
    }
    let phi = eval_basis(basis, &times)?;
    let z = DVector::from_iterator(series.obs.len(), series.obs.iter().map(|&(_, v)| v));
    Ok(NormalEq {
        xtx: phi.transpose() * &phi,
        xtz: phi.transpose() * &z,
        z_sq: z.dot(&z),
        n: series.obs.len(),
    })
}

/// Fit at a fixed λ. Returns the fit along with its GCV score.
fn fit_at_lambda(eq: &NormalEq, penalty: &DMatrix<f64>, lambda: f64) -> Result<SmoothFit> {
    let k = eq.xtx.nrows();
    let a = &eq.xtx + penalty * lambda;
    let chol = a.clone().cholesky().ok_or_else(|| {
        Error::Rank(format!(
            "design matrix rank-deficient at lambda = {lambda}; increase lambda or add observations"
        ))
    })?;
    let coef = chol.solve(&eq.xtz);
    // rss = zᵀz - 2cᵀΦᵀz + cᵀΦᵀΦc
    let rss = (eq.z_sq - 2.0 * coef.dot(&eq.xtz)
        + (coef.transpose() * &eq.xtx * &coef)[(0, 0)])
        .max(0.0);
    // dof = tr[(ΦᵀΦ + λP)⁻¹ ΦᵀΦ]
    let h = chol.solve(&eq.xtx);
    let dof: f64 = (0..k).map(|i| h[(i, i)]).sum();
    let n = eq.n as f64;
    let denom = n - dof;
    let gcv = if denom > 1e-8 {
        n * rss / (denom * denom)
    } else {
        f64::INFINITY
    };
    let resid_var = if n > dof { rss / (n - dof) } else { 0.0 };
    Ok(SmoothFit {
        coef,
        lambda,
        gcv,
        dof,
        resid_var,
    })
}

/// GCV search grid: 50 log-spaced values of λ spanning `[1e-8, 1e8]` times a
/// scale factor matching the penalty to the design.
fn lambda_grid(eq: &NormalEq, penalty: &DMatrix<f64>) -> Vec<f64> {
    let k = eq.xtx.nrows();
    let tr_xtx: f64 = (0..k).map(|i| eq.xtx[(i, i)]).sum();
    let tr_p: f64 = (0..k).map(|i| penalty[(i, i)]).sum();
    let scale = if tr_p > 0.0 && tr_xtx > 0.0 {
        tr_xtx / tr_p
    } else {
        1.0
    };
    (0..50)
        .map(|i| scale * 10f64.powf(-8.0 + 16.0 * i as f64 / 49.0))
        .collect()
}

/// Smooth one series against a basis, with fixed or GCV-selected λ.
pub fn smooth_series(series: &LongSeries, basis: &BasisSystem, lambda: Lambda) -> Result<SmoothFit> {
    let eq = normal_eq(series, basis)?;
    let penalty = penalty_matrix(basis)?;
    match lambda {
        Lambda::Fixed(l) => {
            if l < 0.0 {
                return Err(Error::Domain(format!("negative lambda {l}")));
            }
            fit_at_lambda(&eq, &penalty, l)
        }
        Lambda::Auto => {
            if eq.n < 4 {
                return Err(Error::Domain(format!(
                    "series '{}': GCV selection needs at least 4 observations, got {}",
                    series.name, eq.n
                )));
            }
            let mut best: Option<SmoothFit> = None;
            for l in lambda_grid(&eq, &penalty) {
                if let Ok(fit) = fit_at_lambda(&eq, &penalty, l) {
                    if best.as_ref().map_or(true, |b| fit.gcv < b.gcv) {
                        best = Some(fit);
                    }
                }
            }
            best.ok_or_else(|| {
                Error::Rank(format!("series '{}': no lambda on the grid yields a solvable fit", series.name))
            })
        }
    }
}

/// Smooth a list of series over a common basis into an [`FDataset`].
///
/// With `LambdaPolicy::Shared` and `Lambda::Auto`, a single λ minimizing the
/// summed GCV across series is chosen; `PerSeries` selects independently.
pub fn smooth_dataset(
    series_list: &[LongSeries],
    basis: &BasisSystem,
    policy: LambdaPolicy,
    lambda: Lambda,
) -> Result<FDataset> {
    if series_list.is_empty() {
        return Err(Error::Domain("no series to smooth".into()));
    }
    let penalty = penalty_matrix(basis)?;
    let fits: Vec<Result<SmoothFit>> = match (policy, lambda) {
        (LambdaPolicy::Shared, Lambda::Auto) => {
            let eqs = series_list
                .iter()
                .map(|s| {
                    normal_eq(s, basis).map_err(|e| Error::Series {
                        name: s.name.clone(),
                        source: Box::new(e),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let grid = lambda_grid(&eqs[0], &penalty);
            let scores = maybe_par_map(grid.clone(), |l| {
                let mut total = 0.0;
                for eq in &eqs {
                    match fit_at_lambda(eq, &penalty, l) {
                        Ok(fit) => total += fit.gcv,
                        Err(_) => return f64::INFINITY,
                    }
                }
                total
            });
            let best_l = grid
                .iter()
                .zip(&scores)
                .filter(|(_, s)| s.is_finite())
                .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(l, _)| *l)
                .ok_or_else(|| Error::Rank("shared GCV: no feasible lambda on the grid".into()))?;
            eqs.iter().map(|eq| fit_at_lambda(eq, &penalty, best_l)).collect()
        }
        _ => maybe_par_map(series_list.to_vec(), |s| smooth_series(&s, basis, lambda)),
    };

    let k = basis.k();
    let mut coef = DMatrix::zeros(k, series_list.len());
    for (u, (fit, s)) in fits.into_iter().zip(series_list).enumerate() {
        let fit = fit.map_err(|e| Error::Series {
            name: s.name.clone(),
            source: Box::new(e),
        })?;
        coef.column_mut(u).copy_from(&fit.coef);
    }
    FDataset::new(
        basis.clone(),
        coef,
        series_list.iter().map(|s| s.name.clone()).collect(),
    )
}
