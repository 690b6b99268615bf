//! Continuous-time PCA, Fisher LDA, and CCA.
//!
//! All three reduce to (generalized) symmetric eigenproblems on continuous-
//! time covariance matrices. Eigenvector signs are fixed by making the
//! largest-magnitude entry positive, so outputs are reproducible across
//! linear-algebra backends.

use crate::basis::{region_moments, Region};
use crate::ctstats::{center, ct_cov, ct_mean_region};
use crate::kmeans::Partition;
use crate::smoothing::FDataset;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Relative threshold below which generalized eigenvalues are treated as zero.
const POS_EIG_REL_TOL: f64 = 1e-10;

/// Make the largest-magnitude entry of each column positive.
fn fix_signs(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        let mut idx = 0;
        let mut best = 0.0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > best {
                best = v.abs();
                idx = i;
            }
        }
        if col[idx] < 0.0 {
            col.neg_mut();
        }
    }
}

/// Symmetric eigendecomposition sorted by descending eigenvalue.
fn sym_eig_desc(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let p = m.nrows();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let values = DVector::from_fn(p, |i, _| eig.eigenvalues[order[i]]);
    let mut vectors = DMatrix::zeros(p, p);
    for (j, &o) in order.iter().enumerate() {
        vectors.column_mut(j).copy_from(&eig.eigenvectors.column(o));
    }
    (values, vectors)
}

#[derive(Debug, Clone)]
pub struct PcaResult {
    /// Descending eigenvalues of `S*`.
    pub eigenvalues: DVector<f64>,
    /// Orthonormal loading vectors, one per column.
    pub loadings: DMatrix<f64>,
    /// Score functions `s_j(t) = e*_jᵀ x^c(t)` as a dataset.
    pub scores: FDataset,
    /// Fraction of total CT variance per component.
    pub var_explained: DVector<f64>,
}

/// Continuous-time principal component analysis: eigendecomposition of `S*`.
pub fn ct_pca(data: &FDataset) -> Result<PcaResult> {
    let s = ct_cov(data)?;
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite CT covariance".into()));
    }
    let (eigenvalues, mut loadings) = sym_eig_desc(&s);
    fix_signs(&mut loadings);
    let total: f64 = eigenvalues.sum();
    let var_explained = if total > 0.0 {
        &eigenvalues / total
    } else {
        DVector::zeros(eigenvalues.len())
    };
    let centered = center(data)?;
    let score_coef = centered.coef() * &loadings;
    let names = (1..=data.p()).map(|j| format!("pc{j}")).collect();
    let scores = FDataset::new(data.basis().clone(), score_coef, names)?;
    Ok(PcaResult {
        eigenvalues,
        loadings,
        scores,
        var_explained,
    })
}

/// Total / within / between scatter matrices over a temporal partition.
#[derive(Debug, Clone)]
pub struct ScatterDecomp {
    pub total: DMatrix<f64>,
    pub within: DMatrix<f64>,
    pub between: DMatrix<f64>,
}

/// `T* = |𝓘| CᵀQC`, `W* = Cᵀ(Σ_g |𝓘_g| Q_g)C`,
/// `B* = Cᵀ(Σ_g |𝓘_g| (φ̄_g - φ̄)(φ̄_g - φ̄)ᵀ)C`; the identity `T* = W* + B*`
/// holds exactly.
pub fn scatter_decomposition(data: &FDataset, groups: &Partition) -> Result<ScatterDecomp> {
    groups.validate_cover(data.basis().interval())?;
    let k = data.basis().k();
    let full = region_moments(data.basis(), &Region::full(data.basis().interval()))?;
    let total_len = data.basis().interval().length();
    let mut w_kernel = DMatrix::zeros(k, k);
    let mut b_kernel = DMatrix::zeros(k, k);
    for part in groups.parts() {
        if part.is_empty() {
            continue;
        }
        let mc = region_moments(data.basis(), part)?;
        let len = mc.length();
        w_kernel += mc.q() * len;
        let d = mc.phi_bar() - full.phi_bar();
        b_kernel.syger(len, &d, &d, 1.0);
    }
    for i in 0..k {
        for j in (i + 1)..k {
            b_kernel[(i, j)] = b_kernel[(j, i)];
        }
    }
    let sym = |m: DMatrix<f64>| {
        let mt = m.transpose();
        (m + mt) * 0.5
    };
    let total = sym(data.coef().transpose() * (full.q() * total_len) * data.coef());
    let within = sym(data.coef().transpose() * w_kernel * data.coef());
    let between = sym(data.coef().transpose() * b_kernel * data.coef());
    Ok(ScatterDecomp {
        total,
        within,
        between,
    })
}

#[derive(Debug, Clone)]
pub struct LdaResult {
    /// Discriminant vectors, one per column (p×s).
    pub discriminants: DMatrix<f64>,
    /// Positive generalized eigenvalues, descending.
    pub eigenvalues: DVector<f64>,
    /// Discriminant score functions `v_mᵀ x(t)`.
    pub scores: FDataset,
    /// Per-group means of the discriminant functions (G×s).
    pub group_means: DMatrix<f64>,
}

/// Continuous-time Fisher LDA over a temporal partition into G groups.
///
/// Solved as the symmetric-definite generalized problem `B*v = θW*v` via a
/// Cholesky whitening of `W*`, keeping only eigenvalues above
/// `1e-10 · θ_max` (at most `min(G-1, p)` of them).
pub fn ct_lda(data: &FDataset, groups: &Partition) -> Result<LdaResult> {
    let g = groups.parts().len();
    if g < 2 {
        return Err(Error::Partition("LDA requires at least 2 groups".into()));
    }
    let scatter = scatter_decomposition(data, groups)?;
    let p = data.p();
    let chol = scatter.within.clone().cholesky().ok_or_else(|| {
        Error::Rank(
            "singular within-group scatter W*; reduce the number of variables or regularize explicitly"
                .into(),
        )
    })?;
    // M = L⁻¹ B* L⁻ᵀ has the same eigenvalues as W*⁻¹B*.
    let l_inv = chol.l().try_inverse().ok_or_else(|| Error::Rank("W* Cholesky factor not invertible".into()))?;
    let m = &l_inv * &scatter.between * l_inv.transpose();
    let (values, vectors) = sym_eig_desc(&((&m + m.transpose()) * 0.5));
    let theta_max = values[0].max(0.0);
    let s_max = (g - 1).min(p);
    let mut kept = 0;
    while kept < s_max && kept < p && values[kept] > POS_EIG_REL_TOL * theta_max && values[kept] > 0.0 {
        kept += 1;
    }
    if kept == 0 {
        return Err(Error::Rank("no positive discriminant eigenvalues".into()));
    }
    let eigenvalues = DVector::from_fn(kept, |i, _| values[i]);
    let mut discriminants = DMatrix::zeros(p, kept);
    for j in 0..kept {
        let v = l_inv.transpose() * vectors.column(j);
        discriminants.column_mut(j).copy_from(&v);
    }
    fix_signs(&mut discriminants);
    let score_coef = data.coef() * &discriminants;
    let names = (1..=kept).map(|j| format!("ld{j}")).collect();
    let scores = FDataset::new(data.basis().clone(), score_coef, names)?;
    let mut group_means = DMatrix::zeros(g, kept);
    for (gi, part) in groups.parts().iter().enumerate() {
        if part.is_empty() {
            continue;
        }
        let m = ct_mean_region(&scores, part)?;
        group_means.row_mut(gi).copy_from(&m.transpose());
    }
    Ok(LdaResult {
        discriminants,
        eigenvalues,
        scores,
        group_means,
    })
}

#[derive(Debug, Clone)]
pub struct CcaResult {
    /// Canonical correlations in [0,1], descending.
    pub correlations: Vec<f64>,
    /// Canonical vectors for the x block (p×s).
    pub a_vectors: DMatrix<f64>,
    /// Canonical vectors for the y block (q×s).
    pub b_vectors: DMatrix<f64>,
    pub canonical_functions_x: FDataset,
    pub canonical_functions_y: FDataset,
}

/// Continuous-time canonical correlation analysis of two curve sets sharing
/// one basis system.
pub fn ct_cca(x: &FDataset, y: &FDataset) -> Result<CcaResult> {
    if x.basis() != y.basis() {
        return Err(Error::Dimension(
            "CCA requires both blocks to share the same basis system".into(),
        ));
    }
    let mc = region_moments(x.basis(), &Region::full(x.basis().interval()))?;
    let q = mc.q();
    let s_xx = x.coef().transpose() * q * x.coef();
    let s_yy = y.coef().transpose() * q * y.coef();
    let s_xy = x.coef().transpose() * q * y.coef();
    let chol_x = s_xx
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Rank("singular x-block covariance S*_xx".into()))?;
    let chol_y = s_yy
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Rank("singular y-block covariance S*_yy".into()))?;
    let lx_inv = chol_x
        .l()
        .try_inverse()
        .ok_or_else(|| Error::Rank("S*_xx factor not invertible".into()))?;
    let ly_inv = chol_y
        .l()
        .try_inverse()
        .ok_or_else(|| Error::Rank("S*_yy factor not invertible".into()))?;
    // M = Lx⁻¹ Sxy Syy⁻¹ Syx Lx⁻ᵀ = N Nᵀ with N = Lx⁻¹ Sxy Ly⁻ᵀ.
    let n = &lx_inv * &s_xy * ly_inv.transpose();
    let m = &n * n.transpose();
    let (values, vectors) = sym_eig_desc(&((&m + m.transpose()) * 0.5));
    let r_max = values[0].max(0.0);
    let s_dim = x.p().min(y.p());
    let mut kept = 0;
    while kept < s_dim && values[kept] > POS_EIG_REL_TOL * r_max && values[kept] > 0.0 {
        kept += 1;
    }
    if kept == 0 {
        return Err(Error::Rank("no positive canonical correlations".into()));
    }
    let mut correlations = Vec::with_capacity(kept);
    let mut a_vectors = DMatrix::zeros(x.p(), kept);
    let mut b_vectors = DMatrix::zeros(y.p(), kept);
    for j in 0..kept {
        let r = values[j].max(0.0).sqrt().min(1.0);
        correlations.push(r);
        let a: DVector<f64> = lx_inv.transpose() * vectors.column(j);
        // b ∝ Syy⁻¹ Syx a; pair signs so that cov(aᵀx, bᵀy) = r ≥ 0.
        let b_raw = chol_y.solve(&(s_xy.transpose() * &a));
        let b_var = (b_raw.transpose() * &s_yy * &b_raw)[(0, 0)];
        let b = if b_var > 0.0 {
            &b_raw / b_var.sqrt()
        } else {
            b_raw.clone()
        };
        let cross = (a.transpose() * &s_xy * &b)[(0, 0)];
        let b = if cross < 0.0 { -b } else { b };
        a_vectors.column_mut(j).copy_from(&a);
        b_vectors.column_mut(j).copy_from(&b);
    }
    let names_x = (1..=kept).map(|j| format!("cx{j}")).collect();
    let names_y = (1..=kept).map(|j| format!("cy{j}")).collect();
    let canonical_functions_x = FDataset::new(x.basis().clone(), x.coef() * &a_vectors, names_x)?;
    let canonical_functions_y = FDataset::new(y.basis().clone(), y.coef() * &b_vectors, names_y)?;
    Ok(CcaResult {
        correlations,
        a_vectors,
        b_vectors,
        canonical_functions_x,
        canonical_functions_y,
    })
}

/// Positive eigenvalues (descending, above the relative tolerance) of the
/// other-block CCA matrix `M₂* = S_yy⁻¹ S_yx S_xx⁻¹ S_xy`, for cross-checks.
pub fn cca_m2_spectrum(x: &FDataset, y: &FDataset) -> Result<Vec<f64>> {
    ct_cca(y, x).map(|r| r.correlations.iter().map(|c| c * c).collect())
}

// Re-export the mean helper used by CLI summaries.
pub use crate::ctstats::ct_cor;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{make_basis, BasisKind, Interval};
    use crate::ctstats::ct_cov;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn unit_bspline(k: usize) -> crate::basis::BasisSystem {
        make_basis(BasisKind::BSpline, Interval::new(0.0, 1.0).unwrap(), k, 4).unwrap()
    }

    fn random_dataset(k: usize, p: usize, seed: u64) -> FDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let basis = unit_bspline(k);
        let coef = DMatrix::from_fn(k, p, |_, _| rng.gen_range(-1.0..1.0));
        let names = (0..p).map(|i| format!("v{i}")).collect();
        FDataset::new(basis, coef, names).unwrap()
    }

    #[test]
    fn pca_diagonal_case() {
        // Fourier: x1 = 2·√2·sin(2πt) has CT variance 4, x2 = √2·cos(2πt) variance 1
        let basis = make_basis(BasisKind::Fourier, Interval::new(0.0, 1.0).unwrap(), 5, 0).unwrap();
        let mut coef = DMatrix::zeros(5, 2);
        coef[(1, 0)] = 2.0;
        coef[(2, 1)] = 1.0;
        let ds = FDataset::new(basis, coef, vec!["a".into(), "b".into()]).unwrap();
        let pca = ct_pca(&ds).unwrap();
        assert_abs_diff_eq!(pca.eigenvalues[0], 4.0, epsilon = 1e-10);
        assert_abs_diff_eq!(pca.eigenvalues[1], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(pca.loadings[(0, 0)].abs(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(pca.loadings[(1, 1)].abs(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn pca_trace_and_score_covariance() {
        let ds = random_dataset(12, 5, 7);
        let pca = ct_pca(&ds).unwrap();
        let s = ct_cov(&ds).unwrap();
        let trace: f64 = (0..5).map(|i| s[(i, i)]).sum();
        assert_abs_diff_eq!(pca.eigenvalues.sum(), trace, epsilon = 1e-10);
        assert_abs_diff_eq!(pca.var_explained.sum(), 1.0, epsilon = 1e-12);
        // CT covariance of scores = diag(λ), independently recomputed
        let sc = ct_cov(&pca.scores).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j { pca.eigenvalues[i] } else { 0.0 };
                assert_abs_diff_eq!(sc[(i, j)], expect, epsilon = 1e-8);
            }
        }
        // orthonormal loadings
        let ident = pca.loadings.transpose() * &pca.loadings;
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(ident[(i, j)], expect, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn pca_expansion_reconstructs_centered_curves() {
        let ds = random_dataset(10, 4, 3);
        let pca = ct_pca(&ds).unwrap();
        let centered = center(&ds).unwrap();
        let times: Vec<f64> = (0..200).map(|i| i as f64 / 199.0).collect();
        let xc = centered.eval(&times).unwrap();
        let scores = pca.scores.eval(&times).unwrap();
        // x^c(t) = Σ_j e_j s_j(t), i.e. xc = scores · Eᵀ
        let recon = &scores * pca.loadings.transpose();
        assert!((xc - recon).amax() < 1e-8);
    }

    #[test]
    fn pca_rayleigh_argmax() {
        let ds = random_dataset(11, 4, 9);
        let pca = ct_pca(&ds).unwrap();
        let s = ct_cov(&ds).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10_000 {
            let v = DVector::from_fn(4, |_, _| rng.gen_range(-1.0..1.0_f64)).normalize();
            let q = (v.transpose() * &s * &v)[(0, 0)];
            assert!(q <= pca.eigenvalues[0] + 1e-10);
        }
    }

    fn quarters() -> Partition {
        let parts = (0..4)
            .map(|i| {
                Region::new(vec![Interval::new(0.25 * i as f64, 0.25 * (i + 1) as f64).unwrap()])
                    .unwrap()
            })
            .collect();
        Partition::new(parts).unwrap()
    }

    #[test]
    fn scatter_identity_random() {
        for seed in 0..5 {
            let ds = random_dataset(14, 3, seed);
            let sd = scatter_decomposition(&ds, &quarters()).unwrap();
            let resid = (&sd.total - &sd.within - &sd.between).norm() / sd.total.norm();
            assert!(resid < 1e-10, "identity residual {resid}");
        }
    }

    #[test]
    fn scatter_single_group() {
        let ds = random_dataset(10, 3, 1);
        let whole = Partition::new(vec![Region::full(ds.basis().interval())]).unwrap();
        let sd = scatter_decomposition(&ds, &whole).unwrap();
        assert!(sd.between.amax() < 1e-12);
        assert!((&sd.total - &sd.within).amax() < 1e-12);
    }

    #[test]
    fn scatter_matches_grid_oracle() {
        let ds = random_dataset(12, 3, 11);
        let groups = quarters();
        let sd = scatter_decomposition(&ds, &groups).unwrap();
        // dense-grid integration of the defining integrals
        let n = 100_000;
        let times: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let x = ds.eval(&times).unwrap();
        let h = 1.0 / n as f64;
        let p = ds.p();
        let mut w_oracle = DMatrix::zeros(p, p);
        for part in groups.parts() {
            let mut mean = DVector::zeros(p);
            let mut count = 0usize;
            for (g, &t) in times.iter().enumerate() {
                if part.contains(t) {
                    mean += x.row(g).transpose();
                    count += 1;
                }
            }
            mean /= count as f64;
            for (g, &t) in times.iter().enumerate() {
                if part.contains(t) {
                    let d = x.row(g).transpose() - &mean;
                    w_oracle.syger(h, &d, &d, 1.0);
                }
            }
        }
        for i in 0..p {
            for j in 0..i {
                w_oracle[(j, i)] = w_oracle[(i, j)];
            }
        }
        assert!((&sd.within - &w_oracle).amax() < 1e-4);
    }

    #[test]
    fn lda_two_regimes_finds_separating_variable() {
        // variable 0: +5 on first half, −5 on second; variable 1: mild wiggle
        let basis = unit_bspline(20);
        let times: Vec<f64> = (0..200).map(|i| i as f64 / 199.0).collect();
        let step: Vec<f64> = times
            .iter()
            .map(|&t| 5.0 * (50.0 * (0.5 - t)).tanh())
            .collect();
        let wiggle: Vec<f64> = times.iter().map(|&t| (7.0 * t).sin() * 0.5).collect();
        let phi = crate::basis::eval_basis(&basis, &times).unwrap();
        let solve = |z: &[f64]| {
            let zt = DVector::from_column_slice(z);
            (phi.transpose() * &phi)
                .cholesky()
                .unwrap()
                .solve(&(phi.transpose() * zt))
        };
        let mut coef = DMatrix::zeros(20, 2);
        coef.column_mut(0).copy_from(&solve(&step));
        coef.column_mut(1).copy_from(&solve(&wiggle));
        let ds = FDataset::new(basis, coef, vec!["step".into(), "wiggle".into()]).unwrap();
        let parts = Partition::new(vec![
            Region::new(vec![Interval::new(0.0, 0.5).unwrap()]).unwrap(),
            Region::new(vec![Interval::new(0.5, 1.0).unwrap()]).unwrap(),
        ])
        .unwrap();
        let lda = ct_lda(&ds, &parts).unwrap();
        // G=2, p=2 -> exactly 1 discriminant
        assert_eq!(lda.discriminants.ncols(), 1);
        let v = lda.discriminants.column(0);
        assert!(v[0].abs() / v.norm() > 0.9, "LD1 = {v:?}");
    }

    #[test]
    fn lda_w_orthogonality_and_rank_bound() {
        let ds = random_dataset(16, 4, 21);
        let groups = quarters();
        let lda = ct_lda(&ds, &groups).unwrap();
        assert!(lda.discriminants.ncols() <= 3.min(4));
        let sd = scatter_decomposition(&ds, &groups).unwrap();
        let s = lda.discriminants.ncols();
        let w_norm = sd.within.norm();
        for i in 0..s {
            for j in 0..s {
                if i != j {
                    let vi = lda.discriminants.column(i);
                    let vj = lda.discriminants.column(j);
                    let q = (vi.transpose() * &sd.within * vj)[(0, 0)];
                    assert!(q.abs() < 1e-8 * w_norm);
                }
            }
        }
        // Rayleigh optimality of v1 over random directions
        let v1 = lda.discriminants.column(0);
        let best = (v1.transpose() * &sd.between * v1)[(0, 0)]
            / (v1.transpose() * &sd.within * v1)[(0, 0)];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let v = DVector::from_fn(4, |_, _| rng.gen_range(-1.0..1.0_f64));
            let num = (v.transpose() * &sd.between * &v)[(0, 0)];
            let den = (v.transpose() * &sd.within * &v)[(0, 0)];
            assert!(num / den <= best + 1e-8);
        }
    }

    #[test]
    fn cca_identical_blocks() {
        let ds = random_dataset(12, 3, 17);
        let cca = ct_cca(&ds, &ds).unwrap();
        assert_eq!(cca.correlations.len(), 3);
        for r in &cca.correlations {
            assert_abs_diff_eq!(*r, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn cca_m1_m2_spectra_agree() {
        let x = random_dataset(12, 3, 31);
        let y = random_dataset(12, 4, 32);
        let y = y.with_coef(y.coef() + x.coef().clone().insert_column(3, 0.0) * 0.5);
        let cca = ct_cca(&x, &y).unwrap();
        let m2 = cca_m2_spectrum(&x, &y).unwrap();
        assert_eq!(cca.correlations.len(), m2.len());
        for (r, l2) in cca.correlations.iter().zip(&m2) {
            assert_abs_diff_eq!(r * r, *l2, epsilon = 1e-8);
        }
    }

    #[test]
    fn cca_invariant_under_block_transform() {
        let x = random_dataset(12, 3, 41);
        let y = random_dataset(12, 3, 42);
        let cca = ct_cca(&x, &y).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let a = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0))
            + DMatrix::identity(3, 3) * 2.0;
        let xt = x.with_coef(x.coef() * &a);
        let cca2 = ct_cca(&xt, &y).unwrap();
        for (r1, r2) in cca.correlations.iter().zip(&cca2.correlations) {
            assert_abs_diff_eq!(*r1, *r2, epsilon = 1e-8);
        }
    }

    #[test]
    fn cca_successive_variates_uncorrelated() {
        let x = random_dataset(14, 4, 51);
        let y = random_dataset(14, 3, 52);
        let cca = ct_cca(&x, &y).unwrap();
        let sx = ct_cov(&cca.canonical_functions_x).unwrap();
        let sy = ct_cov(&cca.canonical_functions_y).unwrap();
        let s = cca.correlations.len();
        for i in 0..s {
            for j in 0..s {
                if i != j {
                    assert!(sx[(i, j)].abs() < 1e-8 * sx[(i, i)].max(sx[(j, j)]));
                    assert!(sy[(i, j)].abs() < 1e-8 * sy[(i, i)].max(sy[(j, j)]));
                }
            }
        }
    }

    #[test]
    fn cca_rejects_mismatched_bases() {
        let x = random_dataset(10, 2, 61);
        let basis2 = unit_bspline(12);
        let y = FDataset::new(
            basis2,
            DMatrix::from_element(12, 2, 0.5),
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        assert!(matches!(ct_cca(&x, &y), Err(Error::Dimension(_))));
    }
}
