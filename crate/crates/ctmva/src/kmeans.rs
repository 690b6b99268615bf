//! Continuous-time k-means over the basis interval.
//!
//! Cluster assignment is exact: on each inter-knot segment the difference of
//! two centers' affine score functions `A_i(t) - A_j(t)` is a cubic
//! polynomial, so transition points are real roots of cubics, found via the
//! companion-matrix eigenvalue method. Lloyd iteration alternates exact
//! assignment with center updates `m_i = Cᵀφ̄_{𝓒_i}`; restarts run in
//! parallel with per-restart deterministic RNG streams.

use crate::basis::{
    piecewise_poly, region_moments, Interval, PiecewisePoly, Region,
};
use crate::smoothing::FDataset;
use crate::{maybe_par_map_indexed, Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// A disjoint cover of the basis interval by labelled cluster regions.
/// Parts may be empty (clusters can lose all mass mid-iteration).
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    parts: Vec<Region>,
}

impl Partition {
    pub fn new(parts: Vec<Region>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Partition("partition must have at least one part".into()));
        }
        // pairwise disjoint
        let mut all: Vec<(f64, f64)> = Vec::new();
        for part in &parts {
            for seg in part.segments() {
                all.push((seg.lo(), seg.hi()));
            }
        }
        all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in all.windows(2) {
            if w[0].1 > w[1].0 + 1e-12 * (w[1].1 - w[0].0).abs() {
                return Err(Error::Partition(format!(
                    "parts overlap near t = {}",
                    w[1].0
                )));
            }
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[Region] {
        &self.parts
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    /// Check that the parts cover the interval up to measure tolerance.
    pub fn validate_cover(&self, interval: Interval) -> Result<()> {
        let total: f64 = self.parts.iter().map(|p| p.total_length()).sum();
        let tol = 1e-9 * interval.length();
        if (total - interval.length()).abs() > tol {
            return Err(Error::Partition(format!(
                "parts cover length {total}, interval has length {}",
                interval.length()
            )));
        }
        for part in &self.parts {
            for seg in part.segments() {
                if !interval.contains(seg.lo()) || !interval.contains(seg.hi()) {
                    return Err(Error::Partition("part extends outside the interval".into()));
                }
            }
        }
        Ok(())
    }

    /// Index of the part containing `t`; boundary points go to the
    /// lower-index adjacent part.
    pub fn part_index(&self, t: f64) -> Option<usize> {
        let mut hit: Option<usize> = None;
        for (i, part) in self.parts.iter().enumerate() {
            for seg in part.segments() {
                if t >= seg.lo() && t <= seg.hi() {
                    if hit.is_none() {
                        hit = Some(i);
                    }
                }
            }
        }
        hit
    }

    /// Total length of the symmetric difference, part by part.
    pub fn sym_diff_measure(&self, other: &Partition) -> f64 {
        self.parts
            .iter()
            .zip(other.parts.iter())
            .map(|(a, b)| a.sym_diff_length(b))
            .sum()
    }
}

/// Real roots of `c0 + c1 t + c2 t² + c3 t³` strictly inside `(lo, hi)`.
///
/// Degenerate leading coefficients are dropped relative to the largest
/// coefficient; the cubic case uses companion-matrix eigenvalues with
/// imaginary-part tolerance 1e-10.
pub(crate) fn cubic_roots_in(c: [f64; 4], lo: f64, hi: f64) -> Vec<f64> {
    let scale = c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Vec::new(); // identically zero: a tie, no isolated crossings
    }
    let drop_tol = 1e-13 * scale;
    let mut roots: Vec<f64> = Vec::new();
    let push = |roots: &mut Vec<f64>, t: f64| {
        let span_tol = 1e-12 * (hi - lo).max(1.0);
        if t > lo + span_tol && t < hi - span_tol {
            roots.push(t);
        }
    };
    if c[3].abs() > drop_tol {
        // companion matrix of t³ + b2 t² + b1 t + b0
        let b2 = c[2] / c[3];
        let b1 = c[1] / c[3];
        let b0 = c[0] / c[3];
        let comp = DMatrix::from_row_slice(3, 3, &[
            0.0, 0.0, -b0, //
            1.0, 0.0, -b1, //
            0.0, 1.0, -b2,
        ]);
        let eigs = comp.complex_eigenvalues();
        let mag = 1.0 + b0.abs().max(b1.abs()).max(b2.abs());
        for e in eigs.iter() {
            if e.im.abs() <= 1e-10 * mag {
                push(&mut roots, e.re);
            }
        }
    } else if c[2].abs() > drop_tol {
        let disc = c[1] * c[1] - 4.0 * c[2] * c[0];
        if disc >= 0.0 {
            let sq = disc.sqrt();
            // numerically stable quadratic roots
            let q = -0.5 * (c[1] + c[1].signum() * sq);
            if q != 0.0 {
                push(&mut roots, q / c[2]);
                push(&mut roots, c[0] / q);
            } else {
                push(&mut roots, 0.0);
            }
        }
    } else if c[1].abs() > drop_tol {
        push(&mut roots, -c[0] / c[1]);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * (hi - lo).max(1.0));
    roots
}

/// Exact nearest-center partition of the interval.
///
/// Candidate transition points are the real roots, per inter-knot segment,
/// of every pair's cubic score difference; within each elementary interval
/// the winner is constant and determined at the midpoint.
pub fn assign_regions(data: &FDataset, centers: &[DVector<f64>]) -> Result<Partition> {
    let pp = piecewise_poly(data.basis())?;
    assign_regions_with(data, centers, &pp)
}

/// [`assign_regions`] with a precomputed piecewise-polynomial basis.
pub fn assign_regions_with(
    data: &FDataset,
    centers: &[DVector<f64>],
    pp: &PiecewisePoly,
) -> Result<Partition> {
    let k = centers.len();
    if k < 2 {
        return Err(Error::Domain("assign_regions requires k >= 2 centers".into()));
    }
    let scale = centers
        .iter()
        .map(|m| m.amax())
        .fold(0.0_f64, f64::max)
        .max(1e-300);
    for i in 0..k {
        for j in (i + 1)..k {
            if (&centers[i] - &centers[j]).amax() < 1e-12 * scale {
                return Err(Error::DegenerateCenters(format!("centers {i} and {j} coincide")));
            }
        }
    }

    // Winner intervals in time order: (interval, center index).
    let mut pieces: Vec<(f64, f64, usize)> = Vec::new();
    // Score A_i(t) = -2 φ(t)ᵀ C m_i + m_iᵀ m_i, evaluated at a point.
    let score = |t: f64, i: usize| -> Result<f64> {
        let phi = data.basis().eval_point(t)?;
        let proj = data.coef().transpose() * phi;
        Ok(-2.0 * proj.dot(&centers[i]) + centers[i].dot(&centers[i]))
    };

    for (j, w) in pp.breakpoints.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let block = &pp.coeff_blocks[j]; // 4 x K
        let mut cuts: Vec<f64> = vec![a, b];
        for i1 in 0..k {
            for i2 in (i1 + 1)..k {
                // A_{i1} - A_{i2} = (1,u,u²,u³)·v in local u = t - a, with
                // v = 2 L_j C (m_{i2} - m_{i1}) + e1 (m_{i1}² - m_{i2}²)
                let dm = &centers[i2] - &centers[i1];
                let mut v: DVector<f64> = block * (data.coef() * dm) * 2.0;
                v[0] += centers[i1].dot(&centers[i1]) - centers[i2].dot(&centers[i2]);
                let coeffs = [v[0], v[1], v[2], v[3]];
                cuts.extend(cubic_roots_in(coeffs, 0.0, b - a).into_iter().map(|u| a + u));
            }
        }
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-13 * (b - a).max(1.0));
        for e in cuts.windows(2) {
            let mid = 0.5 * (e[0] + e[1]);
            let mut winner = 0;
            let mut best = score(mid, 0)?;
            for i in 1..k {
                let s = score(mid, i)?;
                if s < best {
                    best = s;
                    winner = i;
                }
            }
            match pieces.last_mut() {
                Some(last) if last.2 == winner && (last.1 - e[0]).abs() < 1e-12 => {
                    last.1 = e[1];
                }
                _ => pieces.push((e[0], e[1], winner)),
            }
        }
    }

    let mut parts: Vec<Vec<Interval>> = vec![Vec::new(); k];
    for (lo, hi, i) in pieces {
        if hi > lo {
            parts[i].push(Interval::new(lo, hi)?);
        }
    }
    let regions = parts
        .into_iter()
        .map(|segs| {
            if segs.is_empty() {
                Ok(Region::empty())
            } else {
                Region::new(segs)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Partition::new(regions)
}

/// Within-cluster objective `tr[Cᵀ(Σᵢ |𝓒ᵢ| Q_{𝓒ᵢ})C]`.
pub fn cluster_objective(data: &FDataset, partition: &Partition) -> Result<f64> {
    partition.validate_cover(data.basis().interval())?;
    let mut total = 0.0;
    for part in partition.parts() {
        if part.is_empty() {
            continue;
        }
        let mc = region_moments(data.basis(), part)?;
        let s = data.coef().transpose() * mc.q() * data.coef();
        let trace: f64 = (0..s.nrows()).map(|i| s[(i, i)]).sum();
        total += mc.length() * trace;
    }
    Ok(total)
}

/// k-means run configuration.
#[derive(Debug, Clone, Copy)]
pub struct KmeansConfig {
    pub k: usize,
    pub restarts: usize,
    pub max_iter: usize,
    /// Convergence threshold on the partition symmetric-difference measure,
    /// relative to the interval length.
    pub tol: f64,
    pub seed: u64,
}

impl KmeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            restarts: 20,
            max_iter: 100,
            tol: 1e-8,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClusterResult {
    pub partition: Partition,
    pub centers: Vec<DVector<f64>>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restarts_used: usize,
    /// Objective after each assignment step of the winning run.
    pub objective_trace: Vec<f64>,
    /// Final objective per restart; `None` for failed runs.
    pub restart_objectives: Vec<Option<f64>>,
}

struct RunOutcome {
    partition: Partition,
    centers: Vec<DVector<f64>>,
    objective: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

fn init_centers(
    data: &FDataset,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<DVector<f64>>> {
    let iv = data.basis().interval();
    let mut centers: Vec<DVector<f64>> = Vec::with_capacity(k);
    let mut tries = 0;
    while centers.len() < k {
        if tries > 100 * k {
            return Err(Error::DegenerateCenters(
                "could not draw k distinct starting centers; curves may be constant".into(),
            ));
        }
        tries += 1;
        let t = iv.lo() + rng.gen::<f64>() * iv.length();
        let x = data.eval(&[t])?.row(0).transpose();
        let scale = x.amax().max(1e-300);
        if centers.iter().all(|c| (c - &x).amax() > 1e-9 * scale) {
            centers.push(x);
        }
    }
    Ok(centers)
}

/// Replace the centers of empty clusters by the curve value at the probe
/// point farthest from all surviving centers.
fn repair_empty(
    data: &FDataset,
    centers: &mut [DVector<f64>],
    partition: &Partition,
) -> Result<bool> {
    let empties: Vec<usize> = partition
        .parts()
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_empty())
        .map(|(i, _)| i)
        .collect();
    if empties.is_empty() {
        return Ok(false);
    }
    let iv = data.basis().interval();
    let probe: Vec<f64> = (0..1024)
        .map(|i| iv.lo() + iv.length() * i as f64 / 1023.0)
        .collect();
    let x = data.eval(&probe)?;
    for &e in &empties {
        let mut best_t = 0usize;
        let mut best_d = -1.0;
        for (g, _) in probe.iter().enumerate() {
            let xi = x.row(g).transpose();
            let d = centers
                .iter()
                .enumerate()
                .filter(|(i, _)| !empties.contains(i) || *i < e)
                .map(|(_, c)| (c - &xi).norm())
                .fold(f64::INFINITY, f64::min);
            if d > best_d {
                best_d = d;
                best_t = g;
            }
        }
        if best_d <= 0.0 {
            return Err(Error::DegenerateCenters("cannot reseed empty cluster".into()));
        }
        centers[e] = x.row(best_t).transpose();
    }
    Ok(true)
}

fn run_once(
    data: &FDataset,
    pp: &PiecewisePoly,
    cfg: &KmeansConfig,
    restart: usize,
) -> Result<RunOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart as u64 + 1);
    let mut centers = init_centers(data, cfg.k, &mut rng)?;
    let iv_len = data.basis().interval().length();
    let mut prev: Option<Partition> = None;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut partition = assign_regions_with(data, &centers, pp)?;
    for _ in 0..cfg.max_iter {
        iterations += 1;
        if repair_empty(data, &mut centers, &partition)? {
            partition = assign_regions_with(data, &centers, pp)?;
        }
        trace.push(cluster_objective(data, &partition)?);
        // center update: m_i = Cᵀ φ̄_{𝓒_i}
        for (i, part) in partition.parts().iter().enumerate() {
            if part.is_empty() {
                continue;
            }
            let mc = region_moments(data.basis(), part)?;
            centers[i] = data.coef().transpose() * mc.phi_bar();
        }
        if let Some(p) = &prev {
            if p.sym_diff_measure(&partition) < cfg.tol * iv_len {
                converged = true;
                break;
            }
        }
        prev = Some(partition.clone());
        partition = assign_regions_with(data, &centers, pp)?;
    }
    let objective = cluster_objective(data, &partition)?;
    Ok(RunOutcome {
        partition,
        centers,
        objective,
        iterations,
        converged,
        trace,
    })
}

/// Lloyd-style continuous-time k-means, best of `restarts` seeded runs.
pub fn ct_kmeans(data: &FDataset, cfg: &KmeansConfig) -> Result<ClusterResult> {
    if cfg.k < 2 {
        return Err(Error::Domain("ct_kmeans requires k >= 2".into()));
    }
    let pp = piecewise_poly(data.basis())?;
    let outcomes = maybe_par_map_indexed(cfg.restarts.max(1), |r| run_once(data, &pp, cfg, r));
    let mut best: Option<RunOutcome> = None;
    let mut last_err: Option<Error> = None;
    let mut restart_objectives = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        match outcome {
            Ok(o) => {
                restart_objectives.push(Some(o.objective));
                if best.as_ref().map_or(true, |b| o.objective < b.objective) {
                    best = Some(o);
                }
            }
            Err(e) => {
                restart_objectives.push(None);
                last_err = Some(e);
            }
        }
    }
    let best = match best {
        Some(b) => b,
        None => return Err(last_err.unwrap_or_else(|| Error::Numeric("no successful run".into()))),
    };
    Ok(ClusterResult {
        partition: best.partition,
        centers: best.centers,
        objective: best.objective,
        iterations: best.iterations,
        converged: best.converged,
        restarts_used: cfg.restarts.max(1),
        objective_trace: best.trace,
        restart_objectives,
    })
}

/// Silhouette profile on an equally spaced grid.
#[derive(Debug, Clone)]
pub struct SilhouetteProfile {
    pub grid: Vec<f64>,
    pub s_values: Vec<f64>,
    pub mean_s: f64,
}

/// Continuous-time silhouette width `s(t) = (b(t)-a(t))/max{a(t),b(t)}`
/// where a/b are mean distances to own/nearest-other cluster, approximated
/// on the grid.
pub fn silhouette(data: &FDataset, partition: &Partition, grid_size: usize) -> Result<SilhouetteProfile> {
    let k = partition.k();
    if k < 2 {
        return Err(Error::Domain("silhouette is undefined for k = 1".into()));
    }
    for (i, part) in partition.parts().iter().enumerate() {
        if part.is_empty() || part.total_length() <= 0.0 {
            return Err(Error::Partition(format!("cluster {i} has zero length")));
        }
    }
    let iv = data.basis().interval();
    let grid: Vec<f64> = (0..grid_size)
        .map(|i| iv.lo() + iv.length() * i as f64 / (grid_size - 1) as f64)
        .collect();
    let x = data.eval(&grid)?;
    let membership: Vec<usize> = grid
        .iter()
        .map(|&t| partition.part_index(t).unwrap_or(0))
        .collect();
    let mut cluster_points: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (g, &m) in membership.iter().enumerate() {
        cluster_points[m].push(g);
    }
    let mut s_values = Vec::with_capacity(grid_size);
    for g in 0..grid_size {
        let xg = x.row(g);
        let mean_dist = |members: &[usize]| -> f64 {
            if members.is_empty() {
                return f64::INFINITY;
            }
            members
                .iter()
                .map(|&h| (xg - x.row(h)).norm())
                .sum::<f64>()
                / members.len() as f64
        };
        let own = membership[g];
        let a = mean_dist(&cluster_points[own]);
        let b = (0..k)
            .filter(|&i| i != own)
            .map(|i| mean_dist(&cluster_points[i]))
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        let s = if denom > 0.0 && denom.is_finite() {
            (b - a) / denom
        } else {
            0.0
        };
        s_values.push(s.clamp(-1.0, 1.0));
    }
    let mean_s = s_values.iter().sum::<f64>() / s_values.len() as f64;
    Ok(SilhouetteProfile {
        grid,
        s_values,
        mean_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{eval_basis, make_basis, BasisKind};
    use crate::smoothing::FDataset;
    use approx::assert_abs_diff_eq;

    fn unit_bspline(k: usize) -> crate::basis::BasisSystem {
        make_basis(BasisKind::BSpline, Interval::new(0.0, 1.0).unwrap(), k, 4).unwrap()
    }

    /// Least-squares projection of pointwise functions onto the basis.
    fn dataset_from_fns(k: usize, fns: &[&dyn Fn(f64) -> f64]) -> FDataset {
        let basis = unit_bspline(k);
        let times: Vec<f64> = (0..400).map(|i| i as f64 / 399.0).collect();
        let phi = eval_basis(&basis, &times).unwrap();
        let gram = (phi.transpose() * &phi).cholesky().unwrap();
        let mut coef = DMatrix::zeros(k, fns.len());
        for (u, f) in fns.iter().enumerate() {
            let z = DVector::from_iterator(times.len(), times.iter().map(|&t| f(t)));
            coef.column_mut(u).copy_from(&gram.solve(&(phi.transpose() * z)));
        }
        let names = (0..fns.len()).map(|i| format!("v{i}")).collect();
        FDataset::new(basis, coef, names).unwrap()
    }

    #[test]
    fn cubic_roots_basic() {
        // (t-0.2)(t-0.5)(t-0.8) = t³ -1.5t² +0.66t -0.08
        let roots = cubic_roots_in([-0.08, 0.66, -1.5, 1.0], 0.0, 1.0);
        assert_eq!(roots.len(), 3);
        assert_abs_diff_eq!(roots[0], 0.2, epsilon = 1e-9);
        assert_abs_diff_eq!(roots[1], 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(roots[2], 0.8, epsilon = 1e-9);
        // linear
        let r = cubic_roots_in([-0.25, 1.0, 0.0, 0.0], 0.0, 1.0);
        assert_eq!(r.len(), 1);
        assert_abs_diff_eq!(r[0], 0.25, epsilon = 1e-12);
        // no real roots inside
        assert!(cubic_roots_in([1.0, 0.0, 0.0, 1.0], 0.0, 1.0).is_empty());
    }

    #[test]
    fn assign_single_crossing_midpoint() {
        // x(t) = t; centers 0.25, 0.75 -> breakpoint where t = 0.5
        let ds = dataset_from_fns(12, &[&|t| t]);
        let centers = vec![DVector::from_vec(vec![0.25]), DVector::from_vec(vec![0.75])];
        let part = assign_regions(&ds, &centers).unwrap();
        assert_eq!(part.k(), 2);
        let r0 = &part.parts()[0];
        assert_eq!(r0.segments().len(), 1);
        assert_abs_diff_eq!(r0.segments()[0].hi(), 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(part.parts()[1].segments()[0].lo(), 0.5, epsilon = 1e-8);
    }

    #[test]
    fn assign_matches_dense_argmin_oracle() {
        let ds = dataset_from_fns(15, &[&|t| (6.0 * t).sin(), &|t| (4.0 * t).cos()]);
        let centers = vec![
            DVector::from_vec(vec![0.8, 0.1]),
            DVector::from_vec(vec![-0.5, 0.6]),
            DVector::from_vec(vec![0.0, -0.9]),
        ];
        let part = assign_regions(&ds, &centers).unwrap();
        let breaks: Vec<f64> = part
            .parts()
            .iter()
            .flat_map(|p| p.segments())
            .flat_map(|s| [s.lo(), s.hi()])
            .collect();
        let n = 10_000;
        let times: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let x = ds.eval(&times).unwrap();
        for (g, &t) in times.iter().enumerate() {
            if breaks.iter().any(|&b| (t - b).abs() < 1e-6) {
                continue;
            }
            let xg = x.row(g).transpose();
            let mut winner = 0;
            let mut best = f64::INFINITY;
            for (i, c) in centers.iter().enumerate() {
                let d = (c - &xg).norm();
                if d < best {
                    best = d;
                    winner = i;
                }
            }
            assert_eq!(part.part_index(t), Some(winner), "mismatch at t = {t}");
        }
    }

    #[test]
    fn curve_at_center_takes_whole_interval() {
        let ds = dataset_from_fns(10, &[&|_| 0.3]);
        let centers = vec![DVector::from_vec(vec![0.3]), DVector::from_vec(vec![5.0])];
        let part = assign_regions(&ds, &centers).unwrap();
        assert_abs_diff_eq!(part.parts()[0].total_length(), 1.0, epsilon = 1e-9);
        assert!(part.parts()[1].is_empty());
    }

    #[test]
    fn duplicate_centers_rejected() {
        let ds = dataset_from_fns(10, &[&|t| t]);
        let c = DVector::from_vec(vec![0.5]);
        assert!(matches!(
            assign_regions(&ds, &[c.clone(), c]),
            Err(Error::DegenerateCenters(_))
        ));
    }

    #[test]
    fn objective_single_cluster_is_total_trace() {
        let ds = dataset_from_fns(12, &[&|t| (3.0 * t).sin(), &|t| t * t]);
        let whole = Partition::new(vec![Region::full(ds.basis().interval())]).unwrap();
        let obj = cluster_objective(&ds, &whole).unwrap();
        let s = crate::ctstats::ct_cov(&ds).unwrap();
        let trace: f64 = (0..2).map(|i| s[(i, i)]).sum();
        assert_abs_diff_eq!(obj, trace * 1.0, epsilon = 1e-10);
    }

    #[test]
    fn objective_matches_grid_oracle_and_pythagoras() {
        let ds = dataset_from_fns(14, &[&|t| (5.0 * t).sin(), &|t| (3.0 * t).cos()]);
        let part = Partition::new(vec![
        Region::new(vec![Interval::new(0.0, 0.37).unwrap()]).unwrap(),
            Region::new(vec![Interval::new(0.37, 1.0).unwrap()]).unwrap(),
        ])
        .unwrap();
        let obj = cluster_objective(&ds, &part).unwrap();
        // dense-grid within-cluster integral
        let n = 100_000;
        let times: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let x = ds.eval(&times).unwrap();
        let h = 1.0 / n as f64;
        let mut oracle = 0.0;
        for ci in 0..2 {
            let members: Vec<usize> = (0..n).filter(|&g| part.part_index(times[g]) == Some(ci)).collect();
            let mut mean = DVector::zeros(2);
            for &g in &members {
                mean += x.row(g).transpose();
            }
            mean /= members.len() as f64;
            for &g in &members {
                oracle += (x.row(g).transpose() - &mean).norm_squared() * h;
            }
        }
        assert!((obj - oracle).abs() < 1e-6, "obj {obj} oracle {oracle}");
        // within + between = total
        let sd = crate::spectral::scatter_decomposition(&ds, &part).unwrap();
        let tr = |m: &DMatrix<f64>| (0..2).map(|i| m[(i, i)]).sum::<f64>();
        assert_abs_diff_eq!(tr(&sd.within) + tr(&sd.between), tr(&sd.total), epsilon = 1e-10);
        assert_abs_diff_eq!(obj, tr(&sd.within), epsilon = 1e-10);
    }

    fn two_regime_dataset() -> FDataset {
        let trans = |t: f64| (60.0 * (0.5 - t)).tanh();
        dataset_from_fns(24, &[&|t| trans(t), &|t| trans(t) * 0.9])
    }

    #[test]
    fn kmeans_recovers_two_regimes() {
        let ds = two_regime_dataset();
        let cfg = KmeansConfig::new(2, 7);
        let res = ct_kmeans(&ds, &cfg).unwrap();
        assert!(res.converged);
        // single breakpoint near 0.5 (within one knot spacing, 1/21)
        let mut internal: Vec<f64> = Vec::new();
        for part in res.partition.parts() {
            for seg in part.segments() {
                for b in [seg.lo(), seg.hi()] {
                    if b > 1e-9 && b < 1.0 - 1e-9 {
                        internal.push(b);
                    }
                }
            }
        }
        internal.sort_by(|a, b| a.partial_cmp(b).unwrap());
        internal.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        assert_eq!(internal.len(), 1, "breakpoints: {internal:?}");
        assert!((internal[0] - 0.5).abs() < 1.0 / 21.0);
        // objective trace non-increasing
        for w in res.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-10 * w[0].abs().max(1.0));
        }
    }

    #[test]
    fn kmeans_seasonal_three_periods() {
        let ds = dataset_from_fns(30, &[
            &|t| (2.0 * std::f64::consts::PI * 3.0 * t).sin(),
            &|t| (2.0 * std::f64::consts::PI * 3.0 * t).sin() * 0.8,
        ]);
        let cfg = KmeansConfig::new(2, 11);
        let res = ct_kmeans(&ds, &cfg).unwrap();
        let mut transitions = 0;
        for part in res.partition.parts() {
            for seg in part.segments() {
                if seg.lo() > 1e-9 {
                    transitions += 1;
                }
            }
        }
        // sin(6πt) changes sign at t = k/6 for k = 1..5
        assert_eq!(transitions, 5, "expected 5 interior sign changes");
    }

    #[test]
    fn kmeans_deterministic_across_runs() {
        let ds = two_regime_dataset();
        let cfg = KmeansConfig::new(2, 123);
        let a = ct_kmeans(&ds, &cfg).unwrap();
        let b = ct_kmeans(&ds, &cfg).unwrap();
        assert_eq!(a.partition, b.partition);
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    }

    #[test]
    fn silhouette_basics() {
        let ds = two_regime_dataset();
        let part = Partition::new(vec![
            Region::new(vec![Interval::new(0.0, 0.5).unwrap()]).unwrap(),
            Region::new(vec![Interval::new(0.5, 1.0).unwrap()]).unwrap(),
        ])
        .unwrap();
        let prof = silhouette(&ds, &part, 2000).unwrap();
        assert!(prof.s_values.iter().all(|&s| (-1.0..=1.0).contains(&s)));
        assert!(prof.mean_s > 0.7, "mean_s = {}", prof.mean_s);
        // deliberately wrong partition boundary -> negative silhouette inside
        let bad = Partition::new(vec![
            Region::new(vec![Interval::new(0.0, 0.7).unwrap()]).unwrap(),
            Region::new(vec![Interval::new(0.7, 1.0).unwrap()]).unwrap(),
        ])
        .unwrap();
        let prof_bad = silhouette(&ds, &bad, 2000).unwrap();
        let wrong_zone: Vec<f64> = prof_bad
            .grid
            .iter()
            .zip(&prof_bad.s_values)
            .filter(|(&t, _)| t > 0.55 && t < 0.65)
            .map(|(_, &s)| s)
            .collect();
        assert!(wrong_zone.iter().any(|&s| s < 0.0));
        // k = 1 rejected
        let one = Partition::new(vec![Region::full(ds.basis().interval())]).unwrap();
        assert!(silhouette(&ds, &one, 100).is_err());
    }

    #[test]
    fn silhouette_vs_k_curve_in_bounds() {
        let ds = two_regime_dataset();
        for k in 2..=4 {
            let cfg = KmeansConfig {
                restarts: 5,
                ..KmeansConfig::new(k, 3)
            };
            let res = ct_kmeans(&ds, &cfg).unwrap();
            if res.partition.parts().iter().all(|p| !p.is_empty()) {
                let prof = silhouette(&ds, &res.partition, 600).unwrap();
                assert!(prof.mean_s >= -1.0 && prof.mean_s <= 1.0);
            }
        }
    }

    #[test]
    fn best_of_restarts_not_worse_than_single_runs() {
        let ds = dataset_from_fns(20, &[&|t| (9.0 * t).sin(), &|t| (5.0 * t + 1.0).cos()]);
        let cfg = KmeansConfig {
            restarts: 8,
            ..KmeansConfig::new(3, 99)
        };
        let best = ct_kmeans(&ds, &cfg).unwrap();
        for r in 0..8 {
            let single = KmeansConfig { restarts: 1, seed: cfg.seed, ..cfg };
            // replicate run r by using its stream directly
            let pp = piecewise_poly(ds.basis()).unwrap();
            if let Ok(o) = run_once(&ds, &pp, &single, r) {
                assert!(best.objective <= o.objective + 1e-12);
            }
        }
    }
}
