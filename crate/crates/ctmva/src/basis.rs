//! Basis systems and their exact moment quantities.
//!
//! A [`BasisSystem`] is a finite set of basis functions `φ₁..φ_K` on an
//! interval, either cubic (or lower-order) B-splines with equally spaced
//! knots or an orthonormal Fourier system. [`region_moments`] computes the
//! mean basis vector `φ̄_S` and centered Gram matrix `Q_S` over an arbitrary
//! region `S`; these two quantities drive every continuous-time statistic in
//! the crate. For B-splines of order ≤ 4 the composite Newton-Cotes 7-point
//! rule integrates products of basis functions exactly.

use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Closed Newton-Cotes 7-point weights for an interval of unit length.
/// Exact for polynomials up to degree 7, hence for products of cubics.
const NC7: [f64; 7] = [
    41.0 / 840.0,
    216.0 / 840.0,
    27.0 / 840.0,
    272.0 / 840.0,
    27.0 / 840.0,
    216.0 / 840.0,
    41.0 / 840.0,
];

/// A nondegenerate time interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::Domain(format!(
                "invalid interval [{lo}, {hi}]: need finite lo < hi"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, t: f64) -> bool {
        let tol = 1e-10 * self.length();
        t >= self.lo - tol && t <= self.hi + tol
    }

    fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo < hi {
            Some(Interval { lo, hi })
        } else {
            None
        }
    }
}

/// A finite union of disjoint subintervals, sorted by left endpoint.
///
/// An empty region (no segments) is representable so that partitions can
/// carry clusters that have temporarily lost all mass; operations that
/// require positive length reject it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Region {
    segments: Vec<Interval>,
}

impl Region {
    pub fn new(segments: Vec<Interval>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Domain("region must have at least one segment".into()));
        }
        for w in segments.windows(2) {
            if w[0].hi > w[1].lo {
                return Err(Error::Domain(format!(
                    "region segments must be sorted and disjoint: [{}, {}] overlaps [{}, {}]",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                )));
            }
        }
        Ok(Self { segments })
    }

    pub fn empty() -> Self {
        Self { segments: Vec::new() }
    }

    /// The whole of an interval as a one-segment region.
    pub fn full(interval: Interval) -> Self {
        Self { segments: vec![interval] }
    }

    pub fn segments(&self) -> &[Interval] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|s| s.length()).sum()
    }

    pub fn contains(&self, t: f64) -> bool {
        self.segments.iter().any(|s| s.contains(t))
    }

    /// Length of the symmetric difference with another region.
    pub fn sym_diff_length(&self, other: &Region) -> f64 {
        let mut cuts: Vec<f64> = Vec::new();
        for s in self.segments.iter().chain(other.segments.iter()) {
            cuts.push(s.lo);
            cuts.push(s.hi);
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        let mut len = 0.0;
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let in_a = self.segments.iter().any(|s| s.lo <= mid && mid < s.hi);
            let in_b = other.segments.iter().any(|s| s.lo <= mid && mid < s.hi);
            if in_a != in_b {
                len += w[1] - w[0];
            }
        }
        len
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    BSpline,
    Fourier,
}

impl std::fmt::Display for BasisKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BasisKind::BSpline => write!(f, "bspline"),
            BasisKind::Fourier => write!(f, "fourier"),
        }
    }
}

/// A B-spline or Fourier basis system on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSystem {
    kind: BasisKind,
    interval: Interval,
    k: usize,
    /// B-spline order (degree + 1); 4 = cubic. Unused for Fourier.
    order: usize,
    /// Breakpoints including both endpoints (B-spline only).
    breakpoints: Vec<f64>,
    /// Clamped knot vector of length k + order (B-spline only).
    knots: Vec<f64>,
}

/// Construct a basis system. B-spline knots are equally spaced over the
/// interval; the Fourier system is orthonormal with constant first function
/// and period equal to the interval length.
pub fn make_basis(kind: BasisKind, interval: Interval, k: usize, order: usize) -> Result<BasisSystem> {
    match kind {
        BasisKind::BSpline => {
            if order < 1 || order > 4 {
                return Err(Error::Dimension(format!(
                    "bspline order must be in 1..=4, got {order}"
                )));
            }
            if k < order {
                return Err(Error::Dimension(format!(
                    "bspline basis needs K >= order, got K={k}, order={order}"
                )));
            }
            // k - order interior knots => k - order + 1 inter-knot intervals.
            let n_break = k - order + 2;
            let mut breakpoints = Vec::with_capacity(n_break);
            for i in 0..n_break {
                let frac = i as f64 / (n_break - 1) as f64;
                breakpoints.push(interval.lo + frac * interval.length());
            }
            breakpoints[n_break - 1] = interval.hi;
            let mut knots = Vec::with_capacity(k + order);
            for _ in 0..order {
                knots.push(interval.lo);
            }
            knots.extend_from_slice(&breakpoints[1..n_break - 1]);
            for _ in 0..order {
                knots.push(interval.hi);
            }
            Ok(BasisSystem {
                kind,
                interval,
                k,
                order,
                breakpoints,
                knots,
            })
        }
        BasisKind::Fourier => {
            if k % 2 == 0 {
                return Err(Error::Parity(k));
            }
            Ok(BasisSystem {
                kind,
                interval,
                k,
                order: 0,
                breakpoints: vec![interval.lo, interval.hi],
                knots: Vec::new(),
            })
        }
    }
}

impl BasisSystem {
    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Breakpoints including both interval endpoints (B-spline only;
    /// for Fourier this is just the two endpoints).
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Find the knot span index for the clamped knot vector: largest `i`
    /// with `knots[i] <= t`, restricted to nonempty spans.
    fn find_span(&self, t: f64) -> usize {
        let n = self.k; // basis count
        let order = self.order;
        if t >= self.knots[n] {
            return n - 1; // right endpoint maps into the last span
        }
        let mut lo = order - 1;
        let mut hi = n;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if t < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    /// Evaluate the `order` B-spline functions that are nonzero at `t`.
    /// Returns the index of the first nonzero function and the values.
    fn bspline_nonzero(&self, t: f64) -> (usize, Vec<f64>) {
        let order = self.order;
        let span = self.find_span(t);
        let mut vals = vec![0.0; order];
        vals[0] = 1.0;
        let mut left = vec![0.0; order];
        let mut right = vec![0.0; order];
        for j in 1..order {
            left[j] = t - self.knots[span + 1 - j];
            right[j] = self.knots[span + j] - t;
            let mut saved = 0.0;
            for r in 0..j {
                let denom = right[r + 1] + left[j - r];
                let temp = vals[r] / denom;
                vals[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            vals[j] = saved;
        }
        (span + 1 - order, vals)
    }

    /// Evaluate the full basis vector `φ(t)`.
    pub fn eval_point(&self, t: f64) -> Result<DVector<f64>> {
        if !self.interval.contains(t) {
            return Err(Error::Domain(format!(
                "t = {t} outside interval [{}, {}]",
                self.interval.lo, self.interval.hi
            )));
        }
        let t = t.clamp(self.interval.lo, self.interval.hi);
        let mut phi = DVector::zeros(self.k);
        match self.kind {
            BasisKind::BSpline => {
                let (first, vals) = self.bspline_nonzero(t);
                for (j, v) in vals.iter().enumerate() {
                    phi[first + j] = *v;
                }
            }
            BasisKind::Fourier => {
                let len = self.interval.length();
                let x = t - self.interval.lo;
                phi[0] = 1.0 / len.sqrt();
                let amp = (2.0 / len).sqrt();
                for m in 1..=(self.k - 1) / 2 {
                    let omega = 2.0 * std::f64::consts::PI * m as f64 / len;
                    phi[2 * m - 1] = amp * (omega * x).sin();
                    phi[2 * m] = amp * (omega * x).cos();
                }
            }
        }
        Ok(phi)
    }
}

/// Evaluate the basis at a list of times; row `q` holds `φ(t_q)ᵀ`.
pub fn eval_basis(basis: &BasisSystem, times: &[f64]) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(times.len(), basis.k);
    for (q, &t) in times.iter().enumerate() {
        let phi = basis.eval_point(t)?;
        out.row_mut(q).copy_from(&phi.transpose());
    }
    Ok(out)
}

/// The coefficient vector `w` with `wᵀφ(t) = 1` for all `t`.
pub fn constant_rep_vector(basis: &BasisSystem) -> DVector<f64> {
    match basis.kind {
        BasisKind::BSpline => DVector::from_element(basis.k, 1.0),
        BasisKind::Fourier => {
            let mut w = DVector::zeros(basis.k);
            w[0] = basis.interval.length().sqrt();
            w
        }
    }
}

/// Mean basis vector and centered Gram matrix over a region.
#[derive(Debug, Clone)]
pub struct MomentCache {
    region: Region,
    phi_bar: DVector<f64>,
    q: DMatrix<f64>,
}

impl MomentCache {
    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn phi_bar(&self) -> &DVector<f64> {
        &self.phi_bar
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn length(&self) -> f64 {
        self.region.total_length()
    }
}

/// Compute `φ̄_S = |S|⁻¹∫_S φ` and `Q_S = |S|⁻¹∫_S (φ-φ̄_S)(φ-φ̄_S)ᵀ`.
///
/// For B-splines the composite Newton-Cotes 7-point rule is applied per
/// inter-knot segment (split at region boundaries), which is exact for
/// order ≤ 4. For a Fourier basis over the full interval the closed form is
/// used; partial Fourier regions fall back to a frequency-resolved composite
/// rule.
pub fn region_moments(basis: &BasisSystem, region: &Region) -> Result<MomentCache> {
    if region.is_empty() || region.total_length() <= 0.0 {
        return Err(Error::Domain("region_moments requires a region of positive length".into()));
    }
    for seg in region.segments() {
        if !basis.interval.contains(seg.lo) || !basis.interval.contains(seg.hi) {
            return Err(Error::Domain(format!(
                "region segment [{}, {}] outside basis interval",
                seg.lo, seg.hi
            )));
        }
    }
    let len = region.total_length();

    if basis.kind == BasisKind::Fourier {
        let full = (len - basis.interval.length()).abs() <= 1e-12 * basis.interval.length()
            && region.segments().len() == 1;
        if full {
            let il = basis.interval.length();
            let mut phi_bar = DVector::zeros(basis.k);
            phi_bar[0] = 1.0 / il.sqrt();
            let mut q = DMatrix::zeros(basis.k, basis.k);
            for i in 1..basis.k {
                q[(i, i)] = 1.0 / il;
            }
            return Ok(MomentCache {
                region: region.clone(),
                phi_bar,
                q,
            });
        }
    }

    let panels = quadrature_panels(basis, region);
    let k = basis.k;
    let mut m = DVector::zeros(k);
    let mut g = DMatrix::zeros(k, k);
    for panel in &panels {
        let h = panel.length();
        for (i, w) in NC7.iter().enumerate() {
            let t = panel.lo + h * i as f64 / 6.0;
            let phi = basis.eval_point(t)?;
            let wq = w * h;
            m.axpy(wq, &phi, 1.0);
            g.syger(wq, &phi, &phi, 1.0);
        }
    }
    // syger fills the lower triangle only; mirror it.
    for i in 0..k {
        for j in (i + 1)..k {
            g[(i, j)] = g[(j, i)];
        }
    }
    let phi_bar = &m / len;
    let mut q = g / len;
    q.syger(-1.0, &phi_bar, &phi_bar, 1.0);
    for i in 0..k {
        for j in (i + 1)..k {
            q[(i, j)] = q[(j, i)];
        }
    }
    Ok(MomentCache {
        region: region.clone(),
        phi_bar,
        q,
    })
}

/// Split a region into quadrature panels: at B-spline breakpoints, and for
/// Fourier into panels short enough that the 7-point rule resolves the
/// highest frequency.
fn quadrature_panels(basis: &BasisSystem, region: &Region) -> Vec<Interval> {
    let mut panels = Vec::new();
    match basis.kind {
        BasisKind::BSpline => {
            for seg in region.segments() {
                for w in basis.breakpoints.windows(2) {
                    if let Some(p) = seg.intersect(&Interval { lo: w[0], hi: w[1] }) {
                        panels.push(p);
                    }
                }
            }
        }
        BasisKind::Fourier => {
            // Panel length <= period of highest frequency / 4.
            let max_freq = ((basis.k - 1) / 2).max(1) as f64;
            let target = basis.interval.length() / (4.0 * max_freq);
            for seg in region.segments() {
                let n = (seg.length() / target).ceil().max(1.0) as usize;
                let h = seg.length() / n as f64;
                for i in 0..n {
                    panels.push(Interval {
                        lo: seg.lo + i as f64 * h,
                        hi: seg.lo + (i + 1) as f64 * h,
                    });
                }
            }
        }
    }
    panels
}

/// Per-segment monomial coefficients of a B-spline basis.
///
/// Within inter-knot segment `j`, `φ(t)ᵀ = (1, u, u², u³) · L_j` with the
/// local coordinate `u = t - breakpoints[j]` and `L_j` the 4×K block
/// `coeff_blocks[j]`. The local coordinate keeps the Vandermonde systems
/// well conditioned even for narrow segments.
#[derive(Debug, Clone)]
pub struct PiecewisePoly {
    pub breakpoints: Vec<f64>,
    pub coeff_blocks: Vec<DMatrix<f64>>,
}

impl PiecewisePoly {
    /// Index of the segment containing `t` (right-closed at the last segment).
    pub fn segment_index(&self, t: f64) -> usize {
        let n = self.breakpoints.len() - 1;
        match self
            .breakpoints
            .binary_search_by(|b| b.partial_cmp(&t).unwrap())
        {
            Ok(i) => i.min(n - 1),
            Err(i) => i.saturating_sub(1).min(n - 1),
        }
    }

    pub fn eval_point(&self, t: f64) -> DVector<f64> {
        let j = self.segment_index(t);
        let u = t - self.breakpoints[j];
        let powers = DVector::from_vec(vec![1.0, u, u * u, u * u * u]);
        (self.coeff_blocks[j].transpose() * powers).column(0).into()
    }
}

/// Extract the piecewise monomial representation of a B-spline basis
/// (order ≤ 4). Each basis function restricted to an inter-knot segment is a
/// polynomial of degree ≤ 3, recovered by interpolation at four points.
pub fn piecewise_poly(basis: &BasisSystem) -> Result<PiecewisePoly> {
    if basis.kind != BasisKind::BSpline {
        return Err(Error::UnsupportedKind(
            "piecewise_poly requires a bspline basis".into(),
        ));
    }
    let mut blocks = Vec::with_capacity(basis.breakpoints.len() - 1);
    for w in basis.breakpoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        let us: Vec<f64> = (0..4).map(|i| (b - a) * i as f64 / 3.0).collect();
        let ts: Vec<f64> = us.iter().map(|&u| a + u).collect();
        let phi = eval_basis(basis, &ts)?; // 4 x K
        let mut v = DMatrix::zeros(4, 4);
        for (r, &u) in us.iter().enumerate() {
            v[(r, 0)] = 1.0;
            v[(r, 1)] = u;
            v[(r, 2)] = u * u;
            v[(r, 3)] = u * u * u;
        }
        let lu = v.full_piv_lu();
        let block = lu
            .solve(&phi)
            .ok_or_else(|| Error::Numeric("singular Vandermonde in piecewise_poly".into()))?;
        blocks.push(block);
    }
    Ok(PiecewisePoly {
        breakpoints: basis.breakpoints.clone(),
        coeff_blocks: blocks,
    })
}

/// Curvature penalty matrix `P = ∫ φ''(t) φ''(t)ᵀ dt`.
///
/// Exact: per-segment analytic integration of the (linear) second
/// derivatives for splines, closed form for Fourier.
pub fn penalty_matrix(basis: &BasisSystem) -> Result<DMatrix<f64>> {
    let k = basis.k;
    match basis.kind {
        BasisKind::Fourier => {
            let len = basis.interval.length();
            let mut p = DMatrix::zeros(k, k);
            for m in 1..=(k - 1) / 2 {
                let omega = 2.0 * std::f64::consts::PI * m as f64 / len;
                let w4 = omega.powi(4);
                p[(2 * m - 1, 2 * m - 1)] = w4;
                p[(2 * m, 2 * m)] = w4;
            }
            Ok(p)
        }
        BasisKind::BSpline => {
            let pp = piecewise_poly(basis)?;
            let mut p = DMatrix::zeros(k, k);
            for (j, w) in pp.breakpoints.windows(2).enumerate() {
                let (a, b) = (w[0], w[1]);
                let block = &pp.coeff_blocks[j];
                // φ''(a + u) = d0 + d1·u with d0 = 2·L[2,:], d1 = 6·L[3,:]
                let d0 = block.row(2) * 2.0;
                let d1 = block.row(3) * 6.0;
                let h = b - a;
                let i0 = h;
                let i1 = 0.5 * h * h;
                let i2 = h * h * h / 3.0;
                p += d0.transpose() * &d0 * i0
                    + (d0.transpose() * &d1 + d1.transpose() * &d0) * i1
                    + d1.transpose() * &d1 * i2;
            }
            // Symmetrize away rounding asymmetry.
            let pt = p.transpose();
            Ok((p + pt) * 0.5)
        }
    }
}
