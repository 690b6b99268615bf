//! Continuous-time multivariate analysis (CTMVA).
//!
//! Curves are represented by a basis expansion `x(t) = Cᵀφ(t)` over a shared
//! basis system, and classical multivariate statistics (mean, covariance,
//! correlation, PCA, LDA, CCA, k-means, silhouette) are computed as exact
//! integrals over the time interval rather than sums over discrete
//! observations. Every continuous-time formula reduces to expressions in the
//! basis moment quantities `φ̄_S` and `Q_S` over a region `S`, which are
//! computed exactly for cubic B-splines and in closed form for Fourier bases.
//!
//! Modules:
//! - [`basis`]: basis systems, regions, moment quantities, piecewise polynomials
//! - [`smoothing`]: penalized least-squares smoothing of irregular series
//! - [`ctstats`]: CT mean/covariance/correlation, centering, detrending
//! - [`spectral`]: CT PCA, Fisher LDA, CCA
//! - [`kmeans`]: CT k-means with exact transition points, CT silhouette
//! - [`mgp`]: multivariate Gaussian process sampling and the correlation
//!   recovery experiment

pub mod basis;
pub mod ctstats;
pub mod kmeans;
pub mod mgp;
pub mod smoothing;
pub mod spectral;

use thiserror::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("fourier basis dimension must be odd, got {0}")]
    Parity(usize),
    #[error("unsupported basis kind: {0}")]
    UnsupportedKind(String),
    #[error("rank error: {0}")]
    Rank(String),
    #[error("partition error: {0}")]
    Partition(String),
    #[error("degenerate variance for curve '{0}'")]
    DegenerateVariance(String),
    #[error("degenerate centers: {0}")]
    DegenerateCenters(String),
    #[error("covariance error: {0}")]
    Covariance(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("series '{name}': {source}")]
    Series {
        name: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Map over items, in parallel when the `parallel` feature is enabled.
///
/// Results preserve input order, so callers see identical output regardless
/// of scheduling.
pub(crate) fn maybe_par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}

/// Indexed variant of [`maybe_par_map`], for deterministic per-item RNG streams.
pub(crate) fn maybe_par_map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    maybe_par_map((0..n).collect(), f)
}
