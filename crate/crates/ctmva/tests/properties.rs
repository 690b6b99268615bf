//! Randomized invariants over the moment, statistics, and clustering layers.

use ctmva::basis::{
    constant_rep_vector, make_basis, region_moments, BasisKind, Interval, Region,
};
use ctmva::ctstats::{center, ct_cor, ct_mean};
use ctmva::kmeans::assign_regions;
use ctmva::smoothing::FDataset;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn interval_strategy() -> impl Strategy<Value = (f64, f64)> {
    (-50.0..50.0f64, 0.5..80.0f64).prop_map(|(lo, len)| (lo, lo + len))
}

fn dataset(lo: f64, hi: f64, k: usize, p: usize, raw: &[f64]) -> FDataset {
    let basis = make_basis(BasisKind::BSpline, Interval::new(lo, hi).unwrap(), k, 4).unwrap();
    let coef = DMatrix::from_fn(k, p, |i, j| raw[(i * p + j) % raw.len()]);
    let names = (0..p).map(|i| format!("v{i}")).collect();
    FDataset::new(basis, coef, names).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn moments_annihilate_constants(
        (lo, hi) in interval_strategy(),
        k in 6usize..20,
        a in 0.05..0.45f64,
        b in 0.55..0.95f64,
    ) {
        let basis = make_basis(BasisKind::BSpline, Interval::new(lo, hi).unwrap(), k, 4).unwrap();
        let len = hi - lo;
        let region = Region::new(vec![
            Interval::new(lo + 0.0 * len, lo + a * len).unwrap(),
            Interval::new(lo + b * len, hi).unwrap(),
        ]).unwrap();
        let mc = region_moments(&basis, &region).unwrap();
        let w = constant_rep_vector(&basis);
        // the constant function has region mean 1 and zero centered energy
        prop_assert!((mc.phi_bar().dot(&w) - 1.0).abs() < 1e-10);
        prop_assert!((mc.q() * &w).amax() < 1e-10);
        // Q is symmetric
        prop_assert!((mc.q() - mc.q().transpose()).amax() < 1e-12);
    }

    #[test]
    fn correlation_bounds_and_unit_diagonal(
        (lo, hi) in interval_strategy(),
        k in 6usize..14,
        p in 2usize..5,
        raw in prop::collection::vec(-3.0..3.0f64, 100),
    ) {
        let ds = dataset(lo, hi, k, p, &raw);
        match ct_cor(&ds) {
            Ok(r) => {
                for i in 0..p {
                    prop_assert!((r[(i, i)] - 1.0).abs() < 1e-12);
                    for j in 0..p {
                        prop_assert!(r[(i, j)].abs() <= 1.0 + 1e-9);
                        prop_assert!((r[(i, j)] - r[(j, i)]).abs() < 1e-14);
                    }
                }
            }
            // degenerate variance is a legitimate outcome for adversarial coefs
            Err(ctmva::Error::DegenerateVariance(_)) => {}
            Err(e) => return Err(TestCaseError::fail(format!("unexpected error: {e}"))),
        }
    }

    #[test]
    fn centering_zeroes_the_ct_mean(
        (lo, hi) in interval_strategy(),
        k in 6usize..14,
        p in 1usize..5,
        raw in prop::collection::vec(-3.0..3.0f64, 100),
    ) {
        let ds = dataset(lo, hi, k, p, &raw);
        let centered = center(&ds).unwrap();
        let m = ct_mean(&centered).unwrap();
        let scale = ds.coef().amax().max(1.0);
        prop_assert!(m.amax() < 1e-11 * scale);
    }

    #[test]
    fn assignment_partitions_the_interval(
        (lo, hi) in interval_strategy(),
        k in 8usize..14,
        raw in prop::collection::vec(-2.0..2.0f64, 60),
        c1 in -2.0..2.0f64,
        delta in 0.2..2.0f64,
    ) {
        let ds = dataset(lo, hi, k, 1, &raw);
        let centers = vec![
            DVector::from_vec(vec![c1]),
            DVector::from_vec(vec![c1 + delta]),
        ];
        let partition = assign_regions(&ds, &centers).unwrap();
        let total: f64 = partition.parts().iter().map(|p| p.total_length()).sum();
        prop_assert!((total - (hi - lo)).abs() < 1e-9 * (hi - lo));
        // parts never overlap: every probe point belongs to exactly one part
        for q in 0..200 {
            let t = lo + (hi - lo) * q as f64 / 199.0;
            let hits = partition
                .parts()
                .iter()
                .filter(|p| p.contains(t))
                .count();
            prop_assert!(hits >= 1);
        }
    }
}
