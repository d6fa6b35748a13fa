mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;
use smooth_wasserstein::mmd::{d2_squared, kernel_expectations, EstimatorKind, MmdReference};
use smooth_wasserstein::{gram, kernel, DistributionSpec, EmpiricalMeasure, KernelParams, SeedSpec};

fn params(s: f64) -> KernelParams {
    KernelParams::new(s).unwrap()
}

/// Neumaier-compensated sum.
fn compensated(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

fn oracle_kernel(x: f64, y: f64, sigma: f64) -> f64 {
    -sigma * sigma * common::ein_oracle(-(x * y) / (sigma * sigma))
}

fn oracle_d2_squared(a: &EmpiricalMeasure, b: &EmpiricalMeasure, sigma: f64) -> f64 {
    let mut terms = Vec::new();
    for (x, wx) in a.coords().iter().zip(a.weights()) {
        for (y, wy) in a.coords().iter().zip(a.weights()) {
            terms.push(wx * wy * oracle_kernel(*x, *y, sigma));
        }
        for (y, wy) in b.coords().iter().zip(b.weights()) {
            terms.push(-2.0 * wx * wy * oracle_kernel(*x, *y, sigma));
        }
    }
    for (x, wx) in b.coords().iter().zip(b.weights()) {
        for (y, wy) in b.coords().iter().zip(b.weights()) {
            terms.push(wx * wy * oracle_kernel(*x, *y, sigma));
        }
    }
    compensated(terms)
}

#[test]
fn v_statistic_matches_extended_precision_triple_loop() {
    let mut rng = SeedSpec::from(11).rng();
    for _ in 0..40 {
        let a: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
        let b: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
        let a = EmpiricalMeasure::uniform(a, 1).unwrap();
        let b = EmpiricalMeasure::uniform(b, 1).unwrap();
        let got = d2_squared(&a, &b, params(1.0), EstimatorKind::VStatistic).unwrap();
        let want = oracle_d2_squared(&a, &b, 1.0);
        assert!((got.d2_squared - want).abs() <= 1e-12, "{} vs {want}", got.d2_squared);
    }
}

#[test]
fn v_statistic_is_the_signed_quadratic_form() {
    let a = DistributionSpec::gaussian(vec![0.0, 0.0], 1.0).sample(6, SeedSpec::from(12)).unwrap();
    let b = DistributionSpec::gaussian(vec![0.5, 0.0], 1.0).sample(4, SeedSpec::from(13)).unwrap();
    let pooled: Vec<Vec<f64>> = a.points().chain(b.points()).map(|p| p.to_vec()).collect();
    let g = gram(&pooled, params(1.3)).unwrap();
    let w: Vec<f64> = a.weights().iter().copied().chain(b.weights().iter().map(|x| -x)).collect();
    let got = d2_squared(&a, &b, params(1.3), EstimatorKind::VStatistic).unwrap();
    assert!((got.d2_squared - g.quadratic_form(&w)).abs() < 1e-13);
}

#[test]
fn gram_matrices_are_positive_semidefinite() {
    for d in [1usize, 3, 5] {
        for sigma in [0.5, 1.0, 2.0] {
            let mut rng = SeedSpec::new(14, d as u64).rng();
            let pts: Vec<Vec<f64>> = (0..50)
                .map(|_| (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
                .collect();
            let g = gram(&pts, params(sigma)).unwrap();
            let m = DMatrix::from_row_slice(50, 50, g.as_slice());
            let min = m.symmetric_eigenvalues().min();
            assert!(min >= -1e-8 * g.trace(), "d={d} sigma={sigma}: {min}");
        }
    }
}

#[test]
fn large_sigma_recovers_the_mean_difference() {
    let a = DistributionSpec::uniform_cube(1, 1.0).sample(20_000, SeedSpec::from(15)).unwrap();
    let b = DistributionSpec::uniform_box(1, -0.5, 1.5).sample(20_000, SeedSpec::from(16)).unwrap();
    let ra = MmdReference::new(a, params(50.0)).unwrap();
    let rb = MmdReference::new(b, params(50.0)).unwrap();
    let d2 = ra.d2_squared_between(&rb).unwrap().d2;
    assert!((d2 - 0.5).abs() <= 0.05 * 0.5, "{d2}");
}

#[test]
fn identity_matches_simulation_against_large_reference() {
    let spec = DistributionSpec::uniform_cube(1, 1.0);
    let sigma = 1.0;
    let n = 100;
    let trials = 400;
    let reference = spec.sample(100_000, SeedSpec::new(17, 0)).unwrap();
    let reference = MmdReference::new(reference, params(sigma)).unwrap();
    let vals: Vec<f64> = (0..trials)
        .map(|t| {
            let s = spec.sample(n, SeedSpec::new(17, 1 + t)).unwrap();
            reference.d2_squared(&s).unwrap().d2_squared
        })
        .collect();
    let mean = vals.iter().sum::<f64>() / trials as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials as f64 - 1.0);
    let sim_se = (var / trials as f64).sqrt();
    let e = kernel_expectations(&spec, params(sigma), 200_000, SeedSpec::from(18)).unwrap();
    let combined = (sim_se.powi(2) + e.expected_d2_squared_se(n).powi(2)).sqrt();
    let gap = (mean - e.expected_d2_squared(n)).abs();
    assert!(gap <= 3.0 * combined, "gap {gap} vs 3·se {}", 3.0 * combined);
}

#[test]
fn two_sample_estimate_converges_at_root_n() {
    let sigma = params(1.0);
    let mu = DistributionSpec::uniform_cube(1, 1.0);
    let nu = DistributionSpec::uniform_box(1, -0.5, 1.5);
    let ref_a = MmdReference::new(mu.sample(20_000, SeedSpec::from(19)).unwrap(), sigma).unwrap();
    let ref_b = MmdReference::new(nu.sample(20_000, SeedSpec::from(20)).unwrap(), sigma).unwrap();
    let target = ref_a.d2_squared_between(&ref_b).unwrap().d2;
    let grid = [16usize, 32, 64, 128, 256, 512];
    let trials = 30u64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &n in &grid {
        let mean_err: f64 = (0..trials)
            .map(|t| {
                let a = mu.sample(n, SeedSpec::new(21, t * 1000 + n as u64)).unwrap();
                let b = nu.sample(n, SeedSpec::new(22, t * 1000 + n as u64)).unwrap();
                let d = d2_squared(&a, &b, sigma, EstimatorKind::VStatistic).unwrap().d2;
                (d - target).abs()
            })
            .sum::<f64>()
            / trials as f64;
        xs.push((n as f64).ln());
        ys.push(mean_err.ln());
    }
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope + 0.5).abs() <= 0.1, "slope {slope}");
}

fn small_measure(max_len: usize) -> impl Strategy<Value = EmpiricalMeasure> {
    prop::collection::vec((-1.5f64..1.5, -1.5f64..1.5, 0.05f64..1.0), 1..max_len).prop_map(|rows| {
        let total: f64 = rows.iter().map(|r| r.2).sum();
        let pts: Vec<f64> = rows.iter().flat_map(|r| [r.0, r.1]).collect();
        let w: Vec<f64> = rows.iter().map(|r| r.2 / total).collect();
        let fix = 1.0 - w.iter().sum::<f64>();
        let mut w = w;
        w[0] += fix;
        EmpiricalMeasure::new(pts, 2, w).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_exactly_symmetric(x in prop::collection::vec(-3.0f64..3.0, 3), y in prop::collection::vec(-3.0f64..3.0, 3), s in 0.3f64..3.0) {
        prop_assert_eq!(kernel(&x, &y, params(s)).unwrap(), kernel(&y, &x, params(s)).unwrap());
    }

    #[test]
    fn kernel_diagonal_grows_along_a_ray(t in 0.0f64..5.0, dt in 1e-3f64..1.0, s in 0.5f64..2.0) {
        let k0 = kernel(&[t], &[t], params(s)).unwrap();
        let k1 = kernel(&[t + dt], &[t + dt], params(s)).unwrap();
        prop_assert!(k1 > k0);
    }

    #[test]
    fn v_statistic_is_nonnegative(a in small_measure(8), b in small_measure(8), s in 0.4f64..3.0) {
        let r = d2_squared(&a, &b, params(s), EstimatorKind::VStatistic).unwrap();
        prop_assert!(r.d2_squared >= -1e-10);
        prop_assert_eq!(r.d2, r.d2_squared.max(0.0).sqrt());
    }

    #[test]
    fn d2_triangle_inequality(a in small_measure(6), b in small_measure(6), c in small_measure(6), s in 0.4f64..3.0) {
        let p = params(s);
        let ab = d2_squared(&a, &b, p, EstimatorKind::VStatistic).unwrap().d2;
        let bc = d2_squared(&b, &c, p, EstimatorKind::VStatistic).unwrap().d2;
        let ac = d2_squared(&a, &c, p, EstimatorKind::VStatistic).unwrap().d2;
        prop_assert!(ac <= ab + bc + 1e-9);
    }
}
