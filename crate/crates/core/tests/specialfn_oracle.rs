mod common;

use approx::assert_relative_eq;
use common::ein_oracle;
use smooth_wasserstein::specialfn::{
    ein, ein_asymptotic, ein_continued_fraction, ein_series, kernel, KernelParams,
};

#[test]
fn oracle_reproduces_known_values() {
    assert_relative_eq!(ein_oracle(1.0), 0.796_599_599_297_053_1, max_relative = 1e-15);
    assert_relative_eq!(ein_oracle(-1.0), -1.317_902_151_454_403_9, max_relative = 1e-15);
}

#[test]
fn ein_matches_oracle_on_grid() {
    for i in 0..=400 {
        let z = -50.0 + 0.25 * i as f64;
        let expected = ein_oracle(z);
        let got = ein(z).unwrap();
        if expected == 0.0 {
            assert_eq!(got, 0.0);
        } else {
            assert_relative_eq!(got, expected, max_relative = 1e-12);
        }
    }
}

#[test]
fn branches_agree_on_seam() {
    for i in 0..=100 {
        let x = 25.0 + 0.1 * i as f64;
        assert_relative_eq!(ein_series(-x), ein_asymptotic(-x), max_relative = 1e-9);
        assert_relative_eq!(ein_continued_fraction(x), ein_asymptotic(x), max_relative = 1e-9);
    }
}

#[test]
fn kernel_scaling_identity() {
    let p1 = KernelParams::new(1.0).unwrap();
    for &(s, x, y) in &[
        (0.5, [0.3, -0.2], [1.1, 0.4]),
        (2.0, [1.3, 2.2], [-0.7, 1.9]),
        (3.7, [-4.0, 0.5], [-2.5, 3.0]),
    ] {
        let lhs = kernel(&x, &y, KernelParams::new(s).unwrap()).unwrap();
        let xs: Vec<f64> = x.iter().map(|v| v / s).collect();
        let ys: Vec<f64> = y.iter().map(|v| v / s).collect();
        let rhs = s * s * kernel(&xs, &ys, p1).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-13);
    }
}
