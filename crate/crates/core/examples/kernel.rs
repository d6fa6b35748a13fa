//! The entire exponential integral and the smooth Sobolev kernel built on it.
//!
//! Run with `cargo run --example kernel`.

use smooth_wasserstein::{ein, gram, kernel, KernelParams, Result};

fn main() -> Result<()> {
    for z in [-30.0, -1.0, 0.5, 5.0, 40.0] {
        println!("Ein({z:>5}) = {:.15}", ein(z)?);
    }

    let params = KernelParams::new(0.8)?;
    let x = [0.3, -1.2];
    let y = [1.0, 0.4];
    println!("kappa(x, y) = {:.12}", kernel(&x, &y, params)?);

    // Gram matrices are symmetric positive semidefinite; kappa(0, y) = 0
    let pts = vec![vec![0.0, 0.0], vec![1.0, 0.5], vec![-0.7, 2.0]];
    let g = gram(&pts, params)?;
    for i in 0..g.rows() {
        println!("{:?}", g.row(i).iter().map(|v| format!("{v:8.4}")).collect::<Vec<_>>());
    }
    Ok(())
}
