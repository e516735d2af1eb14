//! Matrix exponential, Riccati solver, eigenvalues and RNG against independent oracles.

use gridstorm::numerics::{
    dare_residual, eigenvalues, mat_exp, rng_stream, solve_dare, spectral_radius, Matrix, NumericsError,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

fn random_matrix(n: usize, m: usize, scale: f64, seed: u64) -> Matrix {
    let mut rng = rng_stream(seed, 11);
    Matrix::new(n, m, (0..n * m).map(|_| scale * rng.normal()).collect()).unwrap()
}

#[test]
fn exp_inverse_identity_on_random_matrices() {
    for seed in 0..50 {
        let n = 2 + (seed as usize % 5);
        let a = random_matrix(n, n, 1.5, seed);
        let prod = mat_exp(&a).unwrap().mul(&mat_exp(&a.scale(-1.0)).unwrap());
        let err = prod.max_abs_diff(&Matrix::identity(n));
        assert!(err <= 1e-8, "seed {seed}: ‖e^A e^-A − I‖ = {err:e}");
    }
}

#[test]
fn exp_matches_nalgebra() {
    for seed in 0..30 {
        let n = 1 + (seed as usize % 6);
        let a = random_matrix(n, n, 2.0, 100 + seed);
        let ours = to_na(&mat_exp(&a).unwrap());
        let theirs = to_na(&a).exp();
        let err = (&ours - &theirs).amax() / theirs.amax().max(1.0);
        assert!(err < 1e-11, "seed {seed}: relative error {err:e}");
    }
}

#[test]
fn exp_rotation_generator_closed_form() {
    // exp([[0, −θ], [θ, 0]]) = [[cos θ, −sin θ], [sin θ, cos θ]]
    for theta in [0.1, 1.0, 3.0, 10.0] {
        let e = mat_exp(&Matrix::from_rows(&[&[0.0, -theta], &[theta, 0.0]])).unwrap();
        let want = Matrix::from_rows(&[&[theta.cos(), -theta.sin()], &[theta.sin(), theta.cos()]]);
        assert!(e.max_abs_diff(&want) < 1e-12, "θ = {theta}");
    }
}

#[test]
fn exp_rejects_non_square() {
    assert!(matches!(
        mat_exp(&Matrix::zeros(2, 3)),
        Err(NumericsError::NotSquare(_))
    ));
}

/// Random stabilizable pair: `A` with entries N(0, 0.5²), `G` with entries N(0, 1).
fn random_system(seed: u64) -> (Matrix, Matrix, Matrix, Matrix) {
    let n = 2 + (seed as usize % 3);
    let m = 1 + (seed as usize % 2);
    let a = random_matrix(n, n, 0.5, 1000 + seed);
    let g = random_matrix(n, m, 1.0, 2000 + seed);
    (a, g, Matrix::identity(n), Matrix::identity(m))
}

#[test]
fn dare_residual_small_on_random_systems() {
    for seed in 0..20 {
        let (a, g, q, r) = random_system(seed);
        let p = solve_dare(&a, &g, &q, &r).unwrap();
        let res = dare_residual(&a, &g, &q, &r, &p).unwrap();
        assert!(res <= 1e-8, "seed {seed}: residual {res:e}");
        // Stabilizing: A − G K with K = (R + GᵀPG)⁻¹GᵀPA.
        let gt = g.transpose();
        let k = r.add(&gt.mul(&p).mul(&g)).solve(&gt.mul(&p).mul(&a)).unwrap();
        let closed = a.sub(&g.mul(&k));
        assert!(spectral_radius(&closed).unwrap() < 1.0, "seed {seed}");
        // Symmetric positive semidefinite.
        assert!(p.max_abs_diff(&p.transpose()) < 1e-12);
        assert!(to_na(&p).symmetric_eigen().eigenvalues.min() > -1e-9);
    }
}

#[test]
fn dare_scalar_quadratic_root() {
    // Scalar: p = a²p − a²g²p²/(r + g²p) + q ⇔ g²p² + (r − a²r − q g²)p − q r = 0.
    for (a, g, q, r) in [
        (0.5, 1.0, 1.0, 1.0),
        (1.2, 0.7, 2.0, 0.5),
        (0.0, 1.0, 1.0, 1.0),
        (3.0, 2.0, 0.1, 4.0),
    ] {
        let s = |v: f64| Matrix::from_rows(&[&[v]]);
        let p = solve_dare(&s(a), &s(g), &s(q), &s(r)).unwrap()[(0, 0)];
        let (qa, qb, qc) = (g * g, r - a * a * r - q * g * g, -q * r);
        let root = (-qb + (qb * qb - 4.0 * qa * qc).sqrt()) / (2.0 * qa);
        assert!((p - root).abs() <= 1e-9 * root.max(1.0), "a={a}: {p} vs {root}");
    }
}

#[test]
fn eigenvalues_match_nalgebra() {
    for seed in 0..40 {
        let n = 1 + (seed as usize % 6);
        let a = random_matrix(n, n, 1.0, 3000 + seed);
        let mut ours: Vec<(f64, f64)> = eigenvalues(&a).unwrap().iter().map(|z| (z.re, z.im)).collect();
        let mut theirs: Vec<(f64, f64)> = to_na(&a).complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect();
        let key = |v: &(f64, f64)| ((v.0 * 1e6).round() as i64, (v.1 * 1e6).round() as i64);
        ours.sort_by_key(key);
        theirs.sort_by_key(key);
        for (o, t) in ours.iter().zip(&theirs) {
            assert!(
                (o.0 - t.0).abs() < 1e-7 && (o.1 - t.1).abs() < 1e-7,
                "seed {seed}: {ours:?} vs {theirs:?}"
            );
        }
        let rho_na = theirs.iter().map(|(re, im)| re.hypot(*im)).fold(0.0, f64::max);
        assert!((spectral_radius(&a).unwrap() - rho_na).abs() < 1e-7);
    }
}

#[test]
fn symmetric_eigenvalues_match_nalgebra() {
    for seed in 0..20 {
        let b = random_matrix(4, 4, 1.0, 4000 + seed);
        let s = b.add(&b.transpose());
        let mut ours: Vec<f64> = eigenvalues(&s).unwrap().iter().map(|z| z.re).collect();
        let mut theirs: Vec<f64> = to_na(&s).symmetric_eigen().eigenvalues.iter().copied().collect();
        ours.sort_by(f64::total_cmp);
        theirs.sort_by(f64::total_cmp);
        for (o, t) in ours.iter().zip(&theirs) {
            assert!((o - t).abs() < 1e-8, "seed {seed}");
        }
    }
}

#[test]
fn normal_draws_have_unit_moments() {
    let mut rng = rng_stream(5, 0);
    let n = 200_000;
    let xs: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    // 5σ bounds: σ(mean) = 1/√n, σ(var) ≈ √(2/n).
    assert!(mean.abs() < 5.0 / (n as f64).sqrt());
    assert!((var - 1.0).abs() < 5.0 * (2.0 / n as f64).sqrt());
}

#[test]
fn streams_are_reproducible_and_distinct() {
    let draw = |seed, stream| {
        let mut r = rng_stream(seed, stream);
        (0..64).map(|_| r.next_u64()).collect::<Vec<_>>()
    };
    assert_eq!(draw(1, 2), draw(1, 2));
    assert_ne!(draw(1, 2), draw(1, 3));
    assert_ne!(draw(1, 2), draw(2, 2));
}

proptest! {
    #[test]
    fn exp_of_sum_of_commuting_diagonals(a in proptest::collection::vec(-3.0f64..3.0, 1..6), t in -2.0f64..2.0) {
        // exp(D₁ + D₂) = exp(D₁)·exp(D₂) for commuting (diagonal) D₁ = D, D₂ = tD.
        let d = Matrix::diag(&a);
        let lhs = mat_exp(&d.scale(1.0 + t)).unwrap();
        let rhs = mat_exp(&d).unwrap().mul(&mat_exp(&d.scale(t)).unwrap());
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-10 * lhs.max_abs().max(1.0));
    }

    #[test]
    fn inverse_round_trip(seed in 0u64..10_000, n in 1usize..6) {
        let a = random_matrix(n, n, 1.0, seed).add(&Matrix::identity(n).scale(n as f64 * 2.0));
        let inv = a.inverse().unwrap();
        prop_assert!(a.mul(&inv).max_abs_diff(&Matrix::identity(n)) < 1e-10);
    }

    #[test]
    fn psd_factor_reconstructs_gram(seed in 0u64..10_000, n in 1usize..5, rank in 1usize..5) {
        let b = random_matrix(n, rank, 1.0, seed);
        let m = b.mul(&b.transpose());
        let l = m.psd_factor().unwrap();
        prop_assert!(l.mul(&l.transpose()).max_abs_diff(&m) <= 1e-9 * m.max_abs().max(1.0));
    }

    #[test]
    fn uniform_in_stays_in_interval(seed in any::<u64>(), lo in -10.0f64..10.0, w in 0.0f64..5.0) {
        let mut rng = rng_stream(seed, 0);
        for _ in 0..100 {
            let x = rng.uniform_in(lo, lo + w);
            prop_assert!(x >= lo && x <= lo + w);
        }
    }
}
