use num_complex::Complex64;

use super::{Matrix, NumericsError};

/// Monic characteristic polynomial coefficients `[1, c₁, …, cₙ]` of `det(λI − M)`,
/// highest degree first, by the Faddeev-LeVerrier recursion.
pub fn char_poly(m: &Matrix) -> Result<Vec<f64>, NumericsError> {
    if !m.is_square() {
        return Err(NumericsError::NotSquare(m.shape()));
    }
    let n = m.rows();
    let id = Matrix::identity(n);
    let mut coeffs = vec![1.0];
    let mut mk = Matrix::zeros(n, n);
    let mut c = 1.0;
    for k in 1..=n {
        mk = m.mul(&mk.add(&id.scale(c)));
        c = -mk.trace() / k as f64;
        coeffs.push(c);
    }
    Ok(coeffs)
}

fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All complex roots of a polynomial given highest degree first, by Aberth-Ehrlich
/// iteration.
pub fn poly_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let lead = coeffs.iter().position(|c| *c != 0.0).unwrap_or(coeffs.len());
    let monic: Vec<f64> = coeffs[lead..].iter().map(|c| c / coeffs[lead]).collect();
    let n = monic.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let bound = 1.0 + monic[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(0.5 * bound, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, dp) = horner(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z[i] - z[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let denom = Complex64::new(1.0, 0.0) - ratio * repulsion;
            let delta = if denom.norm() == 0.0 { ratio } else { ratio / denom };
            if delta.is_finite() {
                z[i] -= delta;
                moved = moved.max(delta.norm() / z[i].norm().max(1.0));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// Eigenvalues as roots of the characteristic polynomial.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<Complex64>, NumericsError> {
    Ok(poly_roots(&char_poly(m)?))
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &Matrix) -> Result<f64, NumericsError> {
    Ok(eigenvalues(m)?.iter().fold(0.0, |r, z| r.max(z.norm())))
}
