use super::ModelError;
use crate::numerics::{solve_dare, spectral_radius, Matrix};

/// Steady-state Kalman predictor gain `L = A·P·Cᵀ·(C·P·Cᵀ + R_n)⁻¹`.
///
/// `P` solves the filter-form Riccati equation, obtained from the control form
/// with `(Aᵀ, Cᵀ)`. The resulting `A − L·C` is checked to be Schur stable.
pub fn design_kalman_gain(a: &Matrix, c: &Matrix, q_n: &Matrix, r_n: &Matrix) -> Result<Matrix, ModelError> {
    let p = solve_dare(&a.transpose(), &c.transpose(), q_n, r_n)?;
    let ct = c.transpose();
    let innovation = c.mul(&p).mul(&ct).add(r_n);
    let l = innovation
        .transpose()
        .solve(&a.mul(&p).mul(&ct).transpose())?
        .transpose();
    let radius = spectral_radius(&a.sub(&l.mul(c)))?;
    if radius >= 1.0 {
        return Err(ModelError::UnstableEstimator { radius });
    }
    Ok(l)
}

/// Discrete LQR gain `K = (R_c + BᵀPB)⁻¹ BᵀPA`, minimizing `Σ xᵀQ_c x + uᵀR_c u`
/// under `u = −K·x`.
pub fn design_lqr_gain(a: &Matrix, b: &Matrix, q_c: &Matrix, r_c: &Matrix) -> Result<Matrix, ModelError> {
    let p = solve_dare(a, b, q_c, r_c)?;
    let bt = b.transpose();
    Ok(r_c.add(&bt.mul(&p).mul(b)).solve(&bt.mul(&p).mul(a))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: f64) -> Matrix {
        Matrix::from_rows(&[&[v]])
    }

    #[test]
    fn zero_state_cost_gives_zero_gain() {
        let k = design_lqr_gain(&s(0.5), &s(1.0), &s(0.0), &s(1.0)).unwrap();
        assert_eq!(k[(0, 0)], 0.0);
    }

    #[test]
    fn scalar_unstable_plant_is_stabilized() {
        let k = design_lqr_gain(&s(1.1), &s(1.0), &s(1.0), &s(1.0)).unwrap();
        assert!((1.1 - k[(0, 0)]).abs() < 1.0);
    }

    #[test]
    fn kalman_gain_stabilizes_estimator() {
        let l = design_kalman_gain(&s(0.9), &s(1.0), &s(0.01), &s(0.1)).unwrap();
        assert!((0.9 - l[(0, 0)]).abs() < 1.0);
    }
}
