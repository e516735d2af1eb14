use super::{Matrix, NumericsError};

/// Iteration cap for the Riccati fixed-point recursion.
pub const DARE_MAX_ITERATIONS: usize = 100_000;
/// Successive-iterate tolerance (relative to `max(1, ‖P‖∞)`).
pub const DARE_TOLERANCE: f64 = 1e-10;

/// One application of the discrete algebraic Riccati map
/// `f(P) = AᵀPA − AᵀPG (R + GᵀPG)⁻¹ GᵀPA + Q`.
pub fn riccati_map(a: &Matrix, g: &Matrix, q: &Matrix, r: &Matrix, p: &Matrix) -> Result<Matrix, NumericsError> {
    let at = a.transpose();
    let gt = g.transpose();
    let pa = p.matmul(a)?;
    let pg = p.matmul(g)?;
    let s = r.try_add(&gt.matmul(&pg)?)?;
    let gain = s.solve(&gt.matmul(&pa)?)?;
    let next = at.matmul(&pa)?.try_sub(&at.matmul(&pg)?.matmul(&gain)?)?.try_add(q)?;
    Ok(next.symmetrize())
}

/// Stabilizing solution of the discrete algebraic Riccati equation (control form).
///
/// Iterates `P ← f(P)` from `P₀ = Q` until successive iterates agree. For the
/// estimator form pass `(Aᵀ, Cᵀ)` as `(A, G)`.
pub fn solve_dare(a: &Matrix, g: &Matrix, q: &Matrix, r: &Matrix) -> Result<Matrix, NumericsError> {
    let n = a.rows();
    if !a.is_square() {
        return Err(NumericsError::NotSquare(a.shape()));
    }
    if g.rows() != n {
        return Err(NumericsError::DimensionMismatch {
            op: "solve_dare(G)",
            left: a.shape(),
            right: g.shape(),
        });
    }
    if q.shape() != (n, n) {
        return Err(NumericsError::DimensionMismatch {
            op: "solve_dare(Q)",
            left: a.shape(),
            right: q.shape(),
        });
    }
    if r.shape() != (g.cols(), g.cols()) {
        return Err(NumericsError::DimensionMismatch {
            op: "solve_dare(R)",
            left: g.shape(),
            right: r.shape(),
        });
    }
    if !(a.is_finite() && g.is_finite() && q.is_finite() && r.is_finite()) {
        return Err(NumericsError::NonFinite("solve_dare"));
    }
    let mut p = q.symmetrize();
    for iteration in 0..DARE_MAX_ITERATIONS {
        let next = match riccati_map(a, g, q, r, &p) {
            Ok(next) if next.is_finite() => next,
            _ => return Err(NumericsError::RiccatiDivergence { iterations: iteration }),
        };
        let step = next.max_abs_diff(&p);
        let scale = next.max_abs().max(1.0);
        if scale > 1e150 {
            return Err(NumericsError::RiccatiDivergence { iterations: iteration });
        }
        p = next;
        if step <= DARE_TOLERANCE * scale {
            return Ok(p);
        }
    }
    Err(NumericsError::RiccatiDivergence {
        iterations: DARE_MAX_ITERATIONS,
    })
}

/// `‖P − f(P)‖∞` (max-abs entry) for a candidate solution.
pub fn dare_residual(a: &Matrix, g: &Matrix, q: &Matrix, r: &Matrix, p: &Matrix) -> Result<f64, NumericsError> {
    Ok(riccati_map(a, g, q, r, p)?.max_abs_diff(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: f64) -> Matrix {
        Matrix::from_rows(&[&[v]])
    }

    #[test]
    fn zero_dynamics_returns_q() {
        let p = solve_dare(&s(0.0), &s(1.0), &s(1.0), &s(1.0)).unwrap();
        assert_eq!(p[(0, 0)], 1.0);
    }

    #[test]
    fn scalar_matches_closed_form() {
        // p = a²p − a²p²/(r+p) + q with a=2, q=1, r=1 → p² − 4p − 1 = 0.
        let p = solve_dare(&s(2.0), &s(1.0), &s(1.0), &s(1.0)).unwrap();
        let expect = 2.0 + 5.0f64.sqrt();
        assert!((p[(0, 0)] - expect).abs() < 1e-9);
    }

    #[test]
    fn unstabilizable_diverges() {
        let err = solve_dare(&s(1.5), &s(0.0), &s(1.0), &s(1.0)).unwrap_err();
        assert!(matches!(err, NumericsError::RiccatiDivergence { .. }));
    }

    #[test]
    fn dimension_checks() {
        let a = Matrix::identity(2);
        assert!(solve_dare(&a, &Matrix::zeros(3, 1), &a, &s(1.0)).is_err());
        assert!(solve_dare(&a, &Matrix::zeros(2, 1), &s(1.0), &s(1.0)).is_err());
    }
}
